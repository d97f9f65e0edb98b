"""A Markov chain that is uniform on short blocks but tilted on long ones.

With memory k over digits 0..b-1, the transition row out of the all-zero
state moves mass 1/(bn) from the continuation digit to the escape digits;
the reversed word gets the opposite tilt.  The stationary law stays exactly
uniform, so every block of length <= k has measure b^-L while longer blocks
deviate by a factor 1 +- 1/n.
"""

import math
from fractions import Fraction

from cantorlab.fractal import (
    MarkovSpec,
    cylinder_measure,
    entropy,
    markov_matrix,
    sample_markov,
    stationary_uniform_check,
)
from cantorlab.stats import count_blocks

spec = MarkovSpec(2, 2, 10)
P = markov_matrix(spec)
print("tilted rows (b=2, k=2, n=10):")
for state in ((0, 0), (1, 0)):
    row = "  ".join(
        "P(%d)=%s" % (nxt[-1], p) for nxt, p in sorted(P[state].items())
    )
    print("  from %s:  %s" % (state, row))
print("stationary law uniform:", stationary_uniform_check(spec))

print()
print("cylinder measures:")
for word in ((0,), (0, 0), (0, 0, 0), (1, 1, 1)):
    mu = cylinder_measure(spec, word)
    flat = Fraction(1, spec.b ** len(word))
    tag = "uniform" if mu == flat else "tilted (x %s)" % (mu / flat)
    print("  mu%s = %-8s %s" % (word, mu, tag))

h = entropy(spec)
print()
print("entropy rate: %.12f nats (log 2 = %.12f)" % (float(h.value), math.log(2)))

xs = sample_markov(spec, 10**5, "demo")
counts = count_blocks(iter(xs), [(0, 0, 0)], [len(xs)])[len(xs)]
mu = float(cylinder_measure(spec, (0, 0, 0)))
occ = len(xs) - 2
print()
print("sampled 000 frequency: %.5f   expected %.5f   (%d steps)"
      % (counts[(0, 0, 0)] / occ, mu, len(xs)))
