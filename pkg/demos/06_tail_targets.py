"""Digit tails chasing a prescribed target sequence.

The grouped build samples each digit from a window around q_n * x_n, so
the value of the remaining tail at position n lands within delta of x_n
for all but a vanishing share of positions.  Van der Corput points make a
convenient equidistributed target; their star discrepancy is computed
exactly as a fraction.
"""

from fractions import Fraction

from cantorlab.pipeline import composition_sequence, group_build, tail_distance_report
from cantorlab.stats import star_discrepancy, van_der_corput

pts = van_der_corput(1000)
d = star_discrepancy(pts)
print("star discrepancy of 1000 van der Corput points: %s = %.6f" % (d, float(d)))

horizon = 2000
build = group_build(horizon, "demo")
targets = van_der_corput(horizon)
rows = tail_distance_report(
    build.stream, lambda n: targets[n - 1], Fraction(1, 20), horizon, [500, 1000, 2000]
)
print()
print("positions whose tail misses its target by >= 1/20:")
for r in rows:
    print("  n=%-6d exceedances %-4d density %.4f" % (r["checkpoint"], r["exceedances"], r["density"]))

# the composed base holds q = 6 across a block of length 3^720 * 7^4320
# before stepping to 7, so the step positions only exist as big integers
comp = composition_sequence()
L6 = 3**720 * 7**4320
print()
print("composed base, stage values:")
for label, n in (("1", 1), ("10^9", 10**9), ("L6", L6), ("L6+1", L6 + 1)):
    print("  q at n=%-5s %d" % (label + ":", comp.value(n)))
