"""Window coefficients and their length-k product sums.

A window for (t, eps, S) holds t coefficients: c_1 = t(1+eps)^(1-ind(1))
and c_i = (1+eps)^(ind(i-1)-ind(i)) after that, where ind is the indicator
of S.  Summing all length-k consecutive products across the window gives
the quantity the staged digit schedules are built to hit: close to 2t when
k lies in S, and carrying an eps surplus when it does not.
"""

from fractions import Fraction

from cantorlab import parse_sset
from cantorlab.coeffs import closed_form, coefficients, limit_ratio, window_sum

EVEN = parse_sset("even")

t, eps = 4, Fraction(1, 2)
c = coefficients(t, eps, EVEN)
print("coefficients for t=%d, eps=%s, S=even:" % (t, eps))
print("  " + "  ".join(str(v) for v in c.values))

print()
print("k   window sum   closed form   sum/(2t)")
for k in range(1, t + 1):
    ws = window_sum(c, k)
    cf = closed_form(t, eps, EVEN, k)
    assert ws == cf
    print("%-3d %-12s %-13s %.6f" % (k, ws, cf, ws / (2 * t)))

# at large t the normalized sums settle on 1 outside S and 1 + O(eps) inside
print()
print("normalized sums at t=1000, eps=1/10:")
for k in (1, 2, 3, 4):
    r = limit_ratio(1000, Fraction(1, 10), EVEN, k)
    print("  k=%d  ws/(2t) = %-14s ~ %.6f" % (k, r, float(r)))
