"""Solving the coefficient product system by Newton iteration.

The system asks for t positive coordinates whose length-k product sums all
equal 2t at once.  Small cases have algebraic solutions (for t=3 the second
coordinate satisfies c^2 - 6c + 6 = 0), so the solver's output can be
checked against an eliminant polynomial as well as the residual.
"""

import math

from cantorlab import solver

sol = solver.newton_solve(3)
print("t=3 solution:")
for key, val in sorted(sol.as_dict().items()):
    print("  %-14s %s" % (key, val))
print("  c2 - (3 - sqrt 3) = %.3e" % (sol.c[1] - (3 - math.sqrt(3))))
p = solver.poly_eval(solver.C2_ELIMINANT[3], sol.c[1])
print("  eliminant at c2  = %.3e" % p)

print()
sol4 = solver.newton_solve(4)
print("t=4 solution: %s" % (tuple(round(v, 5) for v in sol4.c),))

# the region constraint keeps every coordinate in (1, 2] except the head
rows = solver.scan_region(2, 30)
worst = max(r.residual_norm for r in rows)
print()
print("scan t=2..30: %d solved, all in region: %s, worst residual %.2e"
      % (len(rows), all(r.in_region for r in rows), worst))
