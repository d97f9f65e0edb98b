"""Covering dimension bounds for staged Moran constructions.

moran_bounds tracks the standard lower/upper exponent curves through a
finite number of stages.  For the middle-thirds set the upper curve sits
on log 2 / log 3 from stage one while the lower curve climbs like
s - 0.233/k, so the print below shows exactly how much stage depth a
given accuracy costs.  The grouped digit build exposes the same report
for its own (widths, ratios) data.
"""

import math
from fractions import Fraction

from cantorlab.fractal import MoranSpec, moran_bounds
from cantorlab.pipeline import group_build

s = math.log(2) / math.log(3)
rep = moran_bounds(MoranSpec((2,), (Fraction(1, 3),)), 10**4, checkpoints=[10, 100, 1000, 10**4])
print("middle-thirds bounds (target %.10f):" % s)
print("stage   lower          upper")
for row in rep.rows:
    print("%-7d %.10f   %.10f" % (row["k"], row["lower"], row["upper"]))
print("lower gap at 1e4: %.2e" % (s - rep.lower_final))

build = group_build(2000, "demo")
print()
print("grouped build over %d positions:" % build.horizon)
print("  reference copies at n =", [n for n, f in enumerate(build.copies, 1) if f])
print("  alphas:", build.alphas[:12], "...")
print("  first widths:", build.widths[:8], "...")

expr = build.bound_expression(build.horizon)
print("  bound expression at n=%d: %.7f (triggered: %s)"
      % (expr["n"], expr["value"], expr["triggered"]))

dim = build.dimension_report(checkpoints=[500, 1000, 2000])
print("  dimension rows:")
for row in dim.rows:
    print("    stage %-5d lower %.6f   upper %.6f" % (row["k"], row["lower"], row["upper"]))
print("  caveat: %s" % dim.caveat)
