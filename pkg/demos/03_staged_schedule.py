"""Building a staged digit schedule over a slowly growing base.

Each stage i freezes a window width t_i and extends the schedule to a
boundary K_i chosen so that four arithmetic conditions line up: a growth
threshold for the next stage, a congruence that keeps windows aligned,
the onset of strict growth, and a root bound.  Past position K_i the
scheduled values explode, so they are carried lazily as 2^e * m pairs.
"""

from fractions import Fraction

from cantorlab import parse_sset
from cantorlab.pipeline import (
    build_schedule,
    generate_digits,
    schedule_base,
    window_ratio_report,
)
from cantorlab.sequences import BasicSequence

base = BasicSequence.from_spec("pow:1/4:1")
state = build_schedule(base, Fraction(1, 10), parse_sset("even"), "linear:2", "plain", 10**6)

print("stage  t     kappa      K          threshold  n0")
for rec in state.stages:
    print("%-6d %-5d %-10d %-10d %-10d %d"
          % (rec.i, rec.t, rec.kappa, rec.K, rec.diag["threshold"], rec.diag["n0"]))

P = schedule_base(state, base)
print()
print("scheduled values near the first boundary:")
for n in (1, 2, 3, 4, 5, 65535, 65536, 65537, 65538):
    print("  P(%d) = %s   (base q = %s)" % (n, P.value(n), base.value(n)))

# digits drawn uniformly below P(n); huge positions keep a marker
stream = generate_digits(state, base, "demo")
digits = [stream.digit(n) for n in range(1, 31)]
print()
print("first 30 digits (seed 'demo'):", digits)

rows = window_ratio_report(state, base, [1, 2], windows_per_stage=1)
print()
print("window   t  k  ratio      prediction")
for r in rows:
    print("n=%-7d %d  %d  %.6f   %.6f" % (r["n_start"], r["t"], r["k"], r["ratio"], r["prediction"]))
