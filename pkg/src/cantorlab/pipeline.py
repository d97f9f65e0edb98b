"""Stage schedules: turning a base sequence into a digit-frequency target.

The central object is a staged window transform of a nondecreasing base
sequence Q.  Stage i uses a window parameter t_i and covers positions
K_{i-1}+1 .. K_i in windows of length 2 t_i.  Within a window, position
r <= t_i is scaled down by the window coefficient c_{t_i,r} and the back
half is blown up to 2^n q_n (kept lazy).  Stage boundaries are chosen by
the smallest window count kappa_i that simultaneously satisfies

  (1) q_n >= (1+eps) t_{i+1}^2 for every n past the boundary,
  (2) the boundary is divisible by 2 t_{i+1} (so windows stay aligned),
  (3) [strict mode] q_n < n^(1/(i+1)) from the boundary on, certified by
      the shape of the base spec and an exact scan for the last violation,
  (4) the boundary exceeds i (2 t_{i+1})^(1/(i+1)).

Everything arithmetic-critical is integer or Fraction exact; floats appear
only in reports.
"""

from __future__ import annotations

import json
import math
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import gmpy2
import mpmath as mp

from . import coeffs as _coeffs
from .codec import (
    DigitStream,
    HugeMarker,
    explicit_digits,
    psi_digits,
    seeded_uniform_digits,
)
from .errors import (
    ComputationError,
    RangeError,
    SearchExhausted,
)
from .fractal import MoranReport, MoranSpec, moran_bounds
from .sequences import (
    BasicSequence,
    HugeValue,
    SSet,
    parse_sset,
    print_sequence_spec,
    ConstSpec,
    PowSpec,
    LogSpec,
    BlocksSpec,
    SequenceSpec,
)
from .stats import count_blocks, qnk, van_der_corput


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# single-window transform
# ---------------------------------------------------------------------------


def xi_transform(
    base: BasicSequence,
    t: int,
    eps,
    sset: SSet,
    n: int,
    c_override: Optional[Sequence] = None,
):
    """Position n of the window transform of the base at fixed t.

    Front half (r <= t): floor(q_n / c_r), floored exactly through the
    rational c_r and clipped up to 2.  Back half: 2^n q_n, lazily.
    """
    if t < 1:
        raise RangeError("window parameter t must be >= 1")
    if n < 1:
        raise RangeError("positions are 1-based")
    r = (n - 1) % (2 * t) + 1
    q = base.value(n)
    if r <= t:
        if c_override is not None:
            c = c_override[r - 1]
            c = c if isinstance(c, Fraction) else Fraction(c)
        else:
            c = _coeffs.coefficients(t, eps, sset).values[r - 1]
        if isinstance(q, HugeValue):
            q = int(q)
        return max(q * c.denominator // c.numerator, 2)
    if isinstance(q, HugeValue):
        return HugeValue(n + q.exp2, q.mant)
    return HugeValue(n, q)


# ---------------------------------------------------------------------------
# t-rules and growth certificates
# ---------------------------------------------------------------------------


def t_rule(rule: str) -> Callable[[int], int]:
    """"factorial" -> i!, "linear:C" -> C*i, "const:C" -> C."""
    if rule == "factorial":
        return math.factorial
    head, _, arg = rule.partition(":")
    if head in ("linear", "const") and arg:
        try:
            c = int(arg)
        except ValueError:
            raise ValueError("bad t-rule argument in %r" % rule) from None
        if c < 1:
            raise ValueError("t-rule constant must be >= 1")
        if head == "linear":
            return lambda i: c * i
        return lambda i: c
    raise ValueError("unknown t-rule %r (factorial | linear:C | const:C)" % rule)


def certificate_kind(spec: Optional[SequenceSpec], power: int) -> str:
    """Why q_n^power < n must eventually hold for this spec, or raise.

    "const-tail" specs are handled exactly; "shrinking" means the ratio
    q_n^power / n is eventually strictly decreasing along runs, which for
    pow specs follows from a * power < 1.
    """
    if isinstance(spec, ConstSpec):
        return "const-tail"
    if isinstance(spec, BlocksSpec) and spec.repeat_last:
        return "const-tail"
    if isinstance(spec, LogSpec):
        return "shrinking"
    if isinstance(spec, PowSpec):
        if spec.a <= 0:
            return "const-tail" if spec.a == 0 else "shrinking"
        if spec.a * power < 1:
            return "shrinking"
        raise SearchExhausted(
            0,
            "growth bound q^%d < n can never hold: exponent %s * %d >= 1"
            % (power, spec.a, power),
        )
    raise SearchExhausted(
        0, "no growth certificate for base %r" % (spec and print_sequence_spec(spec))
    )


def _pow_small(v, power: int) -> Optional[int]:
    # v**power for ints; None when v is lazily huge (always fails q^p < n)
    if isinstance(v, HugeValue):
        return None
    return v**power


def _run_last(base: BasicSequence, n: int, cap: int) -> Optional[int]:
    """Last position of the constant run of q through n (q nondecreasing);
    None if the run extends past cap."""
    v = base.raw(n)
    lo, step = n, 1
    while True:
        hi = lo + step
        if hi > cap:
            return None
        if base.raw(hi) > v:
            break
        lo = hi
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if base.raw(mid) > v:
            hi = mid
        else:
            lo = mid
    return lo


def growth_start(base: BasicSequence, power: int, cap: int) -> int:
    """Smallest n* with q_n^power < n for all n >= n*, exactly.

    Within a constant run of value v the failures are precisely the
    positions n <= v^power, so the scan walks run boundaries and keeps the
    last failure.  It stops once the certificate applies and several
    consecutive run starts clear the bound with a factor-2 margin.
    """
    kind = certificate_kind(base.spec, power)
    last_fail = 0
    n = 1
    clears = 0
    while True:
        if n > cap:
            raise SearchExhausted(cap, "growth-start scan passed the position cap")
        v = base.raw(n)
        vp = _pow_small(v, power)
        if vp is None:
            raise SearchExhausted(cap, "lazily huge value inside growth-start scan")
        end = _run_last(base, n, cap)
        if end is None:
            # constant from here on: failures are exactly n' <= v^power
            if vp >= n:
                last_fail = max(last_fail, vp)
            return last_fail + 1
        if vp >= n:
            last_fail = max(last_fail, min(end, vp))
            clears = 0
        elif 2 * vp <= n:
            clears += 1
            if clears >= 4 and kind in ("shrinking", "const-tail"):
                return last_fail + 1
        n = end + 1


def threshold_position(base: BasicSequence, bound: int, cap: int) -> int:
    """Smallest n with q_n >= bound, for a nondecreasing base."""

    def ok(n: int) -> bool:
        return base.raw(n) >= bound

    if ok(1):
        return 1
    lo, hi = 1, 2
    while not ok(hi):
        lo = hi
        hi *= 2
        if hi > cap:
            raise SearchExhausted(cap, "growth threshold %d not reached" % bound)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# schedule construction
# ---------------------------------------------------------------------------


@dataclass
class StageRecord:
    i: int
    t: int
    t_next: int
    kappa: int
    K_prev: int
    K: int
    diag: dict = field(default_factory=dict)


@dataclass
class ScheduleState:
    eps: Fraction
    sset: SSet
    rule: str
    mode: str  # "strict" applies the growth condition per stage, "plain" skips it
    horizon: int
    stages: list
    base_spec: Optional[str] = None
    search_cap: int = 10**9
    warnings: list = field(default_factory=list)

    @property
    def K_last(self) -> int:
        return self.stages[-1].K if self.stages else 0

    def stage_of(self, n: int) -> StageRecord:
        if n < 1:
            raise RangeError("positions are 1-based")
        if n > self.K_last:
            raise RangeError("position %d beyond built schedule (K=%d)" % (n, self.K_last))
        ks = [rec.K for rec in self.stages]
        return self.stages[bisect_left(ks, n)]

    def to_json(self) -> str:
        obj = {
            "eps": str(self.eps),
            "sset": self.sset.label,
            "rule": self.rule,
            "mode": self.mode,
            "horizon": self.horizon,
            "base_spec": self.base_spec,
            "search_cap": self.search_cap,
            "warnings": self.warnings,
            "stages": [
                {
                    "i": r.i,
                    "t": r.t,
                    "t_next": r.t_next,
                    "kappa": r.kappa,
                    "K_prev": r.K_prev,
                    "K": r.K,
                    "diag": r.diag,
                }
                for r in self.stages
            ],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ScheduleState":
        obj = json.loads(text)
        stages = [
            StageRecord(
                s["i"], s["t"], s["t_next"], s["kappa"], s["K_prev"], s["K"],
                s.get("diag", {}),
            )
            for s in obj["stages"]
        ]
        return cls(
            Fraction(obj["eps"]),
            parse_sset(obj["sset"]),
            obj["rule"],
            obj["mode"],
            obj["horizon"],
            stages,
            obj.get("base_spec"),
            obj.get("search_cap", 10**9),
            obj.get("warnings", []),
        )


def find_kappa(
    base: BasicSequence,
    eps: Fraction,
    mode: str,
    i: int,
    K_prev: int,
    t_i: int,
    t_next: int,
    cap: int,
) -> tuple:
    """Smallest window count j >= 1 meeting stage conditions (1)-(4)."""
    two_ti, two_tn = 2 * t_i, 2 * t_next
    pos_cap = max(K_prev + 2 * cap * t_i, 1 << 62)
    diag: dict = {}

    # (1) growth threshold: q >= (1+eps) t_next^2 past the boundary
    thr = _ceil_div((eps.numerator + eps.denominator) * t_next * t_next, eps.denominator)
    n0 = threshold_position(base, thr, pos_cap)
    j1 = max(1, _ceil_div(n0 - 1 - K_prev, two_ti))
    diag["threshold"] = thr
    diag["n0"] = n0

    # (3) growth-rate bound, strict mode only
    j3 = 0
    if mode == "strict":
        n_star = growth_start(base, i + 1, pos_cap)
        j3 = max(0, _ceil_div(n_star - 1 - K_prev, two_ti))
        diag["n_star"] = n_star

    # (4) boundary > i (2 t_next)^(1/(i+1))
    rhs = i ** (i + 1) * two_tn
    x_min = int(gmpy2.iroot(rhs, i + 1)[0]) + 1
    j4 = max(0, _ceil_div(x_min - K_prev, two_ti))
    diag["x_min"] = x_min

    # (2) alignment: 2 t_next | K_prev + 2 t_i j
    g = math.gcd(two_ti, two_tn)
    if K_prev % g:
        raise SearchExhausted(
            cap,
            "stage %d boundary %d not solvable mod 2t=%d" % (i, K_prev, two_tn),
            partial=diag,
        )
    m_mod = two_tn // g
    j_star = (-(K_prev // g) * pow(two_ti // g, -1, m_mod)) % m_mod
    diag["congruence"] = [j_star, m_mod]

    lo = max(j1, j3, j4, 1)
    kappa = lo + ((j_star - lo) % m_mod)
    if kappa > cap:
        raise SearchExhausted(cap, "stage %d needs kappa=%d windows" % (i, kappa), partial=diag)

    # direct recheck of everything the closed forms promised
    K_cand = K_prev + two_ti * kappa
    if K_cand % two_tn:
        raise ComputationError("stage %d recheck failed: alignment" % i)
    if not base.raw(K_cand + 1) >= thr:
        raise ComputationError("stage %d recheck failed: growth threshold" % i)
    if not K_cand ** (i + 1) > rhs:
        raise ComputationError("stage %d recheck failed: size bound" % i)
    if mode == "strict" and K_cand < diag["n_star"] - 1:
        raise ComputationError("stage %d recheck failed: growth-rate bound" % i)
    return kappa, diag


def build_schedule(
    base: BasicSequence,
    eps,
    sset: SSet,
    rule: str = "linear:2",
    mode: str = "plain",
    horizon: int = 10**6,
    search_cap: int = 10**9,
) -> ScheduleState:
    """Stack stages until the covered prefix reaches the horizon."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if mode not in ("plain", "strict"):
        raise ValueError("mode must be 'plain' or 'strict'")
    if horizon < 1:
        raise RangeError("horizon must be >= 1")
    if not base.meta.nondecreasing:
        raise SearchExhausted(0, "schedule needs a base declared nondecreasing")
    rule_fn = t_rule(rule)
    warnings = []
    if mode == "plain":
        try:
            certificate_kind(base.spec, 2)
        except SearchExhausted:
            warnings.append("no growth certificate for the base; conditions unchecked")
    stages: list = []
    K = 0
    i = 1
    while K < horizon:
        if i > 64:
            raise SearchExhausted(64, "more than 64 stages before the horizon")
        ti, tn = rule_fn(i), rule_fn(i + 1)
        if ti < 1 or tn < ti:
            raise ValueError("t-rule must be positive and nondecreasing")
        kappa, diag = find_kappa(base, eps, mode, i, K, ti, tn, search_cap)
        K_new = max(K + 2 * ti * kappa, tn * tn)
        if K_new % (2 * tn):
            warnings.append(
                "stage %d boundary %d not aligned to 2t=%d" % (i, K_new, 2 * tn)
            )
        stages.append(StageRecord(i, ti, tn, kappa, K, K_new, diag))
        K = K_new
        i += 1
    return ScheduleState(
        eps,
        sset,
        rule,
        mode,
        horizon,
        stages,
        print_sequence_spec(base.spec) if base.spec is not None else None,
        search_cap,
        warnings,
    )


def schedule_base(state: ScheduleState, base: BasicSequence) -> BasicSequence:
    """The transformed sequence P: stage-local window transform of the base."""
    cache: dict = {}
    bounds = [rec.K for rec in state.stages]
    ts = [rec.t for rec in state.stages]
    K_last = bounds[-1] if bounds else 0

    def coeff(t: int):
        if t not in cache:
            cache[t] = _coeffs.coefficients(t, state.eps, state.sset)
        return cache[t]

    def gen(n: int):
        if n > K_last:
            raise RangeError(
                "position %d beyond built schedule (K=%d)" % (n, K_last)
            )
        t = ts[bisect_left(bounds, n)]
        r = (n - 1) % (2 * t) + 1  # stage starts are multiples of 2t
        q = base.raw(n)
        if r <= t:
            c = coeff(t).values[r - 1]
            if isinstance(q, HugeValue):
                q = int(q)
            return max(q * c.denominator // c.numerator, 2)
        if isinstance(q, HugeValue):
            return HugeValue(n + q.exp2, q.mant)
        return HugeValue(n, q)

    from .sequences import SequenceMeta

    return BasicSequence(
        gen,
        SequenceMeta(nondecreasing=False, infinite_in_limit=base.meta.infinite_in_limit,
                     notes=("window transform of %s" % (state.base_spec or base.label),)),
        label="schedule(%s)" % (state.base_spec or base.label),
    )


def generate_digits(state: ScheduleState, base: BasicSequence, seed) -> DigitStream:
    """Uniform digits over the transformed sequence (markers where lazy)."""
    return seeded_uniform_digits(schedule_base(state, base), seed)


def target_digits(stream: DigitStream, base: BasicSequence) -> DigitStream:
    """Digits re-expressed over the original base via the clip transfer."""
    return psi_digits(stream, base)


# ---------------------------------------------------------------------------
# window reports
# ---------------------------------------------------------------------------


def _decomp(v):
    if isinstance(v, HugeValue):
        return v.exp2, v.mant
    return 0, v


def _exact_window_sum(dec, width: int, k: int):
    """Sum of 1/(v_off ... v_{off+k-1}) over off = 0..width-1, exactly.

    Products with a lazily huge factor are not materialized; each is
    <= 2^{-e} for its exponent sum e and lands in a counted remainder.
    """
    dens = []
    rem = 0
    rem_exp = None
    for off in range(width):
        e = 0
        d = 1
        for l in range(k):
            e1, m1 = dec[off + l]
            e += e1
            d *= m1
        if e == 0:
            dens.append(d)
        else:
            rem += 1
            rem_exp = e if rem_exp is None else min(rem_exp, e)
    if not dens:
        return Fraction(0), rem, rem_exp
    D = 1
    for d in dens:
        D *= d
    num = sum(D // d for d in dens)
    return Fraction(num, D), rem, rem_exp


def _window_rows_for(
    state: ScheduleState,
    base: BasicSequence,
    P: BasicSequence,
    rec: StageRecord,
    j: int,
    ks: Sequence[int],
    prec: int,
    exact: bool,
    coeff_cache: dict,
) -> list:
    t = rec.t
    n_start = rec.K_prev + 2 * t * j + 1
    n_end = n_start + 2 * t - 1
    kmax = max(ks)
    qv = [base.value(n) for n in range(n_start, n_end + kmax)]
    pv = [P.value(n) for n in range(n_start, n_end + kmax)]
    if t not in coeff_cache:
        coeff_cache[t] = _coeffs.coefficients(t, state.eps, state.sset)
    rows = []
    for k in ks:
        span = 2 * t + k - 1
        const_q = all(qv[l] == qv[0] for l in range(span))
        alpha = qv[0] if const_q and not isinstance(qv[0], HugeValue) else None
        ws = _coeffs.window_sum(coeff_cache[t], k) if k <= t else None
        row = {
            "i": rec.i,
            "j": j,
            "k": k,
            "n_start": n_start,
            "n_end": n_end,
            "t": t,
            "const_q": const_q,
            "alpha": alpha,
        }
        if exact:
            dec_q = [_decomp(v) for v in qv[:span]]
            dec_p = [_decomp(v) for v in pv[:span]]
            q_sum, q_rem, q_rem_exp = _exact_window_sum(dec_q, 2 * t, k)
            p_sum, p_rem, p_rem_exp = _exact_window_sum(dec_p, 2 * t, k)
            ratio = q_sum / p_sum if p_sum else None
            row.update(
                p_sum=p_sum,
                q_sum=q_sum,
                ratio=ratio,
                prediction=Fraction(2 * t) / ws if ws else None,
                err_bound=Fraction(0),
                q_remainder=(q_rem, q_rem_exp),
                p_remainder=(p_rem, p_rem_exp),
            )
            if alpha is not None:
                alpha_k = alpha**k
                row["q_sum_alpha_k"] = q_sum * alpha_k
                row["p_sum_alpha_k"] = p_sum * alpha_k
                row["window_sum"] = ws
        else:
            with mp.workprec(prec):
                q_sum = mp.mpf(0)
                p_sum = mp.mpf(0)
                for off in range(2 * t):
                    eq, mq = 0, 1
                    ep, mpv = 0, 1
                    for l in range(k):
                        e1, m1 = _decomp(qv[off + l])
                        eq += e1
                        mq *= m1
                        e2, m2 = _decomp(pv[off + l])
                        ep += e2
                        mpv *= m2
                    q_sum += mp.ldexp(1 / mp.mpf(mq), -eq)
                    p_sum += mp.ldexp(1 / mp.mpf(mpv), -ep)
                ratio = q_sum / p_sum
                err = (2 * t * (k + 2) + 8) * mp.ldexp(abs(ratio), 1 - prec)
                row.update(
                    p_sum=float(p_sum),
                    q_sum=float(q_sum),
                    ratio=float(ratio),
                    prediction=float(Fraction(2 * t) / ws) if ws else None,
                    err_bound=float(err),
                )
        rows.append(row)
    return rows


def window_ratio_report(
    state: ScheduleState,
    base: BasicSequence,
    ks: Sequence[int],
    horizon: Optional[int] = None,
    windows_per_stage: Optional[int] = 3,
    prec: int = 128,
    exact: bool = False,
) -> list:
    """Per-window sums over P and Q with the coefficient-sum prediction.

    Only complete windows inside the horizon are reported; the stage tail
    that padding may leave behind is skipped.
    """
    horizon = min(horizon or state.K_last, state.K_last)
    P = schedule_base(state, base)
    coeff_cache: dict = {}
    rows = []
    # k-products in the last window look ahead max(ks)-1 positions, which
    # must stay inside the built schedule
    lookahead_top = state.K_last - max(ks) + 1
    for rec in state.stages:
        top = min(rec.K, horizon, lookahead_top)
        count = (top - rec.K_prev) // (2 * rec.t)
        if count <= 0:
            continue
        if windows_per_stage is None or count <= windows_per_stage:
            js = range(count)
        else:
            picks = {0, count // 2, count - 1}
            extra = max(0, windows_per_stage - len(picks))
            for idx in range(extra):
                picks.add((idx + 1) * count // (windows_per_stage + 1))
            js = sorted(picks)
        for j in js:
            rows.extend(
                _window_rows_for(state, base, P, rec, j, ks, prec, exact, coeff_cache)
            )
    return rows


# ---------------------------------------------------------------------------
# frequency estimates against the construction probabilities
# ---------------------------------------------------------------------------


def digit_probability(p, q, d: int) -> float:
    """P(clip(y, q-1) = d) for y uniform on [0, p).

    Lazily huge p underflows to 0 for small digits and to 1 for the top
    digit q-1; the discarded mass is below 2^-(position), far under float
    resolution.
    """
    if isinstance(q, HugeValue):
        # top digit unreachable for small d; uniform mass otherwise
        if isinstance(p, HugeValue):
            return 0.0
        return 1.0 / p if d < p else 0.0
    top = q - 1
    if isinstance(p, HugeValue):
        return 1.0 if d == top else 0.0
    if d > top:
        return 0.0
    if d == top:
        if p > top:
            return (p - top) / p
        return 1.0 / p if d < p else 0.0
    return 1.0 / p if d < p else 0.0


def limit_ratio_estimate(
    state: ScheduleState,
    base: BasicSequence,
    stream: DigitStream,
    blocks: Sequence[tuple],
    horizon: int,
    t_limit: int = 10**4,
) -> list:
    """Measured block counts against the exact construction expectation,
    rescaled by the large-t coefficient-sum factor ws(k)/(2t).

    The plain count/Q_n ratio is also reported; it converges only along
    the staged t_i, so the rescaled estimate is the comparable number.
    """
    blocks = [tuple(b) for b in blocks]
    counts = count_blocks(stream.iter_digits(1, horizon + 1), blocks, [horizon])[horizon]
    kmax = max(len(b) for b in blocks)
    P = schedule_base(state, base)
    digits_needed = sorted({d for b in blocks for d in b})
    probs = {d: [0.0] * (horizon + kmax) for d in digits_needed}
    for n in range(1, horizon + kmax):
        pv = P.raw(n)
        qv = base.raw(n)
        for d in digits_needed:
            probs[d][n] = digit_probability(pv, qv, d)
    rows = []
    for b in blocks:
        k = len(b)
        expected = 0.0
        for j in range(1, horizon - k + 2):
            prod = 1.0
            for l in range(k):
                prod *= probs[b[l]][j + l]
                if prod == 0.0:
                    break
            expected += prod
        n_meas = counts[b]
        q_norm = float(qnk(base, k, horizon).value)
        factor = float(_coeffs.limit_ratio(t_limit, state.eps, state.sset, k))
        ratio = n_meas / expected if expected > 0 else float("inf")
        rows.append(
            {
                "block": b,
                "k": k,
                "count": n_meas,
                "expected": expected,
                "ratio": ratio,
                "limit_factor": factor,
                "estimate": ratio * factor,
                "count_over_qnk": n_meas / q_norm if q_norm > 0 else float("inf"),
                "sigma_heuristic": math.sqrt(expected) if expected > 0 else 0.0,
            }
        )
    return rows


def psi_transfer_report(
    stream: DigitStream,
    target: BasicSequence,
    blocks: Sequence[tuple],
    checkpoints: Sequence[int],
) -> list:
    """Block counts before/after the clip transfer onto a new base.

    Once the source digits are already valid for the target (q large
    enough), the difference column is identically zero.
    """
    clipped = psi_digits(stream, target)
    cps = sorted(set(checkpoints))
    top = max(cps)
    before = count_blocks(stream.iter_digits(1, top + 1), blocks, cps)
    after = count_blocks(clipped.iter_digits(1, top + 1), blocks, cps)
    rows = []
    for n in cps:
        for b in blocks:
            bb = tuple(b)
            rows.append(
                {
                    "checkpoint": n,
                    "block": bb,
                    "count_source": before[n][bb],
                    "count_target": after[n][bb],
                    "difference": after[n][bb] - before[n][bb],
                }
            )
    return rows


# ---------------------------------------------------------------------------
# tail-distance reports
# ---------------------------------------------------------------------------


def tail_distance_report(
    stream: DigitStream,
    targets: Callable[[int], Fraction],
    delta,
    horizon: int,
    checkpoints: Sequence[int],
    metric: str = "mod1",
    prec: int = 128,
) -> list:
    """Density of positions where the digit tail misses its target by >= delta.

    The tail at n is sum_{l} E_{n+l}/(q_n...q_{n+l}) truncated once the
    truncation error drops below delta/16.  metric "mod1" measures to the
    nearest integer; "abs" takes the plain absolute difference.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if metric not in ("mod1", "abs"):
        raise ValueError("metric must be 'mod1' or 'abs'")
    J = 4
    while Fraction(1, 1 << J) > delta / 16:
        J += 1
    cps = sorted(set(checkpoints))
    if not cps or cps[-1] > horizon:
        raise RangeError("checkpoints must be within the horizon")
    rows = []
    exceed = 0
    cp_iter = iter(cps)
    next_cp = next(cp_iter)
    with mp.workprec(prec):
        deltaf = mp.mpf(delta.numerator) / delta.denominator
        for n in range(1, horizon + 1):
            total = mp.mpf(0)
            den = mp.mpf(1)
            for l in range(J):
                d = stream.digit(n + l)
                if isinstance(d, HugeMarker):
                    from .errors import PrecisionError

                    raise PrecisionError(
                        "marker digit at %d: tail values need materialized digits"
                        % (n + l)
                    )
                q = stream.base.value(n + l)
                qf = q.to_mpf(prec) if isinstance(q, HugeValue) else mp.mpf(q)
                den *= qf
                total += mp.mpf(d) / den
                if 1 / den < mp.ldexp(deltaf, -5):
                    break
            x = targets(n)
            xf = (
                mp.mpf(x.numerator) / x.denominator
                if isinstance(x, Fraction)
                else mp.mpf(x)
            )
            diff = total - xf
            if metric == "mod1":
                f = diff - mp.floor(diff)
                dist = min(f, 1 - f)
            else:
                dist = abs(diff)
            if dist >= deltaf:
                exceed += 1
            while next_cp is not None and n == next_cp:
                rows.append(
                    {
                        "checkpoint": n,
                        "exceedances": exceed,
                        "density": exceed / n,
                        "delta": float(delta),
                        "J": J,
                        "metric": metric,
                    }
                )
                next_cp = next(cp_iter, None)
    return rows


# ---------------------------------------------------------------------------
# the doubled-group construction
# ---------------------------------------------------------------------------


@dataclass
class GroupBuild:
    """Digit construction over grouped bases [j]^(l_j) ++ [2^(2^j) j]^(2^j l_j).

    Positions in the short head of each group copy reference digits drawn
    over the slow sequence [2]^(l_2) [3]^(l_3) ...; the long tail samples
    uniformly from a window V_n around the scaled target q_n x_n whose
    half-width q_n^(1-eps_n) shrinks relative to q_n.
    """

    horizon: int
    seed: str
    base: BasicSequence
    stream: DigitStream
    copies: list
    widths: list
    alphas: list
    copy_count: int
    bases_match: bool
    eps_list: list
    cumlog: list
    omegas: list

    def dimension_report(
        self, checkpoints: Optional[Sequence[int]] = None, prec: int = 128
    ) -> MoranReport:
        cs = tuple(Fraction(1, int(self.base.value(n))) for n in range(1, self.horizon + 1))
        ns = tuple(self.widths)
        spec = MoranSpec(ns, cs)
        return moran_bounds(spec, self.horizon, prec=prec, checkpoints=checkpoints)

    def bound_expression(self, n: int) -> dict:
        """1/(1 + eps_{n+1} log q_{n+1} / log(q_1...q_n)) and its trigger.

        Once the accumulated log measure reaches 100x the next position's
        log q the expression is at least 100/101 > 0.99 regardless of eps.
        """
        if not 1 <= n <= self.horizon:
            raise RangeError("position %d outside build horizon %d" % (n, self.horizon))
        sum_ln = self.cumlog[n]
        ln_next = self.cumlog[n + 1] - self.cumlog[n]
        eps_next = self.eps_list[n]
        value = 1.0 / (1.0 + eps_next * ln_next / sum_ln)
        return {
            "n": n,
            "value": value,
            "sum_log": sum_ln,
            "log_q_next": ln_next,
            "eps_next": eps_next,
            "triggered": sum_ln >= 100.0 * ln_next,
        }


def group_build(
    horizon: int,
    seed,
    targets: Optional[Callable[[int], Fraction]] = None,
    ell: Callable[[int], int] = lambda j: 1,
    prec: int = 128,
) -> GroupBuild:
    if horizon < 1:
        raise RangeError("horizon must be >= 1")
    seed = str(seed)
    if targets is None:
        vdc = van_der_corput(horizon)
        targets = lambda n: vdc[n - 1]

    # group table: group j >= 2 contributes l_j head + 2^j l_j tail positions;
    # one extra position feeds the boundary terms of the dimension bound
    cap = horizon + 1
    q_vals: list = []
    copy_flags: list = []
    xi_idx: list = []
    alphas: list = []
    slow_vals: list = []  # the reference base [2]^(l_2) [3]^(l_3) ...
    L = 0  # reference digits consumed through the previous group
    j = 2
    while len(q_vals) < cap:
        lj = ell(j)
        if lj < 1:
            raise ValueError("group lengths must be >= 1")
        head_v = j
        tail_v = (1 << (1 << j)) * j
        alpha = j - 2  # max index with M_alpha < n throughout this group
        slow_vals.extend([j] * lj)
        for _ in range(lj):
            q_vals.append(head_v)
            copy_flags.append(True)
            L += 1
            xi_idx.append(L)
            alphas.append(alpha)
            if len(q_vals) >= cap:
                break
        for _ in range((1 << j) * lj):
            if len(q_vals) >= cap:
                break
            q_vals.append(tail_v)
            copy_flags.append(False)
            xi_idx.append(0)
            alphas.append(alpha)
        j += 1

    base = BasicSequence.from_values(q_vals, label="grouped(%d)" % horizon)
    bases_match = True
    digits: list = [0] * horizon
    widths: list = [0] * horizon
    omegas: list = [0] * horizon
    eps_list: list = [0.0] * cap
    cumlog: list = [0.0] * (cap + 1)
    copy_count = 0
    with mp.workprec(prec):
        cum_ln = mp.mpf(0)
        for n in range(1, cap + 1):
            q = q_vals[n - 1]
            ln_q = mp.log(q)
            eps_n = mp.sqrt(min(cum_ln, ln_q)) / ln_q
            if eps_n > 1:
                eps_n = mp.mpf(1)
            eps_list[n - 1] = float(eps_n)
            if copy_flags[n - 1]:
                if n <= horizon:
                    copy_count += 1
                    idx = xi_idx[n - 1]
                    # copied positions must present the same alphabet the
                    # reference digit was drawn from
                    p_slow = slow_vals[idx - 1]
                    if p_slow != q:
                        bases_match = False
                    digits[n - 1] = random.Random("%s:ref:%d" % (seed, idx)).randrange(p_slow)
                    widths[n - 1] = 1
            elif n <= horizon:
                omega = int(mp.floor(mp.e ** ((1 - eps_n) * ln_q)))
                alpha = alphas[n - 1]
                fx = q * Fraction(targets(n))
                floor_qx = fx.numerator // fx.denominator
                m0 = max(floor_qx, math.ceil(math.log(alpha)) if alpha >= 2 else 0)
                lo = max(0, m0 - omega)
                hi = min(q - 1, m0 + omega)
                if hi < lo:
                    lo = hi = min(max(m0, 0), q - 1)
                digits[n - 1] = random.Random("%s:v:%d" % (seed, n)).randrange(lo, hi + 1)
                widths[n - 1] = hi - lo + 1
                omegas[n - 1] = omega
            cum_ln += ln_q
            cumlog[n] = float(cum_ln)

    stream = explicit_digits(base, digits)
    return GroupBuild(
        horizon,
        seed,
        base,
        stream,
        copy_flags[:horizon],
        widths,
        alphas[:horizon],
        copy_count,
        bases_match,
        eps_list,
        cumlog,
        omegas,
    )


# ---------------------------------------------------------------------------
# factorial-length composition blocks
# ---------------------------------------------------------------------------


def composition_sequence(i_max: int = 24) -> BasicSequence:
    """q = i on a block of length 3^(i!) (i+1)^(i! i), stages i = 6, 7, ...

    Block lengths explode so fast that any practical horizon sits inside
    the first block; the cumulative table still evaluates positions given
    as exact big integers.  Beyond stage i_max the last value repeats.
    """
    if i_max < 6:
        raise RangeError("need i_max >= 6")
    bounds: list = []  # cumulative lengths L_i
    values: list = []
    total = 0

    def extend():
        i = 6 + len(values)
        if i > i_max:
            return False
        f = math.factorial(i)
        length = 3**f * (i + 1) ** (f * i)
        nonlocal total
        total += length
        bounds.append(total)
        values.append(i)
        return True

    extend()

    def gen(n: int):
        while n > bounds[-1] and extend():
            pass
        idx = bisect_left(bounds, n)
        if idx >= len(values):
            return values[-1]  # beyond the last computed stage: repeat
        return values[idx]

    from .sequences import SequenceMeta

    return BasicSequence(
        gen,
        SequenceMeta(nondecreasing=True, infinite_in_limit=False, fully_divergent=True),
        label="composition(i<=%d)" % i_max,
    )
