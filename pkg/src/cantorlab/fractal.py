"""Perturbed-uniform Markov measures and Moran-set dimension bounds.

The Markov chain lives on the b^k words of length k over {0,...,b-1}; a
step shifts the word left and appends a digit.  All rows are uniform 1/b
except the two words 0^k and 10^(k-1), where the probabilities of
appending 0 and 1 are tilted to (1 +- 1/n)/b.  The tilts cancel against
each other, so the uniform distribution stays exactly stationary while the
entropy drops strictly below log b.

Moran bounds follow the standard covering/mass-distribution estimates for
a limit set with n_k pieces of ratio c_k at stage k:

    upper_k = log(n_1...n_k) / -log(c_1...c_k)
    lower_k = log(n_1...n_k) / -log(c_1...c_k c_{k+1} n_{k+1})
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import mpmath as mp

from .errors import DegenerateChain, DomainError, RangeError
from .highprec import HighPrecReal


# ---------------------------------------------------------------------------
# Markov chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovSpec:
    b: int
    k: int
    n: int

    def __post_init__(self):
        if self.b < 2:
            raise RangeError("alphabet size b must be >= 2")
        if self.k < 1:
            raise RangeError("word length k must be >= 1")
        if self.n < 1:
            raise RangeError("tilt parameter n must be >= 1")
        if self.b == 2 and self.n == 1:
            raise DegenerateChain(
                "b=2, n=1 zeroes a transition and disconnects the chain"
            )

    @property
    def states(self) -> list:
        return list(product(range(self.b), repeat=self.k))


def _tilt_weights(spec: MarkovSpec, state: tuple) -> list:
    """Integer weights over denominator b*n for appending each digit."""
    b, k, n = spec.b, spec.k, spec.n
    w = [n] * b
    if state == (0,) * k:
        w[0], w[1] = n + 1, n - 1
    elif state == (1,) + (0,) * (k - 1):
        w[0], w[1] = n - 1, n + 1
    return w


def markov_matrix(spec: MarkovSpec) -> dict:
    """{state: {successor: Fraction}} with rows summing to 1 exactly."""
    P: dict = {}
    bn = spec.b * spec.n
    for s in spec.states:
        w = _tilt_weights(spec, s)
        row = {}
        for d in range(spec.b):
            succ = s[1:] + (d,)
            row[succ] = row.get(succ, Fraction(0)) + Fraction(w[d], bn)
        P[s] = row
    return P


def stationary_uniform_check(spec: MarkovSpec) -> bool:
    """Exact check that the uniform vector is stationary: the +-1/n tilts
    at 0^k and 10^(k-1) must cancel in every column."""
    P = markov_matrix(spec)
    pi = Fraction(1, spec.b**spec.k)
    col: dict = {}
    for s, row in P.items():
        for succ, p in row.items():
            col[succ] = col.get(succ, Fraction(0)) + pi * p
    return all(v == pi for v in col.values()) and len(col) == spec.b**spec.k


def entropy(spec: MarkovSpec, prec: int = 128) -> HighPrecReal:
    """Entropy rate -sum_s pi_s sum_d P log P in nats."""
    P = markov_matrix(spec)
    size = spec.b**spec.k
    with mp.workprec(prec):
        h = mp.mpf(0)
        for row in P.values():
            for p in row.values():
                if p != 0:
                    pf = mp.mpf(p.numerator) / p.denominator
                    h -= pf * mp.log(pf)
        h /= size
        err = (size * spec.b + 4) * mp.ldexp(abs(h), 1 - prec)
        return HighPrecReal(h, err, prec)


def cylinder_measure(spec: MarkovSpec, word: Sequence[int]) -> Fraction:
    """Stationary measure of the cylinder fixing the first len(word) letters.

    Windows of length <= k are uniform (the stationary law is uniform on
    k-words and projections of uniform are uniform); longer words multiply
    transition probabilities along the shift.
    """
    word = tuple(word)
    if any(not 0 <= d < spec.b for d in word):
        raise ValueError("word letters must lie in 0..b-1")
    L = len(word)
    if L == 0:
        return Fraction(1)
    if L <= spec.k:
        return Fraction(1, spec.b**L)
    P = markov_matrix(spec)
    measure = Fraction(1, spec.b**spec.k)
    for i in range(L - spec.k):
        s = word[i : i + spec.k]
        succ = word[i + 1 : i + spec.k + 1]
        p = P[s].get(succ, Fraction(0))
        if p == 0:
            return Fraction(0)
        measure *= p
    return measure


def sample_markov(spec: MarkovSpec, length: int, seed) -> list:
    """Digit sample of the chain: uniform initial word, exact integer
    thresholds over b*n per step, first letter of each visited state."""
    if length < 1:
        raise RangeError("length must be >= 1")
    rng = random.Random("markov:%s" % seed)
    b, k, n = spec.b, spec.k, spec.n
    state = tuple(rng.randrange(b) for _ in range(k))
    out = [state[0]]
    bn = b * n
    for _ in range(length - 1):
        w = _tilt_weights(spec, state)
        u = rng.randrange(bn)
        d = 0
        acc = w[0]
        while u >= acc:
            d += 1
            acc += w[d]
        state = state[1:] + (d,)
        out.append(state[0])
    return out


# ---------------------------------------------------------------------------
# Moran bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoranSpec:
    """Stage data for a Moran construction: n_k pieces of ratio c_k.

    Finite lists repeat their last element, so ([2], [1/3]) is the middle
    thirds Cantor set at every stage.
    """

    ns: tuple
    cs: tuple
    delta: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.ns or not self.cs:
            raise ValueError("need at least one stage")
        if any(n < 1 for n in self.ns):
            raise ValueError("piece counts must be >= 1")
        if any(not 0 < c <= 1 for c in self.cs):
            raise ValueError("ratios must lie in (0, 1]")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        for k in range(1, max(len(self.ns), len(self.cs)) + 1):
            if self.n_at(k) * self.c_at(k) > self.delta:
                raise ValueError(
                    "stage %d violates n_k c_k <= delta (pieces cannot fit)" % k
                )

    def n_at(self, k: int) -> int:
        return self.ns[min(k - 1, len(self.ns) - 1)]

    def c_at(self, k: int) -> Fraction:
        return self.cs[min(k - 1, len(self.cs) - 1)]


@dataclass
class MoranReport:
    stages: int
    lower_final: float
    upper_final: float
    lower_tail_min: float
    upper_tail_min: float
    tail_window: tuple
    ones_flagged: int
    rows: list
    caveat: str = "finite-stage evidence, not a dimension computation"


def moran_bounds(
    spec: MoranSpec,
    stages: int,
    prec: int = 128,
    checkpoints: Optional[Sequence[int]] = None,
) -> MoranReport:
    """Lower/upper dimension bound curves through the given stage count."""
    if stages < 1:
        raise RangeError("need at least one stage")
    cps = sorted(set(checkpoints)) if checkpoints else []
    if cps and (cps[0] < 1 or cps[-1] > stages):
        raise RangeError("checkpoints must lie in 1..stages")
    tail_len = max(stages // 10, 1)
    tail_start = stages - tail_len + 1
    ones = 0
    rows = []
    with mp.workprec(prec):
        log_n = mp.mpf(0)  # ln(n_1 ... n_k)
        log_c = mp.mpf(0)  # ln(c_1 ... c_k)
        lower_tail_min = None
        upper_tail_min = None
        lower = upper = mp.mpf(0)
        for k in range(1, stages + 1):
            nk = spec.n_at(k)
            ck = spec.c_at(k)
            if nk == 1:
                ones += 1
            log_n += mp.log(nk)
            log_c += mp.log(mp.mpf(ck.numerator)) - mp.log(mp.mpf(ck.denominator))
            den_up = -log_c
            c_next = spec.c_at(k + 1)
            n_next = spec.n_at(k + 1)
            den_lo = -(
                log_c
                + mp.log(mp.mpf(c_next.numerator))
                - mp.log(mp.mpf(c_next.denominator))
                + mp.log(n_next)
            )
            if den_up <= 0 or den_lo <= 0:
                raise DomainError(
                    "contraction logs vanished at stage %d; bounds undefined" % k
                )
            upper = log_n / den_up
            lower = log_n / den_lo
            if k >= tail_start:
                lower_tail_min = lower if lower_tail_min is None else min(lower_tail_min, lower)
                upper_tail_min = upper if upper_tail_min is None else min(upper_tail_min, upper)
            if k in cps:
                rows.append(
                    {"k": k, "lower": float(lower), "upper": float(upper), "n": nk}
                )
    return MoranReport(
        stages,
        float(lower),
        float(upper),
        float(lower_tail_min),
        float(upper_tail_min),
        (tail_start, stages),
        ones,
        rows,
    )


def moran_spec_from_json(obj: dict) -> MoranSpec:
    """{"n": [...], "c": ["1/3", ...], "delta": "1"}; lists repeat last."""
    try:
        ns = tuple(int(x) for x in obj["n"])
        cs = tuple(Fraction(str(x)) for x in obj["c"])
    except KeyError as exc:
        raise ValueError("moran spec needs keys 'n' and 'c'") from exc
    delta = Fraction(str(obj.get("delta", "1")))
    return MoranSpec(ns, cs, delta)
