"""Block counts, the normalizing sums Q_n^(k) and friends, discrepancy.

Conventions, fixed once for the whole package:

* Q_n^(k) sums j = 1..n and the length-k window at j may poke past n.
* Q_n^(m,r) sums starts s = r, r+m, ... with s <= n, same poke-past rule,
  so the r-classes partition Q_n^(m) exactly.
* Block occurrence counts are attributed to the position where the block
  *ends*: an occurrence at start j counts toward N_n iff j+k-1 <= n.  This
  makes counts additive across concatenated ranges.
* The stride-m sum of order k ends inside the horizon: s + m(k-1) <= n.
  It equals Q^(k) of the Lambda-restricted base at the matching horizon.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath as mp

from .codec import Digit, HugeMarker, ProgressionIndex, digit_eq, restrict_base
from .errors import RangeError
from .highprec import HighPrecReal
from .sequences import BasicSequence, HugeValue

Block = tuple


def parse_block(text: str) -> Block:
    """Dash-separated digits, e.g. "0-0-1" -> (0, 0, 1)."""
    try:
        block = tuple(int(p) for p in text.split("-"))
    except ValueError:
        raise ValueError("bad block %r, expected digits like 0-0-1" % text) from None
    if not block or any(d < 0 for d in block):
        raise ValueError("blocks need at least one digit, all >= 0")
    return block


def format_block(block: Block) -> str:
    return "-".join(str(d) for d in block)


def _decompose(v) -> tuple:
    # (exp2, mant) so that v = mant * 2**exp2
    if isinstance(v, HugeValue):
        return v.exp2, v.mant
    return 0, v


# ---------------------------------------------------------------------------
# normalizing sums
# ---------------------------------------------------------------------------


def qnk(seq: BasicSequence, k: int, n: int, prec: int = 128) -> HighPrecReal:
    """Q_n^(k) = sum_{j=1}^n 1/(q_j ... q_{j+k-1}), streaming mpf."""
    if k < 1:
        raise RangeError("order k must be >= 1")
    if n < 0:
        raise RangeError("horizon must be >= 0")
    with mp.workprec(prec):
        total = mp.mpf(0)
        if n == 0:
            return HighPrecReal(total, 0, prec)
        window = deque()
        e_tot, m_tot = 0, 1
        values = seq.iter_values(1, n + k)
        for _ in range(k):
            e, m = _decompose(next(values))
            window.append((e, m))
            e_tot += e
            m_tot *= m
        for j in range(1, n + 1):
            total += mp.ldexp(1 / mp.mpf(m_tot), -e_tot)
            if j < n:
                e_old, m_old = window.popleft()
                e, m = _decompose(next(values))
                window.append((e, m))
                e_tot += e - e_old
                m_tot = m_tot * m // m_old
        err = (n + 2) * mp.ldexp(total, 1 - prec)
        return HighPrecReal(total, err, prec)


def qnk_fraction(seq: BasicSequence, k: int, n: int) -> Fraction:
    """Exact Q_n^(k); intended for small horizons and oracle checks."""
    total = Fraction(0)
    for j in range(1, n + 1):
        den = 1
        for l in range(k):
            v = seq.value(j + l)
            den *= int(v) if isinstance(v, HugeValue) else v
        total += Fraction(1, den)
    return total


def qnmr(seq: BasicSequence, m: int, r: int, n: int, prec: int = 128) -> HighPrecReal:
    """Q_n^(m,r): contiguous length-m products at starts r, r+m, ... <= n."""
    if m < 1 or not 1 <= r <= m:
        raise RangeError("need m >= 1 and 1 <= r <= m")
    with mp.workprec(prec):
        total = mp.mpf(0)
        count = 0
        if r <= n:
            values = seq.iter_values(r, ((n - r) // m) * m + r + m)
            s = r
            while s <= n:
                e_tot, m_tot = 0, 1
                for _ in range(m):
                    e, mant = _decompose(next(values))
                    e_tot += e
                    m_tot *= mant
                total += mp.ldexp(1 / mp.mpf(m_tot), -e_tot)
                count += 1
                s += m
        err = (count + 2) * mp.ldexp(total, 1 - prec)
        return HighPrecReal(total, err, prec)


def qnmr_fraction(seq: BasicSequence, m: int, r: int, n: int) -> Fraction:
    total = Fraction(0)
    s = r
    while s <= n:
        den = 1
        for l in range(m):
            v = seq.value(s + l)
            den *= int(v) if isinstance(v, HugeValue) else v
        total += Fraction(1, den)
        s += m
    return total


def ap2_horizon(k: int, m: int, r: int, n: int) -> int:
    """Number of stride-m starts s = r + m*i with s + m(k-1) <= n."""
    if n < r + m * (k - 1):
        return 0
    return (n - r) // m - k + 2


def ap2_sum(seq: BasicSequence, k: int, m: int, r: int, n: int, prec: int = 128) -> HighPrecReal:
    """Expected count of stride-m order-k blocks: Q^(k) of the restricted base."""
    horizon = ap2_horizon(k, m, r, n)
    if horizon <= 0:
        return HighPrecReal(mp.mpf(0), 0, prec)
    return qnk(restrict_base(seq, ProgressionIndex(m, r)), k, horizon, prec)


def ap2_sum_fraction(seq: BasicSequence, k: int, m: int, r: int, n: int) -> Fraction:
    horizon = ap2_horizon(k, m, r, n)
    if horizon <= 0:
        return Fraction(0)
    return qnk_fraction(restrict_base(seq, ProgressionIndex(m, r)), k, horizon)


# ---------------------------------------------------------------------------
# block counting
# ---------------------------------------------------------------------------


def _match_at_end(buf: deque, block: Block) -> bool:
    k = len(block)
    if len(buf) < k:
        return False
    off = len(buf) - k
    for l in range(k):
        if not digit_eq(buf[off + l], block[l]):
            return False
    return True


def count_blocks(
    digits: Iterable[Digit],
    blocks: Sequence[Block],
    checkpoints: Sequence[int],
) -> dict:
    """Cumulative N_n(B) at each checkpoint, one streaming pass.

    An occurrence starting at j is scored when its last digit arrives, so
    the value at checkpoint n counts exactly the starts with j+k-1 <= n.
    """
    blocks = [tuple(b) for b in blocks]
    cps = sorted(set(checkpoints))
    if not cps or cps[0] < 1:
        raise RangeError("checkpoints must be positive")
    kmax = max(len(b) for b in blocks)
    buf: deque = deque(maxlen=kmax)
    counts = {b: 0 for b in blocks}
    out: dict[int, dict] = {}
    cp_iter = iter(cps)
    next_cp = next(cp_iter)
    n = 0
    for d in digits:
        n += 1
        buf.append(d)
        for b in blocks:
            if _match_at_end(buf, b):
                counts[b] += 1
        while next_cp is not None and n == next_cp:
            out[next_cp] = dict(counts)
            next_cp = next(cp_iter, None)
        if next_cp is None and n >= cps[-1]:
            break
    if next_cp is not None:
        raise RangeError("digit stream ended at %d before checkpoint %d" % (n, next_cp))
    return out


def count_blocks_ap1(
    digits: Iterable[Digit],
    m: int,
    blocks: Sequence[Block],
    checkpoints: Sequence[int],
) -> dict:
    """Counts split by start residue class: keys (block, r) with r in 1..m.

    Blocks must have length m (the class of the start is only meaningful
    when block length and modulus agree); summing over r recovers the
    plain count.
    """
    blocks = [tuple(b) for b in blocks]
    for b in blocks:
        if len(b) != m:
            raise ValueError("residue-split counts need block length == m")
    cps = sorted(set(checkpoints))
    if not cps or cps[0] < 1:
        raise RangeError("checkpoints must be positive")
    buf: deque = deque(maxlen=m)
    counts = {(b, r): 0 for b in blocks for r in range(1, m + 1)}
    out: dict[int, dict] = {}
    cp_iter = iter(cps)
    next_cp = next(cp_iter)
    n = 0
    for d in digits:
        n += 1
        buf.append(d)
        if n >= m:
            start = n - m + 1
            r = (start - 1) % m + 1
            for b in blocks:
                if _match_at_end(buf, b):
                    counts[(b, r)] += 1
        while next_cp is not None and n == next_cp:
            out[next_cp] = dict(counts)
            next_cp = next(cp_iter, None)
        if next_cp is None and n >= cps[-1]:
            break
    if next_cp is not None:
        raise RangeError("digit stream ended at %d before checkpoint %d" % (n, next_cp))
    return out


def count_blocks_ap2(
    stream,
    k: int,
    m: int,
    r: int,
    checkpoints: Sequence[int],
    blocks: Sequence[Block],
) -> dict:
    """Stride-m block counts via the restricted digit stream.

    Checkpoints are positions in the *original* stream; a stride occurrence
    with last letter at position r+m(i+k-1) <= n is counted at n.
    """
    from .codec import restrict_digits

    sub = restrict_digits(stream, ProgressionIndex(m, r))
    cps = sorted(set(checkpoints))
    sub_cps = [ap2_horizon(k, m, r, n) + k - 1 for n in cps]
    # horizon in the substream: last start index + (k-1) trailing letters
    usable = [c for c in sub_cps if c >= 1]
    if not usable:
        return {n: {tuple(b): 0 for b in blocks} for n in cps}
    raw = count_blocks(sub.iter_digits(1, max(usable) + 1), blocks, sorted(set(usable)))
    out = {}
    for n, c in zip(cps, sub_cps):
        if c < 1:
            out[n] = {tuple(b): 0 for b in blocks}
        else:
            out[n] = raw[c]
    return out


# ---------------------------------------------------------------------------
# discrepancy and low-discrepancy references
# ---------------------------------------------------------------------------


def star_discrepancy(points) -> Fraction:
    """Exact D*_N of a finite point set in [0, 1]."""
    pts = sorted(Fraction(p) for p in points)
    if not pts:
        raise ValueError("need at least one point")
    if pts[0] < 0 or pts[-1] > 1:
        raise ValueError("points must lie in [0, 1]")
    n = len(pts)
    best = Fraction(0)
    for i, u in enumerate(pts, 1):
        best = max(best, Fraction(i, n) - u, u - Fraction(i - 1, n))
    return best


def van_der_corput(count: int) -> list:
    """First `count` terms (n = 1..count) of the base-2 radical inverse."""
    out = []
    for n in range(1, count + 1):
        num, den = 0, 1
        while n:
            den <<= 1
            num = (num << 1) | (n & 1)
            n >>= 1
        out.append(Fraction(num, den))
    return out


def mod1_distance(x: Fraction) -> Fraction:
    """Distance from x to the nearest integer."""
    x = Fraction(x)
    frac = x - (x.numerator // x.denominator)
    return min(frac, 1 - frac)
