"""Digit streams for Cantor series expansions.

A digit stream pairs a basic sequence Q with a map n -> E_n, 0 <= E_n < q_n.
Digits at positions where q_n is a lazy HugeValue are represented by
HugeMarker objects: a uniform draw from [0, q_n) whose bits are revealed
top-down only as far as a comparison needs.  Markers are reproducible from
(seed, position), so a stream can be re-opened or serialized without ever
materializing the draw.
"""

from __future__ import annotations

import math
import random
import threading
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import PrecisionError, RangeError
from .sequences import BasicSequence, HugeValue, SeqValue

_CHUNK = 64


class HugeMarker:
    """Uniform draw from [0, bound) for a HugeValue bound, revealed lazily.

    The draw is X = D * 2^e + R with D = randrange(mant) and R built from
    64-bit chunks top-down.  Comparisons against small ints resolve after
    one or two draws almost surely (D >= 1 already forces X > any small w).
    The chunk sequence is a pure function of (seed, position), so equal
    markers built anywhere compare identically.
    """

    __slots__ = ("seed", "position", "bound", "_rng", "_known", "_unknown")

    def __init__(self, seed: str, position: int, bound: HugeValue):
        if not isinstance(bound, HugeValue):
            raise TypeError("HugeMarker needs a HugeValue bound")
        self.seed = str(seed)
        self.position = position
        self.bound = bound
        self._rng = None
        self._known = None  # revealed top bits (int)
        self._unknown = bound.exp2  # trailing bits not yet drawn

    def _reveal(self):
        # one more step of the lazy draw
        if self._rng is None:
            self._rng = random.Random("%s:%d" % (self.seed, self.position))
            self._known = self._rng.randrange(self.bound.mant)
            return
        w = min(_CHUNK, self._unknown)
        self._known = (self._known << w) | self._rng.getrandbits(w)
        self._unknown -= w

    def cmp_int(self, w: int) -> int:
        """Exact sign of (X - w), drawing only as many bits as needed."""
        if self._rng is None:
            self._reveal()
        while True:
            lo = self._known << self._unknown
            hi = lo + (1 << self._unknown) - 1
            if lo > w:
                return 1
            if hi < w:
                return -1
            if self._unknown == 0:
                return (lo > w) - (lo < w)
            self._reveal()

    def eq_int(self, w: int) -> bool:
        return self.cmp_int(w) == 0

    def min_with(self, w: int) -> Union[int, "HugeMarker"]:
        """min(X, w) as an int when X >= w, else the fully revealed X."""
        if self.cmp_int(w) >= 0:
            return w
        while self._unknown > 0:
            self._reveal()
        return self._known

    def __repr__(self):
        return "HugeMarker(%r, n=%d)" % (self.seed, self.position)


Digit = Union[int, HugeMarker]


def digit_eq(d: Digit, b: int) -> bool:
    if isinstance(d, HugeMarker):
        return d.eq_int(b)
    return d == b


# ---------------------------------------------------------------------------
# streams
# ---------------------------------------------------------------------------


class DigitStream:
    """Memoized map position -> digit over a basic sequence base."""

    def __init__(self, base: BasicSequence, fn: Callable[[int], Digit], label: str = ""):
        self.base = base
        self._fn = fn
        self.label = label
        self._memo: dict[int, Digit] = {}
        self._lock = threading.Lock()

    def digit(self, n: int) -> Digit:
        if n < 1:
            raise RangeError("positions are 1-based, got n=%d" % n)
        with self._lock:
            d = self._memo.get(n)
        if d is not None:
            return d
        d = self._fn(n)
        with self._lock:
            return self._memo.setdefault(n, d)

    def iter_digits(self, start: int, stop: int) -> Iterable[Digit]:
        """Digits for start..stop-1 without memoization (bulk scans)."""
        for n in range(start, stop):
            yield self._fn(n)

    def __repr__(self):
        return "DigitStream(%s)" % self.label


def _check_digit(d: int, q: SeqValue, n: int) -> int:
    if d < 0 or not (q > d):
        raise ValueError("digit %r at position %d violates 0 <= E < q_n" % (d, n))
    return d


def explicit_digits(base: BasicSequence, values) -> DigitStream:
    values = list(values)
    for i, d in enumerate(values, 1):
        _check_digit(d, base.value(i), i)

    def fn(n: int) -> Digit:
        if n > len(values):
            raise RangeError("position %d beyond %d explicit digits" % (n, len(values)))
        return values[n - 1]

    return DigitStream(base, fn, "explicit[%d]" % len(values))


def seeded_uniform_digits(base: BasicSequence, seed) -> DigitStream:
    """E_n uniform on [0, q_n), reproducible per (seed, n).

    Small q_n draw an int; HugeValue q_n get a lazy HugeMarker.
    """
    seed = str(seed)

    def fn(n: int) -> Digit:
        q = base.value(n)
        if isinstance(q, HugeValue):
            return HugeMarker(seed, n, q)
        return random.Random("%s:%d" % (seed, n)).randrange(q)

    return DigitStream(base, fn, "uniform(seed=%s)" % seed)


def psi_digits(inner: DigitStream, target: BasicSequence) -> DigitStream:
    """Digit transfer onto a new base: E'_n = min(E_n, p_n - 1).

    Keeps every digit that already fits the target alphabet and clips the
    rest to the top letter.  Once p_n is at least the inner digit + 1 the
    map is the identity.
    """

    def fn(n: int) -> Digit:
        d = inner.digit(n)
        p = target.value(n)
        if isinstance(p, HugeValue):
            if isinstance(d, HugeMarker):
                if d.bound <= p:
                    return d
                raise PrecisionError(
                    "cannot clip a lazy draw with bound above the target base"
                )
            return d  # any int digit is below a huge p
        if isinstance(d, HugeMarker):
            return d.min_with(p - 1)
        return min(d, p - 1)

    return DigitStream(target, fn, "psi(%s)" % inner.label)


class ProgressionIndex:
    """The arithmetic progression A_{m,r} = {r, r+m, r+2m, ...}, 1 <= r <= m."""

    def __init__(self, m: int, r: int):
        if m < 1 or not 1 <= r <= m:
            raise RangeError("need m >= 1 and 1 <= r <= m")
        self.m = m
        self.r = r

    def position(self, j: int) -> int:
        if j < 1:
            raise RangeError("progression indices are 1-based")
        return self.r + self.m * (j - 1)

    def count_upto(self, n: int) -> int:
        if n < self.r:
            return 0
        return (n - self.r) // self.m + 1

    def __repr__(self):
        return "ProgressionIndex(m=%d, r=%d)" % (self.m, self.r)


def restrict_base(base: BasicSequence, index: ProgressionIndex) -> BasicSequence:
    """Lambda transform of the base: j -> q at the j-th progression position."""
    seq = BasicSequence(
        lambda j: base.raw(index.position(j)),
        base.meta,
        label="lambda[%d,%d](%s)" % (index.m, index.r, base.label),
    )
    return seq


def restrict_digits(inner: DigitStream, index: ProgressionIndex) -> DigitStream:
    """Upsilon of Lambda: the digit stream read along the progression."""
    base = restrict_base(inner.base, index)
    return DigitStream(
        base,
        lambda j: inner.digit(index.position(j)),
        "upsilon[%d,%d](%s)" % (index.m, index.r, inner.label),
    )


# ---------------------------------------------------------------------------
# reals <-> digits
# ---------------------------------------------------------------------------


def digits_from_real(x: Fraction, base: BasicSequence, count: int) -> list:
    """Greedy digits of x in the Cantor series over base, exact arithmetic."""
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    digits = []
    r = x
    for n in range(1, count + 1):
        q = base.value(n)
        if isinstance(q, HugeValue):
            q = int(q)  # may raise OverflowPolicyError; exact digits need q
        r *= q
        e = math.floor(r)
        r -= e
        digits.append(e)
    return digits


def real_from_digits(digits, base: BasicSequence) -> tuple:
    """(value, tail_bound): partial sum of E_n/(q_1...q_n) plus the bound
    1/(q_1...q_N) on everything the finite digit list leaves unspecified."""
    num = 0
    den = 1
    for n, d in enumerate(digits, 1):
        if isinstance(d, HugeMarker):
            raise PrecisionError("lazy marker digits have no exact value")
        q = base.value(n)
        if isinstance(q, HugeValue):
            q = int(q)
        _check_digit(d, q, n)
        num = num * q + d
        den *= q
    return Fraction(num, den), Fraction(1, den)


def tqn(x: Fraction, base: BasicSequence, n: int) -> Fraction:
    """T_{Q,n}(x) = (q_1 ... q_n) x  mod 1, exact."""
    x = Fraction(x)
    if n < 0:
        raise RangeError("n must be >= 0")
    for j in range(1, n + 1):
        q = base.value(j)
        if isinstance(q, HugeValue):
            q = int(q)
        x *= q
        x -= math.floor(x)
    return x


def tail_value(stream: DigitStream, start: int, count: int, prec: int = 128):
    """mpf approximation of sum_{l>=0} E_{start+l} / (q_start ... q_{start+l})
    truncated after count digits; returns (value, tail_bound) as mpfs.

    This is T_{Q,start-1} of the represented real.  Marker digits raise
    PrecisionError since their value is deliberately never materialized.
    """
    import mpmath as mp

    with mp.workprec(prec):
        total = mp.mpf(0)
        den = mp.mpf(1)
        for l in range(count):
            n = start + l
            d = stream.digit(n)
            if isinstance(d, HugeMarker):
                raise PrecisionError(
                    "marker digit at position %d inside requested tail" % n
                )
            q = stream.base.value(n)
            qf = q.to_mpf(prec) if isinstance(q, HugeValue) else mp.mpf(q)
            den *= qf
            total += mp.mpf(d) / den
        return total, 1 / den


# ---------------------------------------------------------------------------
# digit files
# ---------------------------------------------------------------------------

_HEADER = "CANTORDIGITS 1"


def write_digit_file(path: str, stream: DigitStream, count: int):
    """Lines "n<TAB>value" with value decimal, 0x-hex for wide ints, or
    "*seed" for lazy markers (reconstructed against the base on read)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_HEADER + "\n")
        for n in range(1, count + 1):
            d = stream.digit(n)
            if isinstance(d, HugeMarker):
                fh.write("%d\t*%s\n" % (n, d.seed))
            elif d.bit_length() > 256:
                fh.write("%d\t%#x\n" % (n, d))
            else:
                fh.write("%d\t%d\n" % (n, d))


def read_digit_file(path: str, base: BasicSequence) -> DigitStream:
    entries: dict[int, Digit] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _HEADER:
            raise ValueError("%s: bad header %r, expected %r" % (path, header, _HEADER))
        expect = 1
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError("%s:%d: expected 'n<TAB>value'" % (path, lineno))
            try:
                n = int(parts[0])
            except ValueError:
                raise ValueError("%s:%d: bad position %r" % (path, lineno, parts[0])) from None
            if n != expect:
                raise ValueError(
                    "%s:%d: positions must be 1,2,3,... without gaps (got %d, expected %d)"
                    % (path, lineno, n, expect)
                )
            expect += 1
            tok = parts[1]
            if tok.startswith("*"):
                q = base.value(n)
                if not isinstance(q, HugeValue):
                    raise ValueError(
                        "%s:%d: marker digit at position %d but base value is small"
                        % (path, lineno, n)
                    )
                entries[n] = HugeMarker(tok[1:], n, q)
            else:
                try:
                    d = int(tok, 0)
                except ValueError:
                    raise ValueError("%s:%d: bad digit %r" % (path, lineno, tok)) from None
                _check_digit(d, base.value(n), n)
                entries[n] = d

    def fn(n: int) -> Digit:
        if n not in entries:
            raise RangeError("position %d beyond stored digits (%d)" % (n, len(entries)))
        return entries[n]

    return DigitStream(base, fn, "file:%s" % path)
