"""Basic sequences, the spec mini-language, S-sets and huge lazy integers.

A *basic sequence* is a map n -> q_n (1-based) with every q_n >= 2.  It is
the mixed-radix base of a Cantor series expansion.  Sequences are described
by a small colon-separated grammar::

    spec := "const:" INT | "pow:" RAT ":" RAT    (q_n = floor(b*n^a)+2, a first)
          | "log"                                 (q_n = floor(log2(n+2))+2)
          | "blocks:" "[" INT "]" "^" INT ("," ...)*  ["!"]
          | "file:" PATH
          | "xi:" spec ":" INT ":" RAT ":" sset
    sset := "even" | "odd" | "primes" | "all" | "none" | "sqint"
          | "finite:" INT ("," INT)* | "mod:" INT ":" INT

All integers decimal, rationals "p/q".  For "blocks" the last block repeats
forever unless the list ends with "!".
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import gmpy2

from .errors import OverflowPolicyError, ParseError, RangeError

# Values wider than this many bits are kept as lazy HugeValue objects and
# refuse full materialization (they still compare and expose logs).
HUGE_BIT_CAP = 1 << 20


# ---------------------------------------------------------------------------
# huge lazy integers
# ---------------------------------------------------------------------------


class HugeValue:
    """Lazy representation of mant * 2**exp2 for very large exp2.

    Supports exact comparison against ints and other HugeValues, bit length,
    base-2 logarithm and conversion to mpf, all without materializing the
    full integer.  int() works only below HUGE_BIT_CAP bits.
    """

    __slots__ = ("exp2", "mant")

    def __init__(self, exp2: int, mant: int):
        if mant <= 0 or exp2 < 0:
            raise ValueError("HugeValue needs mant > 0 and exp2 >= 0")
        self.exp2 = exp2
        self.mant = mant

    def bit_length(self) -> int:
        return self.exp2 + self.mant.bit_length()

    def __int__(self) -> int:
        if self.bit_length() > HUGE_BIT_CAP:
            raise OverflowPolicyError(
                "value has %d bits, above the %d-bit cap"
                % (self.bit_length(), HUGE_BIT_CAP)
            )
        return self.mant << self.exp2

    def log2(self) -> float:
        return self.exp2 + math.log2(self.mant)

    def to_mpf(self, prec: int = 128):
        import mpmath as mp

        with mp.workprec(prec):
            return mp.ldexp(mp.mpf(self.mant), self.exp2)

    def _cmp(self, other) -> int:
        if isinstance(other, HugeValue):
            bl_s, bl_o = self.bit_length(), other.bit_length()
            if bl_s != bl_o:
                return -1 if bl_s < bl_o else 1
            # equal bit lengths: the exponent gap is at most the mantissa
            # width, so shifting is cheap and the compare is exact
            d = self.exp2 - other.exp2
            a = self.mant << max(d, 0)
            b = other.mant << max(-d, 0)
            return (a > b) - (a < b)
        if isinstance(other, int):
            if other <= 0:
                return 1
            if self.bit_length() != other.bit_length():
                return -1 if self.bit_length() < other.bit_length() else 1
            a = self.mant << self.exp2  # same width as other: safe to build
            return (a > other) - (a < other)
        return NotImplemented

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __eq__(self, other):
        c = self._cmp(other)
        return False if c is NotImplemented else c == 0

    def __hash__(self):
        return hash((self.exp2, self.mant))

    def __repr__(self):
        return "HugeValue(2**%d * %d)" % (self.exp2, self.mant)


SeqValue = Union[int, HugeValue]


# ---------------------------------------------------------------------------
# S-sets
# ---------------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    # deterministic Miller-Rabin for n < 3.3e24
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class SSet:
    """Computable membership predicate for a set S of positive naturals."""

    kind: str
    members: tuple = ()
    mod: int = 0
    residue: int = 0

    def __contains__(self, n: int) -> bool:
        if n < 1:
            return False
        k = self.kind
        if k == "all":
            return True
        if k == "none":
            return False
        if k == "even":
            return n % 2 == 0
        if k == "odd":
            return n % 2 == 1
        if k == "primes":
            return is_prime(n)
        if k == "sqint":
            r = math.isqrt(n)
            return n <= r * r + r
        if k == "finite":
            return n in self.members
        if k == "mod":
            return n % self.mod == self.residue
        raise AssertionError(k)

    @property
    def label(self) -> str:
        if self.kind == "finite":
            return "finite:" + ",".join(str(m) for m in self.members)
        if self.kind == "mod":
            return "mod:%d:%d" % (self.mod, self.residue)
        return self.kind

    def __repr__(self):
        return "SSet(%s)" % self.label


# ---------------------------------------------------------------------------
# grammar plumbing
# ---------------------------------------------------------------------------


class _Tokens:
    """Colon-separated token stream with character offsets for errors."""

    def __init__(self, text: str):
        self.text = text
        self.items = []
        pos = 0
        for part in text.split(":"):
            self.items.append((part, pos))
            pos += len(part) + 1
        self.i = 0

    def take(self, expected: str) -> tuple[str, int]:
        if self.i >= len(self.items):
            raise ParseError(self.text, len(self.text), expected)
        tok = self.items[self.i]
        self.i += 1
        return tok

    def done(self):
        if self.i != len(self.items):
            part, pos = self.items[self.i]
            raise ParseError(self.text, pos, "end of spec, found %r" % part)


def _parse_int(tokens: _Tokens, what: str) -> int:
    part, pos = tokens.take(what)
    try:
        return int(part)
    except ValueError:
        raise ParseError(tokens.text, pos, "%s (decimal integer)" % what) from None


def _parse_rat(tokens: _Tokens, what: str) -> Fraction:
    part, pos = tokens.take(what)
    m = re.fullmatch(r"(-?\d+)(?:/(\d+))?", part)
    if not m:
        raise ParseError(tokens.text, pos, '%s (rational "p/q")' % what)
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(tokens.text, pos, "%s with nonzero denominator" % what)
    return Fraction(num, den)


def _parse_sset_tokens(tokens: _Tokens) -> SSet:
    part, pos = tokens.take("S-set name")
    if part in ("even", "odd", "primes", "all", "none", "sqint"):
        return SSet(part)
    if part == "finite":
        body, bpos = tokens.take("finite member list")
        try:
            members = tuple(sorted({int(x) for x in body.split(",")}))
        except ValueError:
            raise ParseError(tokens.text, bpos, "comma-separated integers") from None
        if any(m < 1 for m in members):
            raise ValueError("finite S-set members must be >= 1")
        return SSet("finite", members=members)
    if part == "mod":
        m = _parse_int(tokens, "modulus")
        r = _parse_int(tokens, "residue")
        if m < 1 or not (0 <= r < m):
            raise ValueError("mod S-set needs m >= 1 and 0 <= r < m")
        return SSet("mod", mod=m, residue=r)
    raise ParseError(tokens.text, pos, "one of even/odd/primes/all/none/sqint/finite/mod")


def parse_sset(text: str) -> SSet:
    tokens = _Tokens(text)
    s = _parse_sset_tokens(tokens)
    tokens.done()
    return s


# ---------------------------------------------------------------------------
# sequence specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstSpec:
    value: int


@dataclass(frozen=True)
class PowSpec:
    a: Fraction  # exponent
    b: Fraction  # scale


@dataclass(frozen=True)
class LogSpec:
    pass


@dataclass(frozen=True)
class BlocksSpec:
    blocks: tuple  # ((value, count), ...)
    repeat_last: bool = True

    @property
    def total(self) -> int:
        return sum(c for _, c in self.blocks)


@dataclass(frozen=True)
class FileSpec:
    path: str


@dataclass(frozen=True)
class XiSpec:
    inner: "SequenceSpec"
    t: int
    eps: Fraction
    sset: SSet


SequenceSpec = Union[ConstSpec, PowSpec, LogSpec, BlocksSpec, FileSpec, XiSpec]

_BLOCK_ITEM = re.compile(r"\[(\d+)\]\^(\d+)")


def _parse_spec_tokens(tokens: _Tokens) -> SequenceSpec:
    head, pos = tokens.take("spec head")
    if head == "const":
        v = _parse_int(tokens, "constant value")
        if v < 2:
            raise ValueError("basic sequences require q_n >= 2, got const:%d" % v)
        return ConstSpec(v)
    if head == "pow":
        a = _parse_rat(tokens, "exponent a")
        b = _parse_rat(tokens, "scale b")
        if b < 0:
            raise ValueError("pow spec needs scale b >= 0")
        return PowSpec(a, b)
    if head == "log":
        return LogSpec()
    if head == "blocks":
        body, bpos = tokens.take("block list")
        repeat = True
        if body.endswith("!"):
            repeat = False
            body = body[:-1]
        items = body.split(",")
        blocks = []
        off = bpos
        for item in items:
            m = _BLOCK_ITEM.fullmatch(item)
            if not m:
                raise ParseError(tokens.text, off, '"[VALUE]^COUNT"')
            v, c = int(m.group(1)), int(m.group(2))
            if v < 2:
                raise ValueError("basic sequences require q_n >= 2, got block [%d]" % v)
            if c < 1:
                raise ValueError("block counts must be >= 1")
            blocks.append((v, c))
            off += len(item) + 1
        return BlocksSpec(tuple(blocks), repeat)
    if head == "file":
        path, _ = tokens.take("file path")
        return FileSpec(path)
    if head == "xi":
        inner = _parse_spec_tokens(tokens)
        t = _parse_int(tokens, "window parameter t")
        if t < 1:
            raise ValueError("xi spec needs t >= 1")
        eps = _parse_rat(tokens, "epsilon")
        if eps < 0:
            raise ValueError("xi spec needs eps >= 0")
        sset = _parse_sset_tokens(tokens)
        return XiSpec(inner, t, eps, sset)
    raise ParseError(tokens.text, pos, "one of const/pow/log/blocks/file/xi")


def parse_sequence_spec(text: str) -> SequenceSpec:
    tokens = _Tokens(text)
    spec = _parse_spec_tokens(tokens)
    tokens.done()
    return spec


def print_sequence_spec(spec: SequenceSpec) -> str:
    if isinstance(spec, ConstSpec):
        return "const:%d" % spec.value
    if isinstance(spec, PowSpec):
        return "pow:%s:%s" % (spec.a, spec.b)
    if isinstance(spec, LogSpec):
        return "log"
    if isinstance(spec, BlocksSpec):
        body = ",".join("[%d]^%d" % (v, c) for v, c in spec.blocks)
        return "blocks:" + body + ("" if spec.repeat_last else "!")
    if isinstance(spec, FileSpec):
        return "file:" + spec.path
    if isinstance(spec, XiSpec):
        return "xi:%s:%d:%s:%s" % (
            print_sequence_spec(spec.inner),
            spec.t,
            spec.eps,
            spec.sset.label,
        )
    raise TypeError(spec)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_file_cache: dict = {}
_file_lock = threading.Lock()


def _load_file_values(path: str) -> tuple:
    with _file_lock:
        if path in _file_cache:
            return _file_cache[path]
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = int(line)
            except ValueError:
                raise ValueError(
                    "%s:%d: not a decimal integer: %r" % (path, lineno, line)
                ) from None
            if v < 2:
                raise ValueError("%s:%d: basic sequences require q_n >= 2" % (path, lineno))
            vals.append(v)
    out = tuple(vals)
    with _file_lock:
        _file_cache[path] = out
    return out


def _pow_value(spec: PowSpec, n: int) -> int:
    # floor(b * n^a) computed exactly in integers: with a = p/q and b = u/v,
    # floor(u*n^(p/q)/v) = iroot(u^q * n^p, q) // v, and nested floors agree.
    p, q = spec.a.numerator, spec.a.denominator
    u, v = spec.b.numerator, spec.b.denominator
    if p >= 0:
        root = int(gmpy2.iroot(u**q * n**p, q)[0])
        return root // v + 2
    big = u**q // (v**q * n ** (-p))
    return int(gmpy2.iroot(big, q)[0]) + 2


def eval_sequence(spec: SequenceSpec, n: int) -> SeqValue:
    """q_n for the given spec; exact integer arithmetic throughout."""
    if n < 1:
        raise RangeError("positions are 1-based, got n=%d" % n)
    if isinstance(spec, ConstSpec):
        return spec.value
    if isinstance(spec, PowSpec):
        return _pow_value(spec, n)
    if isinstance(spec, LogSpec):
        return (n + 2).bit_length() + 1  # floor(log2(n+2)) + 2
    if isinstance(spec, BlocksSpec):
        rem = n
        for v, c in spec.blocks:
            if rem <= c:
                return v
            rem -= c
        if spec.repeat_last:
            return spec.blocks[-1][0]
        raise RangeError(
            "position %d beyond finite block spec of length %d" % (n, spec.total)
        )
    if isinstance(spec, FileSpec):
        vals = _load_file_values(spec.path)
        if n > len(vals):
            raise RangeError("position %d beyond file of %d values" % (n, len(vals)))
        return vals[n - 1]
    if isinstance(spec, XiSpec):
        from .pipeline import xi_transform  # deferred: pipeline imports us

        return xi_transform(
            BasicSequence.from_spec(spec.inner), spec.t, spec.eps, spec.sset, n
        )
    raise TypeError(spec)


# ---------------------------------------------------------------------------
# BasicSequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceMeta:
    """Declared growth claims.  Verified only at finite horizon; operations
    that need them trust the declaration and log the check."""

    nondecreasing: bool = False
    infinite_in_limit: bool = False
    fully_divergent: bool = False
    divergent_orders: Optional[int] = None  # None = divergent at every order
    notes: tuple = ()


def declared_meta(spec: SequenceSpec) -> SequenceMeta:
    if isinstance(spec, ConstSpec):
        return SequenceMeta(True, False, True)
    if isinstance(spec, PowSpec):
        if spec.a > 0:
            orders = int(Fraction(1) / spec.a)  # k-divergent iff k*a <= 1
            return SequenceMeta(True, True, False, orders)
        if spec.a == 0:
            return SequenceMeta(True, False, True)
        return SequenceMeta(False, False, True, None, ("decreasing exponent",))
    if isinstance(spec, LogSpec):
        return SequenceMeta(True, True, True)
    if isinstance(spec, BlocksSpec):
        vals = [v for v, _ in spec.blocks]
        nondec = all(a <= b for a, b in zip(vals, vals[1:]))
        return SequenceMeta(nondec, False, True)
    if isinstance(spec, FileSpec):
        return SequenceMeta(False, False, False, None, ("file-backed: flags unknown",))
    if isinstance(spec, XiSpec):
        inner = declared_meta(spec.inner)
        return SequenceMeta(
            False,
            inner.infinite_in_limit,
            False,
            None,
            ("window transform: oscillating",),
        )
    raise TypeError(spec)


class BasicSequence:
    """Lazily evaluated, memoized map position -> q_n (>= 2).

    The memo behaves as append-only and is guarded by a lock so concurrent
    readers are safe; evaluation is deterministic, so double computation is
    harmless.
    """

    def __init__(
        self,
        generator: Callable[[int], SeqValue],
        meta: SequenceMeta = SequenceMeta(),
        spec: Optional[SequenceSpec] = None,
        label: str = "",
    ):
        self._generator = generator
        self.meta = meta
        self.spec = spec
        self.label = label or (print_sequence_spec(spec) if spec is not None else "<callable>")
        self._memo: dict[int, SeqValue] = {}
        self._lock = threading.Lock()

    # constructors ------------------------------------------------------

    @classmethod
    def from_spec(cls, spec: Union[str, SequenceSpec], meta: Optional[SequenceMeta] = None):
        if isinstance(spec, str):
            spec = parse_sequence_spec(spec)
        return cls(
            lambda n: eval_sequence(spec, n),
            meta if meta is not None else declared_meta(spec),
            spec=spec,
        )

    @classmethod
    def from_values(cls, values, meta: Optional[SequenceMeta] = None, label: str = "explicit"):
        values = list(values)
        for v in values:
            if isinstance(v, int) and v < 2:
                raise ValueError("basic sequences require q_n >= 2")

        def gen(n: int) -> SeqValue:
            if n > len(values):
                raise RangeError("position %d beyond %d explicit values" % (n, len(values)))
            return values[n - 1]

        if meta is None:
            nondec = all(values[i] <= values[i + 1] for i in range(len(values) - 1))
            meta = SequenceMeta(nondecreasing=nondec)
        return cls(gen, meta, label=label)

    # evaluation --------------------------------------------------------

    def value(self, n: int) -> SeqValue:
        if n < 1:
            raise RangeError("positions are 1-based, got n=%d" % n)
        with self._lock:
            v = self._memo.get(n)
        if v is not None:
            return v
        v = self._generator(n)
        if isinstance(v, int) and v < 2:
            raise ValueError("generator produced q_%d = %d < 2" % (n, v))
        with self._lock:
            self._memo.setdefault(n, v)
        return v

    def raw(self, n: int) -> SeqValue:
        """Compute q_n without consulting or filling the memo."""
        return self._generator(n)

    def iter_values(self, start: int, stop: int):
        """Yield q_start .. q_{stop-1} without touching the memo (bulk path)."""
        for n in range(start, stop):
            yield self._generator(n)

    def __repr__(self):
        return "BasicSequence(%s)" % self.label


# ---------------------------------------------------------------------------
# classification and density reports
# ---------------------------------------------------------------------------


@dataclass
class ClassificationReport:
    horizon: int
    monotone_ok: bool
    first_violation: Optional[int]
    tail_min: SeqValue
    tail_window: tuple
    partial_sums: dict  # k -> (value, trend)
    caveat: str = "finite-horizon evidence, not proof"


def classify(seq: BasicSequence, horizon: int, k_max: int = 3, prec: int = 128) -> ClassificationReport:
    from .stats import qnk  # deferred: stats imports us

    if horizon < 1:
        raise RangeError("horizon must be >= 1")
    monotone_ok = True
    first_violation = None
    prev = None
    tail_start = max(1, horizon - max(horizon // 10, 1) + 1)
    tail_min = None
    for n, v in enumerate(seq.iter_values(1, horizon + 1), 1):
        if prev is not None and not (prev <= v):
            if monotone_ok:
                monotone_ok, first_violation = False, n
        prev = v
        if n >= tail_start and (tail_min is None or v < tail_min):
            tail_min = v
    sums = {}
    half = max(1, horizon // 2)
    for k in range(1, k_max + 1):
        full = qnk(seq, k, horizon, prec=prec)
        part = qnk(seq, k, half, prec=prec)
        fv, pv = float(full), float(part)
        rel = (fv - pv) / fv if fv > 0 else 0.0
        trend = "diverging" if rel >= 0.02 else "converging"
        sums[k] = (fv, trend)
    return ClassificationReport(
        horizon, monotone_ok, first_violation, tail_min, (tail_start, horizon), sums
    )


def almost_closed_report(S: SSet, K: int, N: int) -> list:
    """Density of (S - k) cap (N \\ S) on [1, N] for each k in S cap [1, K].

    Small densities for every k are finite-horizon evidence that S is
    almost closed under addition.
    """
    if K < 1 or N < 1:
        raise RangeError("K and N must be >= 1")
    in_s = [False] + [i in S for i in range(1, N + K + 1)]
    rows = []
    for k in range(1, K + 1):
        if not in_s[k]:
            continue
        count = sum(1 for n in range(1, N + 1) if in_s[n + k] and not in_s[n])
        rows.append({"k": k, "count": count, "density": count / N})
    return rows
