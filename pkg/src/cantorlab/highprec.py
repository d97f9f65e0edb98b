"""Self-validating floating scalar used for every divergence sum.

A HighPrecReal is a pair (value, err): an mpmath float at a configurable
working precision plus an accumulated rounding-error magnitude.  The
contract is that the true mathematical value of the expression always lies
inside [value - err, value + err].  Error propagation is deliberately
conservative (a 1-ulp-per-operation model inflated by a small guard
factor); we never try to prove tight bounds, only honest ones.

Both members are mpf so the error bound survives the enormous exponents
that show up in the fractal constructions (q_n with thousands of bits);
a machine double would underflow or overflow there.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

import mpmath as mp

from .errors import DegenerateDenominator

DEFAULT_PREC = 128

# Multiplicative guard applied to every propagated bound: absorbs the
# rounding of the bound computation itself, which is also done in floating
# point.
_GUARD = None  # built lazily at import-dependent precision


def _guard():
    global _GUARD
    if _GUARD is None:
        _GUARD = mp.mpf(1) + mp.mpf(2) ** -20
    return _GUARD


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of an mpf (mpf values are dyadic)."""
    if isinstance(x, (int, float)):
        return Fraction(x)
    # never round-trip through mp.mpf: that re-rounds at the ambient
    # context precision and silently discards high-precision bits
    mx = x if hasattr(x, "_mpf_") else mp.mpf(x)
    sign, man, exp, _ = mx._mpf_
    if man == 0:
        if x == 0:
            return Fraction(0)
        raise ValueError("cannot convert non-finite mpf to Fraction")
    f = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -f if sign else f


Coercible = Union["HighPrecReal", int, Fraction]


class HighPrecReal:
    __slots__ = ("value", "err", "prec")

    def __init__(self, value, err=0, prec: int = DEFAULT_PREC):
        self.prec = prec
        with mp.workprec(prec):
            self.value = mp.mpf(value)
            self.err = abs(mp.mpf(err))

    # -- constructors -------------------------------------------------

    @classmethod
    def exact_int(cls, n: int, prec: int = DEFAULT_PREC) -> "HighPrecReal":
        with mp.workprec(prec):
            v = mp.mpf(n)
            # ints wider than the significand round; account for it
            e = abs(v) * mp.mpf(2) ** (1 - prec) if n.bit_length() > prec else 0
        return cls(v, e, prec)

    @classmethod
    def from_fraction(cls, fr: Fraction, prec: int = DEFAULT_PREC) -> "HighPrecReal":
        fr = Fraction(fr)
        with mp.workprec(prec):
            v = mp.mpf(fr.numerator) / mp.mpf(fr.denominator)
            e = abs(v) * mp.mpf(2) ** (2 - prec)  # num, den and quotient round
        return cls(v, e, prec)

    # -- enclosure ----------------------------------------------------

    def to_fraction(self) -> Fraction:
        """Exact rational value of the midpoint (not of the true value)."""
        return mpf_to_fraction(self.value)

    def err_fraction(self) -> Fraction:
        return mpf_to_fraction(self.err)

    def contains(self, exact) -> bool:
        """True iff `exact` (a Fraction or int) lies in [value-err, value+err]."""
        exact = Fraction(exact)
        mid, rad = self.to_fraction(), self.err_fraction()
        return mid - rad <= exact <= mid + rad

    def excludes_zero(self) -> bool:
        with mp.workprec(self.prec):
            return abs(self.value) > self.err

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "HighPrecReal":
        if isinstance(other, HighPrecReal):
            return other
        if isinstance(other, int):
            return HighPrecReal.exact_int(other, self.prec)
        if isinstance(other, Fraction):
            return HighPrecReal.from_fraction(other, self.prec)
        return NotImplemented

    def _ulp(self, v):
        return abs(v) * mp.mpf(2) ** (1 - self.prec)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        with mp.workprec(self.prec):
            v = self.value + o.value
            e = (self.err + o.err + self._ulp(v)) * _guard()
        return HighPrecReal(v, e, self.prec)

    __radd__ = __add__

    def __neg__(self):
        # even unary minus re-rounds at the ambient context precision
        with mp.workprec(self.prec):
            return HighPrecReal(-self.value, self.err, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        with mp.workprec(self.prec):
            v = self.value * o.value
            e = (
                abs(self.value) * o.err
                + abs(o.value) * self.err
                + self.err * o.err
                + self._ulp(v)
            ) * _guard()
        return HighPrecReal(v, e, self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.excludes_zero():
            raise DegenerateDenominator(
                "denominator enclosure %r contains zero" % (o,)
            )
        with mp.workprec(self.prec):
            v = self.value / o.value
            denom_low = abs(o.value) - o.err
            e = ((self.err + abs(v) * o.err) / denom_low + self._ulp(v)) * _guard()
        return HighPrecReal(v, e, self.prec)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    # -- misc ----------------------------------------------------------

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return "HighPrecReal(%s ± %s)" % (
            mp.nstr(self.value, 20),
            mp.nstr(self.err, 3),
        )
