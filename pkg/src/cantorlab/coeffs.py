"""Window coefficient vectors c_{t,i} and their window sums.

For a window parameter t >= 1, a perturbation eps >= 0 and a set S, the
coefficient vector is

    c_1 = t * (1+eps)^(1 - [1 in S])
    c_i = (1+eps)^([i-1 in S] - [i in S])        (2 <= i <= t)

so each interior coefficient is one of 1/(1+eps), 1, 1+eps.  The window sum
of order k is

    ws(k) = sum_{i=1}^{t-k+1} c_i c_{i+1} ... c_{i+k-1}

and it telescopes to the closed form

    ws(k) = (1 + [k not in S] eps) t + (t - k) + a*eps + b*eps^2/(1+eps)

with a = sum_{i=2}^{t-k+1} ([i-1 in S] - [i+k-1 in S]) and b the number of
those i where the difference is -1.  Everything here is exact Fraction
arithmetic; callers convert to floats at the edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import RangeError
from .sequences import SSet


@dataclass(frozen=True)
class WindowCoefficients:
    t: int
    eps: Fraction
    sset: SSet
    values: tuple  # (c_1, ..., c_t) as Fractions

    def __getitem__(self, i: int) -> Fraction:
        # 1-based, matching the c_{t,i} indexing
        if not 1 <= i <= self.t:
            raise RangeError("coefficient index %d outside 1..%d" % (i, self.t))
        return self.values[i - 1]


def coefficients(t: int, eps, sset: SSet) -> WindowCoefficients:
    if t < 1:
        raise RangeError("window parameter t must be >= 1")
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    u = 1 + eps
    ind = lambda i: 1 if i in sset else 0
    vals = [Fraction(t) * u ** (1 - ind(1))]
    for i in range(2, t + 1):
        vals.append(u ** (ind(i - 1) - ind(i)))
    return WindowCoefficients(t, eps, sset, tuple(vals))


def window_sum(coeffs, k: int) -> Fraction:
    """Sum of all length-k products of consecutive coefficients."""
    values = coeffs.values if isinstance(coeffs, WindowCoefficients) else tuple(coeffs)
    t = len(values)
    if not 1 <= k <= t:
        raise RangeError("order k=%d outside 1..%d" % (k, t))
    prod = Fraction(1)
    for v in values[:k]:
        prod *= v
    total = prod
    for i in range(1, t - k + 1):
        prod = prod * values[i + k - 1] / values[i - 1]
        total += prod
    return total


def closed_form(t: int, eps, sset: SSet, k: int) -> Fraction:
    """Telescoped value of window_sum(coefficients(t, eps, S), k)."""
    if not 1 <= k <= t:
        raise RangeError("order k=%d outside 1..%d" % (k, t))
    eps = Fraction(eps)
    ind = lambda i: 1 if i in sset else 0
    a = 0
    b = 0
    for i in range(2, t - k + 2):
        d = ind(i - 1) - ind(i + k - 1)
        a += d
        if d == -1:
            b += 1
    lead = (1 + (1 - ind(k)) * eps) * t
    return lead + (t - k) + a * eps + b * eps * eps / (1 + eps)


def ap1_window_sum(coeffs, m: int, r: int) -> Fraction:
    """Length-m consecutive products starting at i = r, r+m, r+2m, ...

    Starts are capped at t-m+1 so every product fits inside the window.
    Summing over r = 1..m recovers window_sum(coeffs, m).
    """
    values = coeffs.values if isinstance(coeffs, WindowCoefficients) else tuple(coeffs)
    t = len(values)
    if not 1 <= m <= t:
        raise RangeError("modulus m=%d outside 1..%d" % (m, t))
    if not 1 <= r <= m:
        raise RangeError("residue r=%d outside 1..%d" % (r, m))
    total = Fraction(0)
    i = r
    while i <= t - m + 1:
        prod = Fraction(1)
        for v in values[i - 1 : i + m - 1]:
            prod *= v
        total += prod
        i += m
    return total


def ap2_window_sum(coeffs, k: int, m: int, r: int) -> Fraction:
    """Stride-m products c_s c_{s+m} ... c_{s+m(k-1)} over starts s = r + m*i.

    The last factor must stay inside the window: s + m(k-1) <= t.
    """
    values = coeffs.values if isinstance(coeffs, WindowCoefficients) else tuple(coeffs)
    t = len(values)
    if k < 1:
        raise RangeError("order k must be >= 1")
    if m < 1 or not 1 <= r <= m:
        raise RangeError("need m >= 1 and 1 <= r <= m")
    total = Fraction(0)
    s = r
    while s + m * (k - 1) <= t:
        prod = Fraction(1)
        for j in range(k):
            prod *= values[s + m * j - 1]
        total += prod
        s += m
    return total


def limit_ratio(t: int, eps, sset: SSet, k: int) -> Fraction:
    """ws(k) / (2t): the per-window normalization used in frequency limits."""
    return window_sum(coefficients(t, eps, sset), k) / (2 * t)
