"""Damped Newton solver for the symmetric window-product systems.

For t unknowns c = (c_1, ..., c_t) the order-k equation sums all length-k
products of *consecutive* coordinates:

    e_k(c) = sum_{i=1}^{t-k+1} c_i c_{i+1} ... c_{i+k-1},   k = 1..t

and the target vector is e_k(c) = (2 + eps_k) t.  With all eps_k = 0 the
solutions of interest live in the box

    R_t = [t, t+1] x [1, 1 + 1/(t-1)]^(t-1).

evaluate_system is type-generic (exact over Fractions); the Newton path
runs on float64 numpy arrays with an O(t^2) jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NoConvergence, RangeError, SingularJacobian

_MIN_STEP = 2.0**-30
_PIVOT_FLOOR = 1e-30


def evaluate_system(c) -> tuple:
    """(e_1(c), ..., e_t(c)); exact when c contains Fractions or ints."""
    c = list(c)
    t = len(c)
    if t < 1:
        raise RangeError("need at least one coordinate")
    prods = list(c)
    out = [sum(prods)]
    for k in range(2, t + 1):
        prods = [prods[i] * c[i + k - 1] for i in range(t - k + 1)]
        out.append(sum(prods))
    return tuple(out)


def _evaluate_np(c: np.ndarray) -> np.ndarray:
    t = c.size
    out = np.empty(t)
    prods = c.copy()
    out[0] = prods.sum()
    for k in range(2, t + 1):
        prods = prods[: t - k + 1] * c[k - 1 :]
        out[k - 1] = prods.sum()
    return out


def jacobian(c) -> np.ndarray:
    """J[k-1, i-1] = d e_k / d c_i, O(t^2) via sliding coverage sums.

    Every length-k window containing position i contributes its product
    divided by c_i, so a cumulative sum of the window products gives the
    whole row at once.  Requires c_i != 0.
    """
    c = np.asarray(c, dtype=float)
    t = c.size
    if np.any(c == 0):
        raise SingularJacobian(0.0, int(np.argmin(np.abs(c))))
    J = np.empty((t, t))
    prods = c.copy()  # length-k window products, k = 1 to start
    idx = np.arange(t)
    for k in range(1, t + 1):
        if k > 1:
            prods = prods[: t - k + 1] * c[k - 1 :]
        csum = np.concatenate(([0.0], np.cumsum(prods)))
        hi = np.minimum(idx, t - k) + 1
        lo = np.maximum(0, idx - k + 1)
        J[k - 1] = (csum[hi] - csum[lo]) / c
    return J


def _solve_linear(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; flags near-singular pivots."""
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    n = A.shape[0]
    for col in range(n):
        p = col + int(np.argmax(np.abs(A[col:, col])))
        pivot = A[p, col]
        if abs(pivot) < _PIVOT_FLOOR:
            raise SingularJacobian(float(pivot), col)
        if p != col:
            A[[col, p]] = A[[p, col]]
            b[[col, p]] = b[[p, col]]
        factors = A[col + 1 :, col] / pivot
        A[col + 1 :, col:] -= np.outer(factors, A[col, col:])
        b[col + 1 :] -= factors * b[col]
    x = np.empty(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1 :] @ x[row + 1 :]) / A[row, row]
    return x


def default_targets(t: int, eps=0) -> np.ndarray:
    """(2 + eps_k) t with eps scalar or per-order sequence."""
    if np.isscalar(eps):
        eps_vec = np.full(t, float(eps))
    else:
        eps_vec = np.asarray([float(e) for e in eps])
        if eps_vec.size != t:
            raise RangeError("need %d eps values, got %d" % (t, eps_vec.size))
    return (2.0 + eps_vec) * t


def default_guess(t: int) -> np.ndarray:
    g = np.empty(t)
    g[0] = t + 0.5
    if t > 1:
        g[1:] = 1 + 1 / (2 * (t - 1))
    return g


def in_region(c: Sequence[float], t: Optional[int] = None, slack: float = 0.0) -> bool:
    c = list(c)
    if t is None:
        t = len(c)
    if len(c) != t:
        return False
    if not (t - slack <= c[0] <= t + 1 + slack):
        return False
    if t == 1:
        return True
    hi = 1 + 1 / (t - 1)
    return all(1 - slack <= ci <= hi + slack for ci in c[1:])


@dataclass
class Solution:
    t: int
    c: tuple
    residual_norm: float
    iterations: int
    converged: bool
    in_region: bool

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "c": list(self.c),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "in_region": self.in_region,
        }


def newton_solve(
    t: int,
    eps=0,
    c0: Optional[Sequence[float]] = None,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> Solution:
    """Damped Newton iteration from c0 (default: center-ish of R_t).

    The step is halved while it leaves the positive orthant or fails to
    reduce the sup-norm residual; NoConvergence carries the best residual
    reached.
    """
    if t < 1:
        raise RangeError("t must be >= 1")
    targets = default_targets(t, eps)
    c = np.asarray(c0, dtype=float) if c0 is not None else default_guess(t)
    if c.size != t:
        raise RangeError("initial guess has %d coordinates, need %d" % (c.size, t))
    if np.any(c <= 0):
        raise RangeError("initial guess must be positive")
    res = _evaluate_np(c) - targets
    rnorm = float(np.max(np.abs(res)))
    best = rnorm
    for it in range(1, max_iter + 1):
        if rnorm <= tol:
            return Solution(t, tuple(c.tolist()), rnorm, it - 1, True, in_region(c, t))
        step = _solve_linear(jacobian(c), -res)
        lam = 1.0
        while True:
            cand = c + lam * step
            if np.all(cand > 0):
                cand_res = _evaluate_np(cand) - targets
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_norm < rnorm:
                    break
            lam *= 0.5
            if lam < _MIN_STEP:
                raise NoConvergence(it, best)
        c, res, rnorm = cand, cand_res, cand_norm
        best = min(best, rnorm)
    if rnorm <= tol:
        return Solution(t, tuple(c.tolist()), rnorm, max_iter, True, in_region(c, t))
    raise NoConvergence(max_iter, best)


def scan_region(t_min: int, t_max: int, tol: float = 1e-10, max_iter: int = 200) -> list:
    """newton_solve across a range of t; failures become dict rows, not raises."""
    rows = []
    for t in range(t_min, t_max + 1):
        try:
            rows.append(newton_solve(t, tol=tol, max_iter=max_iter))
        except (NoConvergence, SingularJacobian) as exc:
            rows.append({"t": t, "error": type(exc).__name__, "detail": str(exc)})
    return rows


# Ascending-coefficient polynomials satisfied by c_2 after eliminating the
# other coordinates from the eps = 0 system; handy cross-checks at t = 3, 4.
C2_ELIMINANT = {
    3: (6, -6, 1),
    4: (-512, 0, 7680, -21248, 27456, -20544, 9376, -2568, 400, -32, 1),
}


def poly_eval(coeffs_ascending: Sequence, x):
    acc = 0
    for a in reversed(list(coeffs_ascending)):
        acc = acc * x + a
    return acc
