"""Newton solver for the consecutive-product systems e_k(c) = (2+eps_k) t."""

import math

import numpy as np
import pytest

from cantorlab import (
    NoConvergence,
    RangeError,
    SingularJacobian,
    default_targets,
    evaluate_system,
    in_region,
    jacobian,
    newton_solve,
    scan_region,
)
from cantorlab.solver import C2_ELIMINANT, _solve_linear, default_guess, poly_eval
from tests.conftest import brute_product_sum


# ---------------------------------------------------------------------------
# system evaluation
# ---------------------------------------------------------------------------


def test_evaluate_321_exactly():
    assert evaluate_system((3, 2, 1)) == (6, 8, 6)


def test_evaluate_matches_window_products():
    c = (2.5, 1.25, 1.1, 0.9)
    ek = evaluate_system(c)
    for k in range(1, 5):
        assert ek[k - 1] == pytest.approx(float(brute_product_sum(c, k)), rel=1e-12)


def test_default_targets():
    assert list(default_targets(3)) == [6.0, 6.0, 6.0]
    assert list(default_targets(3, eps=0.5)) == [7.5, 7.5, 7.5]
    assert list(default_targets(2, eps=[0.0, 0.5])) == [4.0, 5.0]


# ---------------------------------------------------------------------------
# Jacobian
# ---------------------------------------------------------------------------


def central_difference_jacobian(c, h=1e-7):
    c = np.asarray(c, dtype=float)
    t = len(c)
    J = np.zeros((t, t))
    for j in range(t):
        up, dn = c.copy(), c.copy()
        up[j] += h
        dn[j] -= h
        J[:, j] = (np.asarray(evaluate_system(up)) - np.asarray(evaluate_system(dn))) / (2 * h)
    return J


@pytest.mark.parametrize("c", [(3.0, 1.2, 1.4), (4.3, 1.15, 1.24, 1.3), (2.0, 1.5)])
def test_jacobian_matches_central_differences(c):
    J = jacobian(c)
    Jnum = central_difference_jacobian(c)
    assert np.max(np.abs(J - Jnum)) <= 1e-5


# ---------------------------------------------------------------------------
# Newton iterations
# ---------------------------------------------------------------------------


def test_t3_solution_frozen():
    sol = newton_solve(3)
    assert sol.converged and sol.in_region
    assert sol.residual_norm <= 1e-10
    assert sol.c == pytest.approx(
        (3.296630262886539, 1.2679491924311226, 1.435420544682339), abs=1e-9
    )
    assert sol.iterations <= 8
    # c_2 is algebraic: the eliminant root 3 - sqrt(3)
    assert abs(sol.c[1] - (3 - math.sqrt(3))) <= 1e-12
    assert abs(poly_eval(C2_ELIMINANT[3], sol.c[1])) <= 1e-10


def test_t4_solution_frozen():
    sol = newton_solve(4)
    assert sol.converged and sol.in_region
    assert sol.c == pytest.approx((4.307834, 1.151772, 1.238081, 1.302313), abs=1e-5)
    assert abs(poly_eval(C2_ELIMINANT[4], sol.c[1])) <= 1e-6


def test_solution_satisfies_system():
    sol = newton_solve(5)
    ek = evaluate_system(sol.c)
    assert all(abs(v - 10.0) <= 1e-9 for v in ek)


def test_perturbed_targets():
    sol = newton_solve(3, eps=0.25)
    ek = evaluate_system(sol.c)
    assert all(abs(v - 6.75) <= 1e-9 for v in ek)


def test_custom_guess_converges_to_same_point():
    a = newton_solve(4)
    b = newton_solve(4, c0=[4.5, 1.05, 1.2, 1.25])
    assert a.c == pytest.approx(b.c, abs=1e-9)


def test_t1_trivial():
    sol = newton_solve(1)
    assert sol.c[0] == pytest.approx(2.0, abs=1e-12)


def test_no_convergence_carries_best_residual():
    with pytest.raises(NoConvergence) as ei:
        newton_solve(8, max_iter=1)
    assert ei.value.max_iter == 1
    assert ei.value.best_residual > 0


def test_validation():
    with pytest.raises(RangeError):
        newton_solve(0)


def test_as_dict_round_trip():
    d = newton_solve(3).as_dict()
    assert set(d) == {"t", "c", "residual_norm", "iterations", "converged", "in_region"}
    assert d["t"] == 3 and len(d["c"]) == 3


# ---------------------------------------------------------------------------
# region membership
# ---------------------------------------------------------------------------


def test_in_region_bounds():
    # R_t = [t, t+1] x [1, 1 + 1/(t-1)]^(t-1)
    assert in_region((3.5, 1.2, 1.4), 3)
    assert not in_region((2.9, 1.2, 1.4), 3)
    assert not in_region((4.2, 1.2, 1.4), 3)
    assert not in_region((3.5, 0.99, 1.4), 3)
    assert not in_region((3.5, 1.2, 1.51), 3)
    assert in_region((3.5, 1.2, 1.51), 3, slack=0.02)


def test_scan_region_small_range():
    rows = scan_region(2, 12)
    assert len(rows) == 11
    assert all(isinstance(r.c, tuple) and r.converged and r.in_region for r in rows)
    assert all(r.residual_norm <= 1e-8 for r in rows)


# ---------------------------------------------------------------------------
# linear algebra guard
# ---------------------------------------------------------------------------


def test_singular_jacobian_reported():
    with pytest.raises(SingularJacobian) as ei:
        _solve_linear(np.zeros((2, 2)), np.ones(2))
    assert ei.value.column in (0, 1)


def test_poly_eval_horner():
    assert poly_eval((1, 2, 3), 2) == 1 + 4 + 12
    assert poly_eval(C2_ELIMINANT[3], 3 - math.sqrt(3)) == pytest.approx(0, abs=1e-12)
