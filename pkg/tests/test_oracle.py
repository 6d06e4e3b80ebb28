import numpy as np
import pytest

from saddleflow.dynamics import FlowParams, FlowState, rhs_accelerated
from saddleflow.functions import Logistic, Quadratic, Zero
from saddleflow.geometry import Box, Simplex, WholeSpace
from saddleflow.mirror import EntropyMap
from saddleflow.oracle import (OracleError, ReferenceSolution, augment_reference, fit_rate,
                               fit_window, solve_extragradient, solve_quadratic_kkt)
from saddleflow.problem import SaddleProblem, kkt_residual, random_quadratic_problem


def quad(a, b, h):
    return SaddleProblem(Quadratic.centered([[1.0]], [a]), Quadratic.centered([[1.0]], [b]),
                         [[h]], WholeSpace(1), WholeSpace(1))


def test_kkt_examples():
    r = solve_quadratic_kkt(quad(1.0, 1.0, 1.0))
    assert np.allclose([r.x_star[0], r.y_star[0]], [0.0, 1.0], atol=1e-14)
    r = solve_quadratic_kkt(quad(0.4, -2.0, 0.0))
    assert np.allclose([r.x_star[0], r.y_star[0]], [0.4, -2.0])
    r = solve_quadratic_kkt(quad(0.0, 0.0, 1.0))
    assert np.allclose([r.x_star[0], r.y_star[0]], [0.0, 0.0])
    assert r.method == "analytic_kkt" and r.accuracy <= 1e-14


def test_kkt_errors():
    singular = SaddleProblem(Quadratic(np.zeros((1, 1)), [1.0]), Quadratic(np.zeros((1, 1)), [0.0]),
                             [[0.0]], WholeSpace(1), WholeSpace(1))
    with pytest.raises(OracleError):
        solve_quadratic_kkt(singular)
    boxed = SaddleProblem(Quadratic(np.eye(1), [0.0]), Quadratic(np.eye(1), [0.0]), [[0.0]],
                          Box([0.0], [1.0]), WholeSpace(1))
    with pytest.raises(OracleError):
        solve_quadratic_kkt(boxed)
    with pytest.raises(OracleError):
        solve_quadratic_kkt(SaddleProblem(Zero(1), Zero(1), [[1.0]], WholeSpace(1), WholeSpace(1)))


def test_extragradient_matches_kkt():
    prob = quad(1.0, 1.0, 1.0)
    eg = solve_extragradient(prob, tol=1e-10)
    assert np.allclose(eg.x_star, [0.0], atol=1e-8) and np.allclose(eg.y_star, [1.0], atol=1e-8)
    assert eg.accuracy <= 1e-10 and eg.method == "extragradient"


def test_extragradient_boundary_solution():
    prob = SaddleProblem(Quadratic.centered([[1.0]], [-1.0]), Quadratic(np.eye(1), [0.0]),
                         [[0.0]], Box([0.0], [2.0]), WholeSpace(1))
    r = solve_extragradient(prob, tol=1e-12)
    assert r.x_star[0] == pytest.approx(0.0, abs=1e-12)


def test_extragradient_starting_at_saddle():
    prob = quad(1.0, 1.0, 1.0)
    r = solve_extragradient(prob, x0=[0.0], y0=[1.0], tol=1e-10)
    assert r.iterations <= 1


def test_extragradient_max_iter_reports_best():
    prob = random_quadratic_problem(3, 3, seed=4)
    with pytest.raises(OracleError) as info:
        solve_extragradient(prob, tol=1e-14, max_iter=5)
    best = info.value.best
    assert best is not None and best.iterations == 5
    assert best.accuracy == pytest.approx(kkt_residual(prob, best.x_star, best.y_star))


def test_extragradient_recovers_from_large_step():
    prob = quad(1.0, 1.0, 1.0)
    r = solve_extragradient(prob, step=50.0, tol=1e-9, max_iter=100_000)
    assert np.allclose([r.x_star[0], r.y_star[0]], [0.0, 1.0], atol=1e-7)


def test_extragradient_general_default_step(rng):
    f = Logistic(rng.uniform(size=(6, 1)), np.array([1.0, -1, 1, -1, 1, 1]))
    prob = SaddleProblem(f, Quadratic(np.eye(2), [0.0, 0.0]), 0.1 * rng.normal(size=(2, 2)),
                         Box([-1.0, -1.0], [1.0, 1.0]), WholeSpace(2))
    r = solve_extragradient(prob, tol=1e-9)
    assert kkt_residual(prob, r.x_star, r.y_star) <= 1e-9


def test_reference_round_trip():
    r = ReferenceSolution(np.array([1.0, 2.0]), np.array([3.0]), 1e-12, "extragradient", 7)
    r2 = ReferenceSolution.from_dict(r.to_dict())
    assert np.array_equal(r2.x_star, r.x_star) and r2.iterations == 7


def entropy_problem(b):
    return SaddleProblem(Quadratic(np.eye(3), b), Quadratic(np.eye(1), [0.2]),
                         [[0.3], [0.0], [-0.4]], Simplex(3), Box([0.0], [0.1]), EntropyMap(3))


def test_augment_reference_is_equilibrium():
    prob = entropy_problem([0.1, -0.1, 0.05])
    ref = solve_extragradient(prob, tol=1e-12)
    assert np.all(ref.x_star > 0.1)
    eq = augment_reference(prob, ref)
    d = rhs_accelerated(prob, FlowParams(), FlowState(*eq, 3.0))
    assert max(np.abs(c).max() for c in d) <= 1e-9


def test_entropy_boundary_saddle_has_no_finite_dual():
    # zero coordinates of x* are strictly active: x, y and v are stationary but u_0 keeps falling
    prob = entropy_problem([1.0, -1.0, 0.5])
    ref = solve_extragradient(prob, tol=1e-12)
    assert ref.x_star[0] == 0.0
    eq = augment_reference(prob, ref)
    dx, du, dy, dv = rhs_accelerated(prob, FlowParams(), FlowState(*eq, 3.0))
    assert np.abs(dx).max() <= 1e-12 and np.abs(dy).max() <= 1e-12
    active = ref.x_star == 0.0
    assert np.abs(dv).max() <= 1e-9 and np.abs(du[~active]).max() <= 1e-9
    assert np.all(du[active] < 0)


def test_fit_rate_examples():
    s, _, r2 = fit_rate([(1, 1), (10, 1e-2), (100, 1e-4)])
    assert s == pytest.approx(-2.0) and r2 == pytest.approx(1.0)
    assert fit_rate([(1, 1), (10, 0.1), (100, 0.01)])[0] == pytest.approx(-1.0)
    s, _, r2 = fit_rate([(1, 3), (2, 3), (5, 3)])
    assert s == 0.0 and r2 == 1.0


def test_fit_rate_errors_and_floor():
    with pytest.raises(ValueError):
        fit_rate([(1, 1), (2, 0.5)])
    with pytest.raises(ValueError):
        fit_rate([(0, 1), (1, 1), (2, 1)])
    with pytest.raises(ValueError):
        fit_rate([(1, 1), (2, 1e-16), (3, 0.0), (4, 1.0)])
    s, _, _ = fit_rate([(1, 1), (10, 0.1), (100, 0.01), (1000, 1e-20)])
    assert s == pytest.approx(-1.0)


def test_fit_rate_scale_invariance(rng):
    t = np.geomspace(1, 100, 30)
    v = t ** -1.5 * np.exp(rng.normal(scale=0.1, size=30))
    s1, i1, _ = fit_rate(np.column_stack([t, v]))
    s2, i2, _ = fit_rate(np.column_stack([t, 7.3 * v]))
    assert abs(s1 - s2) <= 1e-12
    assert i2 - i1 == pytest.approx(np.log(7.3))


def test_fit_window_excludes_transient():
    t = np.geomspace(1e-3, 100, 200)
    v = np.where(t < 1, 1.0, t ** -2.0)
    assert fit_window(t, v)[0] == pytest.approx(-2.0)
    assert fit_window(t, v, t_end=100, span=1e5)[0] > -1.9
