import numpy as np
import pytest

from saddleflow.dynamics import (ContractError, FlowParams, FlowState, accelerated_field,
                                 baseline_field, equilibrium_from_saddle, rhs_accelerated,
                                 rhs_baseline, rhs_baseline_projected)
from saddleflow.functions import Quadratic
from saddleflow.geometry import Ball, Box, Simplex, WholeSpace
from saddleflow.mirror import EntropyMap
from saddleflow.problem import SaddleCandidate, SaddleProblem, random_quadratic_problem


def quad(a=1.0, b=1.0, h=1.0, X=None, Y=None):
    F = Quadratic.centered([[1.0]], [a])
    G = Quadratic.centered([[1.0]], [b])
    return SaddleProblem(F, G, [[h]], X or WholeSpace(1), Y or WholeSpace(1))


def vec(*v):
    return np.array(v, dtype=float)


def test_params_validation():
    with pytest.raises(ValueError):
        FlowParams(r=1.5)
    with pytest.raises(ValueError):
        FlowParams(delta=0.0)
    with pytest.raises(ValueError):
        FlowParams(gain=-1.0)


def test_baseline_examples():
    prob = quad(0.0, 0.0)
    dx, dy = rhs_baseline(prob, vec(1), vec(1))
    assert dx[0] == pytest.approx(-2.0) and dy[0] == pytest.approx(0.0)
    dx, dy = rhs_baseline(quad(), vec(0), vec(1))
    assert np.allclose(dx, 0) and np.allclose(dy, 0)
    dx, _ = rhs_baseline(quad(0.0, 0.0, 0.0), vec(0.7), vec(3))
    assert dx[0] == pytest.approx(-0.7)


def test_baseline_contract():
    with pytest.raises(ContractError):
        rhs_baseline(quad(X=Box([0.0], [1.0])), vec(0.5), vec(0))


def test_baseline_projected():
    prob = quad()
    assert np.allclose(rhs_baseline_projected(prob, vec(0.3), vec(-2))[0],
                       rhs_baseline(prob, vec(0.3), vec(-2))[0])
    p2 = SaddleProblem(Quadratic.centered([[1.0]], [-1.0]), Quadratic(np.eye(1), [0.0]),
                       [[0.0]], Box([0.0], [np.inf]), WholeSpace(1))
    dx, _ = rhs_baseline_projected(p2, vec(0), vec(0))
    assert dx[0] == 0.0


def test_accelerated_hand_example():
    prob = quad(0.0, 0.0, 0.0)
    s = FlowState(vec(1), vec(1), vec(0), vec(0), 2.0)
    dx, du, dy, dv = rhs_accelerated(prob, FlowParams(r=2, delta=0.1), s)
    assert np.allclose([dx[0], du[0], dy[0], dv[0]], [0.0, -1.0, 0.0, 0.0])


def test_accelerated_gain_and_regularization():
    prob = random_quadratic_problem(2, 3, seed=1)
    s = FlowState(vec(1, 2), vec(0, 1), vec(3, 0, 1), vec(1, 1, 1), 0.0)
    base = rhs_accelerated(prob, FlowParams(), s)
    scaled = rhs_accelerated(prob, FlowParams(gain=3.0), s)
    for a, b in zip(base, scaled):
        assert np.allclose(3 * a, b, rtol=1e-15)
    # at t = 0 the dual fields vanish and the primal factor is r / delta
    assert np.allclose(base[1], 0) and np.allclose(base[3], 0)
    assert np.allclose(base[0], 2 / 1e-3 * (s.u - s.x))


def test_unconstrained_reduction_to_nesterov_form(rng):
    prob = random_quadratic_problem(2, 2, seed=2)
    for _ in range(20):
        x, u, y, v = (rng.normal(size=2) for _ in range(4))
        t = rng.uniform(0.01, 5)
        s = FlowState(x, u, y, v, t)
        dx, du, dy, dv = rhs_accelerated(prob, FlowParams(), s)
        assert np.allclose(du, t / 2 * (-prob.F.grad(x) - prob.H @ v), atol=1e-12)
        assert np.allclose(dv, t / 2 * (-prob.G.grad(y) + prob.H.T @ u), atol=1e-12)


def test_flat_fields_match_structured(rng):
    prob = SaddleProblem(Quadratic(np.eye(3), np.ones(3)), Quadratic(np.eye(2), np.zeros(2)),
                         rng.normal(size=(3, 2)), Simplex(3), Ball.centered(2, 1.0),
                         EntropyMap(3))
    s = FlowState.initial(prob)
    s = FlowState(s.x, rng.normal(size=3), s.y, rng.normal(size=2), 1.3)
    f = accelerated_field(prob, FlowParams())
    z = f(1.3, s.pack())
    assert np.allclose(z, np.concatenate(rhs_accelerated(prob, FlowParams(), s)))
    g = baseline_field(prob, gain=2.0)
    assert np.allclose(g(0.0, np.concatenate([s.x, s.y])),
                       2 * np.concatenate(rhs_baseline_projected(prob, s.x, s.y)))


def test_state_pack_round_trip():
    s = FlowState(vec(1, 2), vec(3, 4), vec(5), vec(6), 0.5)
    s2 = FlowState.unpack(s.pack(), 2, 1, 0.5)
    assert np.array_equal(s2.x, s.x) and np.array_equal(s2.v, s.v) and s2.t == 0.5


def test_initial_state_is_feasible():
    prob = SaddleProblem(Quadratic(np.eye(3), np.zeros(3)), Quadratic(np.eye(2), np.zeros(2)),
                         np.zeros((3, 2)), Simplex(3), Box([1.0, 1.0], [2.0, 2.0]),
                         EntropyMap(3))
    s = FlowState.initial(prob)
    assert prob.set_X.contains(s.x) and prob.set_Y.contains(s.y)
    assert s.t == 0.0


def test_equilibrium_examples():
    xs, us, ys, vs = equilibrium_from_saddle(quad(), SaddleCandidate([0.0], [1.0]))
    assert np.allclose([us[0], vs[0]], [0.0, 1.0])
    xs, us, ys, vs = equilibrium_from_saddle(quad(2.0, -1.0, 0.0),
                                             SaddleCandidate([2.0], [-1.0]))
    assert np.allclose(us, xs) and np.allclose(vs, ys)
    prob = SaddleProblem(Quadratic.centered([[1.0]], [-1.0]), Quadratic(np.eye(1), [0.0]),
                         [[0.0]], Box([0.0], [2.0]), WholeSpace(1))
    xs, us, ys, vs = equilibrium_from_saddle(prob, SaddleCandidate([0.0], [0.0]))
    assert us[0] == pytest.approx(-1.0)
    assert prob.map_psi.grad_conjugate(us)[0] == 0.0


def test_equilibrium_is_stationary():
    prob = quad()
    eq = equilibrium_from_saddle(prob, SaddleCandidate([0.0], [1.0]))
    for t in (1e-3, 1.0, 50.0):
        d = rhs_accelerated(prob, FlowParams(), FlowState(*eq, t))
        assert max(np.abs(c).max() for c in d) <= 1e-12


def test_entropy_boundary_equilibrium_uses_floor():
    # linear cost pushes the simplex saddle to a vertex
    F = Quadratic(np.zeros((2, 2)), [1.0, 0.0])
    prob = SaddleProblem(F, Quadratic(np.eye(1), [0.0]), np.zeros((2, 1)), Simplex(2),
                         WholeSpace(1), EntropyMap(2))
    xs, us, ys, vs = equilibrium_from_saddle(prob, SaddleCandidate([0.0, 1.0], [0.0]))
    assert np.all(np.isfinite(us))
    assert np.allclose(prob.map_psi.grad_conjugate(us), [0.0, 1.0], atol=1e-300)
