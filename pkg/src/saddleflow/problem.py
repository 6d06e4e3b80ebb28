"""Constrained bilinear saddle-point problems.

``L(x, y) = F(x) + x'Hy - G(y)`` minimized over ``x in X`` and maximized over
``y in Y``.  Besides the data model this module evaluates the quantities
used to certify convergence: the duality gap against a reference saddle,
the Lyapunov energy of the accelerated flow, and a projected KKT residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ConvexSet, DimensionError, WholeSpace
from .mirror import EuclideanMap, MirrorMap


@dataclass(frozen=True, eq=False)
class SaddleProblem:
    """Data of a constrained BSPP.

    ``F`` and ``G`` are objects with ``value`` and ``grad`` methods (see
    :mod:`saddleflow.functions`).  Mirror maps default to the Euclidean map
    on the corresponding set.
    """

    F: object
    G: object
    H: np.ndarray
    set_X: ConvexSet
    set_Y: ConvexSet
    map_psi: MirrorMap | None = None
    map_phi: MirrorMap | None = None
    label: str = ""

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        object.__setattr__(self, "H", H)
        p, q = self.set_X.dim, self.set_Y.dim
        if H.shape != (p, q):
            raise DimensionError(f"H has shape {H.shape}, sets need ({p}, {q})")
        if getattr(self.F, "dim", p) != p or getattr(self.G, "dim", q) != q:
            raise DimensionError("F and G dimensions must match the sets")
        if self.map_psi is None:
            object.__setattr__(self, "map_psi", EuclideanMap(self.set_X))
        if self.map_phi is None:
            object.__setattr__(self, "map_phi", EuclideanMap(self.set_Y))
        if self.map_psi.dim != p or self.map_phi.dim != q:
            raise DimensionError("mirror map dimensions must match the sets")
        if self.map_psi.domain.to_dict() != self.set_X.to_dict():
            raise ValueError("map_psi must have domain equal to set_X")
        if self.map_phi.domain.to_dict() != self.set_Y.to_dict():
            raise ValueError("map_phi must have domain equal to set_Y")

    @property
    def p(self) -> int:
        return self.set_X.dim

    @property
    def q(self) -> int:
        return self.set_Y.dim

    @property
    def unconstrained(self) -> bool:
        return isinstance(self.set_X, WholeSpace) and isinstance(self.set_Y, WholeSpace)

    def check_dims(self, x, y):
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape[0] != self.p or y.shape[0] != self.q:
            raise DimensionError(f"expected x in R^{self.p}, y in R^{self.q}")
        return x, y


@dataclass(frozen=True, eq=False)
class SaddleCandidate:
    """A feasible point pair, typically a reference saddle from the oracle."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(-1))

    def is_feasible(self, prob: SaddleProblem, tol: float = 1e-8) -> bool:
        return prob.set_X.distance(self.x) <= tol and prob.set_Y.distance(self.y) <= tol


def lagrangian_value(prob: SaddleProblem, x, y) -> float:
    x, y = prob.check_dims(x, y)
    return float(prob.F.value(x) + x @ prob.H @ y - prob.G.value(y))


def duality_gap(prob: SaddleProblem, x, y, saddle: SaddleCandidate) -> float:
    """``L(x, y*) - L(x*, y)``."""
    return lagrangian_value(prob, x, saddle.y) - lagrangian_value(prob, saddle.x, y)


def lyapunov_value(prob: SaddleProblem, state, equilibrium, r: float) -> float:
    """Energy ``(t^2/r) gap + r D*(u, u*) + r D*(v, v*)`` of the accelerated flow.

    ``state`` is a :class:`~saddleflow.dynamics.FlowState`; ``equilibrium`` is
    the tuple ``(x*, u*, y*, v*)`` returned by
    :func:`~saddleflow.dynamics.equilibrium_from_saddle`.
    """
    if not state.t > 0:
        raise ValueError("lyapunov_value needs t > 0")
    xs, us, ys, vs = equilibrium
    gap = duality_gap(prob, state.x, state.y, SaddleCandidate(xs, ys))
    return (
        state.t**2 / r * gap
        + r * prob.map_psi.bregman_conjugate(state.u, us)
        + r * prob.map_phi.bregman_conjugate(state.v, vs)
    )


def kkt_residual(prob: SaddleProblem, x, y) -> float:
    """Natural-map residual of the saddle KKT system with unit step.

    Zero exactly when ``-grad F(x) - Hy`` lies in the normal cone of X at x
    and ``H'x - grad G(y)`` lies in the normal cone of Y at y.
    """
    x, y = prob.check_dims(x, y)
    rx = x - prob.set_X.project(x - (prob.F.grad(x) + prob.H @ y))
    ry = y - prob.set_Y.project(y + (prob.H.T @ x - prob.G.grad(y)))
    return float(np.linalg.norm(rx) + np.linalg.norm(ry))


def random_quadratic_problem(p: int = 2, q: int = 2, seed=0, curvature=(1e-3, 1e-2),
                             coupling_scale: float = 0.05, map_psi: MirrorMap | None = None,
                             map_phi: MirrorMap | None = None) -> SaddleProblem:
    """Seeded problem with strictly convex quadratic F, G and Gaussian coupling.

    Hessians are ``Q diag(lam) Q'`` with ``Q`` a random orthogonal matrix and
    ``lam`` uniform on ``curvature``; linear terms are standard normal and
    the entries of H are ``N(0, coupling_scale**2)``.  Sets come from the
    mirror maps (default: unconstrained Euclidean).
    """
    from .functions import Quadratic

    lo, hi = curvature
    if not 0 < lo <= hi:
        raise ValueError("curvature must satisfy 0 < low <= high")
    rng = np.random.default_rng(seed)

    def spd(d):
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        return Q @ np.diag(rng.uniform(lo, hi, d)) @ Q.T

    A, C = spd(p), spd(q)
    b_F, b_G = rng.standard_normal(p), rng.standard_normal(q)
    H = coupling_scale * rng.standard_normal((p, q))
    map_psi = map_psi or EuclideanMap(WholeSpace(p))
    map_phi = map_phi or EuclideanMap(WholeSpace(q))
    return SaddleProblem(Quadratic(A, b_F), Quadratic(C, b_G), H, map_psi.domain,
                         map_phi.domain, map_psi, map_phi, label="quadratic")
