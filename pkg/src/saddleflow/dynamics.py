"""Vector fields of the primal-dual flows.

Two families:

* the baseline primal-dual gradient flow (and a projected variant usable with
  constraints);
* the accelerated primal-dual mirror-descent flow in explicit form.  The
  implicit terms ``x + (t/r) x'`` are replaced by ``grad_conjugate(u)``, which
  is exact for ``t >= delta``; the ``r/t`` factor is regularized to
  ``r / max(delta, t)`` so the flow can start at ``t = 0``.

The flat layouts used by the integrator are ``[x, y]`` for the baseline and
``[x, u, y, v]`` for the accelerated flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mirror import BlockMap, EntropyMap, MirrorMap
from .problem import SaddleCandidate, SaddleProblem

# log floor used when an entropy equilibrium sits on the simplex boundary
_LOG_FLOOR = 1e-300


class ContractError(ValueError):
    """Raised when an operation is used outside its stated preconditions."""


@dataclass(frozen=True)
class FlowParams:
    r: float = 2.0
    delta: float = 1e-3
    gain: float = 1.0

    def __post_init__(self):
        if not self.r >= 2:
            raise ValueError("r must be at least 2")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.gain > 0:
            raise ValueError("gain must be positive")


@dataclass(frozen=True, eq=False)
class FlowState:
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.u, self.y, self.v])

    @classmethod
    def unpack(cls, z, p: int, q: int, t: float = 0.0) -> "FlowState":
        z = np.asarray(z, dtype=float)
        return cls(z[:p], z[p : 2 * p], z[2 * p : 2 * p + q], z[2 * p + q :], float(t))

    @classmethod
    def initial(cls, prob: SaddleProblem, u0=None, v0=None) -> "FlowState":
        """Consistent start ``x0 = grad psi*(u0)``, ``y0 = grad phi*(v0)``.

        Defaults take ``u0`` and ``v0`` as the projections of the origin onto
        X and Y, so ``u0`` lies in X as the flow's initial condition asks.
        """
        u0 = prob.set_X.project(np.zeros(prob.p)) if u0 is None else np.asarray(u0, float)
        v0 = prob.set_Y.project(np.zeros(prob.q)) if v0 is None else np.asarray(v0, float)
        return cls(prob.map_psi.grad_conjugate(u0), u0.copy(),
                   prob.map_phi.grad_conjugate(v0), v0.copy(), 0.0)


def rhs_baseline(prob: SaddleProblem, x, y):
    """Primal-dual gradient flow; only defined without constraints."""
    if not prob.unconstrained:
        raise ContractError("rhs_baseline needs X and Y to be whole spaces; "
                            "use rhs_baseline_projected")
    x, y = prob.check_dims(x, y)
    return -prob.F.grad(x) - prob.H @ y, -prob.G.grad(y) + prob.H.T @ x


def rhs_baseline_projected(prob: SaddleProblem, x, y):
    x, y = prob.check_dims(x, y)
    dx = prob.set_X.project(x - (prob.F.grad(x) + prob.H @ y)) - x
    dy = prob.set_Y.project(y + (prob.H.T @ x - prob.G.grad(y))) - y
    return dx, dy


def _accelerated_parts(prob, params, t, x, u, y, v):
    r = params.r
    px, gx = prob.map_psi.conjugate_pair(u)
    py, gy = prob.map_phi.conjugate_pair(v)
    fast = r / max(params.delta, t)
    slow = t / r
    dx = fast * (px - x)
    dy = fast * (py - y)
    du = slow * (gx - u - prob.F.grad(x) - prob.H @ py)
    dv = slow * (gy - v - prob.G.grad(y) + prob.H.T @ px)
    if params.gain != 1.0:
        g = params.gain
        return g * dx, g * du, g * dy, g * dv
    return dx, du, dy, dv


def rhs_accelerated(prob: SaddleProblem, params: FlowParams, state: FlowState):
    """Accelerated mirror-descent field ``(dx, du, dy, dv)`` at ``state``."""
    x, y = prob.check_dims(state.x, state.y)
    u, v = prob.check_dims(state.u, state.v)
    return _accelerated_parts(prob, params, float(state.t), x, u, y, v)


def accelerated_field(prob: SaddleProblem, params: FlowParams):
    """``f(t, z)`` on the flat layout ``[x, u, y, v]``."""
    p, q = prob.p, prob.q
    sx, su = slice(0, p), slice(p, 2 * p)
    sy, sv = slice(2 * p, 2 * p + q), slice(2 * p + q, 2 * p + 2 * q)

    def field(t, z):
        dx, du, dy, dv = _accelerated_parts(prob, params, t, z[sx], z[su], z[sy], z[sv])
        return np.concatenate((dx, du, dy, dv))

    return field


def baseline_field(prob: SaddleProblem, gain: float = 1.0):
    """``f(t, z)`` on ``[x, y]``; projected form so constraints are respected."""
    p = prob.p

    def field(t, z):
        dx, dy = rhs_baseline_projected(prob, z[:p], z[p:])
        return gain * np.concatenate((dx, dy))

    return field


def _grad_limit(mirror: MirrorMap, x: np.ndarray) -> np.ndarray:
    # entropy gradient has no finite value at zero coordinates; use a floor
    if isinstance(mirror, EntropyMap):
        return 1.0 + np.log(np.maximum(x, _LOG_FLOOR))
    if isinstance(mirror, BlockMap):
        return np.concatenate([_grad_limit(m, x[s])
                               for m, s in zip(mirror.maps, mirror.domain.slices)])
    return mirror.grad(x)


def equilibrium_from_saddle(prob: SaddleProblem, saddle: SaddleCandidate):
    """Lift a saddle point to an equilibrium ``(x*, u*, y*, v*)`` of the flow.

    ``u* = grad psi(x*) - grad F(x*) - H y*`` and
    ``v* = grad phi(y*) - grad G(y*) + H' x*``; at a KKT point the bracketed
    normal-cone terms make ``grad psi*(u*) = x*``.
    """
    xs, ys = prob.check_dims(saddle.x, saddle.y)
    us = _grad_limit(prob.map_psi, xs) - prob.F.grad(xs) - prob.H @ ys
    vs = _grad_limit(prob.map_phi, ys) - prob.G.grad(ys) + prob.H.T @ xs
    return xs.copy(), us, ys.copy(), vs
