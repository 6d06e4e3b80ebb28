"""Reference saddle points and empirical rate fits.

The oracles are deliberately independent of the flows: the analytic route
solves the linear KKT system of an unconstrained quadratic problem, the
general route runs projected extragradient iterations until the KKT residual
falls below a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import equilibrium_from_saddle
from .functions import Quadratic
from .problem import SaddleCandidate, SaddleProblem, kkt_residual


class OracleError(RuntimeError):
    def __init__(self, message: str, best: "ReferenceSolution | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    x_star: np.ndarray
    y_star: np.ndarray
    accuracy: float
    method: str
    iterations: int = 0

    @property
    def saddle(self) -> SaddleCandidate:
        return SaddleCandidate(self.x_star, self.y_star)

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star.tolist(),
            "y_star": self.y_star.tolist(),
            "accuracy": self.accuracy,
            "method": self.method,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReferenceSolution":
        return cls(np.asarray(d["x_star"], float), np.asarray(d["y_star"], float),
                   float(d["accuracy"]), d["method"], int(d.get("iterations", 0)))


def solve_quadratic_kkt(prob: SaddleProblem) -> ReferenceSolution:
    """Exact saddle of an unconstrained problem with quadratic F and G."""
    if not (isinstance(prob.F, Quadratic) and isinstance(prob.G, Quadratic)):
        raise OracleError("solve_quadratic_kkt needs Quadratic F and G")
    if not prob.unconstrained:
        raise OracleError("solve_quadratic_kkt needs X and Y to be whole spaces")
    p = prob.p
    M = np.block([[prob.F.hessian, prob.H], [-prob.H.T, prob.G.hessian]])
    rhs = -np.concatenate([prob.F.b, prob.G.b])
    try:
        z = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"singular KKT system: {exc}") from None
    if np.linalg.cond(M) > 1e14:
        raise OracleError("KKT system is numerically singular; saddle not unique")
    x, y = z[:p], z[p:]
    return ReferenceSolution(x, y, kkt_residual(prob, x, y), "analytic_kkt")


def _operator_norm_estimate(prob: SaddleProblem, iters: int = 100, seed: int = 0) -> float:
    # power iteration on M'M for the stacked linear operator of a quadratic problem
    M = np.block([[prob.F.hessian, prob.H], [-prob.H.T, prob.G.hessian]])
    z = np.random.default_rng(seed).standard_normal(M.shape[1])
    lam = 0.0
    for _ in range(iters):
        w = M.T @ (M @ z)
        lam = np.linalg.norm(w)
        if lam == 0:
            return 0.0
        z = w / lam
    return float(np.sqrt(lam))


def solve_extragradient(prob: SaddleProblem, step: float | None = None, tol: float = 1e-10,
                        max_iter: int = 1_000_000, x0=None, y0=None) -> ReferenceSolution:
    """Projected extragradient for the saddle operator.

    ``step`` defaults to ``0.9 / L`` with ``L`` a power-iteration estimate of
    the operator norm when F and G are quadratic, and to ``1e-2`` otherwise.
    The step is halved whenever the iterates stop being finite or the residual
    grows by more than a factor of 1e3 over the best seen so far.

    Raises
    ------
    OracleError
        If ``max_iter`` iterations do not reach ``tol``; ``best`` carries the
        iterate with the smallest residual.
    """
    if step is None:
        if isinstance(prob.F, Quadratic) and isinstance(prob.G, Quadratic):
            step = 0.9 / max(_operator_norm_estimate(prob), 1e-12)
        else:
            step = 1e-2
    PX, PY = prob.set_X.project, prob.set_Y.project
    gF, gG, H = prob.F.grad, prob.G.grad, prob.H

    x = PX(np.zeros(prob.p) if x0 is None else x0)
    y = PY(np.zeros(prob.q) if y0 is None else y0)
    res = kkt_residual(prob, x, y)
    best = (res, x, y)
    k = 0
    while res > tol:
        if k >= max_iter:
            ref = ReferenceSolution(best[1], best[2], best[0], "extragradient", k)
            raise OracleError(f"extragradient stalled at residual {best[0]:.3e} "
                              f"after {k} iterations", ref)
        xh = PX(x - step * (gF(x) + H @ y))
        yh = PY(y - step * (gG(y) - H.T @ x))
        x_new = PX(x - step * (gF(xh) + H @ yh))
        y_new = PY(y - step * (gG(yh) - H.T @ xh))
        k += 1
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(y_new))):
            step *= 0.5
            x, y = best[1], best[2]
            continue
        x, y = x_new, y_new
        res = kkt_residual(prob, x, y)
        if res < best[0]:
            best = (res, x, y)
        elif res > 1e3 * best[0]:
            step *= 0.5
            x, y = best[1], best[2]
            res = best[0]
    ref = ReferenceSolution(x, y, res, "extragradient", k)
    assert ref.accuracy <= tol
    return ref


def augment_reference(prob: SaddleProblem, ref: ReferenceSolution):
    """Equilibrium ``(x*, u*, y*, v*)`` of the accelerated flow for ``ref``."""
    return equilibrium_from_saddle(prob, ref.saddle)


def fit_rate(samples, floor: float = 1e-15):
    """Least-squares line through ``(log t, log value)``.

    Values at or below ``floor`` are dropped as converged to round-off.

    Returns
    -------
    slope, intercept, r_squared : float
    """
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    t, val = arr[:, 0], arr[:, 1]
    if np.any(t <= 0):
        raise ValueError("fit_rate needs t > 0")
    keep = val > floor
    if keep.sum() < 3:
        raise ValueError("fit_rate needs at least 3 usable points")
    lt, lv = np.log(t[keep]), np.log(val[keep])
    lt_c = lt - lt.mean()
    lv_c = lv - lv.mean()
    slope = float(lt_c @ lv_c / (lt_c @ lt_c))
    intercept = float(lv.mean() - slope * lt.mean())
    ss_tot = float(lv_c @ lv_c)
    ss_res = float(np.sum((lv_c - slope * lt_c) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def fit_window(times, values, t_end: float | None = None, span: float = 100.0):
    """:func:`fit_rate` restricted to ``[t_end / span, t_end]``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_end = times[-1] if t_end is None else t_end
    m = (times >= t_end / span) & (times <= t_end)
    return fit_rate(np.column_stack([times[m], values[m]]))
