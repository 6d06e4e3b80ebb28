"""Adaptive Dormand-Prince 5(4) integration with dense output.

States are sampled at requested observation times through the 4th-order
continuous extension of the pair, so the step sequence never depends on the
sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Dormand & Prince (1980) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# 5th minus embedded 4th order weights, the 7th stage is the FSAL derivative
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Shampine's continuous extension, columns are powers theta^1..theta^4
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    rtol: float = 1e-8
    atol: float = 1e-10
    t_start: float = 0.0
    max_steps: int = 1_000_000
    sample_times: np.ndarray | None = None

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.sample_times is not None:
            s = np.asarray(self.sample_times, dtype=float)
            if s.ndim != 1 or s.size == 0 or np.any(np.diff(s) <= 0):
                raise ValueError("sample_times must be a strictly increasing vector")
            if s[0] < self.t_start or s[-1] > self.t_end:
                raise ValueError("sample_times must lie in [t_start, t_end]")
            object.__setattr__(self, "sample_times", s)

    def samples(self, delta: float = 1e-3, n: int = 200) -> np.ndarray:
        """Requested sample times, or ``n`` log-spaced points up to ``t_end``."""
        if self.sample_times is not None:
            return self.sample_times
        return log_samples(max(2 * delta, 1e-2), self.t_end, n)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    nfev: int = 0
    nsteps: int = 0
    rejected: int = 0


class IntegrationError(RuntimeError):
    def __init__(self, message: str, partial: Trajectory):
        super().__init__(message)
        self.partial = partial


class DivergenceError(IntegrationError):
    """Step budget exhausted before reaching ``t_end``."""


class BlowUpError(IntegrationError):
    """The state or its derivative became non-finite."""


def log_samples(t_min: float, t_max: float, n: int) -> np.ndarray:
    """``n`` geometrically spaced times from ``t_min`` to ``t_max`` inclusive."""
    if not (0 < t_min < t_max):
        raise ValueError("log_samples needs 0 < t_min < t_max")
    if n < 2:
        raise ValueError("log_samples needs n >= 2")
    out = np.geomspace(t_min, t_max, n)
    out[0], out[-1] = t_min, t_max
    return out


def _rms(v):
    return math.sqrt(float(v @ v) / v.shape[0])


def integrate(field, y0, cfg: IntegratorConfig, sample_times=None) -> Trajectory:
    """Integrate ``y' = field(t, y)`` from ``cfg.t_start`` to ``cfg.t_end``.

    Parameters
    ----------
    field : callable
        ``field(t, y) -> dy`` on flat float vectors.
    y0 : array_like
        Initial state at ``cfg.t_start``.
    cfg : IntegratorConfig
    sample_times : array_like, optional
        Observation times; defaults to ``cfg.samples()``.

    Returns
    -------
    Trajectory
        ``states[i]`` is the dense-output state at ``times[i]``.

    Raises
    ------
    DivergenceError
        If ``cfg.max_steps`` accepted-or-rejected steps do not reach ``t_end``.
    BlowUpError
        If a non-finite state or derivative appears.
    """
    ts = cfg.samples() if sample_times is None else np.asarray(sample_times, dtype=float)
    y = np.array(y0, dtype=float)
    n = y.shape[0]
    t, t_end = float(cfg.t_start), float(cfg.t_end)
    rtol, atol = cfg.rtol, cfg.atol

    out = np.empty((ts.shape[0], n))
    n_out = 0
    while n_out < ts.shape[0] and ts[n_out] <= t:
        out[n_out] = y
        n_out += 1

    K = np.empty((7, n))
    K[0] = field(t, y)
    nfev = 1
    if not np.all(np.isfinite(K[0])):
        raise BlowUpError("non-finite derivative at the initial state",
                          Trajectory(ts[:n_out], out[:n_out], nfev))

    h = min(1e-4 * (1.0 + t_end), t_end - t)
    err_prev = 1e-4
    steps = rejected = 0
    while t < t_end:
        if steps >= cfg.max_steps:
            raise DivergenceError(f"max_steps={cfg.max_steps} exhausted at t={t:.6g}",
                                  Trajectory(ts[:n_out], out[:n_out], nfev, steps, rejected))
        steps += 1
        if t + h == t:
            raise DivergenceError(f"step size underflow at t={t:.6g}",
                                  Trajectory(ts[:n_out], out[:n_out], nfev, steps, rejected))
        last = t + h >= t_end
        if last:
            h = t_end - t
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for i in range(1, 6):
                    K[i] = field(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
                y_new = y + h * (_B @ K[:6])
                K[6] = field(t + h, y_new)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = _rms(h * (_E @ K) / scale)
        except ValueError:
            # fields reject non-finite stage states
            err = np.nan
        nfev += 6

        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            if h < 1e-14 * max(1.0, abs(t)):
                raise BlowUpError(f"non-finite state near t={t:.6g}",
                                  Trajectory(ts[:n_out], out[:n_out], nfev, steps, rejected))
            h *= MIN_FACTOR
            rejected += 1
            continue
        if err > 1.0:
            h *= max(MIN_FACTOR, SAFETY * err ** -_ALPHA)
            rejected += 1
            continue

        t_new = t_end if last else t + h
        if n_out < ts.shape[0] and ts[n_out] <= t_new:
            Q = K.T @ _P
            while n_out < ts.shape[0] and ts[n_out] <= t_new:
                if ts[n_out] == t_new:
                    out[n_out] = y_new
                else:
                    theta = (ts[n_out] - t) / h
                    out[n_out] = y + h * (Q @ (theta ** np.arange(1, 5)))
                n_out += 1

        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = min(MAX_FACTOR, max(MIN_FACTOR,
                                         SAFETY * err ** -_ALPHA * err_prev ** _BETA))
        err_prev = max(err, 1e-4)
        t, y = t_new, y_new
        K[0] = K[6]
        h *= factor

    return Trajectory(ts[:n_out].copy(), out[:n_out], nfev, steps, rejected)
