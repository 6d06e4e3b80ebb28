"""Smooth convex function families with closed-form gradients.

Each family exposes ``value(x)`` and ``grad(x)``.  :class:`SmoothFunction`
wraps arbitrary callables; :class:`Separable` sums per-block functions over a
stacked vector (one block per network agent).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mirror import logsumexp, softmax


@dataclass(frozen=True)
class SmoothFunction:
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    dim: int
    label: str = "callable"


@dataclass(frozen=True, eq=False)
class Quadratic:
    """``x'Ax/2 + b'x + const`` with symmetric ``A``."""

    A: np.ndarray
    b: np.ndarray
    const: float = 0.0
    label: str = "quadratic"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape != (b.shape[0], b.shape[0]):
            raise ValueError("Quadratic: A must be square and match b")
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "const", float(self.const))

    @classmethod
    def centered(cls, A, center) -> "Quadratic":
        """``(x - center)'A(x - center)/2``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        c = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(A, -A @ c, 0.5 * c @ A @ c)

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @property
    def hessian(self) -> np.ndarray:
        return self.A

    def value(self, x):
        return float(0.5 * x @ self.A @ x + self.b @ x + self.const)

    def grad(self, x):
        return self.A @ x + self.b


@dataclass(frozen=True, eq=False)
class Linear:
    """``a'x + b``."""

    a: np.ndarray
    b: float = 0.0
    label: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def value(self, x):
        return float(self.a @ x + self.b)

    def grad(self, x):
        return self.a.copy()


def _log1pexp(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True, eq=False)
class Logistic:
    """Mean logistic loss with an intercept in the first coordinate.

    ``x = [x0, xhat]``; the loss is
    ``mean_j log(1 + exp(-(a_j'xhat + x0) * l_j))`` for features ``a_j``
    (rows of ``features``) and labels ``l_j`` in {-1, +1}.
    """

    features: np.ndarray
    labels: np.ndarray
    label: str = "logistic"

    def __post_init__(self):
        feats = np.atleast_2d(np.asarray(self.features, dtype=float))
        labels = np.asarray(self.labels, dtype=float).ravel()
        if feats.shape[0] != labels.shape[0]:
            raise ValueError("one label per feature row required")
        if not np.all(np.abs(labels) == 1):
            raise ValueError("labels must be -1 or +1")
        # augmented design: leading column of ones for the intercept
        design = np.hstack([np.ones((feats.shape[0], 1)), feats])
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_design", labels[:, None] * design)

    @property
    def dim(self) -> int:
        return self.features.shape[1] + 1

    def value(self, x):
        return float(np.mean(_log1pexp(-(self._design @ x))))

    def grad(self, x):
        margins = self._design @ x
        return -(self._design.T @ _sigmoid(-margins)) / margins.shape[0]


@dataclass(frozen=True, eq=False)
class LogSumExp:
    """``rho * log(sum_k exp((c_k'y - d_k) / rho))``; rows of ``C`` are ``c_k``."""

    C: np.ndarray
    d: np.ndarray
    rho: float
    label: str = "logsumexp"

    def __post_init__(self):
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        object.__setattr__(self, "d", np.atleast_1d(np.asarray(self.d, dtype=float)))
        if self.C.shape[0] != self.d.shape[0]:
            raise ValueError("LogSumExp: one offset per row of C")
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    def value(self, y):
        return self.rho * logsumexp((self.C @ y - self.d) / self.rho)

    def grad(self, y):
        return self.C.T @ softmax((self.C @ y - self.d) / self.rho)


@dataclass(frozen=True, eq=False)
class Zero:
    dim: int
    label: str = "zero"

    def value(self, x):
        return 0.0

    def grad(self, x):
        return np.zeros(self.dim)


class _StackedLogistic:
    def __init__(self, parts):
        self.design = np.stack([f._design for f in parts])  # (n, m, p)
        self.m = self.design.shape[1]

    def value(self, X):
        margins = np.einsum("nmp,np->nm", self.design, X)
        return float(np.sum(_log1pexp(-margins)) / self.m)

    def grad(self, X):
        w = _sigmoid(-np.einsum("nmp,np->nm", self.design, X))
        return -np.einsum("nmp,nm->np", self.design, w) / self.m


class _StackedLogSumExp:
    def __init__(self, parts):
        self.C = np.stack([f.C for f in parts])  # (n, m, q)
        self.d = np.stack([f.d for f in parts])
        self.rho = parts[0].rho

    def _scores(self, Y):
        return (np.einsum("nmq,nq->nm", self.C, Y) - self.d) / self.rho

    def value(self, Y):
        s = self._scores(Y)
        mx = s.max(axis=1, keepdims=True)
        return float(self.rho * np.sum(mx[:, 0] + np.log(np.exp(s - mx).sum(axis=1))))

    def grad(self, Y):
        s = self._scores(Y)
        e = np.exp(s - s.max(axis=1, keepdims=True))
        w = e / e.sum(axis=1, keepdims=True)
        return np.einsum("nmq,nm->nq", self.C, w)


class _StackedLinear:
    def __init__(self, parts):
        self.a = np.stack([f.a for f in parts])
        self.b = sum(f.b for f in parts)

    def value(self, X):
        return float(np.sum(self.a * X) + self.b)

    def grad(self, X):
        return self.a.copy()


def _stacked(parts):
    # vectorized evaluator when every agent uses the same family and shapes
    kind = type(parts[0])
    if not all(type(f) is kind for f in parts):
        return None
    if kind is Logistic and len({f._design.shape for f in parts}) == 1:
        return _StackedLogistic(parts)
    if kind is LogSumExp and len({(f.C.shape, f.rho) for f in parts}) == 1:
        return _StackedLogSumExp(parts)
    if kind is Linear and len({f.dim for f in parts}) == 1:
        return _StackedLinear(parts)
    return None


@dataclass(frozen=True, eq=False)
class Separable:
    """Sum of per-block functions over consecutive slices of a vector."""

    parts: tuple
    label: str = "separable"
    slices: tuple = field(init=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        slices, start = [], 0
        for f in parts:
            slices.append(slice(start, start + f.dim))
            start += f.dim
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "slices", tuple(slices))
        object.__setattr__(self, "_batch", _stacked(parts))

    @property
    def dim(self) -> int:
        return self.slices[-1].stop

    def value(self, x):
        if self._batch is not None:
            return self._batch.value(x.reshape(len(self.parts), -1))
        return float(sum(f.value(x[s]) for f, s in zip(self.parts, self.slices)))

    def grad(self, x):
        if self._batch is not None:
            return self._batch.grad(x.reshape(len(self.parts), -1)).reshape(-1)
        return np.concatenate([f.grad(x[s]) for f, s in zip(self.parts, self.slices)])


@dataclass(frozen=True, eq=False)
class PlusQuadraticForm:
    """``base(x[:k]) + x[:k]'Mx[:k]/2`` on a vector of length ``dim >= k``.

    The trailing ``dim - k`` coordinates do not enter the function; this is
    how consensus regularizers are attached to one part of a stacked block.
    """

    base: object
    M: np.ndarray
    dim: int
    label: str = "regularized"

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=float))
        if self.M.shape != (self.base.dim, self.base.dim) or self.dim < self.base.dim:
            raise ValueError("PlusQuadraticForm: inconsistent dimensions")

    def value(self, x):
        k = self.base.dim
        xk = x[:k]
        return float(self.base.value(xk) + 0.5 * xk @ self.M @ xk)

    def grad(self, x):
        k = self.base.dim
        xk = x[:k]
        g = np.zeros(self.dim)
        g[:k] = self.base.grad(xk) + self.M @ xk
        return g
