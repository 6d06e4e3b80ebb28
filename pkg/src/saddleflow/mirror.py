"""Mirror maps: generating functions and their conjugate machinery.

A mirror map wraps a strongly convex generating function ``psi`` whose
domain is a closed convex set.  The flows only ever need

* ``grad_conjugate(u)``   -- the gradient of the conjugate, which maps a dual
  variable back into the domain;
* ``grad_at_conjugate(u)`` -- ``grad(grad_conjugate(u))`` evaluated without
  taking logs of underflowed coordinates;
* ``conjugate_value`` and ``bregman_conjugate`` for the Lyapunov function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ConvexSet, DimensionError, ProductSet, Simplex, WholeSpace, set_from_dict


class MirrorDomainError(ValueError):
    """Raised when ``grad`` is evaluated outside the interior of its domain."""


def _finite_vector(u, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    if u.ndim != 1 or u.shape[0] != dim:
        raise DimensionError(f"expected a vector of length {dim}, got shape {np.shape(u)}")
    if not np.all(np.isfinite(u)):
        raise ValueError("mirror map input has non-finite components")
    return u


def logsumexp(u: np.ndarray) -> float:
    m = np.max(u)
    return float(m + np.log(np.sum(np.exp(u - m))))


def softmax(u: np.ndarray) -> np.ndarray:
    e = np.exp(u - np.max(u))
    return e / e.sum()


class MirrorMap:
    domain: ConvexSet
    dim: int

    def conjugate_pair(self, u):
        """``(grad_conjugate(u), grad_at_conjugate(u))`` without input checks.

        Hot path of the flow field; non-finite inputs propagate as NaN.
        """
        return self.grad_conjugate(u), self.grad_at_conjugate(u)

    def bregman_conjugate(self, u, u_ref) -> float:
        """Bregman divergence of the conjugate, ``D(u, u_ref)``."""
        u = _finite_vector(u, self.dim)
        u_ref = _finite_vector(u_ref, self.dim)
        return (
            self.conjugate_value(u)
            - self.conjugate_value(u_ref)
            - float(np.dot(u - u_ref, self.grad_conjugate(u_ref)))
        )


@dataclass(frozen=True)
class EuclideanMap(MirrorMap):
    """``psi(x) = ||x||^2 / 2`` restricted to a convex set.

    The conjugate gradient is the Euclidean projection onto the set.
    """

    domain: ConvexSet

    @property
    def dim(self) -> int:
        return self.domain.dim

    def grad_conjugate(self, u):
        return self.domain.project(_finite_vector(u, self.dim))

    def grad(self, x):
        x = _finite_vector(x, self.dim)
        return x.copy()

    def grad_at_conjugate(self, u):
        return self.grad_conjugate(u)

    def conjugate_pair(self, u):
        if isinstance(self.domain, WholeSpace):
            return u, u
        p = self.domain.project(u)
        return p, p

    def conjugate_value(self, u) -> float:
        u = _finite_vector(u, self.dim)
        p = self.domain.project(u)
        return float(u @ p - 0.5 * p @ p)

    def bregman_conjugate(self, u, u_ref) -> float:
        if isinstance(self.domain, WholeSpace):
            d = _finite_vector(u, self.dim) - _finite_vector(u_ref, self.dim)
            return float(0.5 * d @ d)
        return super().bregman_conjugate(u, u_ref)

    def to_dict(self):
        return {"mirror": "euclidean", "set": self.domain.to_dict()}


@dataclass(frozen=True)
class EntropyMap(MirrorMap):
    """Negative entropy ``sum x_i log x_i`` on the probability simplex."""

    dim: int
    domain: ConvexSet = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", Simplex(self.dim))

    def grad_conjugate(self, u):
        return softmax(_finite_vector(u, self.dim))

    def grad(self, x):
        x = _finite_vector(x, self.dim)
        if np.any(x <= 0):
            raise MirrorDomainError(
                "entropy gradient needs strictly positive x; use grad_at_conjugate"
            )
        return 1.0 + np.log(x)

    def grad_at_conjugate(self, u):
        u = _finite_vector(u, self.dim)
        return 1.0 + u - logsumexp(u)

    def conjugate_value(self, u) -> float:
        return logsumexp(_finite_vector(u, self.dim))

    def conjugate_pair(self, u):
        shifted = u - np.max(u)
        e = np.exp(shifted)
        total = e.sum()
        return e / total, 1.0 + shifted - np.log(total)

    def to_dict(self):
        return {"mirror": "entropy", "dim": self.dim}


@dataclass(frozen=True)
class BlockMap(MirrorMap):
    """Independent mirror maps on consecutive blocks of a stacked vector."""

    maps: tuple
    domain: ConvexSet = field(init=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "domain", ProductSet(tuple(m.domain for m in maps)))
        object.__setattr__(self, "_euclidean", all(isinstance(m, EuclideanMap) for m in maps))

    @property
    def dim(self) -> int:
        return self.domain.dim

    def _split(self, u):
        u = _finite_vector(u, self.dim)
        return [(m, u[s]) for m, s in zip(self.maps, self.domain.slices)]

    def grad_conjugate(self, u):
        return np.concatenate([m.grad_conjugate(b) for m, b in self._split(u)])

    def grad(self, x):
        return np.concatenate([m.grad(b) for m, b in self._split(x)])

    def grad_at_conjugate(self, u):
        return np.concatenate([m.grad_at_conjugate(b) for m, b in self._split(u)])

    def conjugate_pair(self, u):
        if self._euclidean:
            p = self.domain.project(u)
            return p, p
        pairs = [m.conjugate_pair(u[s]) for m, s in zip(self.maps, self.domain.slices)]
        return (np.concatenate([a for a, _ in pairs]),
                np.concatenate([b for _, b in pairs]))

    def conjugate_value(self, u) -> float:
        return float(sum(m.conjugate_value(b) for m, b in self._split(u)))

    def bregman_conjugate(self, u, u_ref) -> float:
        u_ref = _finite_vector(u_ref, self.dim)
        return float(
            sum(
                m.bregman_conjugate(b, u_ref[s])
                for (m, b), s in zip(self._split(u), self.domain.slices)
            )
        )

    def to_dict(self):
        return {"mirror": "block", "maps": [m.to_dict() for m in self.maps]}


def grad_conjugate(mirror: MirrorMap, u) -> np.ndarray:
    return mirror.grad_conjugate(u)


def grad(mirror: MirrorMap, x) -> np.ndarray:
    return mirror.grad(x)


def grad_at_conjugate(mirror: MirrorMap, u) -> np.ndarray:
    return mirror.grad_at_conjugate(u)


def conjugate_value(mirror: MirrorMap, u) -> float:
    return mirror.conjugate_value(u)


def bregman_conjugate(mirror: MirrorMap, u, u_ref) -> float:
    return mirror.bregman_conjugate(u, u_ref)


def map_from_dict(spec: dict) -> MirrorMap:
    kind = spec.get("mirror")
    if kind == "euclidean":
        return EuclideanMap(set_from_dict(spec["set"]))
    if kind == "entropy":
        return EntropyMap(int(spec["dim"]))
    if kind == "block":
        return BlockMap(tuple(map_from_dict(m) for m in spec["maps"]))
    raise ValueError(f"unknown mirror map {kind!r}")
