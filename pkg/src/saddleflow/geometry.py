"""Closed convex sets with exact Euclidean projections.

Every set exposes ``project``, ``distance`` and ``contains`` and can be
round-tripped through a plain dict (``to_dict`` / :func:`set_from_dict`),
which is the form used in experiment configs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Raised when a vector does not match the dimension of a set or map."""


def _as_vector(u, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    if u.ndim != 1 or u.shape[0] != dim:
        raise DimensionError(f"expected a vector of length {dim}, got shape {np.shape(u)}")
    return u


class ConvexSet:
    """Base class for the supported feasible regions."""

    dim: int

    def project(self, u) -> np.ndarray:
        raise NotImplementedError

    def distance(self, u) -> float:
        u = _as_vector(u, self.dim)
        return float(np.linalg.norm(u - self.project(u)))

    def contains(self, u, tol: float = 1e-10) -> bool:
        return self.distance(u) <= tol

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class WholeSpace(ConvexSet):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")

    def project(self, u):
        return _as_vector(u, self.dim).copy()

    def to_dict(self):
        return {"kind": "whole", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """``{x : lower <= x <= upper}``; equal bounds pin a coordinate."""

    lower: np.ndarray
    upper: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("Box requires lower <= upper componentwise")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "dim", lower.shape[0])

    def project(self, u):
        return np.clip(_as_vector(u, self.dim), self.lower, self.upper)

    def to_dict(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    dim: int = field(init=False)

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        if center.ndim != 1:
            raise ValueError("center must be a vector")
        if not self.radius > 0:
            raise ValueError("Ball radius must be positive")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", center.shape[0])

    @classmethod
    def centered(cls, dim: int, radius: float) -> "Ball":
        return cls(np.zeros(dim), radius)

    def project(self, u):
        u = _as_vector(u, self.dim)
        d = u - self.center
        norm = np.linalg.norm(d)
        if norm <= self.radius:
            return u.copy()
        return self.center + d * (self.radius / norm)

    def to_dict(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


def project_simplex(u: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold, followed by a correction step so that the result is
    nonnegative and sums to one to within a rounding of the largest entry.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    s = np.sort(u)[::-1]
    css = np.cumsum(s) - 1.0
    idx = np.arange(1, d + 1)
    rho = np.nonzero(s - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    x = np.maximum(u - theta, 0.0)
    x /= x.sum()
    # push the leftover rounding into the largest coordinate
    k = int(np.argmax(x))
    x[k] += 1.0 - x.sum()
    return x


@dataclass(frozen=True)
class Simplex(ConvexSet):
    """Probability simplex ``{x >= 0, sum(x) = 1}``."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")

    def project(self, u):
        return project_simplex(_as_vector(u, self.dim))

    def to_dict(self):
        return {"kind": "simplex", "dim": self.dim}


@dataclass(frozen=True)
class ProductSet(ConvexSet):
    """Cartesian product of sets acting on consecutive slices of a vector.

    Used for stacked multi-agent problems, where each agent owns a block.
    """

    blocks: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("ProductSet needs at least one block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "dim", sum(b.dim for b in blocks))
        object.__setattr__(self, "_fast", self._fast_projector(blocks))

    @staticmethod
    def _fast_projector(blocks):
        # boxes and free blocks project as one clip; equal-size balls as one reshape
        if all(isinstance(b, (Box, WholeSpace)) for b in blocks):
            lo = np.concatenate([b.lower if isinstance(b, Box) else np.full(b.dim, -np.inf)
                                 for b in blocks])
            hi = np.concatenate([b.upper if isinstance(b, Box) else np.full(b.dim, np.inf)
                                 for b in blocks])
            return lambda u: np.clip(u, lo, hi)
        if all(isinstance(b, Ball) for b in blocks) and len({b.dim for b in blocks}) == 1:
            n, d = len(blocks), blocks[0].dim
            centers = np.stack([b.center for b in blocks])
            radii = np.array([b.radius for b in blocks])

            def proj(u):
                diff = u.reshape(n, d) - centers
                norms = np.sqrt(np.einsum("nd,nd->n", diff, diff))
                scale = np.where(norms > radii, radii / np.where(norms > 0, norms, 1.0), 1.0)
                return (centers + diff * scale[:, None]).reshape(-1)

            return proj
        return None

    @property
    def slices(self) -> list[slice]:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.dim))
            start += b.dim
        return out

    def project(self, u):
        u = _as_vector(u, self.dim)
        if self._fast is not None:
            return self._fast(u)
        return np.concatenate([b.project(u[s]) for b, s in zip(self.blocks, self.slices)])

    def to_dict(self):
        return {"kind": "product", "blocks": [b.to_dict() for b in self.blocks]}


def project(convex_set: ConvexSet, u) -> np.ndarray:
    """Euclidean projection of ``u`` onto ``convex_set``."""
    return convex_set.project(u)


def distance_to(convex_set: ConvexSet, u) -> float:
    """Euclidean distance from ``u`` to ``convex_set``."""
    return convex_set.distance(u)


def set_from_dict(spec: dict) -> ConvexSet:
    kind = spec.get("kind")
    if kind == "whole":
        return WholeSpace(int(spec["dim"]))
    if kind == "box":
        return Box(spec["lower"], spec["upper"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "simplex":
        return Simplex(int(spec["dim"]))
    if kind == "product":
        return ProductSet(tuple(set_from_dict(b) for b in spec["blocks"]))
    raise ValueError(f"unknown set kind {kind!r}")
