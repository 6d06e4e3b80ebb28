"""Network applications reduced to stacked saddle-point problems.

Constrained distributed optimization
    ``min sum_i f_i(x_i)`` subject to consensus ``Lx = 0`` and ``x_i in Omega_i``
    becomes the saddle problem ``S1(x, y) = f(x) + y'Lx + x'Lx/2`` with
    ``x in Omega`` and a free multiplier ``y``.

Two-network zero-sum games
    The payoff ``U(x, y) = sum f_i(x_i) + x'By - sum g_j(y_j)`` with consensus
    constraints on both networks becomes ``S2`` over the min block
    ``(x, mu)`` and max block ``(y, lambda)``:
    ``S2 = U + lambda'L1 x - mu'L2 y + x'L1 x/2 - y'L2 y/2``.

Running the generic accelerated flow on these stacked problems reproduces the
per-agent distributed algorithms term by term; each agent only reads its own
block and its neighbours' blocks through the Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import Linear, Logistic, LogSumExp, PlusQuadraticForm, Separable, Zero
from .geometry import Ball, Box, WholeSpace
from .graph import Graph, is_connected, kron_laplacian
from .mirror import BlockMap, EuclideanMap
from .oracle import ReferenceSolution
from .problem import SaddleProblem


class TopologyError(ValueError):
    pass


def _check_agents(funcs, sets, n: int, what: str) -> int:
    if len(funcs) != n or len(sets) != n:
        raise ValueError(f"{what}: need one function and one set per agent ({n})")
    dims = {f.dim for f in funcs} | {s.dim for s in sets}
    if len(dims) != 1:
        raise ValueError(f"{what}: all agents must share one block dimension")
    return dims.pop()


@dataclass(frozen=True, eq=False)
class DistOptInstance:
    graph: Graph
    objectives: tuple
    sets: tuple
    problem: SaddleProblem
    block_dim: int
    data: dict | None = None

    @property
    def L(self) -> np.ndarray:
        return self.problem.H

    @property
    def objective(self) -> Separable:
        return self.problem.F.base

    def f_value(self, x) -> float:
        return self.objective.value(np.asarray(x, float))


def build_distopt(graph: Graph, objectives, sets, mirror_maps=None, data=None) -> DistOptInstance:
    """Stacked saddle problem for consensus-constrained optimization.

    ``F(x) = sum_i f_i(x_i) + x'Lx/2``, ``G = 0``, ``H = L`` (the Kronecker
    Laplacian), ``X = Omega_1 x ... x Omega_n`` and ``Y`` the whole space.
    Agents default to Euclidean mirror maps on their own sets.
    """
    if not is_connected(graph):
        raise TopologyError("distributed optimization needs a connected graph")
    objectives, sets = tuple(objectives), tuple(sets)
    p = _check_agents(objectives, sets, graph.n, "build_distopt")
    L = kron_laplacian(graph, p)
    dim = graph.n * p
    f = Separable(objectives)
    if mirror_maps is None:
        mirror_maps = tuple(EuclideanMap(s) for s in sets)
    psi = BlockMap(tuple(mirror_maps))
    X = psi.domain
    prob = SaddleProblem(
        F=PlusQuadraticForm(f, L, dim, label="S1 primal"),
        G=Zero(dim),
        H=L,
        set_X=X,
        set_Y=WholeSpace(dim),
        map_psi=psi,
        map_phi=EuclideanMap(WholeSpace(dim)),
        label="distopt",
    )
    return DistOptInstance(graph, objectives, sets, prob, p, data)


def distopt_metrics(inst: DistOptInstance, x, reference: ReferenceSolution):
    """``(||Lx||, |f(x) - f(x*)|)``."""
    x = np.asarray(x, float)
    consensus = float(np.linalg.norm(inst.L @ x))
    subopt = abs(inst.f_value(x) - inst.f_value(reference.x_star))
    return consensus, subopt


@dataclass(frozen=True, eq=False)
class ZeroSumInstance:
    g1: Graph
    g2: Graph
    f_parts: tuple
    g_parts: tuple
    sets_X: tuple
    sets_Y: tuple
    B: np.ndarray
    problem: SaddleProblem
    p: int
    q: int
    data: dict | None = None

    @property
    def nx(self) -> int:
        return self.g1.n * self.p

    @property
    def ny(self) -> int:
        return self.g2.n * self.q

    @property
    def L1(self) -> np.ndarray:
        return kron_laplacian(self.g1, self.p)

    @property
    def L2(self) -> np.ndarray:
        return kron_laplacian(self.g2, self.q)

    def split_min(self, z):
        """``(x, mu)`` from the stacked min block."""
        z = np.asarray(z, float)
        return z[: self.nx], z[self.nx :]

    def split_max(self, w):
        """``(y, lambda)`` from the stacked max block."""
        w = np.asarray(w, float)
        return w[: self.ny], w[self.ny :]

    def payoff(self, x, y) -> float:
        x, y = np.asarray(x, float), np.asarray(y, float)
        f = sum(fi.value(x[i * self.p:(i + 1) * self.p]) for i, fi in enumerate(self.f_parts))
        g = sum(gj.value(y[j * self.q:(j + 1) * self.q]) for j, gj in enumerate(self.g_parts))
        return float(f + x @ self.B @ y - g)


def assemble_coupling(n1: int, n2: int, p: int, q: int, couplings) -> np.ndarray:
    """Block matrix ``B`` from ``{(i, j): H_ij}``; missing blocks are zero."""
    B = np.zeros((n1 * p, n2 * q))
    for (i, j), Hij in couplings.items():
        Hij = np.asarray(Hij, float)
        if Hij.shape != (p, q):
            raise ValueError(f"coupling block ({i}, {j}) must be {p}x{q}")
        B[i * p:(i + 1) * p, j * q:(j + 1) * q] = Hij
    return B


def build_zerosum(g1: Graph, g2: Graph, objectives_f, objectives_g, sets_X, sets_Y,
                  couplings, maps_X=None, maps_Y=None, data=None) -> ZeroSumInstance:
    """Stacked saddle problem for a two-network zero-sum game.

    ``couplings`` is either the full matrix ``B`` or a dict ``{(i, j): H_ij}``.
    The min block is ``(x, mu)`` and the max block is ``(y, lambda)``; the
    multipliers get unconstrained Euclidean maps.
    """
    if not (is_connected(g1) and is_connected(g2)):
        raise TopologyError("both networks must be connected")
    objectives_f, objectives_g = tuple(objectives_f), tuple(objectives_g)
    sets_X, sets_Y = tuple(sets_X), tuple(sets_Y)
    p = _check_agents(objectives_f, sets_X, g1.n, "build_zerosum (network 1)")
    q = _check_agents(objectives_g, sets_Y, g2.n, "build_zerosum (network 2)")
    nx, ny = g1.n * p, g2.n * q
    if isinstance(couplings, dict):
        B = assemble_coupling(g1.n, g2.n, p, q, couplings)
    else:
        B = np.asarray(couplings, float)
    if B.shape != (nx, ny):
        raise ValueError(f"B must have shape ({nx}, {ny})")
    L1, L2 = kron_laplacian(g1, p), kron_laplacian(g2, q)

    # [x; mu]' H [y; lambda] = x'By + x'L1 lambda - mu'L2 y
    H = np.block([[B, L1], [-L2, np.zeros((ny, nx))]])
    maps_X = tuple(EuclideanMap(s) for s in sets_X) if maps_X is None else tuple(maps_X)
    maps_Y = tuple(EuclideanMap(s) for s in sets_Y) if maps_Y is None else tuple(maps_Y)
    psi = BlockMap(maps_X + (EuclideanMap(WholeSpace(ny)),))
    phi = BlockMap(maps_Y + (EuclideanMap(WholeSpace(nx)),))
    prob = SaddleProblem(
        F=PlusQuadraticForm(Separable(objectives_f), L1, nx + ny, label="S2 min block"),
        G=PlusQuadraticForm(Separable(objectives_g), L2, ny + nx, label="S2 max block"),
        H=H,
        set_X=psi.domain,
        set_Y=phi.domain,
        map_psi=psi,
        map_phi=phi,
        label="zerosum",
    )
    return ZeroSumInstance(g1, g2, objectives_f, objectives_g, sets_X, sets_Y, B,
                           prob, p, q, data)


def zerosum_metrics(inst: ZeroSumInstance, x, y, reference: ReferenceSolution):
    """``(||L1 x||, ||L2 y||, |U(x, y*) - U(x*, y)|)``.

    ``x`` and ``y`` are the agents' decision blocks (no multipliers);
    ``reference`` is a saddle of the stacked problem.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    xs, _ = inst.split_min(reference.x_star)
    ys, _ = inst.split_max(reference.y_star)
    c1 = float(np.linalg.norm(inst.L1 @ x))
    c2 = float(np.linalg.norm(inst.L2 @ y))
    gap = abs(inst.payoff(x, ys) - inst.payoff(xs, y))
    return c1, c2, gap


def make_logistic_instance(n: int = 5, p: int = 3, m_i: int = 5, c: float = 100.0,
                           edge_prob: float = 0.7, seed: int = 0,
                           graph: Graph | None = None) -> DistOptInstance:
    """Distributed logistic regression over an Erdos-Renyi network.

    Agent ``i`` holds ``m_i`` samples with features uniform on ``[0, 1]^(p-1)``
    and labels uniform on {-1, +1}; its set is the ball of radius ``c``.
    """
    from .graph import erdos_renyi

    rng = np.random.default_rng(seed)
    if graph is None:
        graph = erdos_renyi(n, edge_prob, rng)
    feats = [rng.uniform(0.0, 1.0, size=(m_i, p - 1)) for _ in range(n)]
    labels = [rng.choice([-1.0, 1.0], size=m_i) for _ in range(n)]
    objectives = tuple(Logistic(a, l) for a, l in zip(feats, labels))
    sets = tuple(Ball.centered(p, c) for _ in range(n))
    data = {"features": [a.tolist() for a in feats], "labels": [l.tolist() for l in labels],
            "radius": c, "graph": graph.to_dict()}
    return build_distopt(graph, objectives, sets, data=data)


def make_lse_zerosum_instance(n1: int = 3, n2: int = 3, p: int = 2, q: int = 2,
                              rho: float = 20.0, m: int = 8, edge_prob: float = 0.6,
                              seed: int = 0) -> ZeroSumInstance:
    """Linear-vs-log-sum-exp zero-sum game with box sets on network 1.

    ``f_i(x) = a_i'x + b_i`` with ``a_i, b_i ~ U[0, 1]`` and boxes with lower
    bounds in ``[-2, 0]`` and upper bounds in ``[1, 5]``;
    ``g_j(y) = rho * log sum_k exp((c_jk'y - d_jk) / rho)`` with
    ``c_jk ~ N(0, I)`` and ``d_jk ~ N(0, 2)``.  ``B`` is the identity, which
    requires ``n1 * p == n2 * q``.
    """
    from .graph import erdos_renyi

    if n1 * p != n2 * q:
        raise ValueError("identity coupling needs n1 * p == n2 * q")
    rng = np.random.default_rng(seed)
    g1 = erdos_renyi(n1, edge_prob, rng) if n1 > 1 else Graph(1)
    g2 = erdos_renyi(n2, edge_prob, rng) if n2 > 1 else Graph(1)
    fs, boxes = [], []
    for _ in range(n1):
        fs.append(Linear(rng.uniform(0.0, 1.0, p), rng.uniform(0.0, 1.0)))
        boxes.append(Box(rng.uniform(-2.0, 0.0, p), rng.uniform(1.0, 5.0, p)))
    gs = []
    for _ in range(n2):
        C = rng.standard_normal((m, q))
        d = rng.normal(0.0, np.sqrt(2.0), m)
        gs.append(LogSumExp(C, d, rho))
    data = {
        "a": [f.a.tolist() for f in fs], "b": [f.b for f in fs],
        "lower": [bx.lower.tolist() for bx in boxes], "upper": [bx.upper.tolist() for bx in boxes],
        "C": [g.C.tolist() for g in gs], "d": [g.d.tolist() for g in gs], "rho": rho,
        "g1": g1.to_dict(), "g2": g2.to_dict(),
    }
    return build_zerosum(g1, g2, fs, gs, boxes, [WholeSpace(q) for _ in range(n2)],
                         np.eye(n1 * p), data=data)
