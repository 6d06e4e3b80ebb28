"""Experiment assembly, execution and result files.

An experiment is described by a plain config dict (see :mod:`saddleflow.config`).
:func:`build_experiment` turns it into a stacked problem plus the metric
columns that apply to it, :func:`run_experiment` solves for a reference saddle
and integrates the accelerated and baseline flows, and :func:`write_results`
stores CSV trajectories, a rate-fit summary and the generated instance data.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import FlowParams, FlowState, accelerated_field, baseline_field
from .functions import Quadratic
from .geometry import WholeSpace
from .graph import Graph, erdos_renyi
from .integrator import IntegrationError, IntegratorConfig, integrate, log_samples
from .mirror import EuclideanMap, map_from_dict
from .netapps import (distopt_metrics, make_logistic_instance, make_lse_zerosum_instance,
                      zerosum_metrics)
from .oracle import (ReferenceSolution, augment_reference, fit_window, solve_extragradient,
                     solve_quadratic_kkt)
from .problem import SaddleProblem, duality_gap, lyapunov_value, random_quadratic_problem

COLUMNS = ("t", "gap", "lyapunov", "feas_x", "feas_y", "consensus1", "consensus2", "subopt")
FIT_WINDOW = 100.0


# ---------------------------------------------------------------------------
# trajectory records


@dataclass
class TrajectoryRecord:
    """Sampled metric columns of one flow; ``columns["t"]`` holds the times."""

    method: str
    columns: dict[str, np.ndarray]
    nsteps: int = 0
    nfev: int = 0
    rejected: int = 0
    error: str | None = None

    @property
    def times(self) -> np.ndarray:
        return self.columns["t"]

    def to_csv(self, path) -> None:
        names = [c for c in COLUMNS if c in self.columns]
        rows = zip(*(self.columns[c] for c in names))
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(names) + "\n")
            for row in rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, method: str = "") -> "TrajectoryRecord":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header:
                raise ValueError(f"{path}: empty CSV")
            names = header.split(",")
            data = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
        if any(len(r) != len(names) for r in data):
            raise ValueError(f"{path}: ragged rows")
        arr = np.asarray(data, dtype=float).reshape(-1, len(names))
        return cls(method or os.path.splitext(os.path.basename(path))[0],
                   {n: arr[:, k] for k, n in enumerate(names)})


# ---------------------------------------------------------------------------
# experiment assembly


@dataclass
class Experiment:
    """A built experiment: the stacked problem and how to measure it."""

    kind: str
    problem: SaddleProblem
    params: FlowParams
    integrator: IntegratorConfig
    sample_times: np.ndarray
    oracle: dict
    config: dict
    instance: object = None
    data: dict = field(default_factory=dict)

    @property
    def cache_key(self) -> str:
        keyed = {k: self.config.get(k) for k in ("experiment", "instance", "seed", "oracle")}
        blob = json.dumps(keyed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _mirror_for(spec, dim: int):
    if spec is None:
        return None
    m = map_from_dict(spec)
    if m.dim != dim:
        raise ValueError(f"mirror map has dimension {m.dim}, expected {dim}")
    return m


def _build_core(inst: dict, seed):
    p, q = int(inst.get("p", 2)), int(inst.get("q", 2))
    if "F" in inst or "G" in inst or "H" in inst:
        F = Quadratic(inst["F"]["A"], inst["F"]["b"])
        G = Quadratic(inst["G"]["A"], inst["G"]["b"])
        p, q = F.dim, G.dim
        psi = _mirror_for(inst.get("X"), p) or EuclideanMap(WholeSpace(p))
        phi = _mirror_for(inst.get("Y"), q) or EuclideanMap(WholeSpace(q))
        prob = SaddleProblem(F, G, inst["H"], psi.domain, phi.domain, psi, phi, label="quadratic")
    else:
        prob = random_quadratic_problem(
            p, q, seed, tuple(inst.get("curvature", (1e-3, 1e-2))),
            float(inst.get("coupling_scale", 0.05)),
            _mirror_for(inst.get("X"), p), _mirror_for(inst.get("Y"), q))
    data = {"A": prob.F.A.tolist(), "b_F": prob.F.b.tolist(), "C": prob.G.A.tolist(),
            "b_G": prob.G.b.tolist(), "H": prob.H.tolist(),
            "X": prob.map_psi.to_dict(), "Y": prob.map_phi.to_dict()}
    return prob, None, data


def _graph_from(spec, fallback_seed):
    if spec is None:
        return None
    if spec.get("type", "erdos_renyi") == "erdos_renyi":
        return erdos_renyi(int(spec["n"]), float(spec["p"]), spec.get("seed", fallback_seed))
    return Graph.from_dict(spec)


def _build_distopt(inst: dict, seed):
    graph = _graph_from(inst.get("graph"), seed)
    n = graph.n if graph is not None else int(inst.get("n", 5))
    net = make_logistic_instance(n=n, p=int(inst.get("p", 3)), m_i=int(inst.get("m_i", 5)),
                                 c=float(inst.get("c", 100.0)),
                                 edge_prob=float(inst.get("edge_prob", 0.7)),
                                 seed=seed, graph=graph)
    return net.problem, net, dict(net.data)


def _build_zerosum(inst: dict, seed):
    net = make_lse_zerosum_instance(
        n1=int(inst.get("n1", 3)), n2=int(inst.get("n2", 3)), p=int(inst.get("p", 2)),
        q=int(inst.get("q", 2)), rho=float(inst.get("rho", 20.0)), m=int(inst.get("m", 8)),
        edge_prob=float(inst.get("edge_prob", 0.6)), seed=seed)
    return net.problem, net, dict(net.data)


_BUILDERS = {"core": _build_core, "distopt": _build_distopt, "zerosum": _build_zerosum}


def build_experiment(config: dict) -> Experiment:
    """Instantiate the problem, flow parameters and sampling grid of ``config``.

    ``config`` must already be validated (:func:`saddleflow.config.validate`).
    """
    kind = config["experiment"]
    prob, net, data = _BUILDERS[kind](config.get("instance", {}), config.get("seed", 0))
    flow = config.get("flow", {})
    params = FlowParams(r=float(flow.get("r", 2.0)), delta=float(flow.get("delta", 1e-3)),
                        gain=float(flow.get("gain", 1.0)))
    ic = config.get("integrator", {})
    t_end = float(ic.get("t_end", 200.0))
    samples = ic.get("samples", 200)
    if isinstance(samples, list):
        times = np.asarray(samples, dtype=float)
    else:
        times = log_samples(max(2 * params.delta, 1e-2), t_end, int(samples))
    cfg = IntegratorConfig(t_end, rtol=float(ic.get("rtol", 1e-8)),
                           atol=float(ic.get("atol", 1e-10)),
                           max_steps=int(ic.get("max_steps", 1_000_000)), sample_times=times)
    return Experiment(kind, prob, params, cfg, times, dict(config.get("oracle", {})), config,
                      net, data)


# ---------------------------------------------------------------------------
# reference solutions


def default_oracle_step(exp: Experiment) -> float | None:
    """Extragradient step from analytic Lipschitz bounds of the network families.

    Returns ``None`` for core instances, where the oracle's own power-iteration
    default applies.
    """
    prob = exp.problem
    if exp.kind == "distopt":
        # grad F = grad f + Lx with f logistic (Lipschitz <= 1/4 |design|^2 / m)
        lip_f = max(np.linalg.norm(f._design, 2) ** 2 / (4 * f._design.shape[0])
                    for f in exp.instance.objectives)
        lmax = float(np.linalg.eigvalsh(prob.H).max())
        return 0.9 / (2 * lmax + lip_f)
    if exp.kind == "zerosum":
        lip_g = max(np.linalg.norm(g.C, 2) ** 2 / g.rho for g in exp.instance.g_parts)
        lmax = max(float(np.linalg.eigvalsh(exp.instance.L1).max()),
                   float(np.linalg.eigvalsh(exp.instance.L2).max()))
        return 0.9 / (np.linalg.norm(prob.H, 2) + lmax + lip_g)
    return None


def solve_reference(exp: Experiment) -> ReferenceSolution:
    """Analytic KKT for unconstrained quadratics, extragradient otherwise."""
    prob = exp.problem
    if (exp.kind == "core" and prob.unconstrained and isinstance(prob.F, Quadratic)
            and "step" not in exp.oracle):
        return solve_quadratic_kkt(prob)
    step = exp.oracle.get("step", default_oracle_step(exp))
    return solve_extragradient(prob, step=step, tol=float(exp.oracle.get("tol", 1e-10)),
                               max_iter=int(exp.oracle.get("max_iter", 1_000_000)))


def cached_reference(exp: Experiment, path) -> ReferenceSolution:
    """:func:`solve_reference` backed by a JSON sidecar keyed by the instance hash."""
    key = exp.cache_key
    if os.path.exists(path):
        try:
            with open(path) as fh:
                stored = json.load(fh)
            if stored.get("key") == key:
                return ReferenceSolution.from_dict(stored["reference"])
        except (OSError, ValueError, KeyError):
            pass
    ref = solve_reference(exp)
    with open(path, "w") as fh:
        json.dump({"key": key, "reference": ref.to_dict()}, fh, indent=1)
    return ref


# ---------------------------------------------------------------------------
# metrics and runs


def _metric_fn(exp: Experiment, ref: ReferenceSolution) -> Callable:
    prob, saddle = exp.problem, ref.saddle
    if exp.kind == "distopt":
        def extra(x, y):
            c, s = distopt_metrics(exp.instance, x, ref)
            return {"consensus1": c, "subopt": s}
    elif exp.kind == "zerosum":
        inst = exp.instance

        def extra(x, y):
            c1, c2, g = zerosum_metrics(inst, inst.split_min(x)[0], inst.split_max(y)[0], ref)
            return {"consensus1": c1, "consensus2": c2, "subopt": g}
    else:
        def extra(x, y):
            return {}

    def metrics(x, y):
        row = {"gap": duality_gap(prob, x, y, saddle),
               "feas_x": prob.set_X.distance(x), "feas_y": prob.set_Y.distance(y)}
        row.update(extra(x, y))
        return row

    return metrics


def _record(method, times, rows, traj, error=None) -> TrajectoryRecord:
    cols = {"t": np.asarray(times, dtype=float)}
    for name in COLUMNS[1:]:
        if rows and name in rows[0]:
            cols[name] = np.array([r[name] for r in rows], dtype=float)
    return TrajectoryRecord(method, cols, traj.nsteps, traj.nfev, traj.rejected, error)


def run_accelerated(exp: Experiment, ref: ReferenceSolution) -> TrajectoryRecord:
    prob, p, q = exp.problem, exp.problem.p, exp.problem.q
    eq = augment_reference(prob, ref)
    metrics = _metric_fn(exp, ref)
    z0 = FlowState.initial(prob).pack()
    error = None
    try:
        traj = integrate(accelerated_field(prob, exp.params), z0, exp.integrator,
                         exp.sample_times)
    except IntegrationError as exc:
        traj, error = exc.partial, f"{type(exc).__name__}: {exc}"
    rows = []
    for t, z in zip(traj.times, traj.states):
        s = FlowState.unpack(z, p, q, t)
        row = metrics(s.x, s.y)
        row["lyapunov"] = lyapunov_value(prob, s, eq, exp.params.r)
        rows.append(row)
    return _record("accelerated", traj.times, rows, traj, error)


def run_baseline(exp: Experiment, ref: ReferenceSolution) -> TrajectoryRecord:
    prob, p = exp.problem, exp.problem.p
    metrics = _metric_fn(exp, ref)
    s0 = FlowState.initial(prob)
    z0 = np.concatenate([s0.x, s0.y])
    error = None
    try:
        traj = integrate(baseline_field(prob, exp.params.gain), z0, exp.integrator,
                         exp.sample_times)
    except IntegrationError as exc:
        traj, error = exc.partial, f"{type(exc).__name__}: {exc}"
    rows = [metrics(z[:p], z[p:]) for z in traj.states]
    return _record("baseline", traj.times, rows, traj, error)


def run_experiment(exp: Experiment, ref: ReferenceSolution, baseline: bool | None = None,
                   workers: int = 2) -> dict[str, TrajectoryRecord]:
    """Integrate the flows, concurrently when ``workers > 1``.

    ``baseline`` defaults to the config's ``baseline`` flag (itself default
    true).  Each flow owns its own integrator state, so the records do not
    depend on scheduling.
    """
    if baseline is None:
        baseline = exp.config.get("baseline", True)
    jobs = {"accelerated": run_accelerated}
    if baseline:
        jobs["baseline"] = run_baseline
    if workers <= 1:
        return {name: fn(exp, ref) for name, fn in jobs.items()}
    with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        futures = {name: pool.submit(fn, exp, ref) for name, fn in jobs.items()}
        return {name: fut.result() for name, fut in futures.items()}


# ---------------------------------------------------------------------------
# summaries and files


def rate_fits(record: TrajectoryRecord, t_end: float, span: float = FIT_WINDOW) -> dict:
    """Log-log fits of every metric column over ``[t_end/span, t_end]``."""
    out = {}
    for name, col in record.columns.items():
        if name in ("t", "feas_x", "feas_y"):
            continue
        try:
            slope, intercept, r2 = fit_window(record.times, np.abs(col), t_end, span)
        except ValueError:
            continue
        out[name] = {"slope": slope, "intercept": intercept, "r_squared": r2}
    return out


def summarize(exp: Experiment, ref: ReferenceSolution, records: dict) -> dict:
    t_end = exp.integrator.t_end
    fits = {m: rate_fits(r, t_end) for m, r in records.items()}
    summary = {
        "experiment": exp.kind,
        "seed": exp.config.get("seed", 0),
        "window": [t_end / FIT_WINDOW, t_end],
        "fits": fits,
        "oracle": {"method": ref.method, "accuracy": ref.accuracy,
                   "iterations": ref.iterations,
                   "tol": float(exp.oracle.get("tol", 1e-10))},
        "flows": {m: {"samples": int(r.times.shape[0]), "nsteps": r.nsteps, "nfev": r.nfev,
                      "rejected": r.rejected, "error": r.error}
                  for m, r in records.items()},
    }
    for m in records:
        gap = fits[m].get("gap")
        summary[f"slope_{m}"] = gap["slope"] if gap else None
    return summary


def _finite(obj):
    # JSON has no NaN or infinity; store them as null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_finite(obj), fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_results(exp: Experiment, ref: ReferenceSolution, records: dict, outdir) -> dict:
    """Write ``<method>.csv``, ``summary.json`` and ``instance.json`` into ``outdir``."""
    os.makedirs(outdir, exist_ok=True)
    for method, rec in records.items():
        rec.to_csv(os.path.join(outdir, f"{method}.csv"))
    summary = summarize(exp, ref, records)
    write_json(os.path.join(outdir, "summary.json"), summary)
    write_json(os.path.join(outdir, "instance.json"),
               {"experiment": exp.kind, "seed": exp.config.get("seed", 0),
                "data": exp.data, "reference": ref.to_dict()})
    return summary
