"""Experiment configuration: loading, schema validation and seed override.

JSON is the canonical format.  Files ending in ``.toml`` are accepted when a
TOML parser is importable (``tomllib`` on Python 3.11+, otherwise ``tomli``).
"""

from __future__ import annotations

import copy
import json
import os

import jsonschema

SEED_ENV = "SADDLEFLOW_SEED"


class ConfigError(ValueError):
    """The config file is unreadable, malformed or fails validation."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 1}
_MIRROR = {"type": "object", "required": ["mirror"],
           "properties": {"mirror": {"enum": ["euclidean", "entropy", "block"]}}}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUM}}
_VECTOR = {"type": "array", "items": _NUM}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_QUAD = _obj({"A": _MATRIX, "b": _VECTOR}, ["A", "b"])
_GRAPH = _obj({
    "type": {"enum": ["erdos_renyi", "edges"]},
    "n": {"type": "integer", "minimum": 1},
    "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "edges": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 3}},
}, ["n"])

INSTANCE_SCHEMAS = {
    "core": _obj({
        "family": {"const": "quadratic"},
        "p": _INT, "q": _INT,
        "curvature": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        "coupling_scale": {"type": "number", "minimum": 0},
        "F": _QUAD, "G": _QUAD, "H": _MATRIX,
        "X": _MIRROR, "Y": _MIRROR,
    }),
    "distopt": _obj({
        "family": {"const": "logistic"},
        "n": {"type": "integer", "minimum": 2}, "p": {"type": "integer", "minimum": 2},
        "m_i": _INT, "c": _POS,
        "edge_prob": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "graph": _GRAPH,
    }),
    "zerosum": _obj({
        "family": {"const": "lse"},
        "n1": _INT, "n2": _INT, "p": _INT, "q": _INT, "rho": _POS, "m": _INT,
        "edge_prob": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    }),
}

SCHEMA = _obj({
    "experiment": {"enum": sorted(INSTANCE_SCHEMAS)},
    "instance": {"type": "object"},
    "flow": _obj({"r": {"type": "number", "minimum": 2}, "delta": _POS, "gain": _POS}),
    "integrator": _obj({
        "rtol": _POS, "atol": _POS, "t_end": _POS, "max_steps": _INT,
        "samples": {"oneOf": [{"type": "integer", "minimum": 3},
                              {"type": "array", "items": _POS, "minItems": 3}]},
    }),
    "oracle": _obj({"tol": _POS, "max_iter": _INT, "step": _POS}),
    "seed": {"type": "integer", "minimum": 0},
    "baseline": {"type": "boolean"},
    "output": {"type": "string"},
}, ["experiment"])


def validate(config: dict) -> dict:
    """Check ``config`` against the schema; returns it unchanged.

    Raises
    ------
    ConfigError
        On any schema violation, including unknown keys.
    """
    try:
        jsonschema.validate(config, SCHEMA)
        jsonschema.validate(config.get("instance", {}), INSTANCE_SCHEMAS[config["experiment"]])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None
    inst = config.get("instance", {})
    if config["experiment"] == "core" and any(k in inst for k in ("F", "G", "H")):
        if not all(k in inst for k in ("F", "G", "H")):
            raise ConfigError("explicit core instances need all of F, G and H")
    samples = config.get("integrator", {}).get("samples")
    if isinstance(samples, list) and any(b <= a for a, b in zip(samples, samples[1:])):
        raise ConfigError("integrator.samples must be strictly increasing")
    return config


def _load_toml(path):
    try:
        import tomllib as toml
    except ImportError:
        try:
            import tomli as toml
        except ImportError:
            raise ConfigError("TOML configs need the 'tomli' package on Python < 3.11") from None
    with open(path, "rb") as fh:
        return toml.load(fh)


def load_config(path, env=None) -> dict:
    """Read, validate and apply the ``SADDLEFLOW_SEED`` override.

    ``env`` defaults to ``os.environ``.
    """
    env = os.environ if env is None else env
    try:
        if str(path).endswith(".toml"):
            raw = _load_toml(path)
        else:
            with open(path) as fh:
                raw = json.load(fh)
    except ConfigError:
        raise
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    config = validate(copy.deepcopy(raw))
    if env.get(SEED_ENV):
        try:
            config["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
        if config["seed"] < 0:
            raise ConfigError(f"{SEED_ENV} must be nonnegative")
    return config
