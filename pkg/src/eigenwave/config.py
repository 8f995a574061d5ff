"""Run configuration: JSON schema, defaults, presets and object builders.

A run config is a JSON document with sections model / analysis / mc / io.
Validation is strict: unknown keys anywhere are rejected, so typos fail
loudly instead of silently falling back to defaults.
"""
from __future__ import annotations

import copy

import jsonschema
import numpy as np

from .montecarlo import DEFAULT_KAPPA_GRID, McConfig
from .simulate import MixingSpec, NoiseSpec, OfBmSpec


class ConfigError(ValueError):
    """Invalid run configuration; path points at the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


_MATRIX = {
    "type": "array", "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
}

_HURST = {
    "type": "array", "minItems": 1,
    "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
}

_POINT_COV = {
    "oneOf": [
        _MATRIX,
        {
            "type": "object", "additionalProperties": False,
            "required": ["toeplitz"],
            "properties": {"toeplitz": {"type": "array", "minItems": 1,
                                        "items": {"type": "number"}}},
        },
    ]
}

_MIXING = {
    "type": "object", "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["canonical", "random_unit_columns", "explicit"]},
        "matrix": _MATRIX,
    },
}

_NOISE = {
    "type": "object", "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["iid_gaussian", "arma", "none"]},
        "variance": {"type": "number", "exclusiveMinimum": 0},
        "ar": {"type": "array", "items": {"type": "number"}},
        "ma": {"type": "array", "items": {"type": "number"}},
    },
}

SCHEMA = {
    "type": "object", "additionalProperties": False,
    "required": ["model", "analysis"],
    "properties": {
        "model": {
            "type": "object", "additionalProperties": False,
            "required": ["r", "hurst", "n"],
            "properties": {
                "r": {"type": "integer", "minimum": 1},
                "hurst": _HURST,
                "point_cov": _POINT_COV,
                "mixing": _MIXING,
                "noise": _NOISE,
                "n": {"type": "integer", "minimum": 4},
                "p": {"type": "integer", "minimum": 1},
            },
        },
        "analysis": {
            "type": "object", "additionalProperties": False,
            "required": ["j1", "j2"],
            "properties": {
                "family": {"enum": ["haar", "daubechies"]},
                "n_vanishing": {"type": "integer", "minimum": 1, "maximum": 10},
                "j1": {"type": "integer", "minimum": 1},
                "j2": {"type": "integer", "minimum": 1},
                "weights": {"enum": ["uniform", "count"]},
                "eigen_floor": {"type": "number", "exclusiveMinimum": 0},
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "kappa_grid": {"type": "array", "minItems": 1,
                               "items": {"type": "number", "exclusiveMinimum": 0}},
                "r": {"type": ["integer", "null"], "minimum": 0},
            },
        },
        "mc": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "replications": {"type": "integer", "minimum": 1},
                "master_seed": {"type": "integer", "minimum": 0},
                "ratio": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "io": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "out_dir": {"type": "string", "minLength": 1},
                "formats": {"type": "array", "minItems": 1,
                            "items": {"enum": ["csv", "binary"]}},
                "components": {"type": "boolean"},
                "ks_subsets": {"type": "boolean"},
            },
        },
    },
}

_DEFAULTS = {
    "model": {
        "mixing": {"kind": "canonical"},
        "noise": {"kind": "iid_gaussian", "variance": 1.0},
    },
    "analysis": {
        "family": "daubechies",
        "n_vanishing": 2,
        "weights": "count",
        "eigen_floor": 1e-10,
        "kappa": 0.3,
        "kappa_grid": list(DEFAULT_KAPPA_GRID),
        "r": None,
    },
    "mc": {
        "replications": 100,
        "master_seed": 0,
    },
    "io": {
        "out_dir": "out",
        "formats": ["csv"],
        "components": False,
        "ks_subsets": False,
    },
}


def validate_config(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(part) for part in err.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {err.message}", path=path)


def resolve_config(doc: dict) -> dict:
    """Validate and fill defaults; returns the effective configuration."""
    validate_config(doc)
    effective = copy.deepcopy(doc)
    for section, defaults in _DEFAULTS.items():
        target = effective.setdefault(section, {})
        for key, value in defaults.items():
            target.setdefault(key, copy.deepcopy(value))
    _cross_validate(effective)
    return effective


def _cross_validate(cfg: dict) -> None:
    model = cfg["model"]
    r = model["r"]
    if len(model["hurst"]) != r:
        raise ConfigError(
            f"model.hurst: expected {r} exponents for r={r}, got {len(model['hurst'])}",
            path="model.hurst",
        )
    n = model["n"]
    if n & (n - 1):
        raise ConfigError(f"model.n: must be a power of two, got {n}", path="model.n")
    cov = point_covariance(model)
    if cov.shape != (r, r):
        raise ConfigError(
            f"model.point_cov: shape {cov.shape} does not match r={r}",
            path="model.point_cov",
        )
    if "p" in model and model["p"] < r:
        raise ConfigError(
            f"model.p: observation dimension {model['p']} below latent r={r}",
            path="model.p",
        )
    mixing = model["mixing"]
    if mixing["kind"] == "explicit" and "matrix" not in mixing:
        raise ConfigError("model.mixing: explicit mixing requires a matrix",
                          path="model.mixing")
    analysis = cfg["analysis"]
    if analysis["j1"] > analysis["j2"]:
        raise ConfigError(
            f"analysis.j1: octave range ({analysis['j1']}, {analysis['j2']}) is inverted",
            path="analysis.j1",
        )


def point_covariance(model: dict) -> np.ndarray:
    """Materialize the point covariance (defaults to the identity)."""
    spec = model.get("point_cov")
    r = model["r"]
    if spec is None:
        return np.eye(r)
    if isinstance(spec, dict):
        row = np.asarray(spec["toeplitz"], dtype=np.float64)
        if row.size != r:
            raise ConfigError(
                f"model.point_cov.toeplitz: first row has {row.size} entries, expected {r}",
                path="model.point_cov.toeplitz",
            )
        idx = np.abs(np.subtract.outer(np.arange(r), np.arange(r)))
        return row[idx]
    return np.asarray(spec, dtype=np.float64)


def build_model(cfg: dict) -> OfBmSpec:
    model = cfg["model"]
    return OfBmSpec(hurst=tuple(model["hurst"]), point_cov=point_covariance(model))


def build_noise(cfg: dict) -> NoiseSpec:
    noise = cfg["model"]["noise"]
    return NoiseSpec(kind=noise["kind"], variance=noise.get("variance", 1.0),
                     ar=tuple(noise.get("ar", ())), ma=tuple(noise.get("ma", ())))


def observation_dim(cfg: dict) -> int:
    """Explicit model.p, or the ratio-derived dimension round(ratio * n / 2^j2)."""
    model = cfg["model"]
    if "p" in model:
        return model["p"]
    mc = cfg["mc"]
    if "ratio" not in mc:
        raise ConfigError(
            "model.p: give model.p explicitly or set mc.ratio to derive it",
            path="model.p",
        )
    return int(round(mc["ratio"] * model["n"] / 2 ** cfg["analysis"]["j2"]))


def build_mixing(cfg: dict, p: int) -> MixingSpec:
    model = cfg["model"]
    mixing = model["mixing"]
    matrix = None
    if mixing["kind"] == "explicit":
        matrix = np.asarray(mixing["matrix"], dtype=np.float64)
        if matrix.shape[0] != p:
            raise ConfigError(
                f"model.mixing.matrix: {matrix.shape[0]} rows, expected p={p}",
                path="model.mixing.matrix",
            )
    return MixingSpec(kind=mixing["kind"], p=p, r=model["r"], matrix=matrix)


def build_mc_config(cfg: dict) -> McConfig:
    model, analysis, mc = cfg["model"], cfg["analysis"], cfg["mc"]
    if "ratio" not in mc:
        raise ConfigError("mc.ratio: required for Monte Carlo runs", path="mc.ratio")
    mixing = model["mixing"]
    matrix = None
    if mixing["kind"] == "explicit":
        matrix = np.asarray(mixing["matrix"], dtype=np.float64)
    return McConfig(
        model=build_model(cfg),
        mixing_kind=mixing["kind"],
        noise=build_noise(cfg),
        n=model["n"],
        j1=analysis["j1"],
        j2=analysis["j2"],
        ratio=mc["ratio"],
        replications=mc["replications"],
        master_seed=mc["master_seed"],
        family=analysis["family"],
        n_vanishing=analysis["n_vanishing"],
        weight_scheme=analysis["weights"],
        eigen_floor=analysis["eigen_floor"],
        kappa=analysis["kappa"],
        kappa_grid=tuple(analysis["kappa_grid"]),
        mixing_matrix=matrix,
    )


# Named experiment presets at their published-scale parameters; scale the
# replication count down with --reps for desk-sized runs.
PRESETS = {
    "fig1": {
        "model": {
            "r": 6,
            "hurst": [0.1, 0.3, 0.5, 0.6, 0.8, 0.9],
            "point_cov": {"toeplitz": [1.0, 0.2, 0.2, 0.3, 0.2, 0.3]},
            "mixing": {"kind": "canonical"},
            "noise": {"kind": "iid_gaussian", "variance": 1.0},
            "n": 65536,
        },
        "analysis": {"j1": 6, "j2": 9},
        "mc": {"replications": 5000, "master_seed": 106, "ratio": 0.25},
    },
    "fig3": {
        "model": {
            "r": 6,
            "hurst": [0.1, 0.3, 0.5, 0.6, 0.8, 0.9],
            "point_cov": {"toeplitz": [1.0, 0.2, 0.2, 0.3, 0.2, 0.3]},
            "mixing": {"kind": "canonical"},
            "noise": {"kind": "iid_gaussian", "variance": 1.0},
            "n": 16384,
        },
        "analysis": {"j1": 5, "j2": 7},
        "mc": {"replications": 5000, "master_seed": 314, "ratio": 0.5},
    },
    "fig4": {
        "model": {
            "r": 3,
            "hurst": [0.25, 0.5, 0.75],
            "mixing": {"kind": "random_unit_columns"},
            "noise": {"kind": "iid_gaussian", "variance": 1.0},
            "n": 4096,
        },
        "analysis": {"j1": 4, "j2": 6},
        "mc": {"replications": 5000, "master_seed": 41, "ratio": 0.5},
    },
}


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
