"""Grid files and run configuration files.

Grids are stored as ASCII CSV (one line per row s, n2 comma-separated
integers) with a JSON sidecar of the same stem holding the metadata.
Configurations are YAML documents with ``model``, ``run``, ``analysis`` and
``oracle`` sections.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigurationError
from .model import InmaModel, validate
from .simulator import Grid

__all__ = ["save_grid", "load_grid", "RunConfig", "load_config", "dump_config"]


def save_grid(grid: Grid, path) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and its ``.json`` sidecar; returns both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(str(int(v)) for v in row) for row in grid.values]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    meta = path.with_suffix(".json")
    meta.write_text(json.dumps(grid.header(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path, meta


def load_grid(path) -> Grid:
    """Read a CSV grid and, when present, its JSON sidecar."""
    path = Path(path)
    rows = [line for line in path.read_text(encoding="ascii").splitlines() if line.strip()]
    try:
        values = np.array([[int(v) for v in line.split(",")] for line in rows], dtype=np.int64)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: not a grid of integers ({exc})") from None
    if values.ndim != 2:
        raise ConfigurationError(f"{path}: rows have different lengths")
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    extra = {k: v for k, v in meta.items()
             if k not in {"n1", "n2", "seed", "model_hash", "mode", "thread_count_independent"}}
    return Grid(values, seed=meta.get("seed"), model_hash=meta.get("model_hash"),
                mode=meta.get("mode", "unilateral"), metadata=extra)


_RUN_DEFAULTS = {"n1": 100, "n2": 100, "seed": 0, "workers": 1, "out": "out", "max_cells": 2**31}
_ANALYSIS_DEFAULTS = {
    "lag_box": None,
    "u_grid": [0.0, 0.25, 0.5, 0.75, 1.0],
    "bivariate_points": [[0.5, 0.5], [0.25, 0.75]],
    "z_threshold": 4.0,
    "replications": 1,
    "jump_max": 10,
    "bootstrap_resamples": 500,
    "tv_tolerance": 0.01,
}
_ORACLE_DEFAULTS = {"innovation_cutoff": None, "tail": 1e-10, "state_limit": 10**6}


@dataclass
class RunConfig:
    model: InmaModel
    run: dict = field(default_factory=lambda: dict(_RUN_DEFAULTS))
    analysis: dict = field(default_factory=lambda: dict(_ANALYSIS_DEFAULTS))
    oracle: dict = field(default_factory=lambda: dict(_ORACLE_DEFAULTS))

    @property
    def lag_box(self) -> tuple[int, int]:
        box = self.analysis.get("lag_box")
        if box is None:
            q1, q2 = self.model.order
            return q1 + 1, q2 + 1
        return int(box[0]), int(box[1])

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "run": dict(self.run),
            "analysis": dict(self.analysis),
            "oracle": dict(self.oracle),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict) or "model" not in doc:
            raise ConfigurationError("configuration needs a 'model' section")
        unknown = set(doc) - {"model", "run", "analysis", "oracle"}
        if unknown:
            raise ConfigurationError(f"unknown configuration sections: {sorted(unknown)}")
        model = InmaModel.from_dict(doc["model"])
        problems = validate(model)
        if problems:
            raise ConfigurationError("; ".join(problems))
        run = _section(doc, "run", _RUN_DEFAULTS)
        for key in ("n1", "n2", "seed", "workers", "max_cells"):
            run[key] = _int(run[key], f"run.{key}")
        run["out"] = str(run["out"])
        if run["n1"] < 1 or run["n2"] < 1:
            raise ConfigurationError("run.n1 and run.n2 must be positive")
        if not 0 <= run["seed"] < 2**64:
            raise ConfigurationError("run.seed must be a 64-bit unsigned integer")
        analysis = _section(doc, "analysis", _ANALYSIS_DEFAULTS)
        analysis["z_threshold"] = _float(analysis["z_threshold"], "analysis.z_threshold")
        analysis["tv_tolerance"] = _float(analysis["tv_tolerance"], "analysis.tv_tolerance")
        analysis["u_grid"] = [_float(u, "analysis.u_grid") for u in analysis["u_grid"]]
        analysis["bivariate_points"] = [[_float(a, "analysis.bivariate_points") for a in p]
                                        for p in analysis["bivariate_points"]]
        for key in ("replications", "jump_max", "bootstrap_resamples"):
            analysis[key] = _int(analysis[key], f"analysis.{key}")
        if analysis["lag_box"] is not None:
            analysis["lag_box"] = [_int(v, "analysis.lag_box") for v in analysis["lag_box"]]
        oracle = _section(doc, "oracle", _ORACLE_DEFAULTS)
        oracle["tail"] = _float(oracle["tail"], "oracle.tail")
        oracle["state_limit"] = _int(oracle["state_limit"], "oracle.state_limit")
        if oracle["innovation_cutoff"] is not None:
            oracle["innovation_cutoff"] = _int(oracle["innovation_cutoff"], "oracle.innovation_cutoff")
        return cls(model, run, analysis, oracle)


def _section(doc, name, defaults):
    given = doc.get(name) or {}
    if not isinstance(given, dict):
        raise ConfigurationError(f"section '{name}' must be a mapping")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigurationError(f"unknown keys in '{name}': {sorted(unknown)}")
    out = copy.deepcopy(defaults)
    out.update(given)
    return out


def _int(v, name) -> int:
    try:
        if isinstance(v, bool) or float(v) != int(float(v)):
            raise ValueError
        return int(v) if isinstance(v, int) else int(float(v))
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be an integer, got {v!r}") from None


def _float(v, name) -> float:
    # PyYAML reads "1e-10" (no decimal point) as a string
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {v!r}") from None


def load_config(path) -> RunConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML ({exc})") from None
    return RunConfig.from_dict(doc)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=None)
