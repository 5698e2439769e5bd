"""The INMA(q1, q2) model object, its multilateral variant and validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .distributions import InnovationSpec, innovation_from_dict
from .errors import ConfigurationError
from .thinning import BetaMatrix, CrossDependence, _crossdep_violations

__all__ = ["InmaModel", "MultilateralOrder", "validate", "model_hash"]


@dataclass(frozen=True)
class InmaModel:
    """X[s, t] = sum_{i<=q1, j<=q2} beta[i, j] o eps[s-i, t-j].

    Models are immutable value objects; :attr:`hash` is a canonical
    content hash recorded in every generated grid.
    """

    beta: BetaMatrix
    innovation: InnovationSpec
    crossdep: CrossDependence = CrossDependence.INDEPENDENCE

    def __post_init__(self):
        if not isinstance(self.beta, BetaMatrix):
            object.__setattr__(self, "beta", BetaMatrix(self.beta))
        object.__setattr__(self, "crossdep", CrossDependence.parse(self.crossdep))
        if not isinstance(self.innovation, InnovationSpec):
            raise ConfigurationError(f"innovation must be an InnovationSpec, got {self.innovation!r}")

    @property
    def order(self) -> tuple[int, int]:
        return self.beta.order

    @property
    def beta_dot(self) -> float:
        return self.beta.beta_dot

    def to_dict(self) -> dict:
        q1, q2 = self.order
        return {
            "order": [q1, q2],
            "beta": self.beta.tolist(),
            "innovation": self.innovation.to_dict(),
            "crossdep": self.crossdep.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InmaModel":
        try:
            order = d["order"]
            beta = d["beta"]
            innovation = d["innovation"]
        except KeyError as exc:
            raise ConfigurationError(f"model block is missing {exc}") from None
        try:
            q1, q2 = (int(v) for v in order)
        except (TypeError, ValueError):
            raise ConfigurationError(f"order must be two integers, got {order!r}") from None
        rows = list(beta) if isinstance(beta, (list, tuple)) else None
        if rows is None or len(rows) != q1 + 1 or any(
            not isinstance(r, (list, tuple)) or len(r) != q2 + 1 for r in rows
        ):
            raise ConfigurationError(
                f"beta must be {q1 + 1} rows of {q2 + 1} entries for order ({q1}, {q2})"
            )
        try:
            values = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise ConfigurationError("beta entries must be numbers") from None
        return cls(
            BetaMatrix(values),
            innovation_from_dict(innovation),
            CrossDependence.parse(d.get("crossdep", "independence")),
        )

    @property
    def hash(self) -> str:
        return model_hash(self)

    def check(self) -> None:
        problems = validate(self)
        if problems:
            raise ConfigurationError("; ".join(problems))

    def __str__(self):
        q1, q2 = self.order
        return f"INMA({q1},{q2}) {self.innovation} {self.crossdep.value} beta={self.beta.tolist()}"


def model_hash(model) -> str:
    """SHA-256 of the canonical JSON form of a model."""
    blob = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def validate(model) -> list[str]:
    """Every violated model invariant as a message; empty when valid."""
    if isinstance(model, MultilateralOrder):
        return model.violations()
    out = list(model.beta.violations())
    out += model.innovation.violations()
    out += _crossdep_violations(model.beta, model.crossdep)
    return out


@dataclass(frozen=True)
class MultilateralOrder:
    """Two-sided coefficient box ``beta[i, j]`` for -p1 <= i <= q1,
    -p2 <= j <= q2, stored as an array with ``values[i + p1, j + p2]``."""

    p1: int
    p2: int
    q1: int
    q2: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        expected = (self.p1 + self.q1 + 1, self.p2 + self.q2 + 1)
        if arr.shape != expected:
            raise ConfigurationError(f"multilateral beta has shape {arr.shape}, expected {expected}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def beta_at(self, i: int, j: int) -> float:
        if -self.p1 <= i <= self.q1 and -self.p2 <= j <= self.q2:
            return float(self.values[i + self.p1, j + self.p2])
        return 0.0

    @property
    def box(self) -> BetaMatrix:
        return BetaMatrix(self.values)

    @property
    def beta_dot(self) -> float:
        return float(self.values.sum())

    def violations(self) -> list[str]:
        out = []
        if min(self.p1, self.p2, self.q1, self.q2) < 0:
            out.append("multilateral orders must be nonnegative")
        for (a, b), v in np.ndenumerate(self.values):
            if not 0.0 <= v <= 1.0:
                out.append(f"beta[{a - self.p1}][{b - self.p2}] = {float(v)!r} is not in [0, 1]")
        off_origin = self.values.copy()
        off_origin[self.p1, self.p2] = 0.0
        if self.p1 + self.p2 + self.q1 + self.q2 < 1 and not off_origin.any():
            out.append("multilateral order must extend beyond the origin")
        return out

    def to_dict(self) -> dict:
        return {
            "orders": [self.p1, self.p2, self.q1, self.q2],
            "beta": self.values.tolist(),
        }

    @classmethod
    def from_model(cls, model: InmaModel) -> "MultilateralOrder":
        q1, q2 = model.order
        return cls(0, 0, q1, q2, model.beta.values)
