"""Exact marginal and bivariate pmfs of tiny models by enumeration.

The oracle never touches the closed-form pgfs.  It enumerates every
innovation value 0..M at every site feeding the cells of interest, uses the
exact conditional law of the thinning outcomes at that site (products of
binomials for the independence model, multinomials for the spread model),
and convolves the per-site distributions together.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import signal, stats
from scipy.special import gammaln

from .errors import ResourceError
from .model import InmaModel
from .thinning import CrossDependence

__all__ = [
    "EnumerationBudget",
    "enumerate_marginal_pmf",
    "enumerate_bivariate_pmf",
    "pmf_pgf",
    "pmf_covariance",
    "oracle_json",
]


@dataclass(frozen=True)
class EnumerationBudget:
    """Enumerate innovations 0..innovation_cutoff; ``mass_bound`` bounds the
    innovation mass above the cutoff; ``state_limit`` caps the number of
    cells in the resulting pmf table."""

    innovation_cutoff: int
    mass_bound: float
    state_limit: int = 10**6

    @classmethod
    def for_model(cls, model: InmaModel, tail: float = 1e-10,
                  state_limit: int = 10**6) -> "EnumerationBudget":
        m = model.innovation.cutoff(tail)
        return cls(m, model.innovation.tail_mass(m), state_limit)

    def __post_init__(self):
        if self.innovation_cutoff < 0 or self.state_limit < 1:
            raise ValueError("invalid enumeration budget")


def _budget(model, budget):
    if budget is None:
        return EnumerationBudget.for_model(model)
    tail = model.innovation.tail_mass(budget.innovation_cutoff)
    if tail > budget.mass_bound:
        raise ValueError(
            f"tail mass {tail:.3g} above cutoff {budget.innovation_cutoff} "
            f"exceeds mass_bound {budget.mass_bound:.3g}"
        )
    return budget


def _binom_table(M: int, p: float) -> np.ndarray:
    """T[e, y] = P(Bin(e, p) = y) for 0 <= e, y <= M."""
    e = np.arange(M + 1)[:, None]
    y = np.arange(M + 1)[None, :]
    return stats.binom.pmf(y, e, p)


def _site_pmf_1d(weights, M, p):
    return weights @ _binom_table(M, p)


def _site_pmf_2d(weights, M, pa, pb, same, crossdep):
    """Joint pmf of (thinning a, thinning b) of one innovation."""
    out = np.zeros((M + 1, M + 1))
    if same:
        np.fill_diagonal(out, _site_pmf_1d(weights, M, pa))
        return out
    Ta, Tb = _binom_table(M, pa), _binom_table(M, pb)
    y1 = np.arange(M + 1)[:, None]
    y2 = np.arange(M + 1)[None, :]
    rest_p = max(0.0, 1.0 - pa - pb)
    for e, w in enumerate(weights):
        if w == 0.0:
            continue
        if crossdep is CrossDependence.INDEPENDENCE:
            out += w * np.outer(Ta[e], Tb[e])
            continue
        rest = e - y1 - y2
        ok = rest >= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            logc = gammaln(e + 1) - gammaln(y1 + 1) - gammaln(y2 + 1) - gammaln(np.where(ok, rest, 0) + 1)
            term = np.exp(logc) * _pow(pa, y1) * _pow(pb, y2) * _pow(rest_p, np.where(ok, rest, 0))
        out += w * np.where(ok, term, 0.0)
    return out


def _pow(base, expo):
    expo = np.asarray(expo)
    return np.where(expo == 0, 1.0, np.power(base, expo, dtype=float))


def _trim(pmf: np.ndarray) -> np.ndarray:
    nz = np.nonzero(pmf)
    if not nz[0].size:
        return pmf[tuple(slice(0, 1) for _ in range(pmf.ndim))]
    return pmf[tuple(slice(0, int(ix.max()) + 1) for ix in nz)]


def enumerate_marginal_pmf(model: InmaModel, budget: EnumerationBudget | None = None):
    """Exact pmf of X[s, t] (array indexed by value) and an error bound.

    The returned pmf misses at most ``error_bound`` probability mass, due
    to innovation values above the cutoff.
    """
    model.check()
    budget = _budget(model, budget)
    M = budget.innovation_cutoff
    coeffs = [float(b) for b in model.beta.values.ravel()]
    size = len(coeffs) * M + 1
    if size > budget.state_limit:
        raise ResourceError(
            f"marginal enumeration needs {size} states, above state_limit={budget.state_limit}"
        )
    weights = model.innovation.pmf(np.arange(M + 1))
    pmf = np.ones(1)
    for p in coeffs:
        pmf = np.convolve(pmf, _site_pmf_1d(weights, M, p))
    error = _error_bound(len(coeffs), budget.mass_bound)
    return _trim(pmf), error


def _error_bound(n_sites, tail):
    return float(min(1.0, n_sites * tail))


def _sites_for_lag(model: InmaModel, k: int, l: int):
    """Innovation offsets (i, j) relative to (s, t) feeding X[s, t] and/or
    X[s-k, t-l], with the coefficient each cell applies (or None)."""
    q1, q2 = model.order
    b = model.beta.values
    sites = []
    for i in range(min(0, k), max(q1, q1 + k) + 1):
        for j in range(min(0, l), max(q2, q2 + l) + 1):
            a = (i, j) if 0 <= i <= q1 and 0 <= j <= q2 else None
            c = (i - k, j - l) if 0 <= i - k <= q1 and 0 <= j - l <= q2 else None
            if a is None and c is None:
                continue
            sites.append((a, c, None if a is None else float(b[a]), None if c is None else float(b[c])))
    return sites


def enumerate_bivariate_pmf(model: InmaModel, lag, budget: EnumerationBudget | None = None):
    """Exact joint pmf of (X[s, t], X[s-k, t-l]) for any integer lag.

    Returns ``(pmf, error_bound)`` with ``pmf[x1, x2]``.
    """
    model.check()
    budget = _budget(model, budget)
    k, l = (int(v) for v in lag)
    M = budget.innovation_cutoff
    sites = _sites_for_lag(model, k, l)
    n_a = sum(a is not None for a, *_ in sites)
    n_c = sum(c is not None for _, c, *_ in sites)
    size = (n_a * M + 1) * (n_c * M + 1)
    if size > budget.state_limit:
        raise ResourceError(
            f"bivariate enumeration at lag ({k}, {l}) needs {size} states, "
            f"above state_limit={budget.state_limit}"
        )
    weights = model.innovation.pmf(np.arange(M + 1))
    pmf = np.ones((1, 1))
    for a, c, pa, pc in sites:
        if c is None:
            site = _site_pmf_1d(weights, M, pa)[:, None]
        elif a is None:
            site = _site_pmf_1d(weights, M, pc)[None, :]
        else:
            site = _site_pmf_2d(weights, M, pa, pc, a == c, model.crossdep)
        pmf = _trim(signal.convolve2d(pmf, _trim(site)))
    return pmf, _error_bound(len(sites), budget.mass_bound)


def pmf_pgf(pmf: np.ndarray, *u) -> float:
    """pgf of an enumerated pmf: E[u1**X1 ...]."""
    pmf = np.asarray(pmf)
    out = pmf
    for axis_u in reversed(u):
        out = out @ (axis_u ** np.arange(out.shape[-1]))
    return float(out)


def pmf_covariance(joint: np.ndarray) -> float:
    joint = np.asarray(joint)
    x1 = np.arange(joint.shape[0])[:, None]
    x2 = np.arange(joint.shape[1])[None, :]
    mass = joint.sum()
    m1 = (joint * x1).sum() / mass
    m2 = (joint * x2).sum() / mass
    return float((joint * x1 * x2).sum() / mass - m1 * m2)


def oracle_json(model: InmaModel, lags, budget: EnumerationBudget | None = None) -> str:
    """Marginal and bivariate pmfs as JSON (stable key order)."""
    budget = _budget(model, budget)
    marginal, err = enumerate_marginal_pmf(model, budget)
    doc = {
        "model": model.to_dict(),
        "model_hash": model.hash,
        "budget": {
            "innovation_cutoff": budget.innovation_cutoff,
            "mass_bound": budget.mass_bound,
            "state_limit": budget.state_limit,
        },
        "marginal": {"pmf": marginal.tolist(), "error_bound": err},
        "bivariate": [],
    }
    for k, l in lags:
        joint, jerr = enumerate_bivariate_pmf(model, (k, l), budget)
        doc["bivariate"].append({"lag": [k, l], "pmf": joint.tolist(), "error_bound": jerr})
    return json.dumps(doc, sort_keys=True, indent=2)
