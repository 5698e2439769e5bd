"""Binomial thinning of one innovation into all of its receiving cells.

An innovation of size ``eps`` at site (s, t) is thinned once for every
coefficient ``beta[i, j]``; the resulting counts form the thinning vector
``Y`` whose component (i, j) lands in cell (s + i, t + j).  Each of the
``eps`` individuals carries a binary counting vector ``Z`` recording where
it survives, and the cross-dependence model fixes the joint law of ``Z``:

* ``INDEPENDENCE``: components are independent Bernoulli(beta[i, j]);
* ``SPREAD``: ``Z`` is Multinomial(1; beta), so an individual survives in
  at most one cell (requires ``beta.sum() <= 1``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .distributions import InnovationSpec
from .errors import ConfigurationError, UsageError
from .rng import THINNING, THINNING_PER_INDIVIDUAL, CounterStreams, Stream

__all__ = [
    "BetaMatrix",
    "CrossDependence",
    "ThinningVector",
    "binomial_inversion",
    "thin",
    "sample_counting_vector",
    "sample_thinning_vector",
    "joint_success_prob",
    "pgf_z",
    "pgf_y",
]

# stream component tag used by the per-individual spread sampler
_SPREAD_TAG = (1 << 24) - 1
# per-site binomial mean above which inversion is delegated to scipy
_INVERSION_MEAN_LIMIT = 500.0


class CrossDependence(str, enum.Enum):
    INDEPENDENCE = "independence"
    SPREAD = "spread"

    @classmethod
    def parse(cls, value) -> "CrossDependence":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown cross-dependence model {value!r}; "
                f"expected one of {[m.value for m in cls]}"
            ) from None


class BetaMatrix:
    """Thinning coefficients ``beta[i, j]`` for 0 <= i <= q1, 0 <= j <= q2.

    The constructor only checks the shape; range problems are reported by
    :meth:`violations` so that whole models can be validated at once.
    """

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ConfigurationError(f"beta must be a nonempty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def order(self) -> tuple[int, int]:
        q1, q2 = self._values.shape
        return q1 - 1, q2 - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    @property
    def beta_dot(self) -> float:
        return float(self._values.sum())

    @property
    def n_components(self) -> int:
        return self._values.size

    def __getitem__(self, idx):
        return self._values[idx]

    def __eq__(self, other):
        return isinstance(other, BetaMatrix) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self.shape, self._values.tobytes()))

    def __repr__(self):
        return f"BetaMatrix({self._values.tolist()})"

    def tolist(self) -> list[list[float]]:
        return self._values.tolist()

    def violations(self) -> list[str]:
        out = []
        q1, q2 = self.order
        if q1 + q2 < 1:
            out.append(f"order (q1, q2) = ({q1}, {q2}): q1+q2 ≥ 1 required")
        for (i, j), b in np.ndenumerate(self._values):
            if not (0.0 <= b <= 1.0):
                out.append(f"beta[{i}][{j}] = {float(b)!r} is not in [0, 1]")
        return out

    def contains(self, idx) -> bool:
        i, j = idx
        return 0 <= i < self.shape[0] and 0 <= j < self.shape[1]


@dataclass(frozen=True)
class ThinningVector:
    """All thinnings of one innovation: ``y[i, j] = beta[i, j] o eps``."""

    y: np.ndarray
    eps: int


def _crossdep_violations(beta: BetaMatrix, model: CrossDependence) -> list[str]:
    if model is CrossDependence.SPREAD and beta.beta_dot > 1.0 + 1e-12:
        return [f"spread requires β• ≤ 1 (beta_dot = {beta.beta_dot:.6g})"]
    return []


def _check(beta: BetaMatrix, model: CrossDependence) -> CrossDependence:
    model = CrossDependence.parse(model)
    problems = [p for p in beta.violations() if "q1+q2" not in p]
    problems += _crossdep_violations(beta, model)
    if problems:
        raise ConfigurationError("; ".join(problems))
    return model


def binomial_inversion(u, n, p: float) -> np.ndarray:
    """Binomial(n, p) variates by inversion of the uniforms ``u``.

    Vectorized over ``u`` and ``n``; the pmf recurrence is walked upward
    from zero.  Sites with a large binomial mean (or an underflowing
    starting mass) fall back to ``scipy.stats.binom.ppf``.
    """
    u = np.asarray(u, dtype=float)
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), u.shape)
    p = float(p)
    if p <= 0.0:
        return np.zeros(u.shape, dtype=np.int64)
    if p >= 1.0:
        return n.copy()
    out = np.zeros(u.shape, dtype=np.int64)
    q = 1.0 - p
    ratio = p / q
    pmf = np.exp(n * np.log1p(-p))
    big = (n * p > _INVERSION_MEAN_LIMIT) | (pmf < 1e-250)
    if big.any():
        out[big] = stats.binom.ppf(u[big], n[big], p).astype(np.int64)
    active = np.flatnonzero(~big & (u >= pmf) & (n > 0))
    pmf = pmf[active]
    cdf = pmf.copy()
    uu, nn = u[active], n[active]
    k = 0
    while active.size:
        k += 1
        pmf = pmf * (ratio * (nn - k + 1) / k)
        cdf = cdf + pmf
        out[active] = k
        keep = (uu >= cdf) & (nn > k)
        active, pmf, cdf, uu, nn = active[keep], pmf[keep], cdf[keep], uu[keep], nn[keep]
    return out


def thin(beta: BetaMatrix, model, eps, streams: CounterStreams,
         per_individual: bool = False, component_tags=None) -> np.ndarray:
    """Thinning vectors for a batch of innovations.

    Parameters
    ----------
    beta : BetaMatrix
    model : CrossDependence
    eps : array of int, shape (N,)
        Innovation sizes, one per stream in ``streams``.
    streams : CounterStreams
        One stream per innovation; the purpose tag is overridden.
    per_individual : bool
        Draw every individual's counting vector explicitly (O(eps) draws)
        instead of the closed-form binomial/multinomial route.
    component_tags : array of int, optional
        Stream component tag per coefficient, row-major; defaults to the
        row-major flat index.

    Returns
    -------
    numpy.ndarray
        int64 array of shape (N, q1+1, q2+1).
    """
    model = _check(beta, model)
    eps = np.asarray(eps, dtype=np.int64).ravel()
    if eps.size != streams.size:
        raise UsageError("eps and streams differ in length")
    if np.any(eps < 0):
        raise UsageError("innovations must be nonnegative")
    b = beta.values.ravel()
    tags = np.arange(b.size) if component_tags is None else np.asarray(component_tags).ravel()
    out = np.zeros((eps.size, b.size), dtype=np.int64)
    if per_individual:
        _thin_per_individual(b, model, eps, streams.with_purpose(THINNING_PER_INDIVIDUAL), tags, out)
    else:
        _thin_closed_form(b, model, eps, streams.with_purpose(THINNING), tags, out)
    return out.reshape((eps.size,) + beta.shape)


def _thin_closed_form(b, model, eps, streams, tags, out):
    if model is CrossDependence.INDEPENDENCE:
        for c, bc in enumerate(b):
            out[:, c] = binomial_inversion(streams.uniform(int(tags[c])), eps, bc)
        return
    # multinomial as a chain of conditional binomials over the buckets
    remaining = eps.copy()
    mass_left = 1.0
    for c, bc in enumerate(b):
        if bc > 0.0 and remaining.any():
            cond = 1.0 if bc >= mass_left else bc / mass_left
            out[:, c] = binomial_inversion(streams.uniform(int(tags[c])), remaining, cond)
            remaining -= out[:, c]
        mass_left -= bc


# (innovation, individual) pairs handled per chunk on the slow path
_PAIR_CHUNK = 1 << 20


def _thin_per_individual(b, model, eps, streams, tags, out):
    """Individual r of innovation n uses counter round r of stream n."""
    cum = np.cumsum(b)
    ends = np.cumsum(eps)
    starts = ends - eps
    for a in range(0, int(ends[-1]) if eps.size else 0, _PAIR_CHUNK):
        pos = np.arange(a, min(a + _PAIR_CHUNK, int(ends[-1])), dtype=np.int64)
        site = np.searchsorted(ends, pos, side="right")
        r = pos - starts[site]
        if model is CrossDependence.INDEPENDENCE:
            for c, bc in enumerate(b):
                hit = streams.uniform(int(tags[c]), r, site) < bc
                out[:, c] += np.bincount(site[hit], minlength=eps.size)
        else:
            bucket = np.searchsorted(cum, streams.uniform(_SPREAD_TAG, r, site), side="right")
            hit = bucket < b.size
            np.add.at(out, (site[hit], bucket[hit]), 1)


def sample_counting_vector(beta: BetaMatrix, model, rng: Stream) -> np.ndarray:
    """One counting vector ``Z`` (0/1 array shaped like ``beta``)."""
    model = _check(beta, model)
    b = beta.values.ravel()
    if model is CrossDependence.INDEPENDENCE:
        z = (rng.random(b.size) < b).astype(np.int64)
    else:
        z = np.zeros(b.size, dtype=np.int64)
        bucket = int(np.searchsorted(np.cumsum(b), rng.random(), side="right"))
        if bucket < b.size:
            z[bucket] = 1
    return z.reshape(beta.shape)


def sample_thinning_vector(beta: BetaMatrix, model, eps: int, rng: Stream,
                           per_individual: bool = False) -> ThinningVector:
    """The thinning vector of a single innovation of size ``eps``."""
    eps = int(eps)
    if eps < 0:
        raise UsageError(f"eps must be nonnegative, got {eps}")
    y = thin(beta, model, [eps], rng.take(1), per_individual=per_individual)[0]
    return ThinningVector(y=y, eps=eps)


def joint_success_prob(beta: BetaMatrix, model, a, b) -> float:
    """P(Z[a] = Z[b] = 1) for one individual's counting vector."""
    model = CrossDependence.parse(model)
    a, b = tuple(a), tuple(b)
    for idx in (a, b):
        if not beta.contains(idx):
            raise UsageError(f"index {idx} outside the order box {beta.shape}")
    if a == b:
        return float(beta[a])
    if model is CrossDependence.INDEPENDENCE:
        return float(beta[a] * beta[b])
    return 0.0


def pgf_z(beta: BetaMatrix, model, u) -> float:
    """Joint pgf of one counting vector, ``u`` shaped like ``beta``."""
    model = _check(beta, model)
    u = np.asarray(u, dtype=float)
    if u.shape != beta.shape:
        raise UsageError(f"u has shape {u.shape}, expected {beta.shape}")
    b = beta.values
    if model is CrossDependence.INDEPENDENCE:
        return float(np.prod(1.0 - b + b * u))
    return float(1.0 - b.sum() + (b * u).sum())


def pgf_y(spec: InnovationSpec, beta: BetaMatrix, model, u) -> float:
    """Joint pgf of the thinning vector: pgf_eps(pgf_z(u))."""
    return float(spec.pgf(pgf_z(beta, model, u)))
