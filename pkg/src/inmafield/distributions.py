"""Innovation laws and the modified Bessel function of the first kind.

Three innovation families are supported: Poisson, negative binomial and
deterministic (a point mass, mainly useful for exact enumeration).  Each
provides its pgf, moments, pmf and a vectorized sampler driven by
:class:`~inmafield.rng.CounterStreams`, so draws are reproducible per
stream.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import ConfigurationError
from .rng import CounterStreams, Stream

__all__ = [
    "InnovationSpec",
    "Poisson",
    "NegBin",
    "Deterministic",
    "PGF_DOMAIN_SLACK",
    "BESSEL_RTOL",
    "sample_innovation",
    "sample_innovations",
    "innovation_pgf",
    "innovation_moments",
    "innovation_from_dict",
    "bessel_i",
    "bessel_i_scaled",
]

#: pgfs accept arguments in [0, 1 + PGF_DOMAIN_SLACK] (finite differences at 1)
PGF_DOMAIN_SLACK = 1e-3
#: relative stopping threshold of the Bessel series
BESSEL_RTOL = 1e-17

# inversion-table tail threshold
_TABLE_TAIL = 1e-17
_POISSON_INVERSION_MAX = 10.0


def _check_pgf_arg(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0) or np.any(u > 1.0 + PGF_DOMAIN_SLACK) or np.any(np.isnan(u)):
        raise ValueError(f"pgf argument outside [0, 1+{PGF_DOMAIN_SLACK}]: {u}")
    return u


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class InnovationSpec(ABC):
    """An i.i.d. innovation law on the nonnegative integers."""

    family: str = ""

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    @abstractmethod
    def variance(self) -> float: ...

    @abstractmethod
    def violations(self) -> list[str]:
        """Human-readable list of parameter problems (empty if valid)."""

    @abstractmethod
    def _pgf(self, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def pmf(self, k) -> np.ndarray: ...

    @abstractmethod
    def tail_mass(self, m: int) -> float:
        """P(eps > m)."""

    @abstractmethod
    def _draw(self, streams: CounterStreams, idx=None) -> np.ndarray: ...

    @abstractmethod
    def to_dict(self) -> dict: ...

    def check(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigurationError("; ".join(problems))

    def pgf(self, u):
        """E[u**eps], for u in [0, 1 + PGF_DOMAIN_SLACK]."""
        return _scalar_or_array(self._pgf(_check_pgf_arg(u)))

    def draw(self, streams: CounterStreams, idx=None) -> np.ndarray:
        """One draw per stream in ``streams`` (or per index in ``idx``)."""
        self.check()
        return self._draw(streams, idx)

    def cutoff(self, tail: float = 1e-10) -> int:
        """Smallest m with P(eps > m) <= ``tail``."""
        m = max(0, int(math.floor(self.mean)))
        while self.tail_mass(m) > tail:
            m = m + 1 if m < 64 else int(m * 1.25)
        lo = 0 if m < 64 else int(m / 1.25)
        while lo < m and self.tail_mass(m - 1) <= tail:
            m -= 1
        return m

    def __str__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.to_dict().items() if k != "family")
        return f"{type(self).__name__}({args})"


def _invert_table(u: np.ndarray, cdf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inversion through a cumulative table; returns values and a miss mask."""
    k = np.searchsorted(cdf, u, side="right")
    return k.astype(np.int64), k >= cdf.size


@dataclass(frozen=True)
class Poisson(InnovationSpec):
    """Poisson law with mean ``mu``."""

    mu: float
    family = "poisson"

    @property
    def mean(self) -> float:
        return float(self.mu)

    @property
    def variance(self) -> float:
        return float(self.mu)

    def violations(self) -> list[str]:
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu) and self.mu > 0):
            return [f"poisson mean mu must be positive and finite, got {self.mu!r}"]
        return []

    def _pgf(self, u):
        return np.exp(self.mu * (u - 1.0))

    def pmf(self, k):
        return stats.poisson.pmf(k, self.mu)

    def tail_mass(self, m: int) -> float:
        return float(stats.poisson.sf(m, self.mu))

    def _draw(self, streams, idx=None):
        if self.mu <= _POISSON_INVERSION_MAX:
            return self._draw_inversion(streams, idx)
        return self._draw_ptrs(streams, idx)

    def _draw_inversion(self, streams, idx):
        u = streams.uniform(0, 0, idx)
        k = np.arange(int(self.mu + 40 * math.sqrt(self.mu) + 40))
        cdf = np.cumsum(stats.poisson.pmf(k, self.mu))
        out, miss = _invert_table(u, cdf)
        if miss.any():
            out[miss] = stats.poisson.ppf(u[miss], self.mu).astype(np.int64)
        return out

    def _draw_ptrs(self, streams, idx):
        # transformed rejection (Hoermann 1993); round r uses uniforms 2r, 2r+1
        lam = float(self.mu)
        slam, loglam = math.sqrt(lam), math.log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2)
        base = np.arange(streams.size) if idx is None else np.asarray(idx).ravel()
        out = np.full(base.size, -1, dtype=np.int64)
        pending = np.arange(base.size)
        rnd = 0
        while pending.size:
            sel = base[pending]
            U = streams.uniform(0, 2 * rnd, sel) - 0.5
            V = streams.uniform(0, 2 * rnd + 1, sel)
            us = 0.5 - np.abs(U)
            k = np.floor((2 * a / us + b) * U + lam + 0.43)
            quick = (us >= 0.07) & (V <= vr)
            with np.errstate(divide="ignore", invalid="ignore"):
                lhs = np.log(V) + math.log(invalpha) - np.log(a / (us * us) + b)
                rhs = -lam + k * loglam - gammaln(k + 1)
            slow = (k >= 0) & ~((us < 0.013) & (V > us)) & (lhs <= rhs)
            accept = quick | slow
            out[pending[accept]] = k[accept].astype(np.int64)
            pending = pending[~accept]
            rnd += 1
        return out

    def to_dict(self):
        return {"family": "poisson", "mu": float(self.mu)}


@dataclass(frozen=True)
class NegBin(InnovationSpec):
    """Negative binomial law: failures before the ``n``-th success, success
    probability ``pi``.  Mean ``n(1-pi)/pi``, variance ``n(1-pi)/pi**2``."""

    n: float
    pi: float
    family = "negbin"

    @property
    def mean(self) -> float:
        return self.n * (1 - self.pi) / self.pi

    @property
    def variance(self) -> float:
        return self.n * (1 - self.pi) / self.pi**2

    def violations(self) -> list[str]:
        out = []
        if not (isinstance(self.n, (int, float)) and math.isfinite(self.n) and self.n > 0):
            out.append(f"negbin size n must be positive, got {self.n!r}")
        if not (isinstance(self.pi, (int, float)) and 0 < self.pi < 1):
            out.append(f"negbin probability pi must lie in (0, 1), got {self.pi!r}")
        return out

    def _pgf(self, u):
        # radius of convergence 1/(1-pi) > 1 + PGF_DOMAIN_SLACK for pi > 1e-3
        return (self.pi / (1.0 - (1.0 - self.pi) * u)) ** self.n

    def pmf(self, k):
        return stats.nbinom.pmf(k, self.n, self.pi)

    def tail_mass(self, m: int) -> float:
        return float(stats.nbinom.sf(m, self.n, self.pi))

    def _draw(self, streams, idx=None):
        u = streams.uniform(0, 0, idx)
        top = int(stats.nbinom.isf(_TABLE_TAIL, self.n, self.pi)) + 1
        if top > 10**6:
            return stats.nbinom.ppf(u, self.n, self.pi).astype(np.int64)
        cdf = np.cumsum(stats.nbinom.pmf(np.arange(top + 1), self.n, self.pi))
        out, miss = _invert_table(u, cdf)
        if miss.any():
            out[miss] = stats.nbinom.ppf(u[miss], self.n, self.pi).astype(np.int64)
        return out

    def to_dict(self):
        return {"family": "negbin", "n": float(self.n), "pi": float(self.pi)}


@dataclass(frozen=True)
class Deterministic(InnovationSpec):
    """Point mass at the nonnegative integer ``c``."""

    c: int
    family = "deterministic"

    @property
    def mean(self) -> float:
        return float(self.c)

    @property
    def variance(self) -> float:
        return 0.0

    def violations(self) -> list[str]:
        if isinstance(self.c, bool) or not isinstance(self.c, (int, np.integer)) or self.c < 0:
            return [f"deterministic constant c must be a nonnegative integer, got {self.c!r}"]
        return []

    def _pgf(self, u):
        return u ** int(self.c)

    def pmf(self, k):
        return (np.asarray(k) == self.c).astype(float)

    def tail_mass(self, m: int) -> float:
        return 0.0 if m >= self.c else 1.0

    def _draw(self, streams, idx=None):
        n = streams.size if idx is None else np.asarray(idx).size
        return np.full(n, int(self.c), dtype=np.int64)

    def to_dict(self):
        return {"family": "deterministic", "c": int(self.c)}


def innovation_from_dict(d: dict) -> InnovationSpec:
    """Inverse of ``InnovationSpec.to_dict``."""
    d = dict(d)
    family = str(d.pop("family", "")).lower()
    try:
        if family == "poisson":
            spec = Poisson(float(d.pop("mu")))
        elif family == "negbin":
            spec = NegBin(float(d.pop("n")), float(d.pop("pi")))
        elif family == "deterministic":
            c = d.pop("c")
            if isinstance(c, float) and c.is_integer():
                c = int(c)
            spec = Deterministic(c)
        else:
            raise ConfigurationError(f"unknown innovation family {family!r}")
    except KeyError as exc:
        raise ConfigurationError(f"innovation {family!r} is missing parameter {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad innovation parameter: {exc}") from None
    if d:
        raise ConfigurationError(f"unexpected innovation parameters: {sorted(d)}")
    return spec


def sample_innovation(spec: InnovationSpec, rng: Stream) -> int:
    """Draw a single innovation from ``rng``."""
    return int(spec.draw(rng.take(1))[0])


def sample_innovations(spec: InnovationSpec, rng: Stream, size: int) -> np.ndarray:
    """Draw ``size`` i.i.d. innovations from ``rng``."""
    return spec.draw(rng.take(size))


def innovation_pgf(spec: InnovationSpec, u):
    spec.check()
    return spec.pgf(u)


def innovation_moments(spec: InnovationSpec) -> tuple[float, float]:
    """Exact (mean, variance)."""
    spec.check()
    return spec.mean, spec.variance


_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(n: int) -> float:
    """log(n!) - (n + 1/2) log(n) + n - log(sqrt(2 pi))."""
    if n <= 15:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LOG_SQRT_2PI
    nn = float(n) * n
    return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - 1 / 1188 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, m: float) -> float:
    """x log(x/m) + m - x without cancellation when x is close to m."""
    if abs(x - m) < 0.1 * (x + m):
        v = (x - m) / (x + m)
        s = (x - m) * v
        ej = 2.0 * x * v
        k = 1
        while True:
            ej *= v * v
            s1 = s + ej / (2 * k + 1)
            if s1 == s:
                return s1
            s = s1
            k += 1
    return x * math.log(x / m) + m - x


def _poisson_point(n: int, m: float) -> float:
    """exp(-m) m**n / n! via the saddle-point form (accurate for large n, m)."""
    if n == 0:
        return math.exp(-m)
    return math.exp(-_stirlerr(n) - _bd0(float(n), m)) / math.sqrt(2.0 * math.pi * n)


def _bessel_log_terms(j: int, z: float):
    """Summation of the power series of I_j(z), scaled by exp(-z).

    The terms are log-concave in the summation index, so summation starts
    at the largest term and walks outwards in both directions, stopping
    once the next term falls below ``BESSEL_RTOL * sum``.

    Returns (scaled sum, number of terms used, smallest included term).
    """
    half = z / 2.0
    lh = math.log(half)
    # ratio t_{r+1}/t_r = half**2 / ((r+1)(r+1+j)) crosses 1 near the peak
    r0 = max(0, int(math.floor((-(j + 2) + math.sqrt(j * j + 4 * half * half)) / 2.0)) + 1)

    def logt(r):
        return (2 * r + j) * lh - math.lgamma(r + 1) - math.lgamma(r + j + 1) - z

    peak = max(range(max(0, r0 - 2), r0 + 3), key=logt)
    peak_term = _poisson_point(peak, half) * _poisson_point(peak + j, half)
    total = peak_term
    n_terms, last = 1, total
    term = total
    r = peak
    while True:
        term *= half * half / ((r + 1) * (r + 1 + j))
        if term <= BESSEL_RTOL * total:
            break
        total += term
        last = term
        n_terms += 1
        r += 1
    term = peak_term
    r = peak
    while r > 0:
        term *= r * (r + j) / (half * half)
        r -= 1
        if term <= BESSEL_RTOL * total:
            break
        total += term
        last = min(last, term)
        n_terms += 1
    return total, n_terms, last


def bessel_i_scaled(j: int, z: float) -> float:
    """exp(-z) * I_j(z), safe for large ``z``."""
    j, z = _check_bessel(j, z)
    if z / 2.0 == 0.0:
        return 1.0 if j == 0 else 0.0
    if z < 600.0:
        return math.exp(-z) * _bessel_plain(j, z)
    return _bessel_log_terms(j, z)[0]


def bessel_i(j: int, z: float) -> float:
    """Modified Bessel function of the first kind, I_j(z) = sum_r
    (z/2)**(2r+j) / (r! (r+j)!), for integer j >= 0 and z >= 0."""
    j, z = _check_bessel(j, z)
    if z / 2.0 == 0.0:
        return 1.0 if j == 0 else 0.0
    if z < 600.0:
        return _bessel_plain(j, z)
    return math.exp(z) * _bessel_log_terms(j, z)[0]


def _bessel_plain(j: int, z: float) -> float:
    half = z / 2.0
    term = math.exp(j * math.log(half) - math.lgamma(j + 1))
    total = term
    r = 0
    while True:
        term *= half * half / ((r + 1) * (r + 1 + j))
        r += 1
        if term <= BESSEL_RTOL * total and r > half:
            break
        total += term
    return total


def _check_bessel(j, z):
    if isinstance(j, bool) or int(j) != j or j < 0:
        raise ValueError(f"Bessel order must be a nonnegative integer, got {j!r}")
    z = float(z)
    if not z >= 0.0 or not math.isfinite(z):
        raise ValueError(f"Bessel argument must be finite and >= 0, got {z!r}")
    return int(j), z
