"""Closed-form distributional results for INMA(q1, q2) fields.

Lags (k, l) are restricted to k, l >= 0 here; for such lags
``bivariate_pgf`` refers to the pair (X[s, t], X[s-k, t-l]).  Coefficients
outside the order box count as zero, and empty products equal one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Poisson, bessel_i_scaled
from .errors import DomainError, UsageError
from .model import InmaModel
from .thinning import CrossDependence, joint_success_prob

__all__ = [
    "MomentSummary",
    "LagPair",
    "marginal_moments",
    "marginal_pgf",
    "acvf",
    "acf",
    "long_run_variance",
    "bivariate_pgf",
    "poisson_bivariate_pgf",
    "poisson_conditional_moments",
    "poisson_jump_pmf",
    "poisson_order_probs",
]


@dataclass(frozen=True)
class MomentSummary:
    mean_x: float
    var_x: float
    beta_dot: float


@dataclass(frozen=True)
class LagPair:
    k: int
    l: int

    def __post_init__(self):
        if int(self.k) != self.k or int(self.l) != self.l:
            raise UsageError(f"lags must be integers, got ({self.k}, {self.l})")
        if self.k < 0 or self.l < 0:
            raise UsageError(
                f"closed forms cover lags with k, l >= 0 only, got ({self.k}, {self.l})"
            )


def _lag(lag) -> tuple[int, int]:
    if not isinstance(lag, LagPair):
        lag = LagPair(*lag)
    return int(lag.k), int(lag.l)


def _coef(model: InmaModel):
    b = model.beta.values
    q1, q2 = model.order

    def beta(i, j):
        return float(b[i, j]) if 0 <= i <= q1 and 0 <= j <= q2 else 0.0

    return beta


def _overlap(model: InmaModel, k: int, l: int):
    """Offsets (i, j) of innovations shared by X[s, t] and X[s-k, t-l]."""
    q1, q2 = model.order
    for i in range(k, q1 + 1):
        for j in range(l, q2 + 1):
            yield i, j


def marginal_moments(model: InmaModel) -> MomentSummary:
    model.check()
    mu, var = model.innovation.mean, model.innovation.variance
    b = model.beta.values
    mean = mu * model.beta_dot
    return MomentSummary(mean_x=mean, var_x=mean + (var - mu) * float((b**2).sum()),
                         beta_dot=model.beta_dot)


def marginal_pgf(model: InmaModel, u: float) -> float:
    """pgf_X(u) = prod_ij pgf_eps(1 + beta_ij (u - 1))."""
    model.check()
    g = model.innovation.pgf
    return float(np.prod([g(1.0 + b * (u - 1.0)) for b in model.beta.values.ravel()]))


def acvf(model: InmaModel, lag) -> float:
    """Autocovariance gamma(k, l) = Cov(X[s, t], X[s-k, t-l])."""
    model.check()
    k, l = _lag(lag)
    mu, var = model.innovation.mean, model.innovation.variance
    b = model.beta
    gamma = 0.0
    for i, j in _overlap(model, k, l):
        gamma += (var - mu) * b[i, j] * b[i - k, j - l]
        gamma += mu * joint_success_prob(b, model.crossdep, (i, j), (i - k, j - l))
    return float(gamma)


def acf(model: InmaModel, lag) -> float:
    """gamma(k, l) / gamma(0, 0); for Poisson innovations this is the sum
    of joint success probabilities over the overlap divided by beta_dot."""
    g0 = acvf(model, (0, 0))
    if g0 <= 0.0:
        raise DomainError(f"autocorrelation undefined: variance is {g0}")
    return acvf(model, lag) / g0


def long_run_variance(model: InmaModel) -> float:
    """Sum of gamma over all lags (both signs), i.e. Var of the total
    thinning output of a single innovation.

    Used for effective standard errors of grid means: Var(mean) is about
    long_run_variance / (n1 n2).
    """
    model.check()
    mu, var = model.innovation.mean, model.innovation.variance
    b = model.beta.values
    bd = b.sum()
    if model.crossdep is CrossDependence.INDEPENDENCE:
        var_z_total = float((b * (1 - b)).sum())
    else:
        var_z_total = float(bd * (1 - bd))
    return float(var * bd**2 + mu * var_z_total)


def bivariate_pgf(model: InmaModel, u1: float, u2: float, lag) -> float:
    """E[u1**X[s, t] * u2**X[s-k, t-l]] as a product over the regions of
    innovations feeding only the first, only the second, or both cells."""
    model.check()
    k, l = _lag(lag)
    q1, q2 = model.order
    g = model.innovation.pgf
    beta = _coef(model)
    a1, a2 = u1 - 1.0, u2 - 1.0
    val = 1.0
    # only in X[s, t]
    for i in range(0, k):
        for j in range(0, q2 + 1):
            val *= g(1.0 + beta(i, j) * a1)
    for i in range(k, q1 + 1):
        for j in range(0, l):
            val *= g(1.0 + beta(i, j) * a1)
    # only in X[s-k, t-l]
    for i in range(q1 + 1, q1 + k + 1):
        for j in range(l, q2 + l + 1):
            val *= g(1.0 + beta(i - k, j - l) * a2)
    for i in range(k, q1 + 1):
        for j in range(q2 + 1, q2 + l + 1):
            val *= g(1.0 + beta(i - k, j - l) * a2)
    # shared
    for i, j in _overlap(model, k, l):
        both = joint_success_prob(model.beta, model.crossdep, (i, j), (i - k, j - l))
        val *= g(1.0 + beta(i, j) * a1 + beta(i - k, j - l) * a2 + both * a1 * a2)
    return float(val)


def _require_poisson(model: InmaModel) -> None:
    if not isinstance(model.innovation, Poisson):
        raise UsageError(f"requires Poisson innovations, got {model.innovation}")


def poisson_bivariate_pgf(model: InmaModel, u1: float, u2: float, lag) -> float:
    """Bivariate Poisson pgf exp(mu_X (u1+u2-2)) exp(mu_X rho (u1-1)(u2-1))."""
    _require_poisson(model)
    mu_x = marginal_moments(model).mean_x
    rho = acf(model, lag)
    return math.exp(mu_x * (u1 + u2 - 2.0)) * math.exp(mu_x * rho * (u1 - 1.0) * (u2 - 1.0))


def poisson_conditional_moments(model: InmaModel, lag, x: int) -> tuple[float, float]:
    """E and V of X[s, t] given X[s-k, t-l] = x."""
    _require_poisson(model)
    if int(x) != x or x < 0:
        raise UsageError(f"x must be a nonnegative integer, got {x!r}")
    mu_x = marginal_moments(model).mean_x
    rho = acf(model, lag)
    return mu_x * (1.0 - rho) + rho * x, (1.0 - rho) * (mu_x + rho * x)


def _jump_argument(model: InmaModel, lag) -> float:
    _require_poisson(model)
    rho = acf(model, lag)
    return max(0.0, 2.0 * model.innovation.mu * model.beta_dot * (1.0 - rho))


def poisson_jump_pmf(model: InmaModel, lag, j: int) -> float:
    """P(X[s, t] = X[s-k, t-l] + j) (equal to the probability for -j)."""
    if int(j) != j or j < 0:
        raise UsageError(f"jump size must be a nonnegative integer, got {j!r}")
    return bessel_i_scaled(int(j), _jump_argument(model, lag))


def poisson_order_probs(model: InmaModel, lag) -> tuple[float, float, float]:
    """(P(X[s,t] < X[s-k,t-l]), P(equal), P(X[s,t] > X[s-k,t-l]))."""
    p_equal = bessel_i_scaled(0, _jump_argument(model, lag))
    p_side = (1.0 - p_equal) / 2.0
    return p_side, p_equal, p_side
