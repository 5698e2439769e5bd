"""Empirical statistics on grids and a Monte Carlo verification harness.

Pair-based statistics follow two lag conventions: ``sample_acvf(grid, k, l)``
pairs X[s, t] with X[s+k, t+l]; the bivariate pgf and conditional profile
pair X[s, t] with the lagged cell X[s-k, t-l], matching the closed forms.
Only pairs with both cells inside the window are used.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import analytics as an
from .distributions import Poisson
from .errors import ConfigurationError, ResourceError, UsageError
from .model import InmaModel
from .oracle import EnumerationBudget, enumerate_bivariate_pmf, enumerate_marginal_pmf, pmf_covariance, pmf_pgf
from .simulator import Grid, simulate_grid

__all__ = [
    "sample_mean",
    "sample_acvf",
    "sample_acf",
    "sample_acf_se",
    "empirical_pgf",
    "empirical_bivariate_pgf",
    "marginal_histogram",
    "total_variation",
    "ProfileBin",
    "conditional_mean_profile",
    "profile_regression",
    "block_bootstrap_means",
    "CheckResult",
    "VerificationReport",
    "verify",
    "DEFAULT_CHECKS",
]

Z_THRESHOLD = 4.0
MIN_BIN_COUNT = 50
N_BOOTSTRAP = 500


def _values(grid) -> np.ndarray:
    x = grid.values if isinstance(grid, Grid) else np.asarray(grid)
    if x.ndim != 2 or x.size == 0:
        raise UsageError(f"expected a nonempty 2-D grid, got shape {x.shape}")
    return x


def _shifted_pair(x: np.ndarray, k: int, l: int):
    """Views (A, B) with A[...] = X[s, t] and B[...] = X[s+k, t+l]."""
    n1, n2 = x.shape
    k, l = int(k), int(l)
    if abs(k) >= n1 or abs(l) >= n2:
        raise UsageError(f"lag ({k}, {l}) out of range for a {n1} x {n2} grid")
    r0, r1 = max(0, -k), n1 - max(0, k)
    c0, c1 = max(0, -l), n2 - max(0, l)
    return x[r0:r1, c0:c1], x[r0 + k:r1 + k, c0 + l:c1 + l]


def sample_mean(grid) -> float:
    return float(_values(grid).mean())


def _acvf_fields(x: np.ndarray, k: int, l: int) -> np.ndarray:
    xc = x - x.mean()
    a, b = _shifted_pair(xc, k, l)
    return a * b


def sample_acvf(grid, k: int, l: int) -> float:
    """Mean over in-window pairs of (X[s,t] - xbar)(X[s+k,t+l] - xbar)."""
    return float(_acvf_fields(_values(grid), k, l).mean())


def sample_acf(grid, k: int, l: int) -> float:
    x = _values(grid)
    g0 = sample_acvf(x, 0, 0)
    if g0 == 0:
        raise UsageError("constant grid: autocorrelation undefined")
    return sample_acvf(x, k, l) / g0


def sample_acf_se(grid, k: int, l: int, block: int, n_resamples: int = N_BOOTSTRAP,
                  seed: int = 0) -> tuple[float, float]:
    """Sample ACF at lag (k, l) (any signs) and its block-bootstrap SE.

    The estimate is the mean of centred lag products over the mean squared
    deviation of the same cells; the bootstrap resamples both jointly.
    """
    x = _values(grid).astype(float)
    xc = x - x.mean()
    a, b = _shifted_pair(xc, k, l)
    prod, sq = a * b, a * a
    if not sq.any():
        raise UsageError("constant grid: autocorrelation undefined")
    est = float(prod.mean() / (xc * xc).mean())
    reps = block_bootstrap_means([prod, sq], block, n_resamples, seed)
    return est, float(np.std(reps[:, 0] / reps[:, 1], ddof=1))


def empirical_pgf(grid, u: float) -> float:
    return float(np.mean(float(u) ** _values(grid)))


def empirical_bivariate_pgf(grid, u1: float, u2: float, k: int, l: int) -> float:
    """Mean over in-window pairs of u1**X[s,t] * u2**X[s-k,t-l].

    With u2 = 1 this is the marginal pgf over the cells that have an
    in-window partner, not over the whole grid.
    """
    a, b = _shifted_pair(_values(grid), -k, -l)
    return float(np.mean(float(u1) ** a * float(u2) ** b))


def marginal_histogram(grid) -> dict[int, float]:
    x = _values(grid).ravel()
    counts = np.bincount(x)
    return {int(v): float(c) / x.size for v, c in enumerate(counts) if c}


def total_variation(hist: dict[int, float], pmf) -> float:
    """Total variation distance between a histogram and a pmf array."""
    pmf = np.asarray(pmf, dtype=float)
    top = max(max(hist), pmf.size - 1) + 1
    p = np.zeros(top)
    p[:pmf.size] = pmf
    h = np.zeros(top)
    for v, f in hist.items():
        h[v] = f
    # mass missing from a truncated pmf counts as disagreement
    return 0.5 * (np.abs(h - p).sum() + max(0.0, 1.0 - pmf.sum()))


@dataclass(frozen=True)
class ProfileBin:
    mean: float
    count: int
    reliable: bool


def conditional_mean_profile(grid, k: int, l: int, min_count: int = MIN_BIN_COUNT) -> dict[int, ProfileBin]:
    """For each value x of the lagged cell X[s-k, t-l], the mean of X[s, t]."""
    cur, lagged = _shifted_pair(_values(grid), -k, -l)
    cur, lagged = cur.ravel(), lagged.ravel()
    counts = np.bincount(lagged)
    sums = np.bincount(lagged, weights=cur)
    return {
        int(x): ProfileBin(mean=float(sums[x] / c), count=int(c), reliable=bool(c >= min_count))
        for x, c in enumerate(counts) if c
    }


def profile_regression(profile: dict[int, ProfileBin], reliable_only: bool = True):
    """Weighted least-squares line through the profile (weights = counts).

    Returns (slope, intercept, slope_se, intercept_se); the standard errors
    are the classical ones, which ignore spatial dependence between pairs.
    """
    pts = [(x, b.mean, b.count) for x, b in profile.items() if b.reliable or not reliable_only]
    if len(pts) < 2:
        raise UsageError("need at least two profile bins for a regression")
    x, y, w = (np.array(v, dtype=float) for v in zip(*pts))
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - intercept - slope * x
    dof = max(1.0, w.sum() - 2)
    s2 = np.sum(w * resid**2) / dof
    return float(slope), float(intercept), float(math.sqrt(s2 / sxx)), float(math.sqrt(s2 * (1 / w.sum() + xm**2 / sxx)))


def block_bootstrap_means(fields, block: int, n_resamples: int = N_BOOTSTRAP,
                          seed: int = 0) -> np.ndarray:
    """Moving-block bootstrap of field means on 2-D arrays.

    All fields must share one shape and are resampled with the same
    blocks, so statistics combining several fields keep their joint
    structure.  Returns an array (n_resamples, n_fields) of resampled means,
    rescaled so their spread matches a sample of the full field size.
    """
    fields = [np.asarray(f, dtype=float) for f in fields]
    n1, n2 = fields[0].shape
    b = int(max(1, min(block, n1, n2)))
    m1, m2 = n1 // b, n2 // b
    rng = np.random.default_rng([int(seed) & (2**63 - 1), 0xB007])
    rows = rng.integers(0, n1 - b + 1, size=(n_resamples, m1 * m2))
    cols = rng.integers(0, n2 - b + 1, size=(n_resamples, m1 * m2))
    out = np.empty((n_resamples, len(fields)))
    inflate = math.sqrt(m1 * m2 * b * b / (n1 * n2))
    for f_idx, f in enumerate(fields):
        c = np.zeros((n1 + 1, n2 + 1))
        c[1:, 1:] = f.cumsum(0).cumsum(1)
        sums = c[b:, b:] - c[:-b, b:] - c[b:, :-b] + c[:-b, :-b]
        means = sums[rows, cols].mean(axis=1) / (b * b)
        centre = f.mean()
        out[:, f_idx] = centre + (means - means.mean()) * inflate
    return out


def _bootstrap_se(fields, fn, block, n_resamples, seed) -> float:
    reps = block_bootstrap_means(fields, block, n_resamples, seed)
    vals = fn(*reps.T)
    return float(np.std(vals, ddof=1))


@dataclass
class CheckResult:
    check: str
    analytic: float
    empirical: float
    se: float | None = None
    z: float | None = None
    tolerance: float | None = None
    passed: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    z_threshold: float
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> str:
        doc = {
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "z_threshold": self.z_threshold,
            "metadata": self.metadata,
        }
        return json.dumps(doc, sort_keys=True, indent=2, default=_json_default)

    def table(self) -> str:
        head = f"{'check':<34} {'analytic':>12} {'empirical':>12} {'se':>10} {'z':>8}  result"
        lines = [head, "-" * len(head)]
        for c in self.checks:
            se = "" if c.se is None else f"{c.se:10.4g}"
            z = "" if c.z is None else f"{c.z:8.2f}"
            lines.append(
                f"{c.check:<34} {c.analytic:12.6g} {c.empirical:12.6g} {se:>10} {z:>8}  "
                f"{'PASS' if c.passed else 'FAIL'}"
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(type(o))


def _z_check(name, analytic, empirical, se, threshold) -> CheckResult:
    if se is None or se <= 0 or not math.isfinite(se):
        diff = abs(empirical - analytic)
        return CheckResult(name, analytic, empirical, se, None, 1e-12, diff <= 1e-12)
    z = (empirical - analytic) / se
    return CheckResult(name, float(analytic), float(empirical), float(se), float(z),
                       None, bool(abs(z) <= threshold))


def _tol_check(name, analytic, empirical, tol) -> CheckResult:
    return CheckResult(name, float(analytic), float(empirical), None, None, float(tol),
                       bool(abs(empirical - analytic) <= tol))


DEFAULT_CHECKS = ("mean", "variance", "pmf", "acf", "bivariate_pgf", "jump", "order",
                  "conditional", "oracle")


@dataclass(frozen=True)
class _Settings:
    z_threshold: float = Z_THRESHOLD
    block: int | None = None
    n_resamples: int = N_BOOTSTRAP
    tv_tolerance: float = 0.01
    u_points: tuple = ((0.5, 0.5), (0.25, 0.75))
    min_count: int = MIN_BIN_COUNT


def default_block(model: InmaModel) -> int:
    """Bootstrap block side: twice the dependence range max(q1, q2) + 1."""
    return 2 * (max(model.order) + 1)


def _grid_checks(model: InmaModel, x: np.ndarray, checks, st: _Settings, seed: int):
    """Per-replicate empirical values and standard errors, keyed by name."""
    q1, q2 = model.order
    block = st.block or default_block(model)
    mom = an.marginal_moments(model)
    N = x.size
    res = {}
    bseed = seed ^ 0x5EED

    if "mean" in checks:
        se = math.sqrt(an.long_run_variance(model) / N)
        res["mean"] = (mom.mean_x, float(x.mean()), se)
    if "variance" in checks:
        xc2 = (x - x.mean()) ** 2
        res["variance"] = (mom.var_x, float(xc2.mean()),
                           _bootstrap_se([xc2], lambda m: m, block, st.n_resamples, bseed))
    if "acf" in checks and mom.var_x > 0:
        for k in range(q1 + 2):
            for l in range(q2 + 2):
                if k >= x.shape[0] or l >= x.shape[1]:
                    continue
                analytic = an.acf(model, (k, l))
                if k == l == 0:
                    res["acf(0,0)"] = (analytic, 1.0, 0.0)
                    continue
                emp, se = sample_acf_se(x, -k, -l, block, st.n_resamples, bseed + k * 31 + l)
                res[f"acf({k},{l})"] = (analytic, emp, se)
    if "bivariate_pgf" in checks:
        for k, l in [(1, 0), (0, 1), (1, 1)]:
            if k > q1 + 1 or l > q2 + 1:
                continue
            cur, lagged = _shifted_pair(x, -k, -l)
            for u1, u2 in st.u_points:
                f = (u1 ** cur) * (u2 ** lagged)
                se = _bootstrap_se([f], lambda m: m, block, st.n_resamples, bseed + 7 * k + l)
                res[f"bivariate_pgf({u1},{u2};{k},{l})"] = (
                    an.bivariate_pgf(model, u1, u2, (k, l)), float(f.mean()), se)
    if isinstance(model.innovation, Poisson):
        lag = (1, 0) if q1 >= 1 else (0, 1)
        cur, lagged = _shifted_pair(x, -lag[0], -lag[1])
        d = cur - lagged
        if "jump" in checks:
            for j in range(4):
                f = (d == j).astype(float)
                se = _bootstrap_se([f], lambda m: m, block, st.n_resamples, bseed + 100 + j)
                res[f"jump_pmf({j};{lag[0]},{lag[1]})"] = (an.poisson_jump_pmf(model, lag, j), float(f.mean()), se)
        if "order" in checks:
            lt, gt = (d < 0).astype(float), (d > 0).astype(float)
            p_less, _, p_greater = an.poisson_order_probs(model, lag)
            se = _bootstrap_se([lt], lambda m: m, block, st.n_resamples, bseed + 200)
            res[f"p_less({lag[0]},{lag[1]})"] = (p_less, float(lt.mean()), se)
            se = _bootstrap_se([lt - gt], lambda m: m, block, st.n_resamples, bseed + 201)
            res[f"p_less-p_greater({lag[0]},{lag[1]})"] = (0.0, float((lt - gt).mean()), se)
        if "conditional" in checks and mom.var_x > 0:
            res.update(_conditional_checks(model, x, lag, st, block, bseed + 300))
    return res


def _conditional_checks(model, x, lag, st, block, seed):
    """Slope and intercept of the conditional mean profile.

    The WLS fit over reliable bins equals ordinary least squares on the
    selected pairs, so it is a function of pair moments; its standard error
    comes from the block bootstrap of those moments.
    """
    cur, lagged = _shifted_pair(x, -lag[0], -lag[1])
    profile = conditional_mean_profile(x, lag[0], lag[1], st.min_count)
    keep_vals = np.array([v for v, b in profile.items() if b.reliable])
    if keep_vals.size < 2:
        return {}
    slope, intercept, *_ = profile_regression(profile)
    mask = np.isin(lagged, keep_vals).astype(float)
    fields = [mask, mask * lagged, mask * cur, mask * lagged * cur, mask * lagged * lagged]

    def fit(n, sx, sy, sxy, sxx):
        mx, my = sx / n, sy / n
        b = (sxy / n - mx * my) / (sxx / n - mx * mx)
        return b, my - b * mx

    reps = block_bootstrap_means(fields, block, st.n_resamples, seed)
    b_rep, a_rep = fit(*reps.T)
    rho = an.acf(model, lag)
    mu_x = an.marginal_moments(model).mean_x
    return {
        f"cond_slope({lag[0]},{lag[1]})": (rho, slope, float(np.std(b_rep, ddof=1))),
        f"cond_intercept({lag[0]},{lag[1]})": (mu_x * (1 - rho), intercept, float(np.std(a_rep, ddof=1))),
    }


def _oracle_checks(model: InmaModel, tol: float = 1e-10):
    """Analytic formulas against exhaustive enumeration (no simulation)."""
    out = []
    try:
        budget = EnumerationBudget.for_model(model, state_limit=2 * 10**5)
        pmf, err = enumerate_marginal_pmf(model, budget)
    except ResourceError:  # too big to enumerate: skip the oracle group
        return out
    for u in (0.0, 0.25, 0.5, 0.75):
        out.append(_tol_check(f"oracle_marginal_pgf({u})", an.marginal_pgf(model, u),
                              pmf_pgf(pmf, u), err + tol))
    q1, q2 = model.order
    for k in range(q1 + 1):
        for l in range(q2 + 1):
            try:
                joint, jerr = enumerate_bivariate_pmf(model, (k, l), budget)
            except ResourceError:
                continue
            out.append(_tol_check(f"oracle_bivariate_pgf(0.5,0.5;{k},{l})",
                                  an.bivariate_pgf(model, 0.5, 0.5, (k, l)),
                                  pmf_pgf(joint, 0.5, 0.5), jerr + tol))
            xmax = joint.shape[0] - 1
            out.append(_tol_check(f"oracle_acvf({k},{l})", an.acvf(model, (k, l)),
                                  pmf_covariance(joint), 2 * jerr * xmax**2 + tol))
    return out


def verify(model: InmaModel, n1: int, n2: int, seed: int, checks=DEFAULT_CHECKS, *,
           z_threshold: float = Z_THRESHOLD, replications: int = 1, workers: int = 1,
           grid: Grid | None = None, block: int | None = None,
           n_resamples: int = N_BOOTSTRAP, tv_tolerance: float = 0.01,
           u_points=((0.5, 0.5), (0.25, 0.75))) -> VerificationReport:
    """Simulate (or take ``grid``) and compare empirical statistics with the
    closed forms.

    z-checks pass when |empirical - analytic| <= z_threshold * se; the pmf
    check passes when the total variation distance is below
    ``tv_tolerance``; oracle checks pass within the enumeration error bound
    plus 1e-10.  With ``replications`` > 1, replicate r uses seed + r and
    replicate estimates are averaged (standard errors divided by sqrt(R)).
    """
    model.check()
    if grid is not None and grid.model_hash is not None and grid.model_hash != model.hash:
        raise ConfigurationError(
            f"grid was generated by model {grid.model_hash[:12]}..., not {model.hash[:12]}..."
        )
    checks = set(checks)
    st = _Settings(z_threshold=z_threshold, block=block, n_resamples=n_resamples,
                   tv_tolerance=tv_tolerance, u_points=tuple(tuple(p) for p in u_points))
    grids = [grid.values] if grid is not None else [
        simulate_grid(model, n1, n2, (int(seed) + r) % 2**64, workers=workers).values
        for r in range(max(1, int(replications)))
    ]
    per_rep = [_grid_checks(model, x, checks, st, int(seed) + r) for r, x in enumerate(grids)]
    results = []
    for name in per_rep[0]:
        analytic = per_rep[0][name][0]
        emp = float(np.mean([rep[name][1] for rep in per_rep]))
        se = math.sqrt(sum(rep[name][2] ** 2 for rep in per_rep)) / len(per_rep)
        results.append(_z_check(name, analytic, emp, se, z_threshold))
    if "pmf" in checks:
        pmf, _ = enumerate_marginal_pmf(model)
        tvs = [total_variation(marginal_histogram(x), pmf) for x in grids]
        results.append(_tol_check("pmf_total_variation", 0.0, float(np.mean(tvs)), tv_tolerance))
    if "oracle" in checks:
        results.extend(_oracle_checks(model))
    meta = {
        "model": model.to_dict(),
        "model_hash": model.hash,
        "seed": int(seed),
        "n1": int(grids[0].shape[0]),
        "n2": int(grids[0].shape[1]),
        "replications": len(grids),
        "bootstrap_block": st.block or default_block(model),
        "bootstrap_resamples": n_resamples,
    }
    return VerificationReport(results, z_threshold, meta)
