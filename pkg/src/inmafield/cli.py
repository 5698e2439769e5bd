"""Command-line front end.

Usage::

    inmafield simulate --config run.yaml [--seed N] [--n1 N] [--n2 N] [--workers N] [--out DIR]
    inmafield analyze  --config run.yaml [--out DIR]
    inmafield verify   --config run.yaml [--grid grid.csv] [--out DIR]
    inmafield oracle   --config run.yaml [--out DIR]

Configuration (YAML)::

    model:
      order: [1, 1]                 # q1, q2
      beta: [[0.5, 0.5], [0.5, 0.5]]  # beta[i][j], (q1+1) rows of q2+1 entries
      innovation: {family: poisson, mu: 2.0}   # or negbin (n, pi), deterministic (c)
      crossdep: independence        # or spread
    run: {n1: 500, n2: 500, seed: 2024, workers: 1, out: out}
    analysis: {lag_box: [2, 2], u_grid: [0.0, 0.5, 1.0], z_threshold: 4.0, replications: 1}
    oracle: {innovation_cutoff: null, tail: 1.0e-10, state_limit: 1000000}

Files written to the output directory:

``grid.csv``
    ASCII, n1 lines of n2 comma-separated integers; line s holds X[s, 1..n2].
``grid.json``
    Sidecar: n1, n2, seed, model_hash, mode.
``analysis.json``, ``report.json``, ``oracle.json``
    UTF-8 JSON with sorted keys.

Exit status: 0 on success, 1 when verification fails, 2 on configuration or
usage errors, 3 when a resource budget is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analytics as an
from .distributions import Poisson
from .errors import DomainError, InmaError, ResourceError
from .estimators import verify
from .io import RunConfig, load_config, load_grid, save_grid
from .oracle import EnumerationBudget, oracle_json
from .simulator import simulate_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def _write_json(path: Path, doc) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = doc if isinstance(doc, str) else json.dumps(doc, sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def _out_dir(cfg: RunConfig) -> Path:
    return Path(cfg.run["out"])


def cmd_simulate(cfg: RunConfig) -> int:
    run = cfg.run
    grid = simulate_grid(cfg.model, run["n1"], run["n2"], run["seed"],
                         workers=run["workers"], max_cells=run["max_cells"])
    csv_path, meta_path = save_grid(grid, _out_dir(cfg) / "grid.csv")
    mom = an.marginal_moments(cfg.model)
    x = grid.values
    print(f"wrote {csv_path} and {meta_path}")
    print(f"{'':10}{'empirical':>14}{'analytic':>14}")
    print(f"{'mean':10}{x.mean():14.6f}{mom.mean_x:14.6f}")
    print(f"{'variance':10}{x.var():14.6f}{mom.var_x:14.6f}")
    return EXIT_OK


def _acf_or_none(model, lag):
    try:
        return an.acf(model, lag)
    except DomainError:
        return None  # zero variance


def analysis_document(cfg: RunConfig) -> dict:
    """Closed-form quantities for the configured model."""
    model = cfg.model
    q1, q2 = model.order
    K1, K2 = cfg.lag_box
    mom = an.marginal_moments(model)
    acf_rows = []
    for k in range(K1 + 1):
        for l in range(K2 + 1):
            acf_rows.append({
                "lag": [k, l],
                "acvf": an.acvf(model, (k, l)),
                "acf": _acf_or_none(model, (k, l)),
                "within_order": k <= q1 and l <= q2,
            })
    doc = {
        "model": model.to_dict(),
        "model_hash": model.hash,
        "moments": {"mean": mom.mean_x, "variance": mom.var_x, "beta_dot": mom.beta_dot,
                    "long_run_variance": an.long_run_variance(model)},
        "acf": acf_rows,
        "pgf": [{"u": u, "value": an.marginal_pgf(model, u)} for u in cfg.analysis["u_grid"]],
        "bivariate_pgf": [
            {"lag": [k, l], "u": [u1, u2], "value": an.bivariate_pgf(model, u1, u2, (k, l))}
            for u1, u2 in cfg.analysis["bivariate_points"]
            for k in range(K1 + 1) for l in range(K2 + 1)
        ],
    }
    if isinstance(model.innovation, Poisson):
        lags = [(k, l) for k in range(K1 + 1) for l in range(K2 + 1) if (k, l) != (0, 0)]
        jmax = cfg.analysis["jump_max"]
        doc["poisson"] = {
            "jump_pmf": [
                {"lag": [k, l], "pmf": [an.poisson_jump_pmf(model, (k, l), j) for j in range(jmax + 1)]}
                for k, l in lags
            ],
            "order_probs": [
                dict(zip(("lag", "p_less", "p_equal", "p_greater"),
                         ([k, l], *an.poisson_order_probs(model, (k, l)))))
                for k, l in lags
            ],
            "conditional_moments": [
                {"lag": [k, l], "x": x,
                 **dict(zip(("mean", "variance"), an.poisson_conditional_moments(model, (k, l), x)))}
                for k, l in lags
                for x in range(int(np.ceil(mom.mean_x + 4 * np.sqrt(mom.var_x))) + 1)
            ],
        }
    else:
        doc["notes"] = [
            f"Poisson-only sections (jump pmf, order probabilities, conditional moments) "
            f"are absent: innovation family is {model.innovation.to_dict()['family']}"
        ]
    return doc


def cmd_analyze(cfg: RunConfig) -> int:
    path = _write_json(_out_dir(cfg) / "analysis.json", analysis_document(cfg))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, grid_path: str | None = None) -> int:
    run, ana = cfg.run, cfg.analysis
    grid = load_grid(grid_path) if grid_path else None
    report = verify(cfg.model, run["n1"], run["n2"], run["seed"],
                    z_threshold=ana["z_threshold"], replications=ana["replications"],
                    workers=run["workers"], grid=grid,
                    n_resamples=ana["bootstrap_resamples"], tv_tolerance=ana["tv_tolerance"],
                    u_points=ana["bivariate_points"])
    path = _write_json(_out_dir(cfg) / "report.json", report.to_json())
    print(report.table())
    print(f"wrote {path}")
    print("PASS" if report.passed else f"FAIL ({len(report.failures())} checks)")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(cfg: RunConfig) -> int:
    o = cfg.oracle
    if o["innovation_cutoff"] is None:
        budget = EnumerationBudget.for_model(cfg.model, o["tail"], o["state_limit"])
    else:
        m = o["innovation_cutoff"]
        budget = EnumerationBudget(m, cfg.model.innovation.tail_mass(m), o["state_limit"])
    K1, K2 = cfg.lag_box
    lags = [(k, l) for k in range(K1 + 1) for l in range(K2 + 1) if (k, l) != (0, 0)]
    path = _write_json(_out_dir(cfg) / "oracle.json", oracle_json(cfg.model, lags, budget))
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inmafield",
                                     description="Simulate and verify INMA count random fields.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("simulate", "simulate a grid and write CSV + JSON"),
                       ("analyze", "write closed-form quantities as JSON"),
                       ("verify", "compare simulated statistics with closed forms"),
                       ("oracle", "enumerate exact pmfs of a small model")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--seed", type=int)
        p.add_argument("--n1", type=int)
        p.add_argument("--n2", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out", metavar="DIR")
        if name == "verify":
            p.add_argument("--grid", metavar="CSV", help="verify this grid instead of simulating")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for key in ("seed", "n1", "n2", "workers", "out"):
            value = getattr(args, key)
            if value is not None:
                cfg.run[key] = value
        doc = cfg.to_dict()
        cfg = RunConfig.from_dict(doc)  # re-validate overrides
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.grid)
        return cmd_oracle(cfg)
    except ResourceError as exc:
        print(f"inmafield: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InmaError, ValueError, OSError) as exc:
        print(f"inmafield: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
