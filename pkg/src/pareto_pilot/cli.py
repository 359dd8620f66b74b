"""Command-line entry points.

Subcommands:

* ``simulate``     one full loop with a simulated decision-maker
* ``batch``        many seeds (optionally several strategy arms), CSV report
* ``fit``          deterministic curve fit to a raw epsilon/accuracy CSV
* ``oracle-check`` Monte-Carlo verification of the closed-form oracle
* ``serve``        HTTP session API for live human-in-the-loop elicitation

Every command is deterministic given (config, seed), except ``serve``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    SessionConfig,
    load_config,
    parse_config,
)
from .front import CurveKind, FrontObservation, eval_front, map_fit
from .oracles import OracleError, load_front_table, mc_logistic_accuracy
from .session import run_batch, run_loop

CONFIG_ENV_VAR = "PARETO_PILOT_CONFIG"

ARM_PRESETS = {
    # arm name -> (curve_strategy, privacy_strategy)
    "kg": ("kg", "kg"),
    "random": ("random", "random"),
    "random_curve": ("random", "kg"),
    "pair_kg": ("pair_kg", "kg"),
    "random_pair": ("random_pair", "kg"),
}


def _load_session_config(path: str | None) -> SessionConfig:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return parse_config({})
    return load_config(path)


def cmd_simulate(args) -> int:
    config = _load_session_config(args.config)
    record = run_loop(config, seed=args.seed)
    out = Path(args.out) if args.out else Path(f"run_{args.seed}.json")
    out.write_text(json.dumps(record.to_json_dict(), indent=2, sort_keys=True), encoding="utf-8")
    final_regret = record.metric_trace[-1].regret
    print(f"eps_star={record.final_eps_star:.6g} alpha_star={record.final_alpha_star:.6g}")
    if final_regret is not None:
        print(f"final_regret={final_regret:.6g}")
    print(f"record written to {out}")
    return 0


def _parse_seeds(args) -> list[int]:
    if args.seeds is not None:
        path = Path(args.seeds)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read seeds file {path}: {exc}") from exc
        seeds = [int(tok) for tok in text.split()]
    else:
        seeds = list(range(args.num_seeds))
    if not seeds:
        raise ConfigError("seed list must not be empty")
    return seeds


def cmd_batch(args) -> int:
    config = _load_session_config(args.config)
    seeds = _parse_seeds(args)
    arm_names = [a.strip() for a in args.arms.split(",")] if args.arms else ["kg"]
    for name in arm_names:
        if name not in ARM_PRESETS:
            raise ConfigError(f"unknown arm {name!r}; choose from {sorted(ARM_PRESETS)}")

    out = Path(args.out) if args.out else Path("batch_report.csv")
    lines: list[str] = []
    any_failures = False
    for arm in arm_names:
        curve_strategy, privacy_strategy = ARM_PRESETS[arm]
        arm_cfg = replace(
            config,
            loop=replace(
                config.loop, curve_strategy=curve_strategy, privacy_strategy=privacy_strategy
            ),
        )
        report = run_batch(arm_cfg, seeds)
        any_failures = any_failures or bool(report.failures)
        for seed, message in report.failures:
            print(f"[{arm}] seed {seed} failed: {message}", file=sys.stderr)
        body = report.csv_lines()
        if len(arm_names) == 1:
            lines = body if not lines else lines + body[1:]
        else:
            if not lines:
                lines.append(body[0] + ",arm")
            lines.extend(f"{row},{arm}" for row in body[1:])
        final = report.rows[-1] if report.rows else None
        n_ok = len(report.records)
        print(f"[{arm}] {n_ok}/{len(seeds)} runs ok" + (f", last row: {final}" if final else ""))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"report written to {out}")
    return 1 if any_failures else 0


def cmd_fit(args) -> int:
    eps, acc = load_front_table(args.data)
    kind = CurveKind(args.kind)
    # Fit against the min-max scaled privacy level; accuracy stays raw, so
    # offset/span parameters come out in raw accuracy units.
    p_raw = -np.log(eps)
    lo, hi = float(p_raw.min()), float(p_raw.max())
    if hi - lo <= 0:
        raise ConfigError("fit data must cover more than one epsilon value")
    p_norm = (p_raw - lo) / (hi - lo)
    obs = [FrontObservation(p=float(p), alpha=float(a)) for p, a in zip(p_norm, acc)]
    result = map_fit(obs, kind)
    pars = result.params
    print(f"kind={kind.value}")
    print(f"L={pars.L:.6g} k={pars.k:.6g} b={pars.b:.6g} c={pars.c:.6g}")
    print(f"residual_norm={result.residual_norm:.6g}")
    print(f"converged={result.converged} at_bound={result.at_bound}")
    grid_n = args.grid
    grid = np.linspace(0.0, 1.0, grid_n)
    fitted = eval_front(grid, pars)
    grid_eps = np.exp(-(lo + grid * (hi - lo)))
    print("epsilon,fitted_accuracy")
    for e, a in zip(grid_eps, fitted):
        print(f"{e:.8g},{a:.8g}")
    return 0


def cmd_oracle_check(args) -> int:
    if args.C <= 0:
        raise ConfigError(f"C must be > 0, got {args.C}")
    eps_values = [float(tok) for tok in args.eps.split(",")]
    if any(e <= 0 for e in eps_values):
        raise ConfigError("all epsilon values must be > 0")
    rng = np.random.default_rng(args.seed)
    n = args.samples
    all_pass = True
    print("epsilon,closed_form,monte_carlo,std_error,pass")
    for eps in eps_values:
        closed = 1.0 - 0.5 * math.exp(-args.C * eps)
        estimate = mc_logistic_accuracy(args.C, eps, n_noise=n, n_x=1, rng=rng)
        se = math.sqrt(max(closed * (1.0 - closed), 1e-12) / n)
        ok = abs(estimate - closed) < 3.0 * se
        all_pass = all_pass and ok
        print(f"{eps:.6g},{closed:.6f},{estimate:.6f},{se:.6f},{'yes' if ok else 'NO'}")
    return 0 if all_pass else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_session_config(args.config)
    host, _, port = args.bind.rpartition(":")
    host = host or "127.0.0.1"
    app = create_app(config, snapshot_dir=args.snapshot_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-pilot",
        description="Interactive decision support for the privacy-accuracy trade-off.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one loop with a simulated decision-maker")
    sim.add_argument("--config", help=f"config JSON path (or ${CONFIG_ENV_VAR})")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="output RunRecord JSON path")
    sim.set_defaults(func=cmd_simulate)

    batch = sub.add_parser("batch", help="run many seeds and aggregate metrics")
    batch.add_argument("--config", help=f"config JSON path (or ${CONFIG_ENV_VAR})")
    batch.add_argument("--seeds", help="file of whitespace-separated seeds")
    batch.add_argument("--num-seeds", type=int, default=30)
    batch.add_argument(
        "--arms",
        help="comma-separated strategy arms: " + ",".join(sorted(ARM_PRESETS)),
    )
    batch.add_argument("--out", help="output CSV path")
    batch.set_defaults(func=cmd_batch)

    fit = sub.add_parser("fit", help="least-squares curve fit to epsilon/accuracy data")
    fit.add_argument("--data", required=True, help="CSV with header epsilon,accuracy")
    fit.add_argument("--kind", choices=[k.value for k in CurveKind], default="sigmoid")
    fit.add_argument("--grid", type=int, default=41, help="fitted grid size to print")
    fit.set_defaults(func=cmd_fit)

    check = sub.add_parser("oracle-check", help="verify the closed-form oracle by Monte Carlo")
    check.add_argument("--C", type=float, default=5.0)
    check.add_argument("--eps", default="0.05,0.1,0.2,0.5", help="comma-separated epsilons")
    check.add_argument("--samples", type=int, default=1_000_000)
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=cmd_oracle_check)

    serve = sub.add_parser("serve", help="HTTP session API for live elicitation")
    serve.add_argument("--config", help=f"config JSON path (or ${CONFIG_ENV_VAR})")
    serve.add_argument("--bind", default="127.0.0.1:8765", help="host:port")
    serve.add_argument("--snapshot-dir", help="write per-session JSON snapshots on shutdown")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OracleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
