"""Command line entry point: ``irsvlc sweep|solve|power-study|unit-study``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from irsvlc.assign import KmOptions, iterative_km
from irsvlc.channel import gain_set
from irsvlc.config import ALGORITHMS, ConfigError, load_config, reference_config
from irsvlc.experiments import (SweepError, SweepSpec, apply_sweep_value, power_study_runs, unit_study_runs,
                                parse_values, results_csv, run_sweep, write_results)
from irsvlc.scene import SceneError, build_scene, service_model

SWEEP_ALIASES = {"power": "power_dbw", "n": "n_units", "delta": "reflectance"}


def _scenario(path):
    if path is None:
        return reference_config(), None
    loaded = load_config(path)
    return loaded.config, loaded.sweep


def cmd_sweep(args) -> int:
    cfg, block = _scenario(args.config)
    for var, val in (("n_units", args.n_units), ("reflectance", args.reflectance),
                     ("power_dbw", args.power)):
        if val is not None:
            cfg = apply_sweep_value(cfg, var, val)
    if args.sweep is None and block is None:
        raise SweepError("no sweep given: pass --sweep/--values or add a sweep block")
    base = SweepSpec.from_block(block, args.config) if block is not None else None
    variable = SWEEP_ALIASES[args.sweep] if args.sweep else base.variable
    if args.values is not None:
        values = parse_values(args.values)
    elif base is not None and base.variable == variable:
        values = base.values
    else:
        raise SweepError("--values is required")
    algos = args.algos.split(",") if args.algos else (base.algorithms if base else
                                                      ["proposed", "random", "no-irs"])
    spec = SweepSpec(
        variable=variable, values=values, algorithms=[a.strip() for a in algos],
        trials=args.trials if args.trials is not None else (base.trials if base else 200),
        seed=args.seed if args.seed is not None else (base.seed if base else 0),
        strict_eq14_weights=args.strict_eq14_weights or bool(base and base.strict_eq14_weights),
        scenario=args.config, workers=args.workers,
    )
    rows = run_sweep(spec, cfg)
    if args.out:
        write_results(rows, args.out, include_timing=args.timing)
    else:
        sys.stdout.write(results_csv(rows, include_timing=args.timing))
    return 0


def cmd_solve(args) -> int:
    cfg, _ = _scenario(args.config)
    scene = build_scene(cfg)
    gains = gain_set(scene)
    svc = service_model(scene)
    res = iterative_km(gains, scene, svc, KmOptions(strict_weights=args.strict_eq14_weights))
    cols = res.assignment.sum(axis=0)
    print(f"scenario      {cfg.name}")
    print(f"units/LEDs    N={scene.n_units} L={scene.n_leds} K={scene.n_users}")
    print(f"C_S           {res.report.secrecy / 1e6:.4f} Mbit/s")
    print(f"C_hat_S       {res.linearized / 1e6:.4f} Mbit/s")
    print(f"C_E           {res.report.cap_eve / 1e6:.4f} Mbit/s")
    print(f"outer iters   {res.outer_iters} (converged={res.converged})")
    print(f"column sums   {' '.join(str(int(c)) for c in cols)}")
    if args.assignment:
        np.savetxt(args.assignment, res.assignment, fmt="%d", delimiter=",")
    return 0


def _run_studies(runs, out_dir: Path, workers: int, timing: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for cfg, spec in runs:
        spec.workers = workers
        path = write_results(run_sweep(spec, cfg), out_dir / f"{cfg.name}.csv", include_timing=timing)
        print(path)
    return 0


def cmd_power_study(args) -> int:
    return _run_studies(power_study_runs(trials=args.trials, seed=args.seed), Path(args.out),
                        args.workers, args.timing)


def cmd_unit_study(args) -> int:
    return _run_studies(unit_study_runs(seed=args.seed), Path(args.out), args.workers, args.timing)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irsvlc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    p.add_argument("--config", help="scenario YAML (default: reference room)")
    p.add_argument("--sweep", choices=sorted(SWEEP_ALIASES))
    p.add_argument("--values", help="comma list or start:stop:step")
    p.add_argument("--algos", help=f"comma list from {','.join(ALGORITHMS)}")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--strict-eq14-weights", action="store_true",
                   help="divide user weights by 1 + lambda_k")
    p.add_argument("--n-units", type=int, help="fix N for non-N sweeps")
    p.add_argument("--reflectance", type=float, help="fix the IRS reflectance")
    p.add_argument("--power", type=float, help="fix all LED powers (dBW)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("solve", help="optimize one scenario and print the rates")
    p.add_argument("--config")
    p.add_argument("--strict-eq14-weights", action="store_true")
    p.add_argument("--assignment", help="write the 0/1 assignment matrix as CSV")
    p.set_defaults(func=cmd_solve)

    for name, func, help_ in (("power-study", cmd_power_study, "power sweeps at N=8 and N=64"),
                              ("unit-study", cmd_unit_study, "unit-count sweeps for three reflectances")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default="results")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timing", action="store_true")
        if name == "power-study":
            p.add_argument("--trials", type=int, default=200)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SweepError, SceneError, ValueError) as exc:
        print(f"irsvlc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
