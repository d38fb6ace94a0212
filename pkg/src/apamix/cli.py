"""Command-line front end: simulate, predict, sweep-rho."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import harness, theory
from .errors import ConfigError, DivergenceError


def _load_config(args) -> harness.ExperimentConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("either --config or --preset is required")
    if args.config is not None:
        cfg = harness.read_config(args.config)
    else:
        scale = {"paper-full": "full", "paper-desk": "desk"}[args.preset]
        cfg = harness.preset_paper_scenario(
            scale=scale,
            input_kind=args.input,
            filter2_kind=args.filter2,
        )
    return cfg


def _print_steady_table(cfg, curves):
    wf = cfg.steady_window_fraction
    print(f"{'seg':>3} {'K':>4} {'J1':>10} {'J2':>10} {'J12':>10} {'J':>10} "
          f"{'J1 dB':>8} {'J2 dB':>8} {'J dB':>8} {'lam':>6}")
    for k, seg in enumerate(curves.segments):
        st = harness.steady_state_stats(curves, k, wf)
        print(
            f"{k:>3} {seg.K:>4} {st.J1:>10.3e} {st.J2:>10.3e} {st.J12:>10.3e} "
            f"{st.J:>10.3e} {harness.to_db(st.J1):>8.2f} {harness.to_db(st.J2):>8.2f} "
            f"{harness.to_db(st.J):>8.2f} {st.lam:>6.3f}"
        )


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if args.runs is not None:
        cfg = replace(cfg, runs=args.runs)
    curves = harness.run_experiment(cfg, workers=args.workers, skip_diverged=args.skip_diverged)
    if curves.skipped:
        print(f"skipped {len(curves.skipped)} diverged trial(s): {sorted(curves.skipped)}")
    _print_steady_table(cfg, curves)
    if args.out:
        harness.write_curves(curves, args.out, db=args.db)
        print(f"wrote {curves.n_samples} rows to {args.out}")
    return 0


def cmd_predict(args) -> int:
    cfg = _load_config(args)
    model = cfg.scenario.input
    if model.kind != "white":
        print("closed-form prediction is available for white input only", file=sys.stderr)
        return 2
    if cfg.filter2.proportionate is not None:
        print(
            "note: closed forms model the plain zero-attracting branch; "
            "proportionate gains are not modeled",
            file=sys.stderr,
        )
    f2 = cfg.filter2
    lam_plus = cfg.mixing.initial_state().lam_plus
    print(f"{'seg':>3} {'K':>4} {'J1':>10} {'J2':>10} {'J12':>10} {'Jc':>10} "
          f"{'J1 dB':>8} {'J2 dB':>8} {'Jc dB':>8} {'lam_inf':>8} {'regime':>14} "
          f"{'rho_max':>10} {'rho_sparse':>10}")
    for k, seg in enumerate(cfg.scenario.segments):
        ti = theory.TheoryInputs(
            L=cfg.scenario.L,
            K=seg.K,
            M=f2.M,
            mu=f2.mu,
            rho=f2.rho,
            noise_variance=cfg.scenario.noise_variance,
            input_variance=model.variance,
        )
        pred = theory.predict_steady_state(ti, lam_plus)
        rho_max = "undefined" if pred.rho_bound is None else f"{pred.rho_bound:>10.3e}"
        print(
            f"{k:>3} {seg.K:>4} {pred.J1:>10.3e} {pred.J2:>10.3e} {pred.J12:>10.3e} "
            f"{pred.J_combined:>10.3e} {harness.to_db(pred.J1):>8.2f} "
            f"{harness.to_db(pred.J2):>8.2f} {harness.to_db(pred.J_combined):>8.2f} "
            f"{pred.lam_inf:>8.4f} {pred.regime:>14} {rho_max:>10} "
            f"{pred.rho_bound_sparse:>10.3e}"
        )
    return 0


def cmd_sweep_rho(args) -> int:
    cfg = _load_config(args)
    try:
        lo, hi, steps = args.grid.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError as exc:
        raise ConfigError(f"bad --grid {args.grid!r}, expected lo:hi:steps") from exc
    if not (0 < lo <= hi and steps >= 1):
        raise ConfigError("grid needs 0 < lo <= hi and steps >= 1")
    grid = np.geomspace(lo, hi, steps)
    points = harness.sweep_rho(cfg, grid, workers=args.workers, skip_diverged=args.skip_diverged)
    print(f"{'rho':>12} {'J1':>10} {'J2':>10} {'J12':>10} {'J':>10} {'lam':>6}")
    for rho, st in points:
        print(f"{rho:>12.4e} {st.J1:>10.3e} {st.J2:>10.3e} {st.J12:>10.3e} "
              f"{st.J:>10.3e} {st.lam:>6.3f}")
    if args.out:
        harness.write_sweep(points, args.out, db=args.db)
        print(f"wrote {len(points)} rows to {args.out}")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--preset", choices=["paper-full", "paper-desk"],
                   help="built-in scenario preset (alternative to --config)")
    p.add_argument("--input", choices=["white", "ar1"], default="white",
                   help="input process for --preset")
    p.add_argument("--filter2", choices=["zaapa", "zapapa"], default="zaapa",
                   help="second branch algorithm for --preset")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--skip-diverged", action="store_true",
                   help="drop diverged trials instead of aborting")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="apamix",
                                 description="Sparse system identification with an adaptive "
                                             "convex combination of projection filters")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    _add_common(p)
    p.add_argument("--out", help="write learning curves CSV here")
    p.add_argument("--db", action="store_true", help="emit curve magnitudes in dB")
    p.add_argument("--runs", type=int, help="override the configured trial count")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="print closed-form steady-state tables")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep-rho", help="empirical steady state vs attractor strength")
    _add_common(p)
    p.add_argument("--grid", required=True, help="lo:hi:steps (geometric spacing)")
    p.add_argument("--out", help="write sweep CSV here")
    p.add_argument("--db", action="store_true", help="emit magnitudes in dB")
    p.set_defaults(func=cmd_sweep_rho)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
