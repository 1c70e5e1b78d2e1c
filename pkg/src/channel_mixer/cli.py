"""Command-line entry point: ``channel-mixer {run,scan,tomo,verify}``."""
import argparse
import logging
import sys

import numpy as np

from . import channels as ch
from .divisibility import process_fidelity
from .errors import ChannelMixerError, ConfigError
from .experiment import (CHANNEL_LABELS, EXPERIMENT_NAMES, EXPERIMENTS, ExperimentConfig,
                         run_experiment)
from .reconstruction import MLE_METHODS, chi_linear_inversion, mle_chi, run_tomography, states_from_counts

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3


def _config_args(p: argparse.ArgumentParser, shots_mode: bool):
    p.add_argument("--experiment", choices=EXPERIMENT_NAMES + ("all",), default="mm")
    p.add_argument("--t-max", type=float, help="end of the time grid (experiment default if omitted)")
    p.add_argument("--t-step", type=float)
    p.add_argument("--s", type=float, help="reference time of the intermediate map")
    p.add_argument("--eps-class", type=float)
    p.add_argument("--eps-tp", type=float)
    p.add_argument("--pinv-cutoff", type=float)
    p.add_argument("--out", dest="output_dir", help="directory for CSV output")
    if shots_mode:
        p.add_argument("--mode", choices=("analytic", "shots"), default="shots")
        p.add_argument("--shots", type=int)
        p.add_argument("--resamples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--mle-method", choices=MLE_METHODS)


def _configs(args, mode=None):
    names = EXPERIMENT_NAMES if args.experiment == "all" else (args.experiment,)
    keys = ("t_max", "t_step", "s", "eps_class", "eps_tp", "pinv_cutoff", "output_dir",
            "mode", "shots", "resamples", "seed", "mle_method")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if mode is not None:
        overrides["mode"] = mode
    cfgs = []
    for name in names:
        o = dict(overrides)
        if "output_dir" in o and len(names) > 1:
            o["output_dir"] = f"{o['output_dir']}/{name}"
        cfgs.append(ExperimentConfig.default_for(name, **o).validate())
    return cfgs


def cmd_run(args, mode=None) -> int:
    cfgs = _configs(args, mode)
    status = EXIT_OK
    for cfg in cfgs:
        records = run_experiment(cfg)
        for rec in records:
            verdict = "markovian" if rec.markovian else "non-markovian"
            ok = rec.fidelity_mean[np.isfinite(rec.fidelity_mean)]
            fid = ok.mean() if ok.size else float("nan")
            print(f"{cfg.experiment:11s} {rec.label}  {rec.family:18s} {verdict:14s} "
                  f"mean fidelity {fid:.4f}  failures {len(rec.failures)}")
            if rec.failures:
                status = EXIT_PARTIAL
        if mode == "analytic" and cfg.output_dir is None:
            _print_scan(records)
    return status


def _print_scan(records):
    times = sorted({r.t for rec in records for r in rec.mineig})
    table = {rec.label: {r.t: r.mean for r in rec.mineig} for rec in records}
    print("t       " + "  ".join(f"{rec.label:>12s}" for rec in records))
    for t in times:
        print(f"{t:<7.3g} " + "  ".join(f"{table[rec.label].get(t, float('nan')):12.6f}" for rec in records))


def cmd_tomo(args) -> int:
    spec = {c.label: c for c in EXPERIMENTS[args.experiment]}[args.channel]
    counts = run_tomography(spec.circuit(args.t), args.shots, args.seed, exact=args.exact)
    chi_p = chi_linear_inversion(states_from_counts(counts))
    res = mle_chi(counts)
    ideal = ch.chi_ideal(spec.family, args.t)
    np.set_printoptions(precision=4, suppress=True, linewidth=120)
    print(f"counts: {counts.n.astype(int) if not args.exact else counts.n}")
    print(f"chi (linear inversion):\n{chi_p}")
    print(f"chi (maximum likelihood):\n{res.chi}")
    print(f"process fidelity vs ideal: {process_fidelity(res.chi, ideal):.6f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .invariants import run_checks
    ok = True
    for name, passed, detail in run_checks(args.seed):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="channel-mixer",
                                     description="Mix qubit Pauli channels and test their divisibility.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full experiment: tomography, MLE, resampling, scans")
    _config_args(run, shots_mode=True)

    scan = sub.add_parser("scan", help="analytic intermediate-map curves only")
    _config_args(scan, shots_mode=False)

    tomo = sub.add_parser("tomo", help="tomography of one channel at one time")
    tomo.add_argument("--experiment", choices=EXPERIMENT_NAMES, default="mm")
    tomo.add_argument("--channel", choices=CHANNEL_LABELS, default="LT")
    tomo.add_argument("--t", type=float, default=1.0)
    tomo.add_argument("--shots", type=int, default=8192)
    tomo.add_argument("--seed", type=int, default=7)
    tomo.add_argument("--exact", action="store_true", help="use expected counts instead of sampling")

    verify = sub.add_parser("verify", help="run the numerical self-checks")
    verify.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "scan":
            return cmd_run(args, mode="analytic")
        if args.command == "tomo":
            return cmd_tomo(args)
        return cmd_verify(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ChannelMixerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
