"""Command line interface.

    sklevy bf      [CONFIG] [--phi A --psi G]   exponent inspection
    sklevy verify  CONFIG                       quadrature checks
    sklevy mc      CONFIG                       simulation experiments
    sklevy report  REPORT.json [--csv PATH]     re-render a saved report

Common flags: --seed, --workers (default from $SKLEVY_WORKERS), --out DIR.
The exit status is 0 when every check passed, 1 when any check failed and
2 on configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .montecarlo.rng import WORKERS_ENV
from .report import emit_report, load_report, summary_lines, to_csv, write_timing
from .runner import run_experiment

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="sklevy", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--workers", type=int,
                        help=f"worker threads (default ${WORKERS_ENV} or 1)")
        sp.add_argument("--out", type=Path, help="output directory (overrides config)")
        sp.add_argument("--quiet", action="store_true")

    bf = sub.add_parser("bf", help="inspect Bernstein exponents")
    bf.add_argument("config", nargs="?", type=Path)
    bf.add_argument("--phi", type=float, help="stable index of phi (no config)")
    bf.add_argument("--psi", type=float, help="stable index of psi (no config)")
    common(bf)
    for name, text in (("verify", "quadrature lemma checks"), ("mc", "simulation experiments")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", type=Path)
        common(sp)
    rp = sub.add_parser("report", help="re-render a saved report")
    rp.add_argument("report", type=Path)
    rp.add_argument("--csv", type=Path, help="rewrite the CSV sidecar here")
    rp.add_argument("--quiet", action="store_true")
    return p


def _bf_default(phi, psi):
    phi = 0.6 if phi is None else phi
    psi = 0.7 if psi is None else psi
    return ExperimentConfig.from_dict({
        "experiment": "bf", "name": "bf",
        "phi": {"kind": "stable", "alpha": phi}, "psi": {"kind": "stable", "alpha": psi},
        "checks": [{"kind": "window", "target": "phi"}, {"kind": "window", "target": "psi"},
                   {"kind": "window", "target": "psi_phi"},
                   {"kind": "laplace", "target": "psi"}]})


def _load(args, command):
    if command == "bf" and args.config is None:
        cfg = _bf_default(args.phi, args.psi)
    else:
        cfg = load_config(args.config)
    if cfg.experiment != command:
        raise ConfigError(f"config error at $.experiment: {cfg.experiment!r} config given to "
                          f"the {command!r} subcommand")
    return cfg.with_overrides(args.seed, args.workers, args.out)


def _emit(cfg, report, timings, quiet):
    lines = summary_lines(report)
    out_dir = cfg.output.get("dir")
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        stem = d / cfg.output.get("stem", cfg.name)
        paths = emit_report(report, stem)
        paths.append(write_timing(stem, timings))
        lines.append("wrote " + ", ".join(str(p) for p in paths))
    if not quiet:
        print("\n".join(lines))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "report":
            report = load_report(args.report)
            if args.csv:
                args.csv.write_text(to_csv(report))
            if not args.quiet:
                print("\n".join(summary_lines(report)))
            return EXIT_OK if report.passed else EXIT_FAIL
        cfg = _load(args, args.command)
        report, timings = run_experiment(cfg)
        _emit(cfg, report, timings, args.quiet)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
