"""Run shipped configs through the CLI and print one summary line per config.

    python3 scripts/run_configs.py                 # every configs/*.json
    python3 scripts/run_configs.py verify_jump mc_smoke --workers 2
"""
import argparse
import json
import sys
import time
from pathlib import Path

from sklevy.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("names", nargs="*", help="config stems (default: all)")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, default=ROOT / "out")
    args = p.parse_args(argv)
    names = args.names or sorted(c.stem for c in (ROOT / "configs").glob("*.json"))
    worst = 0
    for name in names:
        cfg = ROOT / "configs" / f"{name}.json"
        command = json.loads(cfg.read_text())["experiment"]
        extra = ["--out", str(args.out), "--quiet"]
        if args.workers:
            extra += ["--workers", str(args.workers)]
        t0 = time.perf_counter()
        code = cli_main([command, str(cfg)] + extra)
        print(f"{name:20s} exit {code}  {time.perf_counter() - t0:7.1f}s")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
