"""Run the acceptance criteria and print the per-criterion summary.

    python3 scripts/run_acceptance.py            # all eleven
    python3 scripts/run_acceptance.py -k "01 or 05"
"""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", *sys.argv[1:]]))
