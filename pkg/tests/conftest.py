import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number (or contract label) -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def _label(k):
    return f"criterion {k:2d}" if isinstance(k, int) else f"contract {k}"


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"{_label(number)}: {'PASS' if passed else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE, key=lambda k: (isinstance(k, str), str(k).zfill(3))):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{_label(k)}: {'PASS' if ok else 'FAIL'}  {detail}")
