import os
import sys

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance_log():
    """Record the one-line outcome of an acceptance criterion."""
    def log(criterion: int, ok: bool, text: str):
        _ACCEPTANCE[criterion] = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {text}"
    return log


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
