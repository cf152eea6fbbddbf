import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def experiment():
    """The default five-seed simulation, run once per test session."""
    import time

    from ltstr.experiment import ExperimentConfig, run_experiment

    t0 = time.perf_counter()
    report = run_experiment(ExperimentConfig())
    report.elapsed = time.perf_counter() - t0
    return report


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
