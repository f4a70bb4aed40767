import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from osclogic.gates import GateInstance, run_truth_table

settings.register_profile("osclogic", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("osclogic")

PI = math.pi


@pytest.fixture(scope="session")
def truth_tables():
    """Every gate's truth table in both engines, computed once per session."""
    out = {}
    gates = {"not": GateInstance.not_gate(), "and": GateInstance.majority("and"),
             "or": GateInstance.majority("or")}
    for name, gate in gates.items():
        for engine in ("full", "phase"):
            out[name, engine] = (gate, run_truth_table(gate, engine))
    return out


def angle_close(a, b, tol):
    return abs(math.remainder(a - b, 2 * PI)) < tol


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS):
            terminalreporter.write_line(line)
