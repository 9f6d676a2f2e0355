from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tabletennis_es.sim import EnvConfig, NoiseDelayModel, PhysicsConfig, RobotModel  # noqa: E402
from tabletennis_es.sim.throws import forehand  # noqa: E402


@pytest.fixture
def phys():
    return PhysicsConfig()


@pytest.fixture
def robot():
    return RobotModel()


@pytest.fixture
def quiet_env():
    """Forehand environment without noise or delays."""
    return EnvConfig(distribution=forehand(), noise=NoiseDelayModel.off())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance results collected by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
