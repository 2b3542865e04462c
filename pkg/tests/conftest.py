"""Shared fixtures plus a pass/fail summary line for each acceptance criterion."""

import math

import numpy as np
import pytest

import raysim as rs

ACCEPTANCE_RESULTS = []

PHI_MAX = 0.499 * math.pi


def record_criterion(number: int, description: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((number, description, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, description, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{status}] {description}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ray_pattern():
    return rs.ElementPattern.directional(5.1335, 0.3 * math.pi)


@pytest.fixture(scope="session")
def ula_pattern():
    return rs.ElementPattern.directional(0.0, math.pi)


@pytest.fixture(scope="session")
def iso_pattern():
    return rs.ElementPattern.isotropic(-2.816)


@pytest.fixture(scope="session")
def small_multiuser_channels(ray_pattern):
    """50 seeded realizations of the 3-user small-array scenario (M=6, N=9)."""
    cfg = rs.design_ray_array(6, PHI_MAX)
    params = rs.ScenarioParams(num_users=3, seed=1)
    out = []
    for r in range(50):
        paths = [rs.sample_paths(params, rs.path_rng(1, k, r)) for k in range(3)]
        out.append(np.stack([rs.effective_ray_channel(p, cfg, ray_pattern) for p in paths]))
    return cfg, out
