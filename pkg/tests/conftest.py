"""Shared fixtures.

Everything expensive is session-scoped: ChamberModel memoizes membrane
solves per pressure, so sharing one robot across the whole run turns
most contact/navigation tests into cache hits.
"""
from __future__ import annotations

from dataclasses import replace

import pytest

from evertrack import load_calibration, paper_fixtures
from evertrack.membrane import ChamberModel


@pytest.fixture(scope="session")
def calibration():
    return load_calibration()


@pytest.fixture(scope="session")
def robot(calibration):
    return calibration.build_robot()


@pytest.fixture(scope="session")
def chamber(robot):
    """Lateral-flange chamber, default mesh, shared solve cache."""
    return robot.chamber


@pytest.fixture(scope="session")
def cf_chamber(calibration, chamber):
    """Central-flange variant of the same chamber, for style comparisons."""
    profile = replace(calibration.profile, flange_style="CF")
    return ChamberModel(profile, calibration.material, chamber.options)


@pytest.fixture(scope="session")
def fixtures():
    return paper_fixtures()
