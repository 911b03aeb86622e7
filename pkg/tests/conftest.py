import os

import numpy as np
import pytest

from demix.model import GroupConfig
from demix.outer_code import preset

FULLSCALE = os.environ.get("DEMIX_FULLSCALE", "0") not in ("", "0", "false", "no")


def pytest_collection_modifyitems(config, items):
    if FULLSCALE:
        return
    skip = pytest.mark.skip(reason="full-scale Monte Carlo; set DEMIX_FULLSCALE=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy8():
    return preset("toy-8x4")


def toy_groups(K1=1, K2=1, d1=6.0, d2=5.0):
    return [GroupConfig(preset("toy-32x8"), K1, d1), GroupConfig(preset("toy-24x8"), K2, d2)]


ACCEPTANCE = {}  # criterion id -> (status, detail); filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        status, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{status:<4} criterion {cid}: {detail}")
