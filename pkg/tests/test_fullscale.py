"""Full-configuration checks; run with DEMIX_FULLSCALE=1 (about a minute each)."""
from pathlib import Path

import numpy as np
import pytest

from demix.amp_core import run_amp
from demix.channel import draw_scenario, transmit
from demix.config import load_config
from demix.sweep import build_operators

pytestmark = pytest.mark.slow
CFG = Path(__file__).resolve().parents[1] / "configs" / "paper-fig3.toml"


@pytest.fixture(scope="module")
def setup():
    cfg = load_config(CFG)
    graphs = cfg.graphs()
    return cfg, graphs, build_operators(cfg, graphs)


def test_tau_trace_settles(setup):
    cfg, graphs, ops = setup
    groups = cfg.group_configs(2.8, graphs)
    good = 0
    for t in range(20):
        y = transmit(draw_scenario(groups, cfg.master_seed, t), groups, ops, cfg.n)
        taus = np.array([tau for _, tau, _ in run_amp(y, groups, ops).trace])
        good += np.all(np.diff(taus[3:]) <= 1e-12 * taus[3:-1])
    assert good >= 18


def test_tau_finite_for_25_iterations(setup):
    cfg, graphs, ops = setup
    groups = cfg.group_configs(1.8, graphs)
    y = transmit(draw_scenario(groups, cfg.master_seed, 0), groups, ops, cfg.n)
    st = run_amp(y, groups, ops, max_iter=25, tol=0.0)
    taus = [tau for _, tau, _ in st.trace]
    assert len(taus) == 26 and all(np.isfinite(taus)) and min(taus) > 0
    for e in st.estimates:
        assert 0 <= e.min() and e.max() <= 1

