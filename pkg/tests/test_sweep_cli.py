import io
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from demix import cli
from demix.config import ConfigError, from_dict, load_config
from demix.sweep import (
    CSV_HEADER, SweepRecord, emit_plot_script, read_csv, run_single_trial, run_sweep,
    wilson_interval, write_csv,
)

ROOT = Path(__file__).resolve().parents[1]
TOY = dict(
    n=1024, ebn0_db=[4.0, 6.0], trials=4, master_seed=11, sigma2=1.0,
    group=[{"preset": "toy-32x8", "K": 3}, {"preset": "toy-24x8", "K": 3}],
)


def toy_cfg(**kw):
    raw = dict(TOY)
    raw.update(kw)
    return from_dict(raw)


def test_default_config_matches_setup():
    cfg = load_config(ROOT / "configs" / "paper-fig3.toml")
    g1, g2 = cfg.graphs()
    assert [s.K for s in cfg.groups] == [25, 25]
    assert (g1.w, g1.L, g1.v, g2.w, g2.L, g2.v) == (128, 16, 16, 96, 16, 16)
    assert len(g1.parity_sections) == 8 and len(g2.parity_sections) == 10
    assert cfg.n == 38400 and cfg.trials == 100 and cfg.sigma2 == 1.0
    assert cfg.max_iter == 25 and cfg.tol == 1e-4
    assert cfg.receivers == ("jd", "tin", "sic")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        toy_cfg(group=[{"preset": "missing", "K": 1}])
    with pytest.raises(ConfigError):
        toy_cfg(trials=0)
    with pytest.raises(ConfigError):
        toy_cfg(group=[{"preset": "toy-32x8", "K": 1, "w": 31}])
    with pytest.raises(ConfigError):
        toy_cfg(bogus=1)
    bad = tmp_path / "bad.toml"
    bad.write_text("n = [")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_hash():
    a = toy_cfg()
    assert a.config_hash() == toy_cfg().config_hash()
    assert a.config_hash() == a.replace(workers=4, out="x.csv").config_hash()
    for change in (dict(trials=5), dict(master_seed=1), dict(n=1000), dict(beam_width=7), dict(ebn0_db=(4.0,))):
        assert a.replace(**change).config_hash() != a.config_hash()


@given(st.integers(0, 200), st.integers(0, 200))
def test_wilson(errors, rest):
    total = max(errors + rest, 1)
    lo, hi = wilson_interval(errors, total)
    assert 0 <= lo <= errors / total <= hi <= 1


def test_wilson_known():
    lo, hi = wilson_interval(5, 100)
    assert lo == pytest.approx(0.021544, abs=1e-5) and hi == pytest.approx(0.111752, abs=1e-5)


def test_csv_round_trip(tmp_path):
    recs = run_sweep(toy_cfg(trials=2, ebn0_db=[5.0]))
    path = tmp_path / "r.csv"
    write_csv(recs, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert read_csv(path) == recs
    assert len(recs) == 6
    for r in recs:
        assert 0 <= r.ci95_low <= r.pupe_mean <= r.ci95_high <= 1


def test_sweep_determinism_across_workers(tmp_path):
    cfg = toy_cfg()
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    run_sweep(cfg.replace(workers=1), out=str(a))
    run_sweep(cfg.replace(workers=3), out=str(b))
    run_sweep(cfg.replace(workers=1), out=str(c))
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_high_snr_single_users_fullscale():
    raw = dict(
        n=38400, ebn0_db=[10.0], trials=1, receivers=["jd"],
        group=[{"preset": "g1-128x16-r12", "K": 1}, {"preset": "g2-96x16-r38", "K": 1}],
    )
    recs = run_sweep(from_dict(raw))
    assert [r.pupe_mean for r in recs] == [0.0, 0.0]


def test_unwritable_output():
    with pytest.raises(OSError):
        run_sweep(toy_cfg(trials=1), out="/nonexistent/dir/x.csv")


def test_single_trial_report():
    cfg = load_config(ROOT / "configs" / "toy.toml")
    buf1, buf2 = io.StringIO(), io.StringIO()
    rep = run_single_trial(cfg, 3, verbose=True, stream=buf1)
    run_single_trial(cfg, 3, verbose=True, stream=buf2)
    assert buf1.getvalue() == buf2.getvalue()
    assert all(g["hits"] == g["K"] == 1 for g in rep["groups"])
    assert "MISS" not in buf1.getvalue() and "tau trace" in buf1.getvalue()


def _records():
    out = []
    for rx in ("jd", "tin", "sic"):
        for g in (1, 2):
            for e in (1.8, 2.8):
                out.append(SweepRecord(e, rx, g, 10, 0.1, 0.05, 0.2, 0, "abc"))
    return out


def test_plot_script(tmp_path):
    csv_path, gp = tmp_path / "r.csv", tmp_path / "p.gp"
    write_csv(_records(), csv_path)
    text = emit_plot_script(csv_path, gp)
    assert gp.read_text() == text
    assert "set logscale y" in text
    for rx in ("jd", "tin", "sic"):
        for g in (1, 2):
            assert f"${rx}_g{g} using" in text


def test_plot_empty_warns(tmp_path):
    csv_path, gp = tmp_path / "r.csv", tmp_path / "p.gp"
    write_csv([], csv_path)
    err = io.StringIO()
    text = emit_plot_script(csv_path, gp, stream=err)
    assert "warning" in err.getvalue()
    assert "plot " not in text


def test_plot_malformed(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        emit_plot_script(p, tmp_path / "x.gp")



def test_cli_run_and_plot(tmp_path, monkeypatch):
    out, gp = tmp_path / "r.csv", tmp_path / "r.gp"
    cfg = ROOT / "configs" / "toy.toml"
    assert cli.main(["run", "--config", str(cfg), "--trials", "2", "--seed", "5", "--out", str(out), "--quiet"]) == 0
    assert {r.master_seed for r in read_csv(out)} == {5}
    monkeypatch.setenv("DEMIX_SEED", "9")
    assert cli.main(["run", "--config", str(cfg), "--trials", "1", "--seed", "5", "--receiver", "jd",
                     "--ebn0", "8,10", "--out", str(out), "--quiet"]) == 0
    recs = read_csv(out)
    assert {r.master_seed for r in recs} == {9} and {r.receiver for r in recs} == {"jd"}
    assert sorted({r.ebn0_db for r in recs}) == [8.0, 10.0]
    assert cli.main(["plot", "--csv", str(out), "--out", str(gp)]) == 0
    assert gp.exists()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[[group]]\npreset = "nope"\nK = 1\n')
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    cfg = ROOT / "configs" / "toy.toml"
    assert cli.main(["run", "--config", str(cfg), "--out", "/nonexistent/x.csv", "--quiet"]) == 3
    assert cli.main(["run", "--config", str(tmp_path / "missing.toml"), "--out", str(tmp_path / "x.csv")]) == 3
    assert cli.main(["plot", "--csv", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x.gp")]) == 3


def test_cli_trial(tmp_path, capsys):
    cfg = ROOT / "configs" / "toy.toml"
    trace = tmp_path / "t.csv"
    assert cli.main(["trial", "--config", str(cfg), "--index", "0", "--verbose", "--trace", str(trace)]) == 0
    out = capsys.readouterr().out
    assert "hits 1/1" in out
    assert trace.read_text().startswith("iteration,tau,residual_norm")
