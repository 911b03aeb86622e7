"""Monte Carlo sweep over Eb/N0 and receivers, CSV persistence and plot scripts."""
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .channel import ROLE_OPERATOR, draw_scenario, pupe, transmit, trial_rng
from .receivers import DecodeOptions, decode_jd, decode_sic, decode_tin
from .transform import build_operator

CSV_HEADER = ("ebn0_db", "receiver", "group", "trials", "pupe_mean", "ci95_low", "ci95_high", "master_seed", "config_hash")
Z95 = NormalDist().inv_cdf(0.975)


def _g6(x):
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class SweepRecord:
    ebn0_db: float
    receiver: str
    group: int  # 1-based
    trials: int
    pupe_mean: float
    ci95_low: float
    ci95_high: float
    master_seed: int
    config_hash: str

    def row(self):
        return [
            f"{self.ebn0_db:.6g}", self.receiver, str(self.group), str(self.trials),
            f"{self.pupe_mean:.6g}", f"{self.ci95_low:.6g}", f"{self.ci95_high:.6g}",
            str(self.master_seed), self.config_hash,
        ]


def wilson_interval(errors, total, z=Z95):
    if total == 0:
        return 0.0, 1.0
    p = errors / total
    den = 1.0 + z * z / total
    mid = (p + z * z / (2 * total)) / den
    half = z * np.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / den
    # clamp: rounding can push a bound past p at p = 0 or 1
    return max(0.0, min(mid - half, p)), min(1.0, max(mid + half, p))


def write_csv(records, path_or_file):
    text = io.StringIO()
    w = csv.writer(text, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    if hasattr(path_or_file, "write"):
        path_or_file.write(text.getvalue())
    else:
        with open(path_or_file, "w", newline="") as fh:
            fh.write(text.getvalue())


def read_csv(path_or_file):
    """Parse a sweep CSV; ValueError if the header or any row is malformed."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file, newline="") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("malformed CSV: unexpected header")
    out = []
    for k, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"malformed CSV: line {k} has {len(row)} fields")
        try:
            out.append(SweepRecord(
                ebn0_db=float(row[0]), receiver=row[1], group=int(row[2]), trials=int(row[3]),
                pupe_mean=float(row[4]), ci95_low=float(row[5]), ci95_high=float(row[6]),
                master_seed=int(row[7]), config_hash=row[8],
            ))
        except ValueError as e:
            raise ValueError(f"malformed CSV: line {k}: {e}") from None
    return out


# ---------------------------------------------------------------- trials

def build_operators(cfg, graphs=None):
    """One sensing operator per group, fixed for the whole sweep."""
    graphs = graphs or cfg.graphs()
    return [
        build_operator(g.L * g.m, cfg.n, trial_rng(cfg.master_seed, 0, ROLE_OPERATOR, i))
        for i, g in enumerate(graphs)
    ]


def decode_options(cfg):
    return DecodeOptions(
        max_iter=cfg.max_iter, tol=cfg.tol, beam_width=cfg.beam_width,
        list_size=cfg.list_size, prior_bridge=cfg.prior_bridge, list_source=cfg.list_source,
    )


def decode_all(y, groups, ops, receivers, opts):
    """Run the requested receivers on one observation; SIC reuses TIN's group-1 decode."""
    results = {}
    if "jd" in receivers:
        results["jd"] = decode_jd(y, groups, ops, opts)
    if "tin" in receivers:
        results["tin"] = decode_tin(y, groups, ops, opts)
    if "sic" in receivers:
        first = None
        if "tin" in results:
            first = (results["tin"].decoded[0], results["tin"].states[0])
        results["sic"] = decode_sic(y, groups, ops, opts, first=first)
    return results


_WORKER = {}


def _setup(cfg):
    key = cfg.config_hash()
    if _WORKER.get("key") != key:
        graphs = cfg.graphs()
        _WORKER.clear()
        _WORKER.update(key=key, graphs=graphs, ops=build_operators(cfg, graphs))
    return _WORKER["graphs"], _WORKER["ops"]


def simulate_trial(cfg, ebn0_db, trial_index):
    """Per-(receiver, group) miss counts for one trial: ``{rx: [misses_g, ...]}``."""
    graphs, ops = _setup(cfg)
    groups = cfg.group_configs(ebn0_db, graphs)
    scen = draw_scenario(groups, cfg.master_seed, trial_index, cfg.sigma2)
    y = transmit(scen, groups, ops, cfg.n)
    results = decode_all(y, groups, ops, cfg.receivers, decode_options(cfg))
    out = {}
    for rx, res in results.items():
        out[rx] = [
            int(round(pupe(scen.payloads[g], res.payloads(g)) * groups[g].K))
            for g in range(len(groups))
        ]
    return out


def _task(args):
    cfg, ebn0_db, t = args
    return ebn0_db, t, simulate_trial(cfg, ebn0_db, t)


def aggregate_records(cfg, outcomes):
    """``outcomes[(ebn0, trial)] -> {rx: misses}`` into records (trial order irrelevant)."""
    h = cfg.config_hash()
    records = []
    for e in cfg.ebn0_db:
        for rx in cfg.receivers:
            for gi, spec in enumerate(cfg.groups):
                misses = sum(outcomes[(e, t)][rx][gi] for t in range(cfg.trials))
                total = spec.K * cfg.trials
                mean = misses / total if total else 0.0
                lo, hi = wilson_interval(misses, total)
                records.append(SweepRecord(
                    ebn0_db=_g6(e), receiver=rx, group=gi + 1, trials=cfg.trials,
                    pupe_mean=_g6(mean), ci95_low=_g6(lo), ci95_high=_g6(hi),
                    master_seed=cfg.master_seed, config_hash=h,
                ))
    return records


def run_sweep(cfg, out=None, progress=None):
    """Every (Eb/N0, trial) pair is an independent task; returns the list of records."""
    out = out if out is not None else cfg.out
    if out is not None and not hasattr(out, "write"):
        d = os.path.dirname(os.path.abspath(out))
        if not os.path.isdir(d) or not os.access(d, os.W_OK):
            raise OSError(f"cannot write to {out}")
    tasks = [(cfg, e, t) for e in cfg.ebn0_db for t in range(cfg.trials)]
    outcomes = {}
    if cfg.workers == 1:
        it = map(_task, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=cfg.workers)
        it = pool.map(_task, tasks, chunksize=1)
    try:
        for k, (e, t, res) in enumerate(it, 1):
            outcomes[(e, t)] = res
            if progress:
                progress(k, len(tasks), e, t, res)
    finally:
        if pool is not None:
            pool.shutdown()
    records = aggregate_records(cfg, outcomes)
    if out is not None:
        write_csv(records, out)
    return records


# ---------------------------------------------------------------- single trial

def _hex(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes().hex()


def run_single_trial(cfg, trial_index, verbose=False, ebn0_db=None, receiver="jd", stream=None):
    """Decode one trial and print payloads, decoded lists, tau trace and hit/miss per group."""
    stream = stream or sys.stdout
    ebn0_db = cfg.ebn0_db[-1] if ebn0_db is None else ebn0_db
    graphs = cfg.graphs()
    ops = build_operators(cfg, graphs)
    groups = cfg.group_configs(ebn0_db, graphs)
    scen = draw_scenario(groups, cfg.master_seed, trial_index, cfg.sigma2)
    y = transmit(scen, groups, ops, cfg.n)
    res = decode_all(y, groups, ops, (receiver,), decode_options(cfg))[receiver]

    p = lambda *a: print(*a, file=stream)
    p(f"trial {trial_index}  receiver {receiver}  ebn0_db {ebn0_db:g}  seed {cfg.master_seed}  config {cfg.config_hash()}")
    report = {"groups": [], "traces": res.traces, "iterations": res.iterations}
    for gi, g in enumerate(groups):
        tx = [_hex(b) for b in scen.payloads[gi]]
        dec = [_hex(c.payload) for c in res.decoded[gi]]
        err = pupe(scen.payloads[gi], res.payloads(gi)) if g.K else 0.0
        hits = g.K - int(round(err * g.K))
        report["groups"].append({"transmitted": tx, "decoded": dec, "hits": hits, "K": g.K, "pupe": err})
        p(f"group {gi + 1}: K={g.K} w={g.w} d={g.amplitude:.6g}  hits {hits}/{g.K}  pupe {err:.6g}")
        if verbose:
            decoded_set = set(dec)
            for h in tx:
                p(f"  tx  {h}  {'hit' if h in decoded_set else 'MISS'}")
            for c, h in zip(res.decoded[gi], dec):
                p(f"  dec {h}  score {c.score:.6g}")
    for k, trace in enumerate(res.traces):
        label = "joint" if receiver == "jd" else f"group {k + 1}"
        p(f"tau trace ({label}): " + " ".join(f"{tau:.4g}" for _, tau, _ in trace))
    return report


# ---------------------------------------------------------------- plotting

def emit_plot_script(csv_path, out_path, stream=None):
    """Write a standalone gnuplot script: log-scale PUPE against Eb/N0, one series per (receiver, group)."""
    records = read_csv(csv_path)
    series = {}
    for r in records:
        series.setdefault((r.receiver, r.group), []).append(r)
    if not series:
        print(f"warning: {csv_path} has no data rows; plot will be empty", file=stream or sys.stderr)

    lines = [
        "# PUPE versus Eb/N0",
        "set terminal pngcairo size 800,600",
        'set output "pupe.png"',
        "set logscale y",
        'set xlabel "Eb/N0 (dB)"',
        'set ylabel "per-user probability of error"',
        "set key top right",
        "set grid",
    ]
    plots = []
    for (rx, g), recs in sorted(series.items()):
        name = f"${rx}_g{g}"
        lines.append(f"{name} << EOD")
        for r in sorted(recs, key=lambda r: r.ebn0_db):
            lines.append(f"{r.ebn0_db:.6g} {r.pupe_mean:.6g} {r.ci95_low:.6g} {r.ci95_high:.6g}")
        lines.append("EOD")
        dash = 1 if g == 1 else 2
        plots.append(f'{name} using 1:2 with linespoints dt {dash} title "{rx.upper()} group {g}"')
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    text = "\n".join(lines) + "\n"
    with open(out_path, "w") as fh:
        fh.write(text)
    return text
