"""Command line entry point: ``demix run|trial|plot``."""
import argparse
import os
import sys

from .amp_core import write_trace
from .config import RECEIVER_NAMES, ConfigError, load_config
from .sweep import emit_plot_script, run_single_trial, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(prog="demix", description="Two-class unsourced random access simulator.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="Monte Carlo sweep, results as CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--receiver", choices=RECEIVER_NAMES + ("all",), default=None)
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--ebn0", type=_floats, help="comma separated Eb/N0 values in dB")
    r.add_argument("--workers", type=int)
    r.add_argument("--out", required=True)
    r.add_argument("--quiet", action="store_true")

    t = sub.add_parser("trial", help="decode a single trial and print a report")
    t.add_argument("--config", required=True)
    t.add_argument("--index", type=int, required=True)
    t.add_argument("--verbose", action="store_true")
    t.add_argument("--seed", type=int)
    t.add_argument("--ebn0", type=float, help="defaults to the last configured point")
    t.add_argument("--receiver", choices=RECEIVER_NAMES, default="jd")
    t.add_argument("--trace", help="write the tau trace of the first AMP run as CSV")

    p = sub.add_parser("plot", help="gnuplot script from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    return ap


def _seed(arg):
    env = os.environ.get("DEMIX_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"DEMIX_SEED is not an integer: {env!r}")
    return arg


def _apply_overrides(cfg, args):
    kw = {}
    seed = _seed(getattr(args, "seed", None))
    if seed is not None:
        kw["master_seed"] = seed
    if getattr(args, "trials", None) is not None:
        kw["trials"] = args.trials
    if getattr(args, "workers", None) is not None:
        kw["workers"] = args.workers
    ebn0 = getattr(args, "ebn0", None)
    if isinstance(ebn0, tuple):
        kw["ebn0_db"] = ebn0
    rx = getattr(args, "receiver", None)
    if args.cmd == "run" and rx is not None:
        kw["receivers"] = RECEIVER_NAMES if rx == "all" else (rx,)
    if args.cmd == "run":
        kw["out"] = args.out
    return cfg.replace(**kw) if kw else cfg


def _progress(k, total, e, t, res):
    summary = " ".join(f"{rx}={'/'.join(map(str, m))}" for rx, m in res.items())
    print(f"[{k}/{total}] ebn0={e:g} trial={t} misses {summary}", file=sys.stderr, flush=True)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "plot":
            emit_plot_script(args.csv, args.out)
            return EXIT_OK
        cfg = _apply_overrides(load_config(args.config), args)
        if args.cmd == "run":
            run_sweep(cfg, progress=None if args.quiet else _progress)
        else:
            report = run_single_trial(cfg, args.index, verbose=args.verbose, ebn0_db=args.ebn0, receiver=args.receiver)
            if args.trace:
                write_trace(report["traces"][0], args.trace)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        # malformed CSV for plot, bad values otherwise
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG if args.cmd != "plot" else EXIT_IO
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
