"""Joint decoding (JD), treating interference as noise (TIN) and group SIC."""
from dataclasses import dataclass, field

import numpy as np

from .amp_core import DEFAULT_MAX_ITER, DEFAULT_TOL, run_amp
from .outer_code import disambiguate, encode_many, normalize
from .sparc_index import aggregate

LIST_SOURCES = ("estimate", "beliefs")


@dataclass
class DecodeOptions:
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    beam_width: int = None  # None -> 40*K per group
    list_size: int = None  # None -> 16*K per group
    prior_bridge: str = "occupancy"
    list_source: str = "estimate"  # or "beliefs": BP output incl. intrinsic term

    def __post_init__(self):
        if self.list_source not in LIST_SOURCES:
            raise ValueError(f"list_source must be one of {LIST_SOURCES}")


@dataclass
class DecodeResult:
    decoded: list  # per group: list of Candidate, best first
    iterations: list = field(default_factory=list)  # per AMP run
    final_tau: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    states: list = field(default_factory=list, repr=False)  # final AmpState per run

    def payloads(self, g):
        return [c.payload for c in self.decoded[g]]


def _amp_and_list_decode(y, groups, ops, opts):
    """Run AMP over the active subset of ``groups`` and list-decode each of them."""
    active = [i for i, g in enumerate(groups) if g.K > 0]
    decoded = [[] for _ in groups]
    if not active:
        return decoded, None
    state = run_amp(
        y,
        [groups[i] for i in active],
        [ops[i] for i in active],
        max_iter=opts.max_iter,
        tol=opts.tol,
        prior_bridge=opts.prior_bridge,
    )
    for j, i in enumerate(active):
        g = groups[i]
        if opts.list_source == "beliefs":
            field = state.beliefs[j].final_beliefs()
        else:
            field = normalize(state.estimates[j].reshape(g.L, g.m))
        decoded[i] = disambiguate(field, g.graph, g.K, opts.beam_width, opts.list_size)
    return decoded, state


def _record(res, state):
    res.states.append(state)
    if state is None:
        res.iterations.append(0)
        res.final_tau.append(float("nan"))
        res.traces.append([])
    else:
        res.iterations.append(state.iteration)
        res.final_tau.append(state.tau)
        res.traces.append(list(state.trace))


def decode_jd(y, groups, ops, opts=None):
    """All groups demixed by one AMP loop with a shared tau."""
    opts = opts or DecodeOptions()
    decoded, state = _amp_and_list_decode(y, groups, ops, opts)
    res = DecodeResult(decoded=decoded)
    _record(res, state)
    return res


def _single(y, groups, ops, g, opts):
    one, state = _amp_and_list_decode(y, [groups[g]], [ops[g]], opts)
    return one[0], state


def decode_tin(y, groups, ops, opts=None):
    """Each group decoded alone from the raw observation; other groups act as noise."""
    opts = opts or DecodeOptions()
    res = DecodeResult(decoded=[])
    for g in range(len(groups)):
        dec, state = _single(y, groups, ops, g, opts)
        res.decoded.append(dec)
        _record(res, state)
    return res


def reencode(candidates, group, op):
    """Channel contribution ``d * A * s_hat`` of hard-decoded payloads."""
    if not candidates:
        return np.zeros(op.output_dim)
    rows = encode_many(group.graph, np.stack([c.payload for c in candidates]))
    return op.forward(group.amplitude * aggregate(rows, group.L, group.m))


def decode_sic(y, groups, ops, opts=None, first=None):
    """Groups decoded in index order; each decoded group's re-encoding is subtracted.

    ``first`` may carry an already computed single-group decode of group 0 on
    ``y`` (for instance from TIN), as ``(candidates, state)``; it is reused as is.
    """
    opts = opts or DecodeOptions()
    res = DecodeResult(decoded=[])
    y_cur = np.asarray(y, dtype=np.float64)
    for g in range(len(groups)):
        if g == 0 and first is not None:
            dec, state = first
        else:
            dec, state = _single(y_cur, groups, ops, g, opts)
        res.decoded.append(dec)
        _record(res, state)
        if g + 1 < len(groups):
            y_cur = y_cur - reencode(dec, groups[g], ops[g])
    return res


RECEIVERS = {"jd": decode_jd, "tin": decode_tin, "sic": decode_sic}
