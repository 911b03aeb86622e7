"""Outer LDPC code over the 2**v-ary alphabet with XOR checks.

Each parity section is the bitwise XOR of a set of earlier sections, so every
check factor says "XOR of my neighbours is zero".  Check-to-variable messages
are XOR convolutions, computed in the Walsh-Hadamard domain.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .sparc_index import bits_to_indices, indices_to_bits

FLOOR = 1e-300
MAX_CHECK_DEGREE = 4


@dataclass(frozen=True, eq=False)
class FactorGraph:
    L: int
    v: int
    w: int
    info_sections: tuple
    parity_defs: dict  # parity section -> tuple of sections XOR-ed into it
    name: str = ""
    checks: tuple = field(init=False)
    section_checks: tuple = field(init=False)
    order: tuple = field(init=False)

    def __post_init__(self):
        parity = sorted(self.parity_defs)
        checks = tuple(tuple(sorted(self.parity_defs[p] + (p,))) for p in parity)
        section_checks = tuple(
            tuple(c for c, nb in enumerate(checks) if s in nb) for s in range(self.L)
        )
        object.__setattr__(self, "checks", checks)
        object.__setattr__(self, "section_checks", section_checks)
        object.__setattr__(self, "order", _encoding_order(self))

    @property
    def m(self):
        return 1 << self.v

    @property
    def parity_sections(self):
        return tuple(sorted(self.parity_defs))

    @property
    def num_checks(self):
        return len(self.checks)

    def edges(self):
        """(check, section) pairs in a fixed order; index = edge id."""
        return [(c, s) for c, nb in enumerate(self.checks) for s in nb]

    def girth(self):
        return _bipartite_girth(self)


def _encoding_order(g):
    done = set()
    order = []
    pending = set(range(g.L))
    while pending:
        progressed = False
        for s in sorted(pending):
            if s in g.parity_defs and not set(g.parity_defs[s]) <= done:
                continue
            order.append(s)
            done.add(s)
            pending.discard(s)
            progressed = True
            break
        if not progressed:
            raise ValueError("parity definitions are cyclic")
    return tuple(order)


def _bipartite_girth(g):
    """Shortest cycle length of the variable/check graph (inf for a forest)."""
    # nodes: sections 0..L-1, checks L..L+P-1
    adj = [[] for _ in range(g.L + g.num_checks)]
    for c, nb in enumerate(g.checks):
        for s in nb:
            adj[s].append(g.L + c)
            adj[g.L + c].append(s)
    best = np.inf
    for root in range(len(adj)):
        dist = {root: 0}
        parent = {root: -1}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for x in adj[u]:
                    if x not in dist:
                        dist[x] = dist[u] + 1
                        parent[x] = u
                        nxt.append(x)
                    elif parent[u] != x:
                        best = min(best, dist[u] + dist[x] + 1)
            frontier = nxt
    return best


# ---------------------------------------------------------------------------
# graph construction
# ---------------------------------------------------------------------------

PRESETS = {
    "g1-128x16-r12": dict(w=128, L=16, v=16, seed=1),
    "g2-96x16-r38": dict(w=96, L=16, v=16, seed=2),
    "toy-32x8": dict(w=32, L=8, v=8, seed=3),
    "toy-24x8": dict(w=24, L=8, v=8, seed=4),
    "toy-8x4": dict(w=8, L=4, v=4, seed=5),
}


def preset(name):
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown graph preset {name!r}; known: {sorted(PRESETS)}") from None
    return build_graph(spec["w"], spec["L"], spec["v"], seed=spec["seed"], name=name)


def _layout(n_info, n_par):
    """Section kinds in encoding order: a parity right after each new info section."""
    kinds = ["i"]
    par_left = n_par
    for _ in range(1, n_info):
        kinds.append("i")
        if par_left:
            kinds.append("p")
            par_left -= 1
    kinds += ["p"] * par_left
    return kinds


def build_graph(w, L, v, seed=0, name=""):
    """Deterministic systematic XOR graph with check degree <= 4 and no 4-cycles.

    Sections are laid out in encoding order; every parity placed after a new
    info section involves that section, so the list decoder can prune early.
    """
    if v < 1 or L < 1 or w < 1 or w % v:
        raise ValueError(f"payload bits w={w} must be a positive multiple of v={v}")
    n_info = w // v
    if n_info > L:
        raise ValueError(f"w={w} needs {n_info} info sections but L={L}")
    n_par = L - n_info
    kinds = _layout(n_info, n_par)
    for attempt in range(200):
        rng = np.random.default_rng([int(seed), attempt])
        defs = _draw_parities(kinds, rng)
        if defs is not None:
            info = tuple(i for i, k in enumerate(kinds) if k == "i")
            return FactorGraph(L=L, v=v, w=w, info_sections=info, parity_defs=defs, name=name)
    raise ValueError(f"could not build a 4-cycle-free graph for w={w}, L={L}, v={v}")


def _draw_parities(kinds, rng):
    checks = []
    degree = np.zeros(len(kinds), dtype=int)
    # each section as a bitmask over info sections; parities must not be
    # constant and should not repeat an existing section
    expr = [1 << i if k == "i" else 0 for i, k in enumerate(kinds)]
    defs = {}
    for pos, kind in enumerate(kinds):
        if kind != "p":
            continue
        earlier = list(range(pos))
        newest_info = max(i for i in earlier if kinds[i] == "i")
        follows_info = pos > 0 and kinds[pos - 1] == "i"
        seen = set(expr[:pos])
        best = None
        for size in (2, 3, 1):
            if size > len(earlier):
                continue
            cands, fresh = [], []
            for sub in itertools.combinations(earlier, size):
                if follows_info and newest_info not in sub:
                    continue
                nb = set(sub) | {pos}
                if any(len(nb & c) >= 2 for c in checks):
                    continue
                e = 0
                for t in sub:
                    e ^= expr[t]
                if e == 0:
                    continue
                cands.append(sub)
                fresh.append(e not in seen)
            if any(fresh):
                cands = [c for c, f in zip(cands, fresh) if f]
            elif size != 1:
                cands = []  # only repeats at this size; try the next one
            if cands:
                # balance variable degrees, favour info sections
                cost = np.array(
                    [sum(degree[s] + (0.5 if kinds[s] == "p" else 0.0) for s in c) for c in cands]
                )
                pick = np.flatnonzero(cost == cost.min())
                best = cands[int(rng.choice(pick))]
                break
        if best is None:
            return None
        defs[pos] = tuple(best)
        checks.append(set(best) | {pos})
        for s in best:
            degree[s] += 1
            expr[pos] ^= expr[s]
        degree[pos] += 1
    return defs


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

def encode(graph, payload):
    """Section indices (length L) of the codeword carrying ``payload`` bits."""
    payload = np.asarray(payload)
    if payload.shape != (graph.w,):
        raise ValueError(f"payload must have {graph.w} bits, got shape {payload.shape}")
    return encode_many(graph, payload[None, :])[0]


def encode_many(graph, payloads):
    """Vectorised ``encode`` over the rows of a ``(K, w)`` bit array."""
    payloads = np.asarray(payloads)
    if payloads.ndim != 2 or payloads.shape[1] != graph.w:
        raise ValueError(f"payloads must have shape (K, {graph.w})")
    K = payloads.shape[0]
    out = np.zeros((K, graph.L), dtype=np.int64)
    if K == 0:
        return out
    frags = np.stack([bits_to_indices(p, graph.v) for p in payloads]).reshape(K, -1)
    out[:, list(graph.info_sections)] = frags
    for s in graph.order:
        if s in graph.parity_defs:
            acc = np.zeros(K, dtype=np.int64)
            for t in graph.parity_defs[s]:
                acc ^= out[:, t]
            out[:, s] = acc
    return out


def payload_of(graph, indices):
    return indices_to_bits(np.asarray(indices)[list(graph.info_sections)], graph.v)


def satisfies_checks(graph, indices):
    idx = np.asarray(indices, dtype=np.int64)
    for nb in graph.checks:
        acc = np.zeros(idx.shape[:-1], dtype=np.int64)
        for s in nb:
            acc = acc ^ idx[..., s]
        if np.any(acc != 0):
            return False
    return True


# ---------------------------------------------------------------------------
# belief propagation
# ---------------------------------------------------------------------------

def normalize(x, axis=-1):
    """Clamp to ``FLOOR`` and normalise; rows that are exactly zero (or non-finite) become uniform."""
    x = np.asarray(x, dtype=np.float64)
    tot = x.sum(axis=axis, keepdims=True)
    bad = ~(np.isfinite(tot) & (tot > 0))
    y = np.maximum(x, FLOOR)
    y = y / y.sum(axis=axis, keepdims=True)
    if np.any(bad):
        y = np.where(bad, 1.0 / x.shape[axis], y)
    return y


def check_to_variable(incoming):
    """XOR convolution of the incoming messages (all neighbours but the target).

    ``incoming`` is a sequence (or 2-D array) of normalised length-m vectors.
    """
    msgs = np.array(incoming, dtype=np.float64, ndmin=2, order="C", copy=True)
    if msgs.shape[0] == 1:
        return normalize(msgs[0])
    m = msgs.shape[1]
    _kernels.fwht_rows_inplace(msgs)
    spec = np.prod(msgs, axis=0)
    _kernels.fwht_inplace(spec)
    return normalize(spec / m)


def variable_to_check(lam, others):
    """``lam`` times every message in ``others`` (the target check excluded), normalised."""
    out = np.array(lam, dtype=np.float64, copy=True)
    for mu in others:
        out *= mu
    return normalize(out)


class BeliefState:
    """Messages on one group's factor graph; rebuilt from fresh observations each AMP step."""

    def __init__(self, graph, lambdas):
        lam = np.asarray(lambdas, dtype=np.float64)
        if lam.shape != (graph.L, graph.m):
            raise ValueError(f"lambdas must have shape ({graph.L}, {graph.m})")
        self.graph = graph
        self.lambdas = normalize(lam)
        self.edge_list = graph.edges()
        E = len(self.edge_list)
        uniform = 1.0 / graph.m
        self.msgs_v2c = np.full((E, graph.m), uniform)
        self.msgs_c2v = np.full((E, graph.m), uniform)
        self.extrinsic = np.full((graph.L, graph.m), uniform)
        self._edges_at_check = [[] for _ in range(graph.num_checks)]
        self._edges_at_section = [[] for _ in range(graph.L)]
        for e, (c, s) in enumerate(self.edge_list):
            self._edges_at_check[c].append(e)
            self._edges_at_section[s].append(e)

    def final_beliefs(self):
        """Per-section marginals including intrinsic information."""
        return normalize(self.lambdas * self.extrinsic)


def bp_round(state):
    """One flooding round: variable->check, check->variable, then extrinsic beliefs."""
    g = state.graph
    m = g.m
    v2c = np.empty_like(state.msgs_v2c)
    for s in range(g.L):
        es = state._edges_at_section[s]
        for e in es:
            v2c[e] = variable_to_check(state.lambdas[s], [state.msgs_c2v[f] for f in es if f != e])
    state.msgs_v2c = v2c

    spec = v2c.copy()
    _kernels.fwht_rows_inplace(spec)
    c2v = np.empty_like(v2c)
    for es in state._edges_at_check:
        for e in es:
            others = [f for f in es if f != e]
            if len(others) == 1:
                c2v[e] = v2c[others[0]]
            else:
                c2v[e] = np.prod(spec[others], axis=0)
    multi = [e for es in state._edges_at_check if len(es) > 2 for e in es]
    if multi:
        block = np.ascontiguousarray(c2v[multi])
        _kernels.fwht_rows_inplace(block)
        c2v[multi] = block / m
    state.msgs_c2v = normalize(c2v)

    ext = np.ones((g.L, m))
    for s in range(g.L):
        for e in state._edges_at_section[s]:
            ext[s] *= state.msgs_c2v[e]
    state.extrinsic = normalize(ext)
    return state


# ---------------------------------------------------------------------------
# list decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    payload: np.ndarray
    indices: tuple
    score: float


def _rank(paths, scores):
    """Order by score (desc), ties by path index vector (lexicographic asc)."""
    keys = [paths[:, j] for j in range(paths.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [-scores])


BEAM_PER_USER = 40
LIST_PER_USER = 16


def disambiguate(beliefs, graph, K, beam_width=None, list_size=None):
    """Beam search over the outer code; returns up to ``K`` ranked candidates.

    Each section offers its ``list_size`` most likely symbols (default
    ``16*K``, capped at the alphabet).  Info sections extend every surviving
    path by those symbols; a parity section keeps a path only if its
    XOR-forced symbol is on that section's list.  The frontier is cut back to
    ``beam_width`` paths (default ``40*K``) just before each expansion.  Paths
    are scored by the summed log belief of their symbols.
    """
    if K < 1:
        return []
    p = np.asarray(beliefs, dtype=np.float64)
    if p.shape != (graph.L, graph.m):
        raise ValueError(f"beliefs must have shape ({graph.L}, {graph.m})")
    B = BEAM_PER_USER * K if beam_width is None else int(beam_width)
    C = LIST_PER_USER * K if list_size is None else int(list_size)
    if B < 1 or C < 1:
        raise ValueError("beam_width and list_size must be positive")
    C = min(graph.m, C)
    with np.errstate(divide="ignore"):
        logp = np.log(p)

    paths = np.zeros((1, graph.L), dtype=np.int64)
    scores = np.zeros(1)
    for s in graph.order:
        # candidate symbols by belief, ties to the smaller index
        cand = np.lexsort((np.arange(graph.m), -logp[s]))[:C]
        if s in graph.parity_defs:
            forced = np.zeros(paths.shape[0], dtype=np.int64)
            for t in graph.parity_defs[s]:
                forced ^= paths[:, t]
            allowed = np.zeros(graph.m, dtype=bool)
            allowed[cand] = True
            ok = allowed[forced]
            paths, scores = paths[ok], scores[ok]
            paths[:, s] = forced[ok]
            scores = scores + logp[s, forced[ok]]
            if not paths.shape[0]:
                return []
            continue
        if paths.shape[0] > B:
            keep = _rank(paths, scores)[:B]
            paths, scores = paths[keep], scores[keep]
        P = paths.shape[0]
        paths = np.repeat(paths, C, axis=0)
        paths[:, s] = np.tile(cand, P)
        scores = np.repeat(scores, C) + np.tile(logp[s, cand], P)

    order = _rank(paths, scores)
    out = []
    for i in order[: min(K, len(order))]:
        idx = paths[i]
        out.append(Candidate(payload=payload_of(graph, idx), indices=tuple(int(x) for x in idx), score=float(scores[i])))
    return out
