"""Gaussian multiple-access channel, energy-per-bit bookkeeping and PUPE."""
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .outer_code import encode_many
from .sparc_index import aggregate

# role codes for counter-based RNG derivation
ROLE_PAYLOAD = 1
ROLE_NOISE = 2
ROLE_OPERATOR = 3


def trial_rng(master_seed, trial_index, role, sub=0):
    """Generator keyed by (seed, trial, role, sub); independent of scheduling order."""
    return np.random.default_rng([int(master_seed), int(trial_index), int(role), int(sub)])


def ebn0_to_amplitude(ebn0_db, w, L, sigma2=1.0):
    """Amplitude ``d`` such that ``L*d^2 / w`` over ``2*sigma2`` equals Eb/N0."""
    if w <= 0 or L <= 0 or sigma2 <= 0:
        raise ValueError("w, L and sigma2 must be positive")
    if ebn0_db == -np.inf:
        return 0.0
    return float(np.sqrt(2.0 * sigma2 * (w / L) * 10.0 ** (ebn0_db / 10.0)))


@dataclass
class TrialScenario:
    payloads: list  # per group, (K_g, w_g) uint8 bit arrays
    noise_seed: tuple
    sigma2: float = 1.0


def draw_scenario(groups, master_seed, trial_index, sigma2=1.0):
    payloads = []
    for gi, g in enumerate(groups):
        rng = trial_rng(master_seed, trial_index, ROLE_PAYLOAD, gi)
        payloads.append(rng.integers(0, 2, size=(g.K, g.w), dtype=np.uint8))
    return TrialScenario(payloads=payloads, noise_seed=(master_seed, trial_index), sigma2=sigma2)


def transmit(scenario, groups, ops, n=None):
    """``y = sum_g d_g A_g s_g + z`` with ``s_g`` the aggregate of group g's SPARC vectors."""
    n = ops[0].output_dim if n is None else n
    y = np.zeros(n)
    for g, op, bits in zip(groups, ops, scenario.payloads):
        if bits.shape[0] == 0:
            continue
        rows = encode_many(g.graph, bits)
        s = aggregate(rows, g.L, g.m)
        y += op.forward(g.amplitude * s)
    if scenario.sigma2 > 0:
        rng = trial_rng(scenario.noise_seed[0], scenario.noise_seed[1], ROLE_NOISE)
        y += np.sqrt(scenario.sigma2) * rng.standard_normal(n)
    return y


def pupe(transmitted, decoded, K=None):
    """Fraction of transmitted payloads missing from the decoded list.

    Duplicate transmissions count as separate users; one decoded copy
    covers at most one of them.
    """
    tx = [bytes(np.asarray(b, dtype=np.uint8)) for b in transmitted]
    K = len(tx) if K is None else K
    if K == 0:
        return 0.0
    found = Counter(bytes(np.asarray(b, dtype=np.uint8)) for b in decoded)
    missed = 0
    for t in tx:
        if found[t] > 0:
            found[t] -= 1
        else:
            missed += 1
    return missed / K
