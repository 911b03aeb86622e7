"""Multi-group AMP with BP-refined posterior-mean denoisers."""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .outer_code import BeliefState, bp_round, normalize

TAU_MIN = 1e-9
DEFAULT_MAX_ITER = 25
DEFAULT_TOL = 1e-4
PRIOR_BRIDGES = ("scaled", "occupancy")


def uninformative_prior(K, m):
    """Probability that a given index of a section is used by at least one of ``K`` users."""
    return 1.0 - (1.0 - 1.0 / m) ** K


def pme(q, r, d, tau):
    """Posterior mean of a 0/1 entry ``s`` observed as ``r = d*s + tau*noise``, prior P(s=1)=q."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    scalar = np.ndim(r) == 0 and np.ndim(q) == 0
    out = _kernels.pme_array(q, np.atleast_1d(r), float(d), float(tau))
    return float(out[0]) if scalar else out


@dataclass
class PriorField:
    q: np.ndarray  # (L, m) per-entry prior probabilities


def bridge_priors(extrinsic, K, m, how="scaled"):
    """Turn per-section extrinsic distributions into per-entry Bernoulli priors."""
    if how == "scaled":
        q0 = uninformative_prior(K, m)
        return np.clip(extrinsic * (m * q0), 0.0, 1.0)
    if how == "occupancy":
        return 1.0 - (1.0 - extrinsic) ** K
    raise ValueError(f"unknown prior bridge {how!r}")


def denoise_group(r, group, tau, prior_bridge="occupancy"):
    """Dynamic PME denoiser for one group.

    Returns ``(estimate, PriorField, BeliefState)``; the belief state holds the
    single BP round run on fresh local observations.
    """
    g = group.graph
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (g.L * g.m,):
        raise ValueError(f"observation must have length {g.L * g.m}")
    d = group.amplitude
    q0 = uninformative_prior(group.K, g.m)
    lam = pme(q0, r, d, tau).reshape(g.L, g.m)
    state = BeliefState(g, normalize(lam))
    bp_round(state)
    q = bridge_priors(state.extrinsic, group.K, g.m, prior_bridge)
    est = pme(q.ravel(), r, d, tau)
    return est, PriorField(q), state


def onsager_divergence(estimates, amplitudes, tau):
    """Divergence of ``D * eta`` for PME-type denoisers: sum_g d_g^2 (|s_g|_1 - |s_g|^2) / tau^2."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    tot = 0.0
    for s, d in zip(estimates, amplitudes):
        s = np.asarray(s, dtype=np.float64)
        tot += d * d * (s.sum() - s @ s)
    return tot / (tau * tau)


@dataclass
class AmpState:
    z: np.ndarray
    estimates: list
    tau: float
    iteration: int = 0
    observations: list = None
    beliefs: list = None
    trace: list = field(default_factory=list)  # (iteration, tau, residual norm)


def _tau_of(z):
    return max(float(np.sqrt(z @ z / z.shape[0])), TAU_MIN)


def amp_init(y, groups):
    y = np.asarray(y, dtype=np.float64)
    st = AmpState(
        z=y.copy(),
        estimates=[np.zeros(g.dim) for g in groups],
        tau=_tau_of(y),
        observations=[None] * len(groups),
        beliefs=[None] * len(groups),
    )
    st.trace.append((0, st.tau, float(np.linalg.norm(y))))
    return st


def amp_iteration(state, y, groups, ops, prior_bridge="occupancy", onsager=True):
    """One composite step: effective observations, denoising, Onsager-corrected residual."""
    n = y.shape[0]
    tau = state.tau
    new_est = []
    for i, (g, op) in enumerate(zip(groups, ops)):
        r = op.adjoint(state.z)
        r += g.amplitude * state.estimates[i]
        est, _, bstate = denoise_group(r, g, tau, prior_bridge)
        state.observations[i] = r
        state.beliefs[i] = bstate
        new_est.append(est)

    z = y.copy()
    for g, op, est in zip(groups, ops, new_est):
        if g.amplitude:
            z -= op.forward(g.amplitude * est)
    if onsager:
        div = onsager_divergence(new_est, [g.amplitude for g in groups], tau)
        z += state.z * (div / n)
    state.z = z
    state.estimates = new_est
    state.tau = _tau_of(z)
    state.iteration += 1
    state.trace.append((state.iteration, state.tau, float(np.linalg.norm(z))))
    return state


def run_amp(y, groups, ops, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, prior_bridge="occupancy", onsager=True):
    """Iterate until ``max_iter`` or the relative change in tau drops below ``tol``."""
    y = np.asarray(y, dtype=np.float64)
    if len(groups) != len(ops):
        raise ValueError("need one operator per group")
    for g, op in zip(groups, ops):
        if op.input_dim != g.dim or op.output_dim != y.shape[0]:
            raise ValueError("operator dimensions do not match group/observation")
    state = amp_init(y, groups)
    for _ in range(max_iter):
        prev = state.tau
        amp_iteration(state, y, groups, ops, prior_bridge=prior_bridge, onsager=onsager)
        if abs(state.tau - prev) / state.tau < tol:
            break
    return state


def write_trace(state, path_or_file):
    """Per-iteration tau and residual norm as CSV rows (``state`` may also be a bare trace list)."""
    import csv

    close = False
    fh = path_or_file
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        fh = open(path_or_file, "w", newline="")
        close = True
    try:
        w = csv.writer(fh)
        w.writerow(["iteration", "tau", "residual_norm"])
        for it, tau, rn in getattr(state, "trace", state):
            w.writerow([it, f"{tau:.6g}", f"{rn:.6g}"])
    finally:
        if close:
            fh.close()
