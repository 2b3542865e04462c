"""Downlink precoding with max-min SINR as the design target.

The transmit chain routes N_RF baseband streams through the selection matrix
onto selected ray ports, each feeding its M elements through a uniform
1/sqrt(M) splitter, so the scaled user channels are g_k = S h_k / sqrt(M) and

    SINR_k = |g_k^H w_k|^2 / (sum_{i != k} |g_k^H w_i|^2 + sigma^2),

under the sum power budget sum_k ||w_k||^2 <= P.  Feasibility of a common
target gamma is decided through the virtual-uplink power-minimization fixed
point (MMSE virtual combiners), whose minimal total power matches the downlink
need; the downlink powers are then rebalanced by a linear solve.  A bisection
over gamma finds the max-min value for a fixed selection, and an exhaustive
subset scan improves the selection for fixed precoders; alternating the two
yields a monotone objective trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .uplink import RaySelection, select_strongest

__all__ = [
    "DownlinkProblem",
    "MaxMinResult",
    "dl_sinr",
    "dl_sinr_all",
    "dl_single_user",
    "feasibility_oracle",
    "bisection_max_min",
    "exhaustive_selection_max_min",
    "alternating_optimize",
]


@dataclass(frozen=True)
class DownlinkProblem:
    """Channels (K, N), RF chain count, sum power budget, per-user noise, and
    the per-ray element count M (splitter normalization)."""

    channels: np.ndarray
    n_rf: int
    total_power: float
    noise_power: float
    M: int

    def __post_init__(self):
        channels = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        object.__setattr__(self, "channels", channels)
        if self.total_power <= 0 or self.noise_power <= 0:
            raise ValueError("powers must be positive")
        if self.n_rf < 1 or self.n_rf > channels.shape[1]:
            raise ValueError("n_rf out of range")

    @property
    def num_users(self) -> int:
        return self.channels.shape[0]

    def scaled_channels(self, selection: RaySelection) -> np.ndarray:
        """g_k = S h_k / sqrt(M) as columns of an (N_RF, K) matrix."""
        return selection.apply(self.channels).T / math.sqrt(self.M)


@dataclass(frozen=True)
class MaxMinResult:
    selection: RaySelection
    precoders: np.ndarray  # (N_RF, K)
    gamma: float
    trace: list = field(default_factory=list)


def dl_sinr(
    k: int, precoders: np.ndarray, selection: RaySelection, problem: DownlinkProblem
) -> float:
    """Downlink SINR of user k under the given precoders and selection."""
    return float(dl_sinr_all(precoders, selection, problem)[k])


def dl_sinr_all(
    precoders: np.ndarray, selection: RaySelection, problem: DownlinkProblem
) -> np.ndarray:
    """All users' downlink SINRs at once."""
    g = problem.scaled_channels(selection)  # (s, K)
    if precoders.shape[0] != g.shape[0]:
        raise ValueError("precoder rows must match the number of selected ports")
    cross = np.abs(g.conj().T @ precoders) ** 2  # [k, i] = |g_k^H w_i|^2
    signal = np.diag(cross)
    interference = cross.sum(axis=1) - signal
    return signal / (interference + problem.noise_power)


def dl_single_user(
    h: np.ndarray, n_rf: int, total_power: float, noise_power: float, M: int
) -> MaxMinResult:
    """Single-user optimum: keep the strongest ports, transmit MRT at full
    power; SNR = (P / sigma^2) ||S h||^2 / M."""
    h = np.asarray(h)
    sel = select_strongest(np.abs(h), n_rf)
    hs = sel.apply(h)
    norm = np.linalg.norm(hs)
    if norm == 0.0:
        w = np.zeros((len(sel.omega), 1), dtype=complex)
        return MaxMinResult(selection=sel, precoders=w, gamma=0.0, trace=[0.0])
    w = (math.sqrt(total_power) * hs / norm)[:, None]
    gamma = (total_power / noise_power) * float(norm**2) / M
    return MaxMinResult(selection=sel, precoders=w, gamma=gamma, trace=[gamma])


def feasibility_oracle(
    gamma: float,
    selection: RaySelection,
    problem: DownlinkProblem,
    rel_tol: float = 1e-9,
    max_iter: int = 10_000,
) -> np.ndarray | None:
    """Return precoders meeting SINR_k >= gamma for all k within the power
    budget, or None if no such precoders exist.

    Virtual-uplink powers q_k iterate q_k <- gamma / I_k(q), with I_k the
    unit-power MMSE SINR of user k; starting from zero the iterates increase
    monotonically toward the minimal feasible powers, so the search can stop
    as soon as their sum passes the budget.  On convergence the virtual MMSE
    combiners are reused as beam directions and the downlink powers solved so
    every user sits exactly at gamma; duality keeps the total power equal.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    g = problem.scaled_channels(selection)  # (s, K)
    s, k_users = g.shape
    if gamma == 0.0:
        return np.zeros((s, k_users), dtype=complex)
    energies = np.einsum("sk,sk->k", g.conj(), g).real
    if np.any(energies <= 0.0):
        return None

    sigma2 = problem.noise_power
    budget = problem.total_power
    eye = np.eye(s)
    q = np.zeros(k_users)
    converged = False
    for _ in range(max_iter):
        psi = (g * q) @ g.conj().T + sigma2 * eye
        z = np.linalg.solve(psi, g)
        a = np.einsum("sk,sk->k", g.conj(), z).real
        q_new = gamma * (1.0 / a - q)
        if q_new.sum() > budget * (1.0 + 1e-7):
            return None  # monotone from below: the minimal power already exceeds P
        if np.all(np.abs(q_new - q) <= rel_tol * np.maximum(q_new, 1e-300)):
            q = q_new
            converged = True
            break
        q = q_new
    if not converged or q.sum() > budget * (1.0 + 1e-9):
        return None

    # beam directions from the converged virtual uplink
    psi = (g * q) @ g.conj().T + sigma2 * eye
    u = np.linalg.solve(psi, g)
    u = u / np.linalg.norm(u, axis=0, keepdims=True)

    # rebalance downlink powers so each user hits gamma exactly
    cross = np.abs(g.conj().T @ u) ** 2  # [k, i] = |g_k^H u_i|^2
    coupling = -cross
    np.fill_diagonal(coupling, np.diag(cross) / gamma)
    try:
        p = np.linalg.solve(coupling, np.full(k_users, sigma2))
    except np.linalg.LinAlgError:
        return None
    if np.any(p < 0.0):
        return None
    w = u * np.sqrt(p)
    total = p.sum()
    if total > budget * (1.0 + 1e-9):
        return None
    if total > budget:
        w = w * math.sqrt(budget / total)
    if dl_sinr_all(w, selection, problem).min() < gamma * (1.0 - 1e-6):
        return None
    return w


def bisection_max_min(
    selection: RaySelection,
    problem: DownlinkProblem,
    tol: float,
    warm_precoders: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Largest feasible common SINR for a fixed selection, by bisection.

    The bracket starts at [0, gamma_ub] with gamma_ub the best single-user
    full-power MRT SINR max_k (P / sigma^2) ||S h_k||^2 / M; no user can
    exceed its own MRT bound, so anything above it is infeasible.  The lower
    end always carries a certifying precoder; ``warm_precoders`` (power budget
    already satisfied) seed it with their achieved min SINR.  Stops when the
    bracket is narrower than ``tol`` and returns the last feasible point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = problem.scaled_channels(selection)
    s = g.shape[0]
    pbar = problem.total_power / problem.noise_power
    gamma_ub = pbar * float(np.max(np.einsum("sk,sk->k", g.conj(), g).real))
    lo, w_lo = 0.0, np.zeros_like(g)
    if warm_precoders is not None:
        achieved = float(dl_sinr_all(warm_precoders, selection, problem).min())
        if achieved > lo:
            lo, w_lo = achieved, warm_precoders
    hi = gamma_ub * (1.0 + 1e-6) + tol  # strictly above the MRT bound: infeasible
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        w = feasibility_oracle(mid, selection, problem)
        if w is None:
            hi = mid
        else:
            lo, w_lo = mid, w
    return lo, w_lo


def exhaustive_selection_max_min(
    problem: DownlinkProblem, precoders: np.ndarray, cap: int = 10**6
) -> RaySelection:
    """Best selection for fixed precoders: scan all C(N, N_RF) subsets for the
    largest min SINR; row i of the precoder matrix drives the i-th selected
    port in ascending index order; ties break lexicographically."""
    k_users, n = problem.channels.shape
    s = precoders.shape[0]
    if math.comb(n, s) > cap:
        raise ValueError(f"C({n},{s}) subsets exceed the cap of {cap}")
    subsets = np.array(list(combinations(range(n), s)))
    gs = problem.channels[:, subsets] / math.sqrt(problem.M)  # (K, n_sub, s)
    gs = np.transpose(gs, (1, 0, 2))  # (n_sub, K, s)
    cross = np.abs(np.einsum("nks,si->nki", gs.conj(), precoders)) ** 2
    signal = np.einsum("nkk->nk", cross)
    interference = cross.sum(axis=2) - signal
    min_sinr = (signal / (interference + problem.noise_power)).min(axis=1)
    best = subsets[int(np.argmax(min_sinr))]
    return RaySelection(omega=tuple(int(i) for i in best), n_total=n)


def alternating_optimize(
    problem: DownlinkProblem,
    t_max: int = 20,
    eps: float = 1e-3,
    bisect_tol: float | None = None,
    cap: int = 10**6,
) -> MaxMinResult:
    """Alternate bisection over gamma (selection fixed) and exhaustive
    selection (precoders fixed) until the objective moves by at most ``eps``
    or ``t_max`` rounds have run.

    Starts from the ports with the largest total channel energy.  Each round's
    bisection is seeded with the incumbent precoders, whose min SINR on the
    new selection can only have improved, so the gamma trace never decreases.
    """
    if t_max < 1 or eps <= 0:
        raise ValueError("need t_max >= 1 and eps > 0")
    if bisect_tol is None:
        bisect_tol = 0.1 * eps
    energy = (np.abs(problem.channels) ** 2).sum(axis=0)
    selection = select_strongest(energy, problem.n_rf)
    gamma_prev = 0.0
    warm = None
    trace: list[float] = []
    for t in range(t_max):
        gamma, w = bisection_max_min(selection, problem, bisect_tol, warm_precoders=warm)
        # re-evaluating the incumbent on a new selection can wobble at float
        # precision; the certificate tolerance absorbs it, keep the trace monotone
        gamma = max(gamma, gamma_prev)
        trace.append(gamma)
        selection = exhaustive_selection_max_min(problem, w, cap=cap)
        warm = w
        if abs(gamma - gamma_prev) <= eps or t + 1 >= t_max:
            break
        gamma_prev = gamma
    return MaxMinResult(selection=selection, precoders=warm, gamma=trace[-1], trace=trace)
