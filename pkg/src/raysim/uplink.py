"""Uplink receive processing: ray selection, MRC/MMSE combining, sum rate.

N_RF of the N ray ports are routed to RF chains through a binary selection
matrix S with one-hot rows (S S^H = I).  Port noise variance is M sigma^2, so
with transmit SNR Pt_bar = P_t / sigma^2 the MMSE covariance regularizer is
M / Pt_bar.  The same machinery runs the ULA baseline on codeword-projected
channels: DFT codewords are orthogonal with squared norm M, which preserves
the per-port noise scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import UlaCodebook

__all__ = [
    "RaySelection",
    "UplinkResult",
    "select_strongest",
    "uplink_sinr",
    "single_user_select_and_mrc",
    "mrc_combiners",
    "mmse_combiners",
    "sum_rate",
    "greedy_ray_selection",
    "exhaustive_ray_selection",
    "project_onto_codebook",
]


@dataclass(frozen=True)
class RaySelection:
    """Ordered set of selected port indices out of n_total."""

    omega: tuple
    n_total: int

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(int(i) for i in self.omega))
        if len(set(self.omega)) != len(self.omega):
            raise ValueError("selected indices must be distinct")
        if any(i < 0 or i >= self.n_total for i in self.omega):
            raise ValueError("selected index out of range")

    @property
    def matrix(self) -> np.ndarray:
        """Binary selection matrix S, one-hot rows, column sums <= 1."""
        s = np.zeros((len(self.omega), self.n_total))
        s[np.arange(len(self.omega)), list(self.omega)] = 1.0
        return s

    def apply(self, h: np.ndarray) -> np.ndarray:
        """S h: pick the selected entries (rows ordered as omega)."""
        return np.asarray(h)[..., list(self.omega)]


@dataclass(frozen=True)
class UplinkResult:
    selection: RaySelection
    combiners: np.ndarray  # (N_RF, K), column k combines user k
    sinr: np.ndarray
    sum_rate: float


def select_strongest(weights: np.ndarray, n_rf: int) -> RaySelection:
    """Indices of the n_rf largest weights, ties to the lower index, stored
    in ascending index order."""
    w = np.asarray(weights, dtype=float)
    if n_rf > len(w):
        raise ValueError("cannot select more ports than available")
    order = np.argsort(-w, kind="stable")[:n_rf]
    return RaySelection(omega=tuple(sorted(int(i) for i in order)), n_total=len(w))


def uplink_sinr(
    k: int,
    combiners: np.ndarray,
    selection: RaySelection,
    channels: np.ndarray,
    pt_bar: float,
    M: int,
) -> float:
    """SINR of user k: the port-domain transmit SNR is Pt_bar / M.

    SINR_k = P' |w_k^H S h_k|^2 / (P' sum_{i != k} |w_k^H S h_i|^2 + ||w_k||^2)
    with P' = Pt_bar / M; selection orthonormality gives ||w_k^H S|| = ||w_k||.
    """
    channels = np.atleast_2d(channels)
    if channels.shape[1] != selection.n_total:
        raise ValueError("channel length does not match selection size")
    if combiners.shape[0] != len(selection.omega):
        raise ValueError("combiner rows must match the number of selected ports")
    p_eff = pt_bar / M
    hs = selection.apply(channels)  # (K, N_RF)
    w = combiners[:, k]
    proj = hs.conj() @ w  # entry i = h_i^H S^H w_k = (w_k^H S h_i)*
    signal = p_eff * abs(proj[k]) ** 2
    interference = p_eff * (np.abs(proj) ** 2).sum() - signal
    return float(signal / (interference + np.vdot(w, w).real))


def single_user_select_and_mrc(h: np.ndarray, n_rf: int, pt_bar: float, M: int) -> UplinkResult:
    """Best single-user selection (largest |h_n|) with MRC combining.

    SNR(S) = Pt_bar ||S h||^2 / M, maximized by keeping the strongest ports.
    """
    h = np.asarray(h)
    sel = select_strongest(np.abs(h), n_rf)
    w = sel.apply(h)[:, None]
    snr = pt_bar * float(np.vdot(w, w).real) / M
    return UplinkResult(
        selection=sel,
        combiners=w,
        sinr=np.array([snr]),
        sum_rate=math.log2(1.0 + snr),
    )


def mrc_combiners(selection: RaySelection, channels: np.ndarray) -> np.ndarray:
    """Matched-filter combiners w_k = S h_k, one column per user."""
    return selection.apply(np.atleast_2d(channels)).T.copy()


def mmse_combiners(
    selection: RaySelection, channels: np.ndarray, pt_bar: float, M: int
) -> np.ndarray:
    """MMSE combiners w_k = C_k^{-1} S h_k.

    C_k = S (sum_{i != k} h_i h_i^H + (M / Pt_bar) I) S^H; solved as a linear
    system per user rather than by explicit inversion.
    """
    if pt_bar <= 0:
        raise ValueError("pt_bar must be positive")
    hs = selection.apply(np.atleast_2d(channels))  # (K, s)
    k_users, s = hs.shape
    gram = hs.T @ hs.conj()  # sum_i (S h_i)(S h_i)^H
    base = gram + (M / pt_bar) * np.eye(s)
    w = np.empty((s, k_users), dtype=complex)
    for k in range(k_users):
        hk = hs[k]
        c_k = base - np.outer(hk, hk.conj())
        w[:, k] = np.linalg.solve(c_k, hk)
    return w


def sum_rate(selection: RaySelection, channels: np.ndarray, pt_bar: float, M: int) -> float:
    """Sum rate with per-user MMSE combining on the given selection:
    sum_k log2(1 + (S h_k)^H C_k^{-1} S h_k)."""
    if pt_bar <= 0:
        raise ValueError("pt_bar must be positive")
    hs = selection.apply(np.atleast_2d(channels))
    k_users, s = hs.shape
    gram = hs.T @ hs.conj()
    base = gram + (M / pt_bar) * np.eye(s)
    total = 0.0
    for k in range(k_users):
        hk = hs[k]
        c_k = base - np.outer(hk, hk.conj())
        sinr = np.vdot(hk, np.linalg.solve(c_k, hk)).real
        total += math.log2(1.0 + max(sinr, 0.0))
    return total


def _subset_sum_rates(
    channels: np.ndarray, subsets: np.ndarray, pt_bar: float, M: int
) -> np.ndarray:
    """Sum rate of every candidate subset at once; subsets is (n_sub, s) int."""
    hs = channels[:, subsets]  # (K, n_sub, s)
    hs = np.transpose(hs, (1, 0, 2))  # (n_sub, K, s)
    n_sub, k_users, s = hs.shape
    gram = np.einsum("nks,nkt->nst", hs, hs.conj())
    base = gram + (M / pt_bar) * np.eye(s)[None]
    own = np.einsum("nks,nkt->nkst", hs, hs.conj())
    c_all = base[:, None] - own  # (n_sub, K, s, s)
    sol = np.linalg.solve(c_all, hs[..., None])[..., 0]
    sinr = np.einsum("nks,nks->nk", hs.conj(), sol).real
    return np.log2(1.0 + np.maximum(sinr, 0.0)).sum(axis=1)


def greedy_ray_selection(
    channels: np.ndarray, n_rf: int, pt_bar: float, M: int
) -> UplinkResult:
    """Greedy selection: add the port that maximizes the MMSE sum rate, one
    per step, for n_rf steps; ties break to the lowest port index.

    Costs O(N * N_RF) rate evaluations versus C(N, N_RF) for exhaustive search.
    """
    channels = np.atleast_2d(channels)
    n = channels.shape[1]
    if n_rf > n:
        raise ValueError("cannot select more ports than available")
    chosen: list[int] = []
    remaining = list(range(n))
    for _ in range(n_rf):
        cand = np.array([sorted(chosen + [c]) for c in remaining])
        rates = _subset_sum_rates(channels, cand, pt_bar, M)
        best = int(np.argmax(rates))  # first max -> lowest candidate index
        chosen.append(remaining.pop(best))
    sel = RaySelection(omega=tuple(sorted(chosen)), n_total=n)
    return _finalize(sel, channels, pt_bar, M)


def exhaustive_ray_selection(
    channels: np.ndarray, n_rf: int, pt_bar: float, M: int, cap: int = 10**6
) -> UplinkResult:
    """Scan every n_rf-subset for the best MMSE sum rate (lexicographic
    tie-break); refuses to enumerate more than ``cap`` subsets."""
    channels = np.atleast_2d(channels)
    n = channels.shape[1]
    if math.comb(n, n_rf) > cap:
        raise ValueError(f"C({n},{n_rf}) subsets exceed the cap of {cap}")
    subsets = np.array(list(combinations(range(n), n_rf)))
    rates = _subset_sum_rates(channels, subsets, pt_bar, M)
    best = subsets[int(np.argmax(rates))]
    sel = RaySelection(omega=tuple(int(i) for i in best), n_total=n)
    return _finalize(sel, channels, pt_bar, M)


def _finalize(
    sel: RaySelection, channels: np.ndarray, pt_bar: float, M: int
) -> UplinkResult:
    w = mmse_combiners(sel, channels, pt_bar, M)
    k_users = channels.shape[0]
    sinr = np.array([uplink_sinr(k, w, sel, channels, pt_bar, M) for k in range(k_users)])
    return UplinkResult(
        selection=sel,
        combiners=w,
        sinr=sinr,
        sum_rate=sum_rate(sel, channels, pt_bar, M),
    )


def project_onto_codebook(h_ula: np.ndarray, codebook: UlaCodebook) -> np.ndarray:
    """Codeword-domain channel C^H h for the hybrid-beamforming ULA baseline.

    Columns of C are orthogonal with ||c_n||^2 = M, so projected noise keeps
    the M sigma^2 per-port variance and the ray machinery applies unchanged.
    """
    return codebook.matrix.conj().T @ np.asarray(h_ula)
