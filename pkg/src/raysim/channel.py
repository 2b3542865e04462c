"""Stochastic multipath channels for an urban-macro NLoS drop.

Clustered ray model: N_c clusters of N_r rays each, with lognormal cluster
powers, exponential intra-cluster ray powers, uniform phases, and cluster
angles spread around a uniformly drawn line-of-sight direction.  Unit total
power per user, sum |alpha|^2 = 1.  Per-element noise variance is sigma^2, so
a directly-combined M-element ray port sees sigma0^2 = M sigma^2.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .geometry import RayArrayConfig, ray_response_matrix
from .pattern import ElementPattern, wrap_angle

__all__ = [
    "ScenarioParams",
    "PathSet",
    "ChannelRealization",
    "path_rng",
    "sample_paths",
    "effective_ray_channel",
    "ula_channel",
    "elementwise_channel",
    "splitter_contraction",
    "realize_channels",
    "write_channel_dump",
    "read_channel_dump",
]


@dataclass(frozen=True)
class ScenarioParams:
    """Drop parameters; defaults are the urban-macro NLoS values at 47.2 GHz."""

    f_c_ghz: float = 47.2
    num_clusters: int = 12
    rays_per_cluster: int = 20
    num_users: int = 1
    seed: int = 1
    realizations: int = 50

    def __post_init__(self):
        if self.f_c_ghz <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.num_clusters < 1 or self.rays_per_cluster < 1:
            raise ValueError("need at least one cluster and one ray")
        if self.num_users < 1 or self.realizations < 1:
            raise ValueError("need at least one user and one realization")


@dataclass(frozen=True)
class PathSet:
    """One user's propagation paths: complex gains, angles, and cluster metadata.

    alpha/phi/power are flat over all N_c*N_r rays; cluster_index/ray_index map
    each entry back to its (cluster, ray) origin.  Angles are radians in
    (-pi, pi]; powers satisfy sum(power) == sum|alpha|^2 == 1.
    """

    alpha: np.ndarray
    phi: np.ndarray
    power: np.ndarray
    cluster_index: np.ndarray
    ray_index: np.ndarray
    cluster_power: np.ndarray | None = None
    cluster_angle: np.ndarray | None = None
    angle_spread_deg: float | None = None


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user path sets plus the derived port-domain channel vectors."""

    paths: list
    h_ray: np.ndarray  # (K, N) ray-port channels
    h_ula: np.ndarray  # (K, M) element-domain ULA channels
    noise_sigma2: float
    noise_sigma0_2: float


def path_rng(seed: int, user: int, realization: int) -> np.random.Generator:
    """Independent, reproducible stream keyed by (seed, user, realization).

    Uses a counter-keyed Philox generator, so streams are identical regardless
    of sampling order or parallel execution.
    """
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, user, realization]))


def sample_paths(params: ScenarioParams, rng: np.random.Generator) -> PathSet:
    """Draw one user's clustered path set.

    Draw order: angle spread lgAS ~ N(2.08 - 0.27 log10(f_c), 0.11^2); cluster
    shadowing Z_n ~ N(0, 3^2) dB -> normalized cluster powers; intra-cluster
    ray powers exp(-sqrt(2)|x|/15), x ~ U(-2, 2), normalized within cluster;
    ray phases U(-pi, pi); cluster angles X_n * 2*(AS/1.4)*sqrt(-ln(P_n/max P))
    / 1.289 + Y_n + phi_LOS with X_n = +-1, Y_n ~ N(0, (AS/7)^2), phi_LOS ~
    U(-90 deg, 90 deg); ray angles = cluster angle + 15 deg * U(-2, 2).
    """
    nc, nr = params.num_clusters, params.rays_per_cluster

    lg_as = rng.normal(2.08 - 0.27 * math.log10(params.f_c_ghz), 0.11)
    as_deg = 10.0 ** lg_as

    z_n = rng.normal(0.0, 3.0, nc)
    p_cluster = 10.0 ** (-z_n / 10.0)
    p_cluster = p_cluster / p_cluster.sum()

    x_nm = rng.uniform(-2.0, 2.0, (nc, nr))
    p_ray = np.exp(-math.sqrt(2.0) * np.abs(x_nm) / 15.0)
    p_ray = p_cluster[:, None] * p_ray / p_ray.sum(axis=1, keepdims=True)

    phase = rng.uniform(-np.pi, np.pi, (nc, nr))
    alpha = np.sqrt(p_ray) * np.exp(1j * phase)

    x_sign = 1.0 - 2.0 * rng.integers(0, 2, nc)
    y_n = rng.normal(0.0, as_deg / 7.0, nc)
    phi_los = rng.uniform(-90.0, 90.0)
    spread = 2.0 * (as_deg / 1.4) * np.sqrt(-np.log(p_cluster / p_cluster.max())) / 1.289
    cluster_angle_deg = x_sign * spread + y_n + phi_los

    offsets = rng.uniform(-2.0, 2.0, (nc, nr))
    ray_angle_deg = cluster_angle_deg[:, None] + 15.0 * offsets

    cluster_idx, ray_idx = np.meshgrid(np.arange(nc), np.arange(nr), indexing="ij")
    return PathSet(
        alpha=alpha.ravel(),
        phi=wrap_angle(np.radians(ray_angle_deg.ravel())),
        power=p_ray.ravel(),
        cluster_index=cluster_idx.ravel(),
        ray_index=ray_idx.ravel(),
        cluster_power=p_cluster,
        cluster_angle=np.radians(cluster_angle_deg),
        angle_spread_deg=float(as_deg),
    )


def effective_ray_channel(
    paths: PathSet, config: RayArrayConfig, pattern: ElementPattern
) -> np.ndarray:
    """Ray-port channel h = sum_l alpha_l f(phi_l); length N.

    Path angles outside the design sector are evaluated as-is: the element
    pattern's back-lobe floor attenuates them, no clipping is applied.
    """
    if len(paths.alpha) == 0:
        return np.zeros(config.N, dtype=complex)
    return paths.alpha @ ray_response_matrix(paths.phi, config, pattern)


def ula_channel(paths: PathSet, M: int, pattern: ElementPattern) -> np.ndarray:
    """Element-domain ULA channel sum_l alpha_l sqrt(G(phi_l)) a(phi_l); length M."""
    if len(paths.alpha) == 0:
        return np.zeros(M, dtype=complex)
    phase = np.exp(1j * np.pi * np.outer(np.sin(paths.phi), np.arange(M)))
    weights = paths.alpha * np.sqrt(pattern.gain(wrap_angle(paths.phi)))
    return weights @ phase


def elementwise_channel(
    paths: PathSet, config: RayArrayConfig, pattern: ElementPattern
) -> np.ndarray:
    """Channel to every individual element: sum_l alpha_l vec(A(phi_l)), length N*M.

    A(phi) has the per-element steering of ray n in column n, scaled by the
    first-element phase and the element gain; vec stacks columns.
    """
    h = np.zeros((config.M, config.N), dtype=complex)
    for a, phi in zip(paths.alpha, paths.phi):
        zeta = phi - config.orientations
        x = np.sin(zeta)
        b = np.exp(2j * np.pi * config.D * x) * np.sqrt(pattern.gain(wrap_angle(zeta)))
        steer = np.exp(1j * np.pi * np.outer(np.arange(config.M), x))
        h += a * steer * b[None, :]
    return h.ravel(order="F")


def splitter_contraction(h_elements: np.ndarray, M: int) -> np.ndarray:
    """Collapse an element-domain channel onto ray ports through the uniform
    1/sqrt(M) splitter; returns a length-N vector equal to the port channel
    scaled by 1/sqrt(M)."""
    h = h_elements.reshape(M, -1, order="F")
    return h.sum(axis=0) / math.sqrt(M)


def realize_channels(
    params: ScenarioParams,
    config: RayArrayConfig,
    ray_pattern: ElementPattern,
    ula_pattern: ElementPattern,
    realization: int,
    noise_sigma2: float = 1.0,
) -> ChannelRealization:
    """Draw all users' paths for one realization and derive both channel forms."""
    paths = [
        sample_paths(params, path_rng(params.seed, k, realization))
        for k in range(params.num_users)
    ]
    h_ray = np.stack([effective_ray_channel(p, config, ray_pattern) for p in paths])
    h_ula = np.stack([ula_channel(p, config.M, ula_pattern) for p in paths])
    return ChannelRealization(
        paths=paths,
        h_ray=h_ray,
        h_ula=h_ula,
        noise_sigma2=noise_sigma2,
        noise_sigma0_2=config.M * noise_sigma2,
    )


_DUMP_HEADER = "realization\tuser\tn\tm\tP_nm\talpha_re\talpha_im\tphi_rad"


def write_channel_dump(path, records: dict[tuple[int, int], PathSet]) -> None:
    """Write path sets as delimited text, one row per (realization, user, ray).

    ``records`` maps (realization, user) to a PathSet.  Values are written with
    17 significant digits so float64 round-trips exactly.
    """
    lines = [_DUMP_HEADER]
    for (real, user) in sorted(records):
        p = records[(real, user)]
        for i in range(len(p.alpha)):
            lines.append(
                f"{real}\t{user}\t{p.cluster_index[i]}\t{p.ray_index[i]}\t"
                f"{p.power[i]:.17g}\t{p.alpha[i].real:.17g}\t{p.alpha[i].imag:.17g}\t"
                f"{p.phi[i]:.17g}"
            )
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".raysim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_channel_dump(path) -> dict[tuple[int, int], PathSet]:
    """Read a channel dump back into PathSets keyed by (realization, user)."""
    groups: dict[tuple[int, int], list] = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != _DUMP_HEADER:
            raise ValueError(f"unexpected channel dump header: {header!r}")
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            key = (int(parts[0]), int(parts[1]))
            groups.setdefault(key, []).append(parts[2:])
    out = {}
    for key, rows in groups.items():
        arr = np.array(rows, dtype=float)
        out[key] = PathSet(
            alpha=arr[:, 3] + 1j * arr[:, 4],
            phi=arr[:, 5],
            power=arr[:, 2],
            cluster_index=arr[:, 0].astype(int),
            ray_index=arr[:, 1].astype(int),
        )
    return out
