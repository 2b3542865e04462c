"""Array geometry: ray-array and ULA responses, beam patterns, nulls, design rules.

A ray array fans N directly-combined M-element subarrays ("rays") out from a
hub, with orientations spaced arcsin(2/M) apart so that each ray's beam peak
sits on its neighbours' first nulls.  The ULA counterpart steers an M-element
half-wavelength array through an orthogonal DFT codebook with sin(phi_n)=2n/M.
All angles are radians; the hub offset D is stored in wavelengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pattern import ElementPattern, wrap_angle

__all__ = [
    "RayArrayConfig",
    "UlaCodebook",
    "PortResponse",
    "ray_spacing",
    "design_ray_array",
    "dirichlet_kernel",
    "subarray_steering",
    "ray_responses",
    "ray_response_matrix",
    "ray_nulls",
    "ray_beamwidth",
    "dft_codebook",
    "ula_steering",
    "ula_beam_pattern",
    "ula_beamwidth",
    "best_beam",
    "nearest_ray_index",
    "nearest_codeword_index",
]


def ray_spacing(M: int) -> float:
    """Orientation spacing arcsin(2/M) between adjacent rays (= half the
    null-to-null beamwidth, so each peak falls on the neighbour's first null)."""
    if M < 2:
        raise ValueError(f"need M >= 2, got {M}")
    return math.asin(2.0 / M)


@dataclass(frozen=True)
class RayArrayConfig:
    """Geometry of a ray array: N rays of M elements at hub offset D (wavelengths).

    orientations[i] holds the direction of ray index n = i - (N-1)/2, i.e. the
    array is stored boresight-centred with orientations[(N-1)/2] == 0.
    """

    M: int
    N: int
    D: float
    orientations: np.ndarray
    phi_max: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"need M >= 2, got M={self.M}")
        if self.N % 2 != 1 or self.N < 1:
            raise ValueError(f"need odd positive N, got N={self.N}")
        orient = np.asarray(self.orientations, dtype=float)
        object.__setattr__(self, "orientations", orient)
        if orient.shape != (self.N,):
            raise ValueError("orientations must have length N")
        delta = ray_spacing(self.M)
        if self.N != 2 * int(math.floor(self.phi_max / delta)) + 1:
            raise ValueError("N must cover the sector at one ray per beam spacing")
        half = (self.N - 1) // 2
        if not np.allclose(orient, np.arange(-half, half + 1) * delta, atol=1e-12):
            raise ValueError("orientations must sit on the arcsin(2/M) grid")
        # outermost rays must stay inside the coverage sector
        if np.max(np.abs(orient)) > self.phi_max + 1e-12:
            raise ValueError("ray orientations exceed phi_max")
        if self.D < 1.0 / (4.0 * math.sin(0.5 * delta)) - 1e-9:
            raise ValueError("hub offset D below the half-wavelength separation bound")

    @property
    def ray_indices(self) -> np.ndarray:
        """Symmetric ray indices -(N-1)/2 .. (N-1)/2 aligned with orientations."""
        half = (self.N - 1) // 2
        return np.arange(-half, half + 1)


@dataclass(frozen=True)
class UlaCodebook:
    """DFT codebook for an M-element ULA: N' codewords with sin(phi_n) = 2n/M."""

    M: int
    codeword_angles: np.ndarray
    phi_max: float

    def __post_init__(self):
        angles = np.asarray(self.codeword_angles, dtype=float)
        object.__setattr__(self, "codeword_angles", angles)
        if len(angles) % 2 != 1:
            raise ValueError("codeword count must be odd")
        if len(angles) != 2 * int(math.floor(math.sin(self.phi_max) * self.M / 2.0)) + 1:
            raise ValueError("codeword count must follow the sector floor formula")
        if np.max(np.abs(np.sin(angles))) > math.sin(self.phi_max) + 1e-12:
            raise ValueError("codeword direction outside the coverage sector")

    @property
    def n_codewords(self) -> int:
        return len(self.codeword_angles)

    @property
    def codeword_indices(self) -> np.ndarray:
        half = (self.n_codewords - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def matrix(self) -> np.ndarray:
        """(M, N') codeword matrix; columns are orthogonal with norm sqrt(M)."""
        m = np.arange(self.M)[:, None]
        return np.exp(1j * np.pi * m * np.sin(self.codeword_angles)[None, :])


@dataclass(frozen=True)
class PortResponse:
    """Complex output of every ray port for one incidence angle."""

    values: np.ndarray
    angle: float


def design_ray_array(M: int, phi_max: float, D_margin: float = 0.0) -> RayArrayConfig:
    """Size a ray array for a +-phi_max sector.

    N = 2*floor(phi_max / arcsin(2/M)) + 1 rays at orientations n*arcsin(2/M),
    and hub offset D = (1 + D_margin) / (4 sin(0.5 arcsin(2/M))) wavelengths so
    adjacent first elements sit at least half a wavelength apart.
    """
    if M < 2:
        raise ValueError(f"need M >= 2, got M={M}")
    if not 0.0 < phi_max < 0.5 * math.pi:
        raise ValueError(f"need 0 < phi_max < pi/2, got {phi_max}")
    if D_margin < 0.0:
        raise ValueError("D_margin must be nonnegative")
    delta = ray_spacing(M)
    half = int(math.floor(phi_max / delta))
    n = np.arange(-half, half + 1)
    d_min = 1.0 / (4.0 * math.sin(0.5 * delta))
    return RayArrayConfig(
        M=M,
        N=2 * half + 1,
        D=(1.0 + D_margin) * d_min,
        orientations=n * delta,
        phi_max=phi_max,
    )


def dirichlet_kernel(M: int, x):
    """Normalized sum of M unit phasors, H_M(x) = (1/M) sum_m e^{j pi m x}.

    Evaluated in closed form e^{j pi (M-1) x / 2} sin(pi M x / 2)/(M sin(pi x / 2)),
    with the removable singularities at even integers taken by their limit
    (unit magnitude).  Accepts scalars or arrays.
    """
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    x = np.asarray(x, dtype=float)
    den = np.sin(0.5 * np.pi * x)
    singular = np.abs(den) < 1e-12
    safe_den = np.where(singular, 1.0, den)
    ratio = np.sin(0.5 * np.pi * M * x) / (M * safe_den)
    # limit of the ratio at x = 2t is (-1)^{t(M-1)}
    t = np.round(0.5 * x)
    limit = np.where((t * (M - 1)) % 2 == 0, 1.0, -1.0)
    ratio = np.where(singular, limit, ratio)
    out = np.exp(0.5j * np.pi * (M - 1) * x) * ratio
    return out if out.ndim else complex(out)


def subarray_steering(phi: float, orientation: float, M: int) -> np.ndarray:
    """Per-element response of one ray: [e^{j pi m sin(phi - eta)}], m = 0..M-1."""
    return np.exp(1j * np.pi * np.arange(M) * math.sin(phi - orientation))


def ray_response_matrix(
    phi, config: RayArrayConfig, pattern: ElementPattern
) -> np.ndarray:
    """Port outputs f(phi, eta_n) for each angle in ``phi``; shape (len(phi), N).

    f = M H_M(sin(phi-eta)) e^{j 2 pi D sin(phi-eta)} sqrt(G(phi-eta)); the
    element gain sees the offset wrapped into (-pi, pi].
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    zeta = phi[:, None] - config.orientations[None, :]
    x = np.sin(zeta)
    resp = config.M * dirichlet_kernel(config.M, x)
    resp = resp * np.exp(2j * np.pi * config.D * x)
    return resp * np.sqrt(pattern.gain(wrap_angle(zeta)))


def ray_responses(phi: float, config: RayArrayConfig, pattern: ElementPattern) -> PortResponse:
    """Outputs of the N ray ports for a single incidence angle."""
    return PortResponse(values=ray_response_matrix(phi, config, pattern)[0], angle=float(phi))


def ray_nulls(orientation: float, M: int, phi_max: float) -> np.ndarray:
    """Pattern zeros arcsin(2p/M) + eta of one ray, restricted to [-phi_max, phi_max].

    The admissible p are bounded by the extreme values of sin(phi - eta) over
    the sector, p in [ceil(M chi_min / 2), floor(M chi_max / 2)] excluding 0.
    """
    lo = math.sin(-phi_max - orientation)
    hi = math.sin(min(phi_max - orientation, 0.5 * math.pi))
    if -phi_max - orientation < -0.5 * math.pi:
        lo = -1.0
    p_lo = math.ceil(M * lo / 2.0)
    p_hi = math.floor(M * hi / 2.0)
    p = np.array([q for q in range(p_lo, p_hi + 1) if q != 0], dtype=int)
    if len(p) == 0:
        return np.array([], dtype=float)
    nulls = np.arcsin(2.0 * p / M) + orientation
    return nulls[np.abs(nulls) <= phi_max + 1e-15]


def ray_beamwidth(M: int) -> float:
    """Null-to-null mainlobe width 2 arcsin(2/M); identical for every ray."""
    if M < 3:
        raise ValueError(f"mainlobe undefined for M < 3, got M={M}")
    return 2.0 * math.asin(2.0 / M)


def dft_codebook(M: int, phi_max: float) -> UlaCodebook:
    """DFT codebook covering the sector: N' = 2*floor(sin(phi_max)/(2/M)) + 1
    codewords at sin(phi_n) = 2n/M."""
    if M < 2:
        raise ValueError(f"need M >= 2, got M={M}")
    if not 0.0 < phi_max < 0.5 * math.pi:
        raise ValueError(f"need 0 < phi_max < pi/2, got {phi_max}")
    half = int(math.floor(math.sin(phi_max) / (2.0 / M)))
    n = np.arange(-half, half + 1)
    if len(n) > M:
        raise ValueError("codebook larger than M is no longer orthogonal")
    return UlaCodebook(M=M, codeword_angles=np.arcsin(2.0 * n / M), phi_max=phi_max)


def ula_steering(phi: float, M: int) -> np.ndarray:
    """ULA array response [e^{j pi m sin(phi)}], m = 0..M-1."""
    return np.exp(1j * np.pi * np.arange(M) * math.sin(phi))


def ula_beam_pattern(phi: float, phi_n: float, M: int, pattern: ElementPattern) -> complex:
    """Codeword beam pattern sqrt(G(phi)) * M * H_M(sin(phi) - sin(phi_n))."""
    g = pattern.gain(wrap_angle(phi))
    return complex(math.sqrt(g) * M * dirichlet_kernel(M, math.sin(phi) - math.sin(phi_n)))


def ula_beamwidth(phi_n: float, M: int) -> float:
    """Exact null-to-null width arcsin(sin(phi_n)+2/M) - arcsin(sin(phi_n)-2/M).

    Grows with |phi_n|; undefined when the first null leaves visible space.
    """
    s = math.sin(phi_n)
    if abs(s) + 2.0 / M > 1.0:
        raise ValueError("first null outside visible space for this codeword")
    return math.asin(s + 2.0 / M) - math.asin(s - 2.0 / M)


def nearest_ray_index(phi: float, M: int) -> int:
    """Closed-form best ray index n* = floor((floor(2 phi / arcsin(2/M)) + 1)/2)."""
    delta = ray_spacing(M)
    return int(math.floor((math.floor(2.0 * phi / delta) + 1) / 2.0))


def nearest_codeword_index(phi: float, M: int) -> int:
    """Closed-form best codeword index n* = floor((floor(M sin phi) + 1)/2)."""
    return int(math.floor((math.floor(M * math.sin(phi)) + 1) / 2.0))


def best_beam(phi: float, config, pattern: ElementPattern) -> tuple[float, int]:
    """Strongest port/codeword magnitude at angle ``phi`` and its symmetric index.

    Scans all rays (``RayArrayConfig``) or codewords (``UlaCodebook``); ties go
    to the lowest index.  Rejects angles outside the coverage sector.
    """
    if abs(phi) > config.phi_max:
        raise ValueError(f"|phi|={abs(phi):.6f} exceeds phi_max={config.phi_max:.6f}")
    if isinstance(config, RayArrayConfig):
        mags = np.abs(ray_response_matrix(phi, config, pattern)[0])
        indices = config.ray_indices
    elif isinstance(config, UlaCodebook):
        g = pattern.gain(wrap_angle(phi))
        x = math.sin(phi) - np.sin(config.codeword_angles)
        mags = math.sqrt(g) * config.M * np.abs(dirichlet_kernel(config.M, x))
        indices = config.codeword_indices
    else:
        raise TypeError(f"unsupported config type {type(config).__name__}")
    best = int(np.argmax(mags))  # argmax returns the first (lowest-index) maximum
    return float(mags[best]), int(indices[best])
