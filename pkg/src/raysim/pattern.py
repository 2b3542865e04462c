"""Antenna element gain patterns.

Two parametric models are supported: the standard cellular directional element
(quadratic roll-off in dB, capped by a front-to-back attenuation floor) and an
isotropic element.  Gains are linear power quantities; angles are radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "ElementPattern",
    "DesignThreshold",
    "wrap_angle",
    "total_power_gain",
    "peak_gain_from_power",
]


def wrap_angle(zeta):
    """Wrap angle(s) into (-pi, pi]."""
    out = -np.mod(-np.asarray(zeta, dtype=float) + np.pi, 2.0 * np.pi) + np.pi
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ElementPattern:
    """Per-element power gain G(zeta) over offsets |zeta| <= zeta_max.

    kind "directional": G(zeta) = G0 * 10^(-min{12 (zeta/phi_3db)^2, A_max}/10),
    so G(phi_3db/2) = G0/2 and the back lobe sits A_max dB below the peak.
    kind "isotropic": G(zeta) = G0 everywhere.
    """

    kind: str
    G0: float
    phi_3db: float = math.pi
    a_max_db: float = 30.0
    zeta_max: float = math.pi

    def __post_init__(self):
        if self.kind not in ("directional", "isotropic"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if self.G0 <= 0.0:
            raise ValueError("peak gain must be positive")
        if self.kind == "directional" and self.phi_3db <= 0.0:
            raise ValueError("phi_3db must be positive")

    @classmethod
    def directional(
        cls,
        peak_gain_db: float,
        phi_3db: float,
        a_max_db: float = 30.0,
        zeta_max: float = math.pi,
    ) -> "ElementPattern":
        return cls("directional", 10.0 ** (peak_gain_db / 10.0), phi_3db, a_max_db, zeta_max)

    @classmethod
    def isotropic(cls, gain_db: float = 0.0, zeta_max: float = math.pi) -> "ElementPattern":
        return cls("isotropic", 10.0 ** (gain_db / 10.0), zeta_max=zeta_max)

    def gain(self, zeta):
        """Linear power gain at offset(s) ``zeta``; rejects |zeta| > zeta_max."""
        zeta = np.asarray(zeta, dtype=float)
        if np.any(np.abs(zeta) > self.zeta_max + 1e-12):
            raise ValueError("offset outside the pattern domain")
        if self.kind == "isotropic":
            out = np.full_like(zeta, self.G0)
        else:
            att_db = np.minimum(12.0 * (zeta / self.phi_3db) ** 2, self.a_max_db)
            out = self.G0 * 10.0 ** (-att_db / 10.0)
        return out if out.ndim else float(out)

    @property
    def half_power_gain(self) -> float:
        """Gain at the 3 dB point (G0/2 for directional, G0 for isotropic)."""
        if self.kind == "isotropic":
            return self.G0
        return self.gain(0.5 * self.phi_3db)


@dataclass(frozen=True)
class DesignThreshold:
    """Coverage floor: epsilon per element, epsilon0 = M * epsilon overall."""

    epsilon: float
    epsilon0: float

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")

    @classmethod
    def per_element(cls, epsilon: float, M: int) -> "DesignThreshold":
        return cls(epsilon=epsilon, epsilon0=M * epsilon)


def total_power_gain(pattern: ElementPattern) -> float:
    """Integral of G(zeta) over [-zeta_max, zeta_max] by adaptive quadrature.

    The directional pattern has a known breakpoint where the roll-off meets the
    back-lobe floor, at |zeta| = sqrt(A_max/12) * phi_3db; it is passed to the
    integrator as a split point.  Relative tolerance 1e-8.
    """
    if pattern.kind == "isotropic":
        return 2.0 * pattern.zeta_max * pattern.G0
    brk = math.sqrt(pattern.a_max_db / 12.0) * pattern.phi_3db
    points = [p for p in (-brk, brk) if abs(p) < pattern.zeta_max]
    val, _ = integrate.quad(
        lambda z: pattern.gain(z),
        -pattern.zeta_max,
        pattern.zeta_max,
        points=points or None,
        epsrel=1e-8,
        limit=200,
    )
    return val


def peak_gain_from_power(g_sum: float, phi_3db: float) -> float:
    """Peak gain implied by a power budget: G0 ~= G_sum / (1.066 * phi_3db).

    Inverts the Gaussian-integral approximation of the directional pattern's
    total power (back lobe neglected).
    """
    if g_sum <= 0.0 or phi_3db <= 0.0:
        raise ValueError("g_sum and phi_3db must be positive")
    return g_sum / (1.066 * phi_3db)
