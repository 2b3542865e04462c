"""Coverage analysis: element-pattern sufficiency rules and sector sweeps.

The design goal is a floor on the best-beam gain over the whole sector:
min_phi max_n |f(phi, n)| >= epsilon0 = M * epsilon.  Sufficient conditions
bound the element gain at its half-power point against the worst mid-cell
kernel loss; ``verify_coverage`` checks the floor numerically on a grid.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (
    RayArrayConfig,
    UlaCodebook,
    dirichlet_kernel,
    ray_response_matrix,
    ray_spacing,
)
from .pattern import DesignThreshold, ElementPattern, wrap_angle

__all__ = [
    "ray_pattern_sufficient",
    "ula_pattern_sufficient",
    "verify_coverage",
]


def ray_pattern_sufficient(pattern: ElementPattern, M: int, threshold: DesignThreshold) -> bool:
    """Sufficient condition for ray-array coverage at floor M*epsilon.

    Requires the element's half-power gain to absorb the worst straddle loss,
    G(phi_3db/2) >= (epsilon / |H_M(sin(arcsin(2/M)/2))|)^2, and the element
    beam to span at least one ray cell, phi_3db >= arcsin(2/M).  An isotropic
    element has no roll-off, so only the gain condition binds.
    """
    h_mid = abs(dirichlet_kernel(M, math.sin(0.5 * ray_spacing(M))))
    gain_ok = pattern.half_power_gain >= (threshold.epsilon / h_mid) ** 2
    if pattern.kind == "isotropic":
        return bool(gain_ok)
    return bool(gain_ok and pattern.phi_3db >= ray_spacing(M))


def ula_pattern_sufficient(
    pattern: ElementPattern, M: int, threshold: DesignThreshold, phi_max: float
) -> bool:
    """Sufficient condition for DFT-codebook ULA coverage at floor M*epsilon.

    Gain condition G(phi_3db/2) >= (epsilon / |H_M(1/M)|)^2 paired with the
    width condition phi_3db >= 2*phi_max: the shared element must cover the
    whole sector rather than one cell.
    """
    h_mid = abs(dirichlet_kernel(M, 1.0 / M))
    gain_ok = pattern.half_power_gain >= (threshold.epsilon / h_mid) ** 2
    if pattern.kind == "isotropic":
        return bool(gain_ok)
    return bool(gain_ok and pattern.phi_3db >= 2.0 * phi_max)


def verify_coverage(
    config: RayArrayConfig | UlaCodebook,
    pattern: ElementPattern,
    threshold: DesignThreshold,
    grid: int = 2001,
) -> tuple[float, float]:
    """Grid-scan the best-beam gain over [-phi_max, phi_max].

    Returns (min_gain, angle_at_min).  When the matching sufficiency predicate
    holds, min_gain >= epsilon0 is expected (the converse need not hold).
    """
    if grid < 1000:
        raise ValueError("grid must have at least 1000 points")
    phis = np.linspace(-config.phi_max, config.phi_max, grid)
    if isinstance(config, RayArrayConfig):
        mags = np.abs(ray_response_matrix(phis, config, pattern))
    elif isinstance(config, UlaCodebook):
        x = np.sin(phis)[:, None] - np.sin(config.codeword_angles)[None, :]
        g = np.sqrt(pattern.gain(wrap_angle(phis)))
        mags = g[:, None] * config.M * np.abs(dirichlet_kernel(config.M, x))
    else:
        raise TypeError(f"unsupported config type {type(config).__name__}")
    envelope = mags.max(axis=1)
    i = int(np.argmin(envelope))
    return float(envelope[i]), float(phis[i])
