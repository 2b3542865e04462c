"""Hardware bill-of-materials comparison.

The ray array swaps every phase shifter for RF switches and extra antenna
elements: N_RF * N switches plus N * M elements, against N_RF * M phase
shifters plus M elements for the hybrid-beamforming ULA.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["CostParams", "ray_array_cost", "ula_cost"]


@dataclass(frozen=True)
class CostParams:
    """Unit prices (currency) and architecture dimensions."""

    p_switch: float
    p_antenna: float
    p_phase_shifter: float
    M: int
    N: int
    n_rf: int

    def __post_init__(self):
        if min(self.p_switch, self.p_antenna, self.p_phase_shifter) < 0:
            raise ValueError("prices must be nonnegative")


def ray_array_cost(params: CostParams) -> float:
    """N_RF * N switches + N * M antenna elements."""
    return params.n_rf * params.N * params.p_switch + params.N * params.M * params.p_antenna


def ula_cost(params: CostParams) -> float:
    """N_RF * M phase shifters + M antenna elements."""
    return params.n_rf * params.M * params.p_phase_shifter + params.M * params.p_antenna
