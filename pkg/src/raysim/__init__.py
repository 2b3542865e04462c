"""Ray antenna array link-level simulator.

Covers the array geometry and beam-pattern math, parametric element patterns
with coverage sufficiency rules, clustered multipath channel generation,
uplink greedy ray selection with MMSE combining, downlink max-min SINR
optimization, the DFT-codebook ULA baseline, and a hardware cost model, plus
an experiment runner exposed through the ``raysim`` command line tool.
"""

from .channel import (
    ChannelRealization,
    PathSet,
    ScenarioParams,
    effective_ray_channel,
    elementwise_channel,
    path_rng,
    read_channel_dump,
    realize_channels,
    sample_paths,
    splitter_contraction,
    ula_channel,
    write_channel_dump,
)
from .cost import CostParams, ray_array_cost, ula_cost
from .coverage import ray_pattern_sufficient, ula_pattern_sufficient, verify_coverage
from .downlink import (
    DownlinkProblem,
    MaxMinResult,
    alternating_optimize,
    bisection_max_min,
    dl_single_user,
    dl_sinr,
    dl_sinr_all,
    exhaustive_selection_max_min,
    feasibility_oracle,
)
from .geometry import (
    PortResponse,
    RayArrayConfig,
    UlaCodebook,
    best_beam,
    design_ray_array,
    dft_codebook,
    dirichlet_kernel,
    nearest_codeword_index,
    nearest_ray_index,
    ray_beamwidth,
    ray_nulls,
    ray_response_matrix,
    ray_responses,
    ray_spacing,
    subarray_steering,
    ula_beam_pattern,
    ula_beamwidth,
    ula_steering,
)
from .pattern import (
    DesignThreshold,
    ElementPattern,
    peak_gain_from_power,
    total_power_gain,
    wrap_angle,
)
from .uplink import (
    RaySelection,
    UplinkResult,
    exhaustive_ray_selection,
    greedy_ray_selection,
    mmse_combiners,
    mrc_combiners,
    project_onto_codebook,
    select_strongest,
    single_user_select_and_mrc,
    sum_rate,
    uplink_sinr,
)

__version__ = "0.1.0"
