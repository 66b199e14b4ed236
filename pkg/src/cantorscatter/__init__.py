"""Quantum transmission through generalized Cantor (UCP) potentials."""

__version__ = "0.1.0"

from .errors import (
    DegenerateEnergy,
    DomainError,
    InsufficientPoints,
    InvalidSpec,
    LayoutTooLarge,
    NonPhysicalMatrix,
)
from .geometry import (
    PotentialSpec,
    SegmentLayout,
    StageMetrics,
    build_layout,
    check_spec,
    gap_width,
    q_pochhammer,
    segment_width,
    stage_metrics,
    super_period,
    validate_spec,
)
from .fractal import Descriptors, fractal_dimension, fractal_dimension_alt, lacunarity_parameters, ucp_epsilon
from .scattering import (
    TransferMatrix,
    WaveContext,
    barrier_matrix,
    brute_force_transmission,
    compose_layout,
    propagation_matrix,
    sigma_pm,
    transmission_from_matrix,
)
from .spp import (
    BlochArgs,
    area_preserving_height,
    bloch_args,
    chebyshev_u,
    chi1,
    chi2,
    laue,
    log10_transmission,
    reflection_asymptotic,
    reflection_closed_form,
    scaling_function,
    transmission_closed_form,
)
from .analysis import (
    GridTable,
    SweepTable,
    find_resonances,
    k_sweep,
    rho_k_grid,
    saturation_metric,
    scaling_fit,
)
