"""Uhlmann and interferometric geometric phases of thermal spin-j states."""

from .errors import (
    CriticalPointError,
    GeomPhaseError,
    InvalidSpecError,
    NumericalError,
    PoleError,
    RankFloorError,
    TransportViolationError,
    UnsupportedError,
)
from .igp import (
    EvolutionSpec,
    TransportReport,
    critical_theta_one_axis,
    igp_css_closed,
    igp_numeric,
    igp_one_axis_closed,
    igp_one_axis_spectral,
    igp_two_axis_closed,
    total_phase,
    transport_report,
)
from .phase import phase_distance, to_unit_circle_range, wrap_phase
from .scan import JumpEvent, PhaseGrid, PhaseScan, SweepSpec, export, find_critical, grid, sweep, to_csv, to_json
from .spin import SpinJ, SpinOperatorSet, build_spin_operators, matrix_exponential
from .states import (
    SpherePoint,
    ThermalState,
    displacement_operator,
    one_axis_squeeze,
    partition_function,
    thermal_state,
    tilde_S,
    two_axis_squeeze,
)
from .uhlmann import (
    HolonomyResult,
    ParameterPath,
    berry_phase_css,
    chi_nearest,
    chi_skip2,
    holonomy,
    uhlmann_css,
    uhlmann_one_axis,
    uhlmann_phase_css_equator_closed,
    uhlmann_two_axis,
)

__version__ = "0.1.0"
