"""Quantum carpets in a 1-D box cavity.

Spectral decomposition of localized input signals, closed-form evolution and
carpet rendering, an effective Markovian coherence-damping model, Bohmian
streamline integration, and energy-domain purity analysis.
"""

from .config import (
    FitSpec,
    GridSpec,
    OutputSpec,
    RunConfig,
    SweepSpec,
    apply_overrides,
    parse_config,
    parse_config_file,
    serialize_config,
)
from .decoherence import (
    DEFAULT_GAMMA,
    DecoherenceParams,
    DensityMatrixGrid,
    asymptotic_density,
    damping_factor,
    beta,
    decohered_density,
    density_matrix,
    density_matrix_grid,
    localization_rate,
)
from .energy import (
    PurityCurve,
    PurityFit,
    SweepRow,
    correlation_matrix,
    decay_time_map,
    fit_purity,
    purity,
    purity_asymptote,
    purity_curve,
    purity_via_quadrature,
    sweep_x0,
)
from .errors import CarpetError, ConfigError, DomainError, FitFailure, NodeProximityError
from .evolution import (
    CarpetGrid,
    RevivalTimes,
    SpaceTimeGrid,
    carpet,
    frequency,
    probability_density,
    revival_times,
    wavefunction,
)
from .flow import (
    EnsembleSpec,
    NoncrossingReport,
    Trajectory,
    ensemble_seeds,
    integrate_ensemble,
    integrate_trajectory,
    noncrossing_check,
    velocity,
    velocity_map,
)
from .heatmap import DIVERGING, SEQUENTIAL, ColorMap, render_heatmap
from .products import build_state, run
from .quadrature import simpson_integral, simpson_weights
from .spectral import (
    CavityConfig,
    InputSignalSpec,
    Mode,
    SpectralState,
    decompose,
    decompose_double,
    decompose_numeric,
    decompose_single,
    eigenenergy,
    eigenmode,
    input_signal,
    mode,
    mode_values,
    mode_slopes,
    norm_deficit,
    oracle_grid,
)

__version__ = "0.1.0"
