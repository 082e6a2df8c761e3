"""Gauged discrete-time quantum walks on periodic 1D and 2D lattices.

The package provides the walk kernels with synthetic U(1) gauge phases, the
exact lattice gauge machinery (phase sampling, gauge transformations,
discrete derivatives, field tensor), conserved lattice currents with their
continuity residual, a spectral reference solver for the continuum spinor
equation, an expression parser for configuring fields, and a command-line
harness (``gaugewalk simulate|check|converge``).
"""

from .errors import (
    ContractError,
    DomainError,
    EvalError,
    GaugewalkError,
    ParseError,
    SamplingError,
    SolverInstabilityError,
    StencilConsistencyError,
    ValidationError,
)
from .lattice import (
    COIN_L,
    COIN_R,
    CoinOperator,
    LatticeGeom,
    WalkerState,
    apply_coin,
    coin_matrix,
    gaussian_packet,
    normalized,
    point_source,
    state_norm,
)
from .gauge import (
    FieldTensor,
    GaugeFunction,
    GaugePhases,
    PotentialSpec,
    covariant_samples,
    discrete_derivative,
    field_tensor,
    field_tensor_from_samples,
    gauge_transform,
    pure_gauge_deviation,
    sample_phases,
    sigma_delta,
    tensor_invariance_deviation,
)
from .evolution import (
    WalkParams1D,
    WalkParams2D,
    evolve,
    gauged_shift_1d,
    step_1d,
    step_2d,
    substep_2d,
)
from .observables import (
    ContinuityReport,
    CurrentField,
    MSet,
    continuity_residual,
    current_1d,
    current_x,
    current_y,
    m_set,
    measure_currents,
    probability_density,
    single_step_probability_drift,
    symmetric_difference,
)
from .dirac import (
    ConvergenceCase,
    ConvergenceResult,
    DiracConfig,
    SpinorField,
    continuum_current,
    convergence_study,
    current_divergence,
    dirac_step,
    evolve_dirac,
    gamma_set,
)
from . import fieldexpr

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
