"""Bright multiphoton GHZ states of a three-beam parametric source.

Resummed photon statistics, polarization Stokes correlations, a
Mermin-type Bell test with and without detector loss, and two
entanglement witnesses, all driven by the same divergent emission
series tamed with diagonal Pade approximants.
"""

from brightghz.series_core import (
    FormalSeries,
    RecurrenceTable,
    build_p_table,
    c_series,
    ladder_coefficient,
    p_explicit,
)
from brightghz.pade import (
    DiagonalResummer,
    PadeApproximant,
    PoleProximityError,
    ResummationResult,
    build_pade,
    diagonal_resum,
    evaluate,
)
from brightghz.state import (
    CUTOFF_CAP,
    DEFAULT_POLICY,
    BGHZState,
    BrightStateSpec,
    NumericPolicy,
    ResummationError,
    TripleDistribution,
    build_bghz,
    dump_distribution_csv,
    dump_state_csv,
    photon_distribution,
    project_out_vacuum,
    resummed_coefficient,
)
from brightghz.stokes import (
    CorrelationTensor,
    JointFockState,
    MeasurementBasis,
    basis,
    dump_tensor_csv,
    joint_from_bghz,
    rotate_party,
    stokes_expectation,
    tensor_t,
)
from brightghz.nonclassicality import (
    LossModel,
    MerminEvaluation,
    SweepResult,
    WitnessEvaluation,
    dump_sweep_csv,
    eta_threshold,
    eta_threshold_sweep,
    evaluate_mermin,
    evaluate_w2,
    find_crossing,
    gamma_threshold,
    lossy_mermin_lhs,
    mermin_lhs,
    mermin_sweep,
    per_party_loss_factor,
    witness_sweep,
    witness_w1,
    witness_w2,
)

__all__ = [
    "FormalSeries",
    "RecurrenceTable",
    "build_p_table",
    "c_series",
    "ladder_coefficient",
    "p_explicit",
    "DiagonalResummer",
    "PadeApproximant",
    "PoleProximityError",
    "ResummationResult",
    "build_pade",
    "diagonal_resum",
    "evaluate",
    "CUTOFF_CAP",
    "DEFAULT_POLICY",
    "BGHZState",
    "BrightStateSpec",
    "NumericPolicy",
    "ResummationError",
    "TripleDistribution",
    "build_bghz",
    "dump_distribution_csv",
    "dump_state_csv",
    "photon_distribution",
    "project_out_vacuum",
    "resummed_coefficient",
    "CorrelationTensor",
    "JointFockState",
    "MeasurementBasis",
    "basis",
    "dump_tensor_csv",
    "joint_from_bghz",
    "rotate_party",
    "stokes_expectation",
    "tensor_t",
    "LossModel",
    "MerminEvaluation",
    "SweepResult",
    "WitnessEvaluation",
    "dump_sweep_csv",
    "eta_threshold",
    "eta_threshold_sweep",
    "evaluate_mermin",
    "evaluate_w2",
    "find_crossing",
    "gamma_threshold",
    "lossy_mermin_lhs",
    "mermin_lhs",
    "mermin_sweep",
    "per_party_loss_factor",
    "witness_sweep",
    "witness_w1",
    "witness_w2",
]

__version__ = "0.1.0"
