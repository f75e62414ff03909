"""Discrimination of QAM coherent states: detection bounds and an
adaptive displacement-feedback receiver simulator.

The library computes the heterodyne standard quantum limit, the
square-root-measurement error rate and the Helstrom limit for rectangular
QAM signal sets, and estimates the symbol error rate of a sliced
displacement/photon-counting receiver with Bayesian feedback under
realistic device imperfections (detector efficiency, dark counts,
beam-splitter transmittance, mode mismatch).
"""

__version__ = "0.1.0"

from .constellation import (
    DEFAULT_EPSILON,
    Constellation,
    alpha_for_ns,
    coherent_overlap,
    density_matrix,
    fock_vector,
    mean_photon_number,
    qam_points,
    truncation_dim,
)
from .bounds import (
    GramDecomposition,
    HelstromConvergenceError,
    HelstromSolution,
    NumericalPSDError,
    gram_matrix,
    helstrom_error_rate,
    sql_error_rate,
    sqrt_gram,
    srm_confusion,
    srm_error_rate,
)
from .receiver import (
    SATURATED,
    CountOutcome,
    CountPmf,
    DegenerateEvidenceError,
    DetectorModel,
    ReceiverParams,
    TrialState,
    bayes_update,
    count_pmf,
    displaced_intensity,
    hypothesis_means,
    likelihoods,
    local_field,
    map_decision,
    sample_count,
    simulate_trial,
    slice_amplitude,
    trial_trace,
)
from .montecarlo import (
    CHUNK_TRIALS,
    PathBudgetError,
    SerEstimate,
    SweepRow,
    SweepSpec,
    detector_from_token,
    estimate_ser,
    exact_ser,
    figure_preset,
    run_sweep,
)

__all__ = [
    "DEFAULT_EPSILON",
    "Constellation",
    "alpha_for_ns",
    "coherent_overlap",
    "density_matrix",
    "fock_vector",
    "mean_photon_number",
    "qam_points",
    "truncation_dim",
    "GramDecomposition",
    "HelstromConvergenceError",
    "HelstromSolution",
    "NumericalPSDError",
    "gram_matrix",
    "helstrom_error_rate",
    "sql_error_rate",
    "sqrt_gram",
    "srm_confusion",
    "srm_error_rate",
    "SATURATED",
    "CountOutcome",
    "CountPmf",
    "DegenerateEvidenceError",
    "DetectorModel",
    "ReceiverParams",
    "TrialState",
    "bayes_update",
    "count_pmf",
    "displaced_intensity",
    "hypothesis_means",
    "likelihoods",
    "local_field",
    "map_decision",
    "sample_count",
    "simulate_trial",
    "slice_amplitude",
    "trial_trace",
    "CHUNK_TRIALS",
    "PathBudgetError",
    "SerEstimate",
    "SweepRow",
    "SweepSpec",
    "detector_from_token",
    "estimate_ser",
    "exact_ser",
    "figure_preset",
    "run_sweep",
]
