"""Silicon band structure from a simulated hybrid quantum-classical solver.

Pipeline: tight-binding Bloch Hamiltonian -> Pauli spectral decomposition ->
variational ground-state search -> identity shift + iterative deflation for
the excited states, on either an exact statevector backend or a shot-sampling
backend with readout noise and mitigation.
"""

__version__ = "0.1.0"

from .pauli import (
    SpectralDecomposition,
    decompose,
    deflate,
    gershgorin_upper_bound,
    pauli_words,
    reconstruct,
    shift_identity,
    word_matrix,
)
from .qsim import (
    MEAN_FIELD,
    THREE_QUBIT,
    Ansatz,
    ansatz_for,
    apply_circuit,
    apply_gate,
    exact_expectation,
    exact_pauli_expectations,
    prepare_meanfield,
    prepare_three_qubit,
    zero_state,
)
from .sampler import (
    BitstringCounts,
    MeasurementBasisChange,
    ReadoutNoiseModel,
    basis_change,
    estimate_transition_rates,
    expectation_from_counts,
    mitigate_counts,
    mitigate_single,
    sample,
    sampled_expectation,
)
from .tightbinding import (
    KPath,
    KPoint,
    TBParameters,
    build_full_hamiltonian,
    build_s_block,
    diagonalize_classical,
    make_kpath,
    pad_to_power_of_two,
)
from .vqe import (
    ExactBackend,
    GridScan,
    OptimizerConfig,
    ShotsBackend,
    SpectrumResult,
    VQEResult,
    ZeroCaptureError,
    full_spectrum,
    grid_scan,
    minimize,
    optimize_direct,
    optimize_quasinewton,
)
