"""Statevector sandbox for quantum-walk block encodings of sparse Hermitian
matrices.

The package builds, at the operator level, the doubled-space isometry and
walk unitary whose powers realize Chebyshev polynomials of A/s in a
post-selectable block, and layers on top of it: single-step matrix
application, two trace-estimation routes, trace of a product, two Frobenius
norm routes, and a dominant-eigenvalue power method.  Every estimator runs
either in exact mode or with seeded shot sampling, and carries its exact
value for cross-checking at desk scale.
"""

from .estimators import (
    DEFAULT_SEED,
    NormalizationRecord,
    ShotEstimate,
    frobenius_mixed_state,
    frobenius_via_product,
    hadamard_test,
    projected_hadamard_test,
    swap_test,
    trace_entangled,
    trace_product,
    trace_relocation,
)
from .instances import diagonal_matrix, gapped_dominant_instance, random_hermitian_instance
from .matrix_apply import ApplicationResult, apply_chebyshev, apply_matrix, sample_application
from .power_method import PowerIterate, PowerIterationTrace, estimate_rayleigh, power_iterate
from .sparse_oracle import (
    MatrixFormatError,
    RelocatedMatrix,
    SparseHermitianMatrix,
    from_entries,
    load_matrix,
    relocate_diagonal,
    relocation_map,
    write_qmat,
)
from .states import (
    StateFormatError,
    StateVector,
    basis_state,
    load_state,
    save_state,
    uniform_state,
    vdot,
)
from .walk_engine import (
    InvariantCheck,
    WalkEncodingError,
    WalkOperator,
    WalkSpace,
    block_encoding_output,
    build_psi_state,
    build_walk_operator,
    chebyshev_block_apply,
    chebyshev_image_matrix,
    entry_amplitude,
    walk_invariant_checks,
)

__version__ = "0.1.0"
