"""Single-step matrix application: prepare, block-apply, post-select.

The order-1 block encoding realizes A/s exactly on the ancilla-zero block, so
post-selecting that block applies A to the input and succeeds with
probability ||A b||^2 / s^2.  Amplitude amplification is accounted
analytically: boosting the success to near unity costs an expected
s / ||A b|| repetitions of the circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sparse_oracle import SparseHermitianMatrix
from .states import StateVector
from .walk_engine import chebyshev_block_apply

_ZERO_PROBABILITY = 1e-28


@dataclass(frozen=True)
class ApplicationResult:
    """Post-selected output of one block application.

    ``output_state`` is None exactly when the success probability is zero
    (input in the kernel), a distinguished outcome rather than an error.
    """

    output_state: StateVector | None
    success_probability: float
    garbage_norm: float
    expected_amplification_rounds: float
    applied_order: int

    @property
    def succeeded(self) -> bool:
        return self.output_state is not None


def apply_chebyshev(
    matrix: SparseHermitianMatrix, state: StateVector, order: int
) -> ApplicationResult:
    """Post-selected application of T_order(A/s); order=1 applies A itself."""
    projected, garbage = chebyshev_block_apply(matrix, order, state)
    amp = float(np.linalg.norm(projected.data))
    prob = amp * amp
    if prob < _ZERO_PROBABILITY:
        return ApplicationResult(
            output_state=None,
            success_probability=0.0,
            garbage_norm=garbage,
            expected_amplification_rounds=math.inf,
            applied_order=order,
        )
    return ApplicationResult(
        output_state=StateVector(projected.data / amp, projected.layout),
        success_probability=prob,
        garbage_norm=garbage,
        expected_amplification_rounds=1.0 / amp,
        applied_order=order,
    )


def apply_matrix(matrix: SparseHermitianMatrix, state: StateVector) -> ApplicationResult:
    """Prepare A|b>/||A|b>|| with success probability ||A|b>||^2/s^2."""
    return apply_chebyshev(matrix, state, order=1)


def sample_application(
    matrix: SparseHermitianMatrix, state: StateVector, shots: int, seed: int
) -> tuple[int, StateVector | None]:
    """Simulate post-selection statistics: successes ~ Binomial(shots, p).

    The conditional (post-selected) state is identical to the apply_matrix
    output; it is None when the success probability is zero.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    result = apply_matrix(matrix, state)
    rng = np.random.default_rng(seed)
    successes = int(rng.binomial(shots, min(result.success_probability, 1.0)))
    return successes, result.output_state
