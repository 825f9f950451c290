"""Dominant-eigenvalue power method driven by block application.

Each step replaces x_k by A x_k / ||A x_k|| through the post-selected block
encoding, and the eigenvalue readout is the Rayleigh quotient <x_k|A|x_k>,
which a single interference test per iteration can estimate (the garbage
branch is orthogonal to the reference state, so the unprojected test is
unbiased).  Iterations are inherently sequential; independent runs with
different seeds or starting states may execute concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import DEFAULT_SEED, NormalizationRecord, ShotEstimate, hadamard_test
from .matrix_apply import apply_matrix
from .sparse_oracle import SparseHermitianMatrix
from .states import StateVector
from .walk_engine import chebyshev_image_matrix


@dataclass(frozen=True)
class PowerIterate:
    step: int
    state: StateVector
    norm_ratio: float          # ||A x_k|| (states are unit norm)
    rayleigh: float            # <x_k|A|x_k>
    cumulative_success: float  # prod over previous steps of ||A x_j||^2 / s^2


@dataclass(frozen=True)
class PowerIterationTrace:
    iterates: tuple[PowerIterate, ...]
    converged_at: int | None
    eigenvalue_estimate: float
    flags: tuple[str, ...] = ()

    @property
    def magnitude_estimate(self) -> float:
        return abs(self.eigenvalue_estimate)


def _rayleigh(matrix: SparseHermitianMatrix, vec: np.ndarray) -> float:
    image = chebyshev_image_matrix(matrix, 1)
    return float(np.vdot(vec, image @ vec).real) * matrix.sparsity


def power_iterate(
    matrix: SparseHermitianMatrix,
    x0: StateVector,
    max_k: int = 60,
    tol: float = 1e-6,
) -> PowerIterationTrace:
    """Iterate x_{k+1} = A x_k/||A x_k|| until the Rayleigh quotient settles.

    Stops at the first k with |rho_k - rho_{k-1}| < tol.  A sign-alternating
    dominant pair never settles; that case is flagged as stagnation when the
    Rayleigh sequence oscillates with stable period two, and |rho| is then the
    magnitude estimate.  A kernel input (||A x_k|| = 0) raises ValueError.
    """
    if max_k < 1:
        raise ValueError(f"max_k must be >= 1, got {max_k}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x0.require_unit()

    s = matrix.sparsity
    state = x0
    iterates = [
        PowerIterate(0, state, s * _step_norm(matrix, state), _rayleigh(matrix, state.data), 1.0)
    ]
    flags: list[str] = []
    converged_at = None
    alternating = True

    for k in range(1, max_k + 1):
        result = apply_matrix(matrix, state)
        if not result.succeeded:
            raise ValueError(f"||A x_{k-1}|| = 0: starting state lies in the kernel")
        new_state = result.output_state
        overlap = float(np.vdot(new_state.data, state.data).real)
        alternating = alternating and overlap < 0.0
        state = new_state
        rho = _rayleigh(matrix, state.data)
        cumulative = iterates[-1].cumulative_success * result.success_probability
        iterates.append(
            PowerIterate(k, state, s * _step_norm(matrix, state), rho, cumulative)
        )
        if abs(rho - iterates[-2].rayleigh) < tol:
            converged_at = k
            break

    rhos = [it.rayleigh for it in iterates]
    estimate = rhos[-1]
    if converged_at is None:
        flags.append("max_iterations_reached")
        if len(rhos) >= 3 and abs(rhos[-1] - rhos[-3]) < tol <= abs(rhos[-1] - rhos[-2]):
            flags.append("stagnation_oscillating_ratios")
    if alternating and len(iterates) > 1:
        # iterates flip sign each step: dominant eigenvalue is negative, or a
        # +/- pair dominates; the signed Rayleigh estimate stands, magnitude
        # is available via magnitude_estimate
        flags.append("sign_alternating_iterates")

    return PowerIterationTrace(
        iterates=tuple(iterates),
        converged_at=converged_at,
        eigenvalue_estimate=estimate,
        flags=tuple(flags),
    )


def _step_norm(matrix: SparseHermitianMatrix, state: StateVector) -> float:
    image = chebyshev_image_matrix(matrix, 1)
    return float(np.linalg.norm(image @ state.data))


def estimate_rayleigh(
    matrix: SparseHermitianMatrix,
    state: StateVector,
    shots: int = 0,
    seed: int = DEFAULT_SEED,
) -> ShotEstimate:
    """<x|A|x> via the overlap of |0^m>|x> with the block-applied state,
    rescaled by s; garbage orthogonality keeps the unprojected test unbiased."""
    state.require_unit()
    n = matrix.dimension
    if state.dim != n:
        raise ValueError(f"state dimension {state.dim} != matrix dimension {n}")
    image = chebyshev_image_matrix(matrix, 1)
    applied = image @ state.data
    record = NormalizationRecord(f"s = {matrix.sparsity}", float(matrix.sparsity))
    if shots == 0:
        raw = complex(np.vdot(state.data, applied))
        scaled = raw * record.factor
        return ShotEstimate(
            scaled.real, scaled.imag, 0, 0.0, seed, record, scaled
        )
    g = math.sqrt(max(0.0, 1.0 - float(np.linalg.norm(applied)) ** 2))
    layout = (("flag", 2), ("index", n))
    phi1 = np.zeros((2, n), dtype=np.complex128)
    phi1[0] = applied
    phi1[1] = g * state.data
    phi2 = np.zeros((2, n), dtype=np.complex128)
    phi2[0] = state.data
    sub = hadamard_test(
        StateVector(phi1.reshape(-1), layout),
        StateVector(phi2.reshape(-1), layout),
        shots, seed, "real",
    )
    return ShotEstimate(
        sub.estimate_real * record.factor,
        0.0,
        shots,
        sub.standard_error * record.factor,
        seed,
        record,
        complex(sub.exact_value.real * record.factor),
    )
