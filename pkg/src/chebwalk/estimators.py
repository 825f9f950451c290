"""Overlap-test primitives and the estimation protocols built on them.

Shot model
----------
Measurement statistics are sampled analytically: each run draws a binomial
count at the exact Bernoulli parameter of the corresponding circuit, which is
statistically identical to simulating individual shots.  ``shots = 0`` means
exact mode: the estimator returns the analytically computed value with zero
standard error.  Reported standard errors use the smoothed frequency
(k + 1/2)/(n + 1) inside the binomial variance so they stay positive at the
boundary outcomes.

Where an estimator targets a complex quantity, its real and imaginary parts
are estimated from disjoint halves of the shot budget, each through its own
interference-test run.

Compact garbage representation
------------------------------
The post-selected statistics of every protocol depend only on the
ancilla-zero block of the block-encoded states plus the total garbage weight
per branch, never on the garbage amplitudes themselves.  Estimators therefore
build two-branch stand-in states: a "flag 0" branch holding the exact
ancilla-zero component and a "flag 1" branch lumping the garbage weight into
a single orthogonal direction.  All overlaps with reference states (which
live entirely in the flag-0 subspace) and all post-selection probabilities
are identical to the full walk-space states.  Full states with genuine
garbage amplitudes are available from ``walk_engine.block_encoding_output``
for diagnostics.

Estimators are pure functions of (inputs, seed); sub-runs derive their
generators from a spawned seed sequence, so concurrent calls are reproducible
and independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sparse_oracle import SparseHermitianMatrix, RelocatedMatrix, relocate_diagonal
from .states import StateVector, vdot
from .walk_engine import chebyshev_image_matrix
import functools

DEFAULT_SEED = 1729

_PARTS = ("real", "imag")


@dataclass(frozen=True)
class NormalizationRecord:
    """Divisor chain between the raw circuit quantity and the reported estimate.

    ``kind == "linear"``: estimate = raw * factor (raw is an overlap).
    ``kind == "sqrt"``:   estimate = sqrt(raw * factor) (raw is a probability).
    """

    description: str
    factor: float
    kind: str = "linear"

    def recover_raw(self, estimate: complex) -> complex:
        if self.kind == "linear":
            return estimate / self.factor
        if self.kind == "sqrt":
            return estimate * estimate / self.factor
        raise ValueError(f"unknown normalization kind {self.kind!r}")


_IDENTITY_RECORD = NormalizationRecord("raw overlap", 1.0)


@dataclass(frozen=True)
class ShotEstimate:
    """Estimated value with its shot accounting.

    ``standard_error`` is the 1-sigma uncertainty of each reported component;
    when both parts are estimated it is the larger of the two.  In exact mode
    (shots = 0) the estimate equals ``exact_value`` bit for bit and the
    standard error is zero.
    """

    estimate_real: float
    estimate_imag: float
    shots: int
    standard_error: float
    seed: int
    normalization: NormalizationRecord
    exact_value: complex | None = None
    flags: tuple[str, ...] = ()

    @property
    def estimate(self) -> complex:
        return complex(self.estimate_real, self.estimate_imag)

    @property
    def magnitude(self) -> float:
        return abs(self.estimate)


def _part_value(value: complex, part: str) -> float:
    if part == "real":
        return value.real
    if part == "imag":
        return value.imag
    raise ValueError(f"part must be 'real' or 'imag', got {part!r}")


def _binomial_fraction(rng, probability: float, shots: int) -> tuple[float, float, float]:
    """Sample k ~ Bin(shots, p); return (k/shots, smoothed fraction, stderr)."""
    p = min(max(probability, 0.0), 1.0)
    k = int(rng.binomial(shots, p))
    p_hat = k / shots
    p_smooth = (k + 0.5) / (shots + 1.0)
    return p_hat, p_smooth, math.sqrt(p_smooth * (1.0 - p_smooth) / shots)


def _check_pair(phi1: StateVector, phi2: StateVector) -> None:
    if phi1.layout != phi2.layout:
        raise ValueError(
            f"register layouts differ: {phi1.layout} vs {phi2.layout}"
        )
    phi1.require_unit()
    phi2.require_unit()


def hadamard_test(
    phi1: StateVector,
    phi2: StateVector,
    shots: int = 0,
    seed: int = DEFAULT_SEED,
    part: str = "real",
) -> ShotEstimate:
    """Estimate Re or Im of <phi2|phi1> from single-control interference runs.

    The control measures 0 with probability (1 + x)/2 where x is the targeted
    part of the overlap; the estimate inverts the sampled frequency.
    """
    _check_pair(phi1, phi2)
    target = _part_value(vdot(phi2, phi1), part)
    if shots == 0:
        return ShotEstimate(target, 0.0, 0, 0.0, seed, _IDENTITY_RECORD, complex(target))
    if shots < 1:
        raise ValueError(f"shots must be >= 0, got {shots}")
    rng = np.random.default_rng(seed)
    p_hat, _, se_p = _binomial_fraction(rng, (1.0 + target) / 2.0, shots)
    return ShotEstimate(
        2.0 * p_hat - 1.0, 0.0, shots, 2.0 * se_p, seed, _IDENTITY_RECORD,
        complex(target),
    )


def swap_test(
    phi1: StateVector,
    phi2: StateVector,
    shots: int = 0,
    seed: int = DEFAULT_SEED,
) -> ShotEstimate:
    """Estimate |<phi1|phi2>|^2; control reads 0 with probability (1+|ov|^2)/2."""
    _check_pair(phi1, phi2)
    target = abs(vdot(phi2, phi1)) ** 2
    if shots == 0:
        return ShotEstimate(target, 0.0, 0, 0.0, seed, _IDENTITY_RECORD, complex(target))
    rng = np.random.default_rng(seed)
    p_hat, _, se_p = _binomial_fraction(rng, (1.0 + target) / 2.0, shots)
    return ShotEstimate(
        2.0 * p_hat - 1.0, 0.0, shots, 2.0 * se_p, seed, _IDENTITY_RECORD,
        complex(target),
    )


def projected_hadamard_test(
    phi1: StateVector,
    phi2: StateVector,
    project: tuple[str, ...],
    shots: int = 0,
    seed: int = DEFAULT_SEED,
    part: str = "real",
) -> ShotEstimate:
    """Estimate Re or Im of <P phi2|P phi1> with P post-selecting blocks on zero.

    Shot mode uses three runs with an even budget split: the joint run
    measures q = (||P phi1||^2 + ||P phi2||^2 + 2x)/4 where x is the target,
    and two auxiliary post-selection runs estimate the projected norms, giving
    the unbiased inversion x = 2q - (n1 + n2)/2.
    """
    _check_pair(phi1, phi2)
    proj1 = phi1.project_zero(project)
    proj2 = phi2.project_zero(project)
    n1 = float(np.vdot(proj1.data, proj1.data).real)
    n2 = float(np.vdot(proj2.data, proj2.data).real)
    target = _part_value(vdot(proj2, proj1), part)
    if shots == 0:
        return ShotEstimate(target, 0.0, 0, 0.0, seed, _IDENTITY_RECORD, complex(target))
    if shots < 3:
        raise ValueError(f"shot mode splits the budget over three runs; need >= 3, got {shots}")
    aux = shots // 3
    joint = shots - 2 * aux
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rngs = [np.random.default_rng(s) for s in ss.spawn(3)]
    q_hat, _, se_q = _binomial_fraction(rngs[0], (n1 + n2 + 2.0 * target) / 4.0, joint)
    n1_hat, _, se_1 = _binomial_fraction(rngs[1], n1, aux)
    n2_hat, _, se_2 = _binomial_fraction(rngs[2], n2, aux)
    estimate = 2.0 * q_hat - (n1_hat + n2_hat) / 2.0
    stderr = math.sqrt(4.0 * se_q**2 + (se_1**2 + se_2**2) / 4.0)
    return ShotEstimate(
        estimate, 0.0, shots, stderr, seed, _IDENTITY_RECORD, complex(target)
    )


# ---------------------------------------------------------------------------
# protocol plumbing

@functools.lru_cache(maxsize=8)
def _cached_relocation(matrix: SparseHermitianMatrix) -> RelocatedMatrix:
    return relocate_diagonal(matrix)


def _garbage_weights(image: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(0.0, 1.0 - np.linalg.norm(image, axis=0) ** 2))


def _dual_part_estimate(run, shots: int, seed: int, record: NormalizationRecord,
                        flags: tuple[str, ...] = ()) -> ShotEstimate:
    """Combine two primitive runs (one per part) into a complex estimate.

    ``run(part, part_shots, part_seed)`` must return a primitive ShotEstimate
    in raw overlap units; the result is rescaled by ``record.factor``.
    """
    exact = complex(run("real", 0, seed).exact_value.real,
                    run("imag", 0, seed).exact_value.real)
    if shots == 0:
        scaled = exact * record.factor
        return ShotEstimate(
            scaled.real, scaled.imag, 0, 0.0, seed, record, scaled, flags
        )
    seeds = np.random.SeedSequence(seed).spawn(2)
    re = run("real", shots // 2, seeds[0])
    im = run("imag", shots - shots // 2, seeds[1])
    return ShotEstimate(
        re.estimate_real * record.factor,
        im.estimate_real * record.factor,
        shots,
        max(re.standard_error, im.standard_error) * record.factor,
        seed,
        record,
        exact * record.factor,
        flags,
    )


def trace_relocation(
    matrix: SparseHermitianMatrix, shots: int = 0, seed: int = DEFAULT_SEED
) -> ShotEstimate:
    """Tr(A) via the diagonal relocation: block-apply the dilated relocated
    matrix to the basis state selecting column 0 of A', then take the overlap
    with the uniform state; the raw overlap is Tr(A)/(s' sqrt(N)).
    """
    rel = _cached_relocation(matrix)
    n = matrix.dimension
    dil = rel.dilation
    s_prime = rel.dilated_sparsity
    image = chebyshev_image_matrix(dil, 1)[:, n]  # (H/s') applied to |e_N>
    g = math.sqrt(max(0.0, 1.0 - float(np.linalg.norm(image)) ** 2))

    layout = (("flag", 2), ("image", 2 * n))
    phi1 = np.zeros((2, 2 * n), dtype=np.complex128)
    phi1[0] = image
    phi1[1, n] = g
    phi2 = np.zeros((2, 2 * n), dtype=np.complex128)
    phi2[0, :n] = 1.0 / math.sqrt(n)
    state1 = StateVector(phi1.reshape(-1), layout)
    state2 = StateVector(phi2.reshape(-1), layout)

    record = NormalizationRecord(
        f"s'*sqrt(N) with s'={s_prime}, N={n}", s_prime * math.sqrt(n)
    )
    return _dual_part_estimate(
        lambda part, k, s: hadamard_test(state1, state2, k, s, part),
        shots, seed, record,
    )


def trace_entangled(
    matrix: SparseHermitianMatrix, shots: int = 0, seed: int = DEFAULT_SEED
) -> ShotEstimate:
    """Tr(A) without relocation: block-apply A to one half of the maximally
    entangled state and overlap with the unapplied copy; the raw overlap is
    Tr(A)/(s N).  The reference state lies in the ancilla-zero subspace and
    garbage is orthogonal to it, so the plain (unprojected) test is unbiased.
    """
    n = matrix.dimension
    image = chebyshev_image_matrix(matrix, 1)  # A/s, column i = (A/s)|i>
    g = _garbage_weights(image)
    scale = 1.0 / math.sqrt(n)

    layout = (("flag", 2), ("image", n), ("copy", n))
    phi1 = np.zeros((2, n, n), dtype=np.complex128)
    phi1[0] = image * scale
    phi1[1, np.arange(n), np.arange(n)] = g * scale
    phi2 = np.zeros((2, n, n), dtype=np.complex128)
    phi2[0, np.arange(n), np.arange(n)] = scale
    state1 = StateVector(phi1.reshape(-1), layout)
    state2 = StateVector(phi2.reshape(-1), layout)

    record = NormalizationRecord(
        f"s*N with s={matrix.sparsity}, N={n}", matrix.sparsity * n
    )
    return _dual_part_estimate(
        lambda part, k, s: hadamard_test(state1, state2, k, s, part),
        shots, seed, record,
    )


def _product_state(matrix: SparseHermitianMatrix) -> StateVector:
    """(1/sqrt(N)) sum_i |i>(|0^m>(A/s)|i> + |G_i>) in compact two-branch form."""
    n = matrix.dimension
    image = chebyshev_image_matrix(matrix, 1)
    g = _garbage_weights(image)
    scale = 1.0 / math.sqrt(n)
    data = np.zeros((n, 2, n), dtype=np.complex128)
    data[:, 0, :] = image.T * scale  # data[i, 0, r] = (A/s)[r, i]/sqrt(N)
    data[np.arange(n), 1, np.arange(n)] = g * scale
    return StateVector(data.reshape(-1), (("copy", n), ("flag", 2), ("image", n)))


def trace_product(
    a: SparseHermitianMatrix,
    b: SparseHermitianMatrix,
    shots: int = 0,
    seed: int = DEFAULT_SEED,
) -> ShotEstimate:
    """Tr(A B) from the projected overlap of two block-applied entangled states.

    The raw projected overlap is Tr(AB)/(N s_A s_B).  Projection onto the
    ancilla-zero block is mandatory here: the unprojected overlap picks up
    garbage cross-terms <G'_i|G_i> that do not cancel.  A dagger equals A for
    Hermitian input, so both states come from the same construction.
    """
    if a.dimension != b.dimension:
        raise ValueError(
            f"matrix dimensions differ: {a.dimension} vs {b.dimension}"
        )
    n = a.dimension
    applied_b = _product_state(b)
    applied_a = _product_state(a)
    record = NormalizationRecord(
        f"N*s_A*s_B with N={n}, s_A={a.sparsity}, s_B={b.sparsity}",
        n * a.sparsity * b.sparsity,
    )
    return _dual_part_estimate(
        lambda part, k, s: projected_hadamard_test(
            applied_b, applied_a, ("flag",), k, s, part
        ),
        shots, seed, record,
    )


def frobenius_via_product(
    matrix: SparseHermitianMatrix, shots: int = 0, seed: int = DEFAULT_SEED
) -> ShotEstimate:
    """||A||_F as sqrt(Tr(A^dag A)); a negative shot-mode trace estimate is
    clamped to zero and flagged."""
    sub = trace_product(matrix, matrix, shots, seed)
    flags = sub.flags
    value = sub.estimate_real
    if value < 0.0:
        value = 0.0
        flags = flags + ("clamped_negative_estimate",)
    estimate = math.sqrt(value)
    record = NormalizationRecord(
        f"sqrt of raw overlap times {sub.normalization.factor}",
        sub.normalization.factor,
        kind="sqrt",
    )
    exact = math.sqrt(max(sub.exact_value.real, 0.0))
    if shots == 0:
        return ShotEstimate(estimate, 0.0, 0, 0.0, seed, record, complex(exact), flags)
    if estimate > 0.0:
        stderr = sub.standard_error / (2.0 * estimate)
    else:
        stderr = sub.standard_error  # conservative; estimate was clamped
    return ShotEstimate(estimate, 0.0, shots, stderr, seed, record, complex(exact), flags)


def frobenius_mixed_state(
    matrix: SparseHermitianMatrix, shots: int = 0, seed: int = DEFAULT_SEED
) -> ShotEstimate:
    """||A||_F from the ancilla-zero probability after block-applying A to the
    maximally mixed state (realized by purification): p = sum_i lam_i^2/(N s^2),
    so the norm is sqrt(p N s^2)."""
    n = matrix.dimension
    image = chebyshev_image_matrix(matrix, 1)
    probability = float(np.linalg.norm(image) ** 2) / n
    factor = n * matrix.sparsity**2
    record = NormalizationRecord(
        f"sqrt of probability times N*s^2 = {factor}", factor, kind="sqrt"
    )
    exact = math.sqrt(probability * factor)
    if shots == 0:
        return ShotEstimate(exact, 0.0, 0, 0.0, seed, record, complex(exact))
    rng = np.random.default_rng(seed)
    p_hat, p_smooth, se_p = _binomial_fraction(rng, probability, shots)
    estimate = math.sqrt(p_hat * factor)
    stderr = math.sqrt(factor) * se_p / (2.0 * math.sqrt(p_smooth))
    return ShotEstimate(estimate, 0.0, shots, stderr, seed, record, complex(exact))
