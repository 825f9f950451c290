"""Seeded construction of small test matrices.

The walk encoding requires nonnegative diagonals (diagonal entries pair with
themselves in the encoding, see walk_engine), so generators draw diagonals
from [0, 1] and off-diagonal values from the complex unit disk.
"""

from __future__ import annotations

import numpy as np

from .sparse_oracle import SparseHermitianMatrix, from_entries


def diagonal_matrix(values) -> SparseHermitianMatrix:
    vals = list(values)
    return from_entries(
        len(vals), 1, ((i, i, complex(v)) for i, v in enumerate(vals))
    )


def random_hermitian_instance(
    seed: int,
    dim: int,
    sparsity: int,
    *,
    zero_diagonal: bool = False,
    min_magnitude: float = 0.1,
) -> SparseHermitianMatrix:
    """Random Hermitian matrix with at most ``sparsity`` nonzeros per row.

    Diagonals are uniform in [0.05, 1] (or absent with ``zero_diagonal``);
    off-diagonal representatives have magnitude in [min_magnitude, 1) and a
    uniform phase.  Off-diagonal pairs are added greedily while both incident
    rows have headroom, so most rows reach the sparsity bound exactly.
    """
    if sparsity > dim:
        raise ValueError(f"sparsity {sparsity} exceeds dimension {dim}")
    rng = np.random.default_rng(seed)
    entries: list[tuple[int, int, complex]] = []
    counts = [0] * dim

    if not zero_diagonal:
        for i in range(dim):
            entries.append((i, i, complex(rng.uniform(0.05, 1.0))))
            counts[i] += 1

    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    rng.shuffle(pairs)
    for i, j in pairs:
        if counts[i] >= sparsity or counts[j] >= sparsity:
            continue
        magnitude = rng.uniform(min_magnitude, 0.999)
        phase = rng.uniform(-np.pi, np.pi)
        entries.append((i, j, magnitude * np.exp(1j * phase)))
        counts[i] += 1
        counts[j] += 1

    return from_entries(dim, sparsity, entries)


def gapped_dominant_instance(seed: int, dim: int, sparsity: int = 2) -> SparseHermitianMatrix:
    """Diagonally dominant instance whose two largest eigenvalues of A/s are
    separated by at least 0.2 (checked densely; resampled if necessary)."""
    for attempt in range(64):
        rng = np.random.default_rng((seed, attempt))
        entries: list[tuple[int, int, complex]] = []
        diag = np.sort(rng.uniform(0.0, 0.55, size=dim))[::-1]
        diag[0] = 1.0
        for i in range(dim):
            entries.append((i, i, complex(diag[i])))
        counts = [1] * dim
        if sparsity > 1:
            pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
            rng.shuffle(pairs)
            for i, j in pairs:
                if counts[i] >= sparsity or counts[j] >= sparsity:
                    continue
                entries.append((i, j, complex(rng.uniform(0.02, 0.08))))
                counts[i] += 1
                counts[j] += 1
        candidate = from_entries(dim, sparsity, entries)
        eigvals = np.linalg.eigvalsh(candidate.to_dense() / sparsity)
        if eigvals[-1] - eigvals[-2] >= 0.2:
            return candidate
    raise RuntimeError(f"no gapped instance found for seed {seed}, dim {dim}")
