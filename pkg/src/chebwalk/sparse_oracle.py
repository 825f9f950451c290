"""Sparse Hermitian matrices under the entry-oracle access model.

A matrix is fixed by its dimension N (a power of two), a declared sparsity
bound s (maximum nonzeros in any row), and a coordinate list of entries.  For
off-diagonal pairs only one representative is stored on disk; the conjugate
mirror is implied.  In memory both directions are materialized so that
``query_entry`` is a pure O(1) lookup, matching the oracle abstraction of an
entry-returning blackbox.

Every row also carries a *padded pattern*: its nonzero column set extended
deterministically (smallest absent column indices first) to exactly s
indices.  Downstream walk-state constructions need exactly s terms per row
for their 1/sqrt(s) normalization to produce an isometry; padded entries have
value zero and contribute only to the "empty" branch.

Matrices are immutable after construction; all queries are pure functions, so
instances are safe to share across threads.

qmat v1 file format (text)::

    qmat v1
    N s
    # comment lines start with '#'
    i j re im

with 0-based indices; diagonal entries must have im == 0; duplicates (either
orientation of a pair) are an error.
"""

from __future__ import annotations

import math
import types
from dataclasses import dataclass

import numpy as np


class MatrixFormatError(ValueError):
    """Parse or validation failure; the message carries row/column context."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(eq=False)
class SparseHermitianMatrix:
    """Validated s-sparse Hermitian matrix with oracle-style entry access."""

    dimension: int
    sparsity: int
    table: types.MappingProxyType
    row_patterns: tuple[tuple[int, ...], ...]
    norm_upper_bound: float
    condition_number: float

    @property
    def num_qubits(self) -> int:
        return self.dimension.bit_length() - 1

    def query_entry(self, i: int, j: int) -> complex:
        """Return a_ij (zero when not stored)."""
        n = self.dimension
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"entry index ({i}, {j}) out of range for dimension {n}")
        return self.table.get((i, j), 0j)

    def diagonal(self) -> np.ndarray:
        return np.array(
            [self.table.get((i, i), 0j).real for i in range(self.dimension)]
        )

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for (i, j), v in self.table.items():
            dense[i, j] = v
        return dense


def from_entries(dimension: int, sparsity: int, entries) -> SparseHermitianMatrix:
    """Build and validate a matrix from (row, col, value) triples.

    Exactly one representative per off-diagonal pair may be given; the mirror
    entry is implied by Hermiticity.  Explicit zero values are accepted and
    dropped.
    """
    if not _is_power_of_two(dimension):
        raise MatrixFormatError(f"dimension {dimension} is not a power of two")
    if sparsity < 1:
        raise MatrixFormatError(f"sparsity must be >= 1, got {sparsity}")
    if sparsity > dimension:
        raise MatrixFormatError(
            f"sparsity {sparsity} exceeds dimension {dimension}; rows cannot be padded"
        )

    given: dict[tuple[int, int], complex] = {}
    for row, col, value in entries:
        i, j, v = int(row), int(col), complex(value)
        if not (0 <= i < dimension and 0 <= j < dimension):
            raise MatrixFormatError(
                f"entry ({i}, {j}) out of range for dimension {dimension}"
            )
        if (i, j) in given:
            raise MatrixFormatError(f"duplicate entry for ({i}, {j})")
        if i == j and v.imag != 0.0:
            raise MatrixFormatError(f"diagonal entry ({i}, {i}) = {v} is not real")
        if abs(v) > 1.0 + 1e-12:
            raise MatrixFormatError(f"entry ({i}, {j}) has magnitude {abs(v)!r} > 1")
        if i != j and (j, i) in given:
            if given[(j, i)].conjugate() != v:
                raise MatrixFormatError(
                    f"Hermiticity violation for pair ({j}, {i})/({i}, {j}): "
                    f"stored {given[(j, i)]} and {v} are not conjugates"
                )
            raise MatrixFormatError(
                f"pair ({j}, {i})/({i}, {j}) stored twice; keep one representative"
            )
        given[(i, j)] = v

    table: dict[tuple[int, int], complex] = {}
    for (i, j), v in given.items():
        if v == 0:
            continue
        table[(i, j)] = v
        if i != j:
            table[(j, i)] = v.conjugate()

    counts = [0] * dimension
    for (i, _j) in table:
        counts[i] += 1
    for i, c in enumerate(counts):
        if c > sparsity:
            raise MatrixFormatError(
                f"row {i} has {c} nonzeros, exceeding declared sparsity {sparsity}"
            )

    patterns = []
    for i in range(dimension):
        cols = sorted(j for (r, j) in table if r == i)
        present = set(cols)
        pad = [k for k in range(dimension) if k not in present]
        cols += pad[: sparsity - len(cols)]
        patterns.append(tuple(sorted(cols)))

    row_sums = [0.0] * dimension
    for (i, _j), v in table.items():
        row_sums[i] += abs(v)
    norm_bound = max(row_sums) if table else 0.0

    dense = np.zeros((dimension, dimension), dtype=np.complex128)
    for (i, j), v in table.items():
        dense[i, j] = v
    sigma = np.linalg.svd(dense, compute_uv=False)
    smallest = float(sigma[-1])
    kappa = float(sigma[0] / smallest) if smallest > 1e-300 else math.inf

    return SparseHermitianMatrix(
        dimension=dimension,
        sparsity=sparsity,
        table=types.MappingProxyType(table),
        row_patterns=tuple(patterns),
        norm_upper_bound=norm_bound,
        condition_number=kappa,
    )


def load_matrix(path) -> SparseHermitianMatrix:
    """Parse and validate a qmat v1 file."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "qmat v1":
        raise MatrixFormatError(f"{path}: first line must be 'qmat v1'")
    body = [
        (lineno, ln.strip())
        for lineno, ln in enumerate(lines[1:], start=2)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not body:
        raise MatrixFormatError(f"{path}: missing 'N s' line")
    lineno, header = body[0]
    parts = header.split()
    if len(parts) != 2:
        raise MatrixFormatError(f"{path}:{lineno}: expected 'N s', got {header!r}")
    try:
        dimension, sparsity = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFormatError(f"{path}:{lineno}: non-integer dimension line {header!r}")

    def parse_entries():
        for entry_lineno, ln in body[1:]:
            fields = ln.split()
            if len(fields) != 4:
                raise MatrixFormatError(
                    f"{path}:{entry_lineno}: expected 'i j re im', got {ln!r}"
                )
            try:
                i, j = int(fields[0]), int(fields[1])
                re, im = float(fields[2]), float(fields[3])
            except ValueError:
                raise MatrixFormatError(
                    f"{path}:{entry_lineno}: non-numeric fields in {ln!r}"
                )
            yield i, j, complex(re, im)

    try:
        return from_entries(dimension, sparsity, parse_entries())
    except MatrixFormatError as exc:
        msg = str(exc)
        raise MatrixFormatError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def write_qmat(matrix: SparseHermitianMatrix, path) -> None:
    """Write the matrix in qmat v1 form (upper-triangle representatives)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("qmat v1\n")
        fh.write(f"{matrix.dimension} {matrix.sparsity}\n")
        for (i, j), v in sorted(matrix.table.items()):
            if i <= j:
                fh.write(f"{i} {j} {v.real!r} {v.imag!r}\n")


def relocation_map(i: int, j: int) -> tuple[int, int]:
    """Index permutation realizing the diagonal relocation: (i,i) <-> (i,0).

    The relocated view A' answers queries by A'(i, j) = A(relocation_map(i, j)),
    so column 0 of A' holds the diagonal of A.  The map is an involution.
    """
    if j == i:
        return (i, 0)
    if j == 0:
        return (i, i)
    return (i, j)


@dataclass(eq=False)
class RelocatedMatrix:
    """Diagonal-relocated view A' of a base matrix plus its Hermitian dilation.

    A' is generally not Hermitian (its column 0 is the diagonal of the base),
    so walk constructions use the dilation H = [[0, A'], [A'^dag, 0]] of
    dimension 2N, which is Hermitian with a zero diagonal.  ``dilated_sparsity``
    is the max nonzero count over rows of H, i.e. over both rows and columns
    of A'; a dense base diagonal makes column 0 of A' dense and pushes it to N.
    """

    base: SparseHermitianMatrix
    dilation: SparseHermitianMatrix
    dilated_sparsity: int

    def query_entry(self, i: int, j: int) -> complex:
        """Entry (i, j) of the relocated view A'."""
        return self.base.query_entry(*relocation_map(i, j))


def relocate_diagonal(matrix: SparseHermitianMatrix) -> RelocatedMatrix:
    n = matrix.dimension
    # positions of A' nonzeros: per-row swap of columns 0 and i
    prime_entries: dict[tuple[int, int], complex] = {}
    for (i, j), v in matrix.table.items():
        col = i if j == 0 else (0 if j == i else j)
        prime_entries[(i, col)] = v

    row_counts = [0] * n
    col_counts = [0] * n
    for (i, j) in prime_entries:
        row_counts[i] += 1
        col_counts[j] += 1
    s_prime = max(max(row_counts, default=0), max(col_counts, default=0), 1)

    dilation = from_entries(
        2 * n,
        s_prime,
        ((i, n + j, v) for (i, j), v in prime_entries.items()),
    )
    return RelocatedMatrix(base=matrix, dilation=dilation, dilated_sparsity=s_prime)
