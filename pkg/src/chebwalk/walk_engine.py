"""Walk-operator construction and Chebyshev block application.

Space conventions
-----------------
For an N-dimensional matrix the walk lives on C^{2N} (x) C^{2N}, total
dimension 4N^2.  The same flat vector admits two register factorizations:

* walk factors:     flat p = 2N*x + y       with x, y in [0, 2N)
* ancilla/index:    flat p = N*a + r        with a in [0, 4N), r in [0, N)

The ancilla block has m = log2(2N) + 1 = n + 2 qubits, so 2^m * N = 4N^2.
Under either reading the "ancilla zero" subspace |0^m>|phi> is exactly the
first N flat coordinates, which is what makes the projection step a plain
slice.

Per-row coin states
-------------------
Row j of a matrix A with padded pattern P_j defines

    |psi_j> = |j> (x) (1/sqrt(s)) sum_{k in P_j} ( w_jk |k> + sqrt(1-|a_jk|) |k+N> )

where w_jk is a square root of conj(a_jk).  The branch of that square root
matters: the walk encodes a_ij via the product w_ji * conj(w_ij), so the two
members of a conjugate pair must use opposite roots when the entry is a
negative real (any single-valued branch would flip its sign).  We pin the
branch by index order; see ``entry_amplitude``.  Diagonal entries pair with
themselves, which forces the encoded diagonal to be nonnegative — matrices
with a negative diagonal entry are rejected (their diagonal can always be
moved off-diagonal by the relocation/dilation route).

The isometry T = sum_j |psi_j><j| satisfies T^dag S T = A/s with S the factor
swap.  W = S(2TT^dag - 1) restricted to span{T|v>, ST|v>} for an eigenpair
(lam, |v>) of A/s is a rotation with cos = lam, and W^n generates Chebyshev
polynomials of A/s in the ancilla-zero block of U_T^dag W^n U_T.

Memory notes: the isometry is kept dense (4N^2 x N).  The dense W and the
unitary completion U_T are built lazily on first access — estimator paths
apply W through its rank-structured form and project with T alone, so they
never materialize either matrix.  Construction is pure and built operators
are immutable, hence shareable across threads.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space
from scipy.special import eval_chebyt, eval_chebyu

from .sparse_oracle import SparseHermitianMatrix
from .states import StateVector

ATOL_UNITARY = 1e-10


class WalkEncodingError(ValueError):
    """The matrix lies outside the walk construction's validity domain."""


def entry_amplitude(value: complex, row: int, col: int) -> complex:
    """Square root of conj(a_{row,col}) with a conjugate-pair-consistent branch.

    For value r*exp(i*theta) returns sqrt(r)*exp(-i*theta/2) with theta taken
    in (-pi, pi] above the diagonal and [-pi, pi) below, so that
    amplitude(j,i) * conj(amplitude(i,j)) == a_ij holds for every pair,
    including negative reals.
    """
    v = complex(value)
    if v == 0:
        return 0j
    theta = math.atan2(v.imag, v.real)
    if v.imag == 0.0 and v.real < 0.0:
        theta = math.pi if row < col else -math.pi
    return math.sqrt(abs(v)) * cmath.exp(-0.5j * theta)


def _require_encodable(matrix: SparseHermitianMatrix) -> None:
    for i in range(matrix.dimension):
        d = matrix.table.get((i, i), 0j).real
        if d < 0.0:
            raise WalkEncodingError(
                f"diagonal entry ({i}, {i}) = {d} is negative; the walk encoding "
                "reproduces |a_ii| on the diagonal, so direct encoding is invalid. "
                "Relocate the diagonal (Hermitian dilation) or shift the matrix."
            )


@dataclass(frozen=True)
class WalkSpace:
    """Dimension bookkeeping for the doubled walk space of an N-dim matrix."""

    matrix_dim: int

    @property
    def n(self) -> int:
        return self.matrix_dim.bit_length() - 1

    @property
    def m(self) -> int:
        return self.n + 2

    @property
    def factor_dim(self) -> int:
        return 2 * self.matrix_dim

    @property
    def ancilla_dim(self) -> int:
        return 4 * self.matrix_dim

    @property
    def total_dim(self) -> int:
        return 4 * self.matrix_dim * self.matrix_dim

    def walk_index(self, x: int, y: int) -> int:
        return self.factor_dim * x + y

    def split_walk(self, p: int) -> tuple[int, int]:
        return divmod(p, self.factor_dim)

    def register_index(self, a: int, r: int) -> int:
        return self.matrix_dim * a + r

    def split_register(self, p: int) -> tuple[int, int]:
        return divmod(p, self.matrix_dim)

    @property
    def register_layout(self):
        return (("ancilla", self.ancilla_dim), ("index", self.matrix_dim))

    def swap_permutation(self) -> np.ndarray:
        """perm with S|p> = |perm[p]>; S swaps the two walk factors."""
        d = self.factor_dim
        p = np.arange(self.total_dim)
        x, y = np.divmod(p, d)
        return d * y + x


def build_psi_state(matrix: SparseHermitianMatrix, j: int) -> StateVector:
    """The row-j coin state |psi_j> on the doubled space (unit norm)."""
    n = matrix.dimension
    if not 0 <= j < n:
        raise IndexError(f"row index {j} out of range for dimension {n}")
    d = matrix.table.get((j, j), 0j).real
    if d < 0.0:
        raise WalkEncodingError(
            f"diagonal entry ({j}, {j}) = {d} is negative; see build_walk_operator"
        )
    space = WalkSpace(n)
    data = np.zeros(space.total_dim, dtype=np.complex128)
    scale = 1.0 / math.sqrt(matrix.sparsity)
    for k in matrix.row_patterns[j]:
        a_jk = matrix.table.get((j, k), 0j)
        data[space.walk_index(j, k)] = scale * entry_amplitude(a_jk, j, k)
        data[space.walk_index(j, k + n)] = scale * math.sqrt(1.0 - abs(a_jk))
    return StateVector(
        data, (("left", space.factor_dim), ("right", space.factor_dim))
    )


@dataclass(eq=False)
class WalkOperator:
    """Walk unitary W = S(2TT^dag - 1) together with T and its completion U_T."""

    space: WalkSpace
    matrix: SparseHermitianMatrix
    sparsity: int
    t: np.ndarray  # isometry, total_dim x N, columns are the |psi_j>
    swap_perm: np.ndarray
    oracle_queries: int  # static count: one entry query per (row, pattern slot)

    def apply_w(self, vec: np.ndarray, reps: int = 1) -> np.ndarray:
        """W^reps applied through the rank-structured form (no dense W)."""
        out = np.asarray(vec, dtype=np.complex128)
        for _ in range(reps):
            out = (2.0 * (self.t @ (self.t.conj().T @ out)) - out)[self.swap_perm]
        return out

    def project_zero_block(self, vec: np.ndarray) -> np.ndarray:
        """Ancilla-zero block after rotating back with U_T^dag, i.e. T^dag vec.

        The first N columns of U_T are the |psi_j>, so the |0^m>|.> component
        of U_T^dag applied to a walk-space vector is T^dag times that vector.
        """
        return self.t.conj().T @ vec

    @cached_property
    def w(self) -> np.ndarray:
        reflect = 2.0 * (self.t @ self.t.conj().T)
        reflect[np.diag_indices_from(reflect)] -= 1.0
        return reflect[self.swap_perm]

    @cached_property
    def s_matrix(self) -> np.ndarray:
        s = np.zeros((self.space.total_dim, self.space.total_dim))
        s[np.arange(self.space.total_dim), self.swap_perm] = 1.0
        return s

    @cached_property
    def u_t(self) -> np.ndarray:
        """Unitary completion of T: first N columns are T|j>, rest orthonormal."""
        complement = null_space(self.t.conj().T)
        if complement.shape[1] != self.space.total_dim - self.space.matrix_dim:
            raise RuntimeError(
                "orthonormal completion has wrong rank; psi-state construction is broken"
            )
        u = np.hstack([self.t, complement])
        defect = np.abs(u.conj().T @ u - np.eye(self.space.total_dim)).max()
        if defect > ATOL_UNITARY:
            raise RuntimeError(f"completion failed unitarity check: defect {defect!r}")
        return u


def build_walk_operator(matrix: SparseHermitianMatrix) -> WalkOperator:
    _require_encodable(matrix)
    space = WalkSpace(matrix.dimension)
    t = np.zeros((space.total_dim, matrix.dimension), dtype=np.complex128)
    for j in range(matrix.dimension):
        t[:, j] = build_psi_state(matrix, j).data
    gram_defect = np.abs(t.conj().T @ t - np.eye(matrix.dimension)).max()
    if gram_defect > ATOL_UNITARY:
        raise RuntimeError(
            f"psi states are not orthonormal (defect {gram_defect!r}); "
            "construction bug"
        )
    return WalkOperator(
        space=space,
        matrix=matrix,
        sparsity=matrix.sparsity,
        t=t,
        swap_perm=space.swap_permutation(),
        oracle_queries=matrix.dimension * matrix.sparsity,
    )


@functools.lru_cache(maxsize=8)
def cached_walk_operator(matrix: SparseHermitianMatrix) -> WalkOperator:
    """Identity-keyed cache; safe because matrices are immutable."""
    return build_walk_operator(matrix)


def chebyshev_block_apply(
    matrix: SparseHermitianMatrix, order: int, phi: StateVector | np.ndarray
) -> tuple[StateVector, float]:
    """Apply the order-n Chebyshev block encoding to an index-register state.

    Returns the (unnormalized) ancilla-zero component v = T_n(A/s)|phi> and
    the norm of the orthogonal remainder; ||v||^2 + garbage^2 = 1.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    vec = phi.data if isinstance(phi, StateVector) else np.asarray(phi, dtype=np.complex128)
    if vec.shape != (matrix.dimension,):
        raise ValueError(
            f"state dimension {vec.shape} does not match matrix dimension {matrix.dimension}"
        )
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"input state must be unit norm, got {nrm!r}")
    layout = (("index", matrix.dimension),)
    if order == 0:
        return StateVector(vec, layout), 0.0
    wop = cached_walk_operator(matrix)
    full = wop.apply_w(wop.t @ vec, reps=order)
    v = wop.project_zero_block(full)
    garbage = math.sqrt(max(0.0, 1.0 - float(np.linalg.norm(v)) ** 2))
    return StateVector(v, layout), garbage


def chebyshev_image_matrix(matrix: SparseHermitianMatrix, order: int = 1) -> np.ndarray:
    """Dense N x N matrix T_n(A/s) as realized by the walk (all basis columns)."""
    if order == 0:
        return np.eye(matrix.dimension, dtype=np.complex128)
    wop = cached_walk_operator(matrix)
    return wop.t.conj().T @ wop.apply_w(wop.t, reps=order)


def block_encoding_output(
    wop: WalkOperator, phi: np.ndarray, order: int = 1
) -> StateVector:
    """Full state U_T^dag W^n U_T |0^m>|phi>, garbage included (needs U_T)."""
    full = wop.u_t.conj().T @ wop.apply_w(wop.t @ np.asarray(phi, dtype=np.complex128), reps=order)
    return StateVector(full, wop.space.register_layout)


# ---------------------------------------------------------------------------
# invariant suite (used by tests and the verify-walk CLI command)

@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    max_error: float
    tolerance: float


def _eigen_block(wop: WalkOperator, vec: np.ndarray, lam: float, order: int) -> float:
    """Max deviation of W^order from its 2x2 Chebyshev form on one eigenpair."""
    t_col = wop.t @ vec
    s_col = t_col[wop.swap_perm]
    tn = eval_chebyt(order, lam)
    if 1.0 - lam * lam < 1e-24:
        # span collapses: S T|v> = sign(lam) T|v>, W acts 1-dimensionally
        got = wop.apply_w(t_col, reps=order)
        return float(np.abs(got - tn * t_col).max())
    root = math.sqrt(1.0 - lam * lam)
    u_col = (s_col - lam * t_col) / root
    basis = np.stack([t_col, u_col], axis=1)
    images = np.stack(
        [wop.apply_w(t_col, reps=order), wop.apply_w(u_col, reps=order)], axis=1
    )
    got = basis.conj().T @ images
    un1 = eval_chebyu(order - 1, lam)
    want = np.array([[tn, -root * un1], [root * un1, tn]])
    return float(np.abs(got - want).max())


def walk_invariant_checks(
    matrix: SparseHermitianMatrix,
    max_order: int = 10,
    rng_seed: int = 7,
) -> list[InvariantCheck]:
    """Run the construction invariants and return one result per check."""
    wop = build_walk_operator(matrix)
    n = matrix.dimension
    total = wop.space.total_dim
    rng = np.random.default_rng(rng_seed)
    checks: list[InvariantCheck] = []

    def add(name, err, tol):
        checks.append(InvariantCheck(name, bool(err <= tol), float(err), tol))

    add("dimension_bookkeeping",
        abs(2 ** wop.space.m * n - total), 0)
    add("isometry_gram",
        np.abs(wop.t.conj().T @ wop.t - np.eye(n)).max(), ATOL_UNITARY)

    sample = rng.standard_normal((n, 16)) + 1j * rng.standard_normal((n, 16))
    sample /= np.linalg.norm(sample, axis=0)
    add("isometry_norm_preservation",
        np.abs(np.linalg.norm(wop.t @ sample, axis=0) - 1.0).max(), ATOL_UNITARY)

    add("completion_restriction",
        np.abs(wop.u_t[:, :n] - wop.t).max(), 0)
    add("unitarity_u_t",
        np.abs(wop.u_t.conj().T @ wop.u_t - np.eye(total)).max(), ATOL_UNITARY)
    add("unitarity_w",
        np.abs(wop.w.conj().T @ wop.w - np.eye(total)).max(), ATOL_UNITARY)
    add("swap_involution",
        np.abs(wop.swap_perm[wop.swap_perm] - np.arange(total)).max(), 0)

    scaled = matrix.to_dense() / matrix.sparsity
    eigvals, eigvecs = np.linalg.eigh(scaled)
    add("eigenvalue_range", max(0.0, float(np.abs(eigvals).max()) - 1.0), 1e-12)

    block_err = max(
        _eigen_block(wop, eigvecs[:, k], float(eigvals[k]), 1) for k in range(n)
    )
    add("walk_block_rotation", block_err, 1e-9)

    power_err = max(
        _eigen_block(wop, eigvecs[:, k], float(eigvals[k]), order)
        for k in range(n)
        for order in range(max_order + 1)
    )
    add("chebyshev_power_blocks", power_err, 1e-8)

    recur_err = 0.0
    t_prev = np.eye(n, dtype=np.complex128)
    t_cur = scaled.astype(np.complex128)
    for order in range(2, max_order + 1):
        t_next = 2.0 * scaled @ t_cur - t_prev
        recur_err = max(
            recur_err,
            float(np.abs(chebyshev_image_matrix(matrix, order) - t_next).max()),
        )
        t_prev, t_cur = t_cur, t_next
    add("chebyshev_recurrence", recur_err, 1e-8)

    return checks
