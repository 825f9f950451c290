"""Register-labelled statevectors and the qvec v1 file format.

A state is a flat complex vector together with a layout: an ordered tuple of
named register blocks, each with its own dimension.  The flat index is
big-endian in the layout order, i.e. for layout ``(("a", da), ("b", db))``
the basis state ``|x>_a |y>_b`` sits at flat index ``x*db + y``.

States are immutable after construction (the underlying array is marked
read-only), so they can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Layout = tuple[tuple[str, int], ...]


class StateFormatError(ValueError):
    """Raised when a qvec file fails to parse or validate."""


def _as_layout(layout) -> Layout:
    out = tuple((str(name), int(dim)) for name, dim in layout)
    for name, dim in out:
        if dim < 1:
            raise ValueError(f"register {name!r} has non-positive dimension {dim}")
    names = [name for name, _ in out]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate register names in layout {names}")
    return out


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a declared register layout."""

    data: np.ndarray
    layout: Layout
    original_norm: float | None = None

    def __post_init__(self):
        layout = _as_layout(self.layout)
        object.__setattr__(self, "layout", layout)
        data = np.array(self.data, dtype=np.complex128, copy=True).reshape(-1)
        dim = math.prod(d for _, d in layout)
        if data.size != dim:
            raise ValueError(
                f"state has {data.size} amplitudes but layout {layout} implies {dim}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def require_unit(self, tol: float = 1e-8) -> None:
        nrm = self.norm()
        if abs(nrm - 1.0) > tol:
            raise ValueError(f"state is not normalized: ||phi|| = {nrm!r}")

    def block_dim(self, name: str) -> int:
        for block, dim in self.layout:
            if block == name:
                return dim
        raise KeyError(f"no register named {name!r} in layout {self.layout}")

    def project_zero(self, blocks: tuple[str, ...]) -> "StateVector":
        """Zero out every amplitude where any named block is not in state 0."""
        known = {name for name, _ in self.layout}
        unknown = set(blocks) - known
        if unknown:
            raise KeyError(f"projector names unknown registers {sorted(unknown)}")
        dims = [d for _, d in self.layout]
        arr = self.data.reshape(dims)
        out = np.zeros_like(arr)
        sel = tuple(
            slice(0, 1) if name in blocks else slice(None) for name, _ in self.layout
        )
        out[sel] = arr[sel]
        return StateVector(out.reshape(-1), self.layout)


def vdot(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket> with the physics convention (conjugate-linear in bra)."""
    if bra.layout != ket.layout:
        raise ValueError(f"register layouts differ: {bra.layout} vs {ket.layout}")
    return complex(np.vdot(bra.data, ket.data))


def basis_state(dim: int, index: int, name: str = "index") -> StateVector:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    data = np.zeros(dim, dtype=np.complex128)
    data[index] = 1.0
    return StateVector(data, ((name, dim),))


def uniform_state(dim: int, name: str = "index") -> StateVector:
    data = np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
    return StateVector(data, ((name, dim),))


def load_state(path) -> StateVector:
    """Read a qvec v1 file; the state is normalized and the raw norm recorded.

    Format: line 1 ``qvec v1``, line 2 the dimension N, then N lines ``re im``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "qvec v1":
        raise StateFormatError(f"{path}: first line must be 'qvec v1'")
    if len(lines) < 2:
        raise StateFormatError(f"{path}: missing dimension line")
    try:
        dim = int(lines[1].strip())
    except ValueError:
        raise StateFormatError(f"{path}: dimension line {lines[1]!r} is not an integer")
    if dim < 1:
        raise StateFormatError(f"{path}: dimension must be positive, got {dim}")
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != dim:
        raise StateFormatError(f"{path}: expected {dim} amplitude lines, found {len(rows)}")
    data = np.zeros(dim, dtype=np.complex128)
    for k, ln in enumerate(rows):
        parts = ln.split()
        if len(parts) != 2:
            raise StateFormatError(f"{path}: amplitude line {k} must be 're im', got {ln!r}")
        try:
            data[k] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise StateFormatError(f"{path}: amplitude line {k} has non-numeric fields: {ln!r}")
    nrm = float(np.linalg.norm(data))
    if nrm == 0.0:
        raise StateFormatError(f"{path}: zero vector cannot be normalized")
    return StateVector(data / nrm, (("index", dim),), original_norm=nrm)


def save_state(state: StateVector, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("qvec v1\n")
        fh.write(f"{state.dim}\n")
        for amp in state.data:
            fh.write(f"{amp.real!r} {amp.imag!r}\n")
