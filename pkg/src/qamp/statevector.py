"""Complex state vectors and structured unitary operators.

Basis index ``x`` has qubit ``q`` equal to ``(x >> q) & 1``; qubit 0 is the
least-significant bit.  A :class:`Sequence` lists its operators in temporal
order: the first element is applied first.

Operators come in five forms (:class:`Dense`, :class:`Diagonal`,
:class:`SingleQubit`, :class:`PairBlocks`, :class:`Sequence`).  All of them
are immutable and act on flat ``complex128`` arrays through :func:`apply`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ContractViolation, NotUnitaryError, ResourceLimitError

NORM_TOL = 1e-9
UNITARY_TOL = 1e-10
MAX_DENSE_DIM = 4096
# Dense gates above this size skip the O(dim^3) check at construction.
_CHECK_DENSE_DIM = 512


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{what} contains NaN or Inf")


class StateVector:
    """A normalized vector of complex amplitudes over ``dim`` basis states."""

    __slots__ = ("_amps",)

    def __init__(self, amps: Iterable[complex], *, check: bool = True):
        a = np.array(amps, dtype=np.complex128)
        if a.ndim != 1 or a.size == 0:
            raise ContractViolation("amplitudes must be a non-empty 1-D array")
        _check_finite(a, "state")
        if check:
            norm2 = float(np.vdot(a, a).real)
            if abs(norm2 - 1.0) > NORM_TOL:
                raise ContractViolation(f"state is not normalized (|v|^2 = {norm2!r})")
        self._amps = _frozen(a)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if dim < 1:
            raise ContractViolation("dim must be positive")
        if not 0 <= index < dim:
            raise ContractViolation(f"basis index {index} outside [0, {dim})")
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1.0
        return cls(a, check=False)

    @classmethod
    def random(cls, dim: int, seed: int | np.random.Generator) -> "StateVector":
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return cls(a / np.linalg.norm(a))

    @property
    def dim(self) -> int:
        return self._amps.size

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    def __getitem__(self, x: int) -> complex:
        return complex(self._amps[x])

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim})"

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def probability(self, x: int) -> float:
        return float(abs(self._amps[x]) ** 2)

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))


# ---------------------------------------------------------------------------
# Operator forms
# ---------------------------------------------------------------------------


def _check_unitary_2x2(m: np.ndarray, what: str) -> None:
    if m.shape != (2, 2):
        raise ContractViolation(f"{what} must be 2x2, got {m.shape}")
    err = np.max(np.abs(m.conj().T @ m - np.eye(2)))
    if err > UNITARY_TOL:
        raise NotUnitaryError(f"{what} is not unitary (max deviation {err:.3g})")


class LinearOp:
    """Base class of the structured unitary forms."""

    dim: int

    def _apply(self, arr: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def adjoint(self) -> "LinearOp":  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Dense(LinearOp):
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ContractViolation(f"dense operator must be square, got shape {m.shape}")
        _check_finite(m, "dense operator")
        if m.shape[0] <= _CHECK_DENSE_DIM:
            err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if err > UNITARY_TOL:
                raise NotUnitaryError(f"dense operator is not unitary (max deviation {err:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _apply(self, arr):
        return self.matrix @ arr

    def adjoint(self):
        return Dense(self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class Diagonal(LinearOp):
    entries: np.ndarray

    def __post_init__(self):
        d = np.array(self.entries, dtype=np.complex128).reshape(-1)
        if d.size == 0:
            raise ContractViolation("diagonal operator needs at least one entry")
        _check_finite(d, "diagonal operator")
        err = np.max(np.abs(np.abs(d) - 1.0))
        if err > UNITARY_TOL:
            raise NotUnitaryError(f"diagonal entries must have unit modulus (deviation {err:.3g})")
        object.__setattr__(self, "entries", _frozen(d))

    @property
    def dim(self) -> int:
        return self.entries.size

    def _apply(self, arr):
        if arr.ndim == 1:
            return self.entries * arr
        return self.entries.reshape((-1,) + (1,) * (arr.ndim - 1)) * arr

    def adjoint(self):
        return Diagonal(self.entries.conj())


@dataclass(frozen=True, eq=False)
class SingleQubit(LinearOp):
    """A 2x2 gate on qubit ``qubit`` of a ``dim = 2**n`` register."""

    dim: int
    qubit: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        _check_finite(m, "gate")
        _check_unitary_2x2(m, "single-qubit gate")
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ContractViolation(f"single-qubit gate needs a power-of-two dim >= 2, got {self.dim}")
        if not 0 <= self.qubit or (1 << self.qubit) >= self.dim:
            raise ContractViolation(f"qubit {self.qubit} out of range for dim {self.dim}")
        object.__setattr__(self, "matrix", _frozen(m))

    def _apply(self, arr):
        stride = 1 << self.qubit
        rest = arr.shape[1:]
        view = arr.reshape((-1, 2, stride) + rest)
        a0 = view[:, 0]
        a1 = view[:, 1]
        m = self.matrix
        out = np.empty_like(view)
        out[:, 0] = m[0, 0] * a0 + m[0, 1] * a1
        out[:, 1] = m[1, 0] * a0 + m[1, 1] * a1
        return out.reshape(arr.shape)

    def adjoint(self):
        return SingleQubit(self.dim, self.qubit, self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class PairBlocks(LinearOp):
    """Independent 2x2 blocks on disjoint index pairs; all other indices are untouched.

    Block ``B`` acts on the column ``(amp[a], amp[b])``, so ``B[1, 0]`` is the
    amplitude to go from ``a`` to ``b``.
    """

    dim: int
    index_a: np.ndarray
    index_b: np.ndarray
    blocks: np.ndarray

    def __post_init__(self):
        ia = np.array(self.index_a, dtype=np.int64).reshape(-1)
        ib = np.array(self.index_b, dtype=np.int64).reshape(-1)
        b = np.array(self.blocks, dtype=np.complex128)
        if b.ndim == 2:
            b = np.broadcast_to(b, (ia.size, 2, 2)).copy()
        if ia.size != ib.size or b.shape != (ia.size, 2, 2):
            raise ContractViolation("index_a, index_b and blocks must have matching lengths")
        allidx = np.concatenate([ia, ib])
        if allidx.size and (allidx.min() < 0 or allidx.max() >= self.dim):
            raise ContractViolation(f"pair index outside [0, {self.dim})")
        if np.unique(allidx).size != allidx.size:
            raise ContractViolation("pair indices must be pairwise disjoint")
        _check_finite(b, "pair blocks")
        if b.size:
            gram = np.einsum("kji,kjl->kil", b.conj(), b)
            err = np.max(np.abs(gram - np.eye(2)))
            if err > UNITARY_TOL:
                raise NotUnitaryError(f"pair block is not unitary (max deviation {err:.3g})")
        object.__setattr__(self, "index_a", _frozen(ia))
        object.__setattr__(self, "index_b", _frozen(ib))
        object.__setattr__(self, "blocks", _frozen(b))

    def _apply(self, arr):
        out = arr.copy()
        a = arr[self.index_a]
        b = arr[self.index_b]
        shape = (-1,) + (1,) * (arr.ndim - 1)
        bl = self.blocks
        out[self.index_a] = bl[:, 0, 0].reshape(shape) * a + bl[:, 0, 1].reshape(shape) * b
        out[self.index_b] = bl[:, 1, 0].reshape(shape) * a + bl[:, 1, 1].reshape(shape) * b
        return out

    def adjoint(self):
        return PairBlocks(self.dim, self.index_a, self.index_b, self.blocks.conj().transpose(0, 2, 1))


@dataclass(frozen=True, eq=False)
class Sequence(LinearOp):
    """Temporal composition: ``ops[0]`` is applied first."""

    ops: tuple
    dim: int = field(default=0)

    def __post_init__(self):
        ops = tuple(self.ops)
        for op in ops:
            if not isinstance(op, LinearOp):
                raise ContractViolation(f"sequence element {op!r} is not a LinearOp")
        dims = {op.dim for op in ops}
        if len(dims) > 1:
            raise ContractViolation(f"sequence mixes dimensions {sorted(dims)}")
        dim = dims.pop() if dims else self.dim
        if self.dim and dim != self.dim:
            raise ContractViolation(f"sequence dim {self.dim} does not match elements ({dim})")
        if dim < 1:
            raise ContractViolation("an empty sequence needs an explicit dim")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dim", dim)

    def _apply(self, arr):
        for op in self.ops:
            arr = op._apply(arr)
        return arr

    def adjoint(self):
        return Sequence(tuple(op.adjoint() for op in reversed(self.ops)), self.dim)


# ---------------------------------------------------------------------------
# Free functions
# ---------------------------------------------------------------------------


def apply(op: LinearOp, v: StateVector) -> StateVector:
    """Return ``op · v``."""
    if op.dim != v.dim:
        raise ContractViolation(f"operator dim {op.dim} does not match state dim {v.dim}")
    return StateVector(op._apply(v.amps), check=False)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``sum(conj(a[x]) * b[x])``."""
    if a.dim != b.dim:
        raise ContractViolation(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def adjoint(op: LinearOp) -> LinearOp:
    return op.adjoint()


def materialize(op: LinearOp, max_dim: int = MAX_DENSE_DIM) -> np.ndarray:
    """Dense matrix whose column ``x`` is ``apply(op, e_x)``."""
    if op.dim > max_dim:
        raise ResourceLimitError(f"refusing to materialize dim {op.dim} > cap {max_dim}")
    return op._apply(np.eye(op.dim, dtype=np.complex128))


def unitarity_error(op: LinearOp, max_dim: int = MAX_DENSE_DIM) -> float:
    """``max |G^dagger G - I|`` of the materialized operator."""
    g = materialize(op, max_dim)
    return float(np.max(np.abs(g.conj().T @ g - np.eye(op.dim))))


def is_unitary(op: LinearOp, tol: float = UNITARY_TOL) -> bool:
    return unitarity_error(op) <= tol


def random_unitary(dim: int, seed: int | np.random.Generator) -> Dense:
    """Haar-distributed unitary from the QR decomposition of a seeded complex Gaussian matrix."""
    if dim < 1:
        raise ContractViolation("dim must be positive")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return Dense(q)


def identity(dim: int) -> Diagonal:
    return Diagonal(np.ones(dim, dtype=np.complex128))
