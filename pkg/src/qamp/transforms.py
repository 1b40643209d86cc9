"""Named transforms: the M gate, Walsh-Hadamard, selective phase/inversion, the ancilla oracle, the alpha gate."""
from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .errors import ContractViolation, DomainError
from .statevector import Diagonal, PairBlocks, Sequence, SingleQubit

_INV_SQRT2 = math.sqrt(0.5)  # same rounding as alpha_gate(2)


class Predicate:
    """A boolean function over ``[0, dim)`` stored as an explicit bit array."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[bool]):
        b = np.array(bits, dtype=bool).reshape(-1)
        if b.size == 0:
            raise ContractViolation("predicate needs at least one entry")
        b.setflags(write=False)
        self._bits = b

    @classmethod
    def single(cls, dim: int, x: int) -> "Predicate":
        if not 0 <= x < dim:
            raise ContractViolation(f"index {x} outside [0, {dim})")
        b = np.zeros(dim, dtype=bool)
        b[x] = True
        return cls(b)

    @classmethod
    def of_states(cls, dim: int, states: Iterable[int]) -> "Predicate":
        b = np.zeros(dim, dtype=bool)
        for x in states:
            if not 0 <= x < dim:
                raise ContractViolation(f"index {x} outside [0, {dim})")
            b[x] = True
        return cls(b)

    @classmethod
    def random(cls, dim: int, seed) -> "Predicate":
        return cls(np.random.default_rng(seed).integers(0, 2, dim).astype(bool))

    @property
    def dim(self) -> int:
        return self._bits.size

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def __call__(self, x: int) -> bool:
        return bool(self._bits[x])


def m_gate() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2


def walsh_hadamard(n: int) -> Sequence:
    """M applied to each of ``n`` qubits, qubit 0 first."""
    if not 1 <= n <= 24:
        raise DomainError(f"walsh_hadamard needs 1 <= n <= 24, got {n}")
    dim = 1 << n
    m = m_gate()
    return Sequence(tuple(SingleQubit(dim, q, m) for q in range(n)))


def selective_phase(dim: int, spec: Mapping[int, float]) -> Diagonal:
    """Diagonal ``exp(i*phi(x))``; states missing from ``spec`` keep phase 0."""
    phases = np.zeros(dim)
    for x, phi in spec.items():
        if not 0 <= x < dim:
            raise ContractViolation(f"index {x} outside [0, {dim})")
        phases[x] = phi
    return Diagonal(np.exp(1j * phases))


def selective_inversion(dim: int, f: Predicate) -> Diagonal:
    """-1 where ``f`` holds, +1 elsewhere."""
    if f.dim != dim:
        raise ContractViolation(f"predicate dim {f.dim} does not match {dim}")
    return Diagonal(np.where(f.bits, -1.0, 1.0).astype(np.complex128))


def invert_state(dim: int, x: int) -> Diagonal:
    """``I_x``: inversion of the single basis state ``x``."""
    return selective_inversion(dim, Predicate.single(dim, x))


def ancilla_oracle(n: int, f: Predicate) -> PairBlocks:
    """``|x, b> -> |x, f(x) XOR b>`` on ``n + 1`` qubits, ancilla as the most significant qubit."""
    dim = 1 << n
    if f.dim != dim:
        raise ContractViolation(f"predicate dim {f.dim} does not match 2**{n}")
    marked = np.flatnonzero(f.bits)
    x_gate = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    return PairBlocks(2 * dim, marked, marked + dim, np.broadcast_to(x_gate, (marked.size, 2, 2)))


def alpha_gate(alpha: float) -> np.ndarray:
    """Stay amplitude ``sqrt(1 - 1/alpha)``, flip amplitude ``1/sqrt(alpha)``; alpha = 2 gives M."""
    if not alpha >= 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    stay = math.sqrt(1.0 - 1.0 / alpha)
    flip = math.sqrt(1.0 / alpha)
    return np.array([[stay, flip], [flip, -stay]], dtype=np.complex128)


def tensor_gate(n: int, gate: np.ndarray) -> Sequence:
    """The same 2x2 gate on every qubit."""
    dim = 1 << n
    return Sequence(tuple(SingleQubit(dim, q, gate) for q in range(n)))
