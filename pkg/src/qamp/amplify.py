"""Amplitude amplification for an arbitrary unitary ``U``.

The iterate is ``Q = -I_s U^-1 I_t U``.  Starting from ``v_s`` it keeps the
state inside ``span{v_s, U^-1 v_t}`` and rotates it by ``2*theta`` per step,
where ``sin(theta) = |<t|U|s>|``.  After ``j`` iterations and one more ``U``
the amplitude on ``t`` has modulus ``sin((2j + 1) * theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, ZeroCouplingError
from .statevector import Diagonal, LinearOp, Sequence, StateVector

ZERO_COUPLING_TOL = 1e-14


@dataclass(frozen=True)
class AmplificationProblem:
    U: LinearOp
    s: int
    t: int

    def __post_init__(self):
        for name, x in (("s", self.s), ("t", self.t)):
            if not 0 <= x < self.U.dim:
                raise ContractViolation(f"{name} = {x} outside [0, {self.U.dim})")

    @property
    def dim(self) -> int:
        return self.U.dim


@dataclass(frozen=True)
class CouplingReport:
    u_ts: complex
    magnitude: float
    theta: float
    eta_opt: int


@dataclass(frozen=True)
class IterationTrace:
    """Projections of ``Q^j v_s`` for ``j = 0..eta``.

    ``a_s`` is ``<v_s|psi_j>`` and ``a_t`` is ``<U^-1 v_t|psi_j>`` (the amplitude
    on ``t`` if ``U`` were applied now).  The two basis vectors are not
    orthogonal, so ``a_perp`` gives the coordinate along the in-span direction
    orthogonal to ``v_s``; ``|a_s|^2 + |a_perp|^2 + residual^2 = 1``.
    """

    a_s: np.ndarray
    a_t: np.ndarray
    a_perp: np.ndarray
    residual: np.ndarray

    def __len__(self) -> int:
        return self.a_s.size


class RunResult(NamedTuple):
    state: StateVector
    trace: IterationTrace | None


def _basis(dim: int, x: int) -> np.ndarray:
    e = np.zeros(dim, dtype=np.complex128)
    e[x] = 1.0
    return e


def _signed_inversion(dim: int, x: int, sign: float = 1.0) -> Diagonal:
    d = np.full(dim, sign, dtype=np.complex128)
    d[x] = -sign
    return Diagonal(d)


def build_q(p: AmplificationProblem) -> Sequence:
    """``Q = -I_s U^-1 I_t U`` as the temporal sequence U, I_t, U^-1, -I_s."""
    dim = p.dim
    return Sequence((p.U, _signed_inversion(dim, p.t), p.U.adjoint(), _signed_inversion(dim, p.s, -1.0)))


def build_q_rotated(p: AmplificationProblem, V: LinearOp) -> Sequence:
    """``Q`` with ``U`` replaced by ``V U``: temporal order U, V, I_t, V^-1, U^-1, -I_s."""
    if V.dim != p.dim:
        raise ContractViolation(f"V dim {V.dim} does not match U dim {p.dim}")
    return build_q(AmplificationProblem(Sequence((p.U, V)), p.s, p.t))


def optimal_iterations(theta: float) -> int:
    """``round(pi/(4 theta) - 1/2)`` rounding halves up, clamped at zero."""
    if theta <= 0:
        raise ZeroCouplingError("theta must be positive")
    # floor(x - 1/2 + 1/2) == floor(x)
    return max(0, math.floor(math.pi / (4.0 * theta)))


def coupling(p: AmplificationProblem) -> CouplingReport:
    u_ts = complex(p.U._apply(_basis(p.dim, p.s))[p.t])
    mag = min(abs(u_ts), 1.0)
    if mag <= ZERO_COUPLING_TOL:
        raise ZeroCouplingError(f"<{p.t}|U|{p.s}> = 0: the target is unreachable")
    theta = math.asin(mag)
    return CouplingReport(u_ts, mag, theta, optimal_iterations(theta))


def success_probability(theta: float, eta: int) -> float:
    """Probability on ``t`` after ``eta`` iterations and a final ``U``."""
    return math.sin((2 * eta + 1) * theta) ** 2


def two_by_two(u_ts: complex) -> np.ndarray:
    """Action of ``Q`` on the (non-orthogonal) pair ``{v_s, U^-1 v_t}``.

    Row 0 holds the coefficients of ``Q v_s``, row 1 those of ``Q U^-1 v_t``.
    """
    u = complex(u_ts)
    if abs(u) > 1.0 + 1e-12:
        raise ContractViolation(f"|u_ts| = {abs(u)} exceeds 1")
    return np.array([[1 - 4 * abs(u) ** 2, 2 * u], [-2 * u.conjugate(), 1]], dtype=np.complex128)


def subspace_basis(p: AmplificationProblem) -> tuple[np.ndarray, np.ndarray]:
    """``(v_s, U^-1 v_t)`` as dense vectors."""
    v_s = _basis(p.dim, p.s)
    w = p.U.adjoint()._apply(_basis(p.dim, p.t))
    return v_s, w


def subspace_coordinates(vec: np.ndarray, p: AmplificationProblem) -> tuple[complex, complex, float]:
    """Least-squares ``(c_s, c_t, residual)`` with ``vec ~ c_s v_s + c_t U^-1 v_t``."""
    v_s, w = subspace_basis(p)
    basis = np.stack([v_s, w], axis=1)
    coef, *_ = np.linalg.lstsq(basis, vec, rcond=None)
    resid = float(np.linalg.norm(vec - basis @ coef))
    return complex(coef[0]), complex(coef[1]), resid


def _perp_direction(v_s: np.ndarray, w: np.ndarray, s: int) -> np.ndarray | None:
    e2 = w.copy()
    e2[s] -= w[s]
    nrm = np.linalg.norm(e2)
    if nrm < 1e-12:
        return None
    return e2 / nrm


def run(
    p: AmplificationProblem,
    eta: int,
    want_trace: bool = False,
    final_u: bool = True,
    q: LinearOp | None = None,
) -> RunResult:
    """Start at ``v_s``, apply ``Q`` ``eta`` times, then (by default) ``U`` once."""
    if eta < 0:
        raise ContractViolation(f"eta must be >= 0, got {eta}")
    q = build_q(p) if q is None else q
    psi = _basis(p.dim, p.s)

    trace = None
    if want_trace:
        v_s, w = subspace_basis(p)
        e2 = _perp_direction(v_s, w, p.s)
        a_s = np.empty(eta + 1, dtype=np.complex128)
        a_t = np.empty(eta + 1, dtype=np.complex128)
        a_perp = np.zeros(eta + 1, dtype=np.complex128)
        resid = np.empty(eta + 1)

    for j in range(eta + 1):
        if j:
            psi = q._apply(psi)
        if want_trace:
            a_s[j] = psi[p.s]
            a_t[j] = np.vdot(w, psi)
            rest = psi.copy()
            rest[p.s] -= a_s[j]
            if e2 is not None:
                a_perp[j] = np.vdot(e2, psi)
                rest -= a_perp[j] * e2
            resid[j] = np.linalg.norm(rest)

    if want_trace:
        trace = IterationTrace(a_s, a_t, a_perp, resid)
    if final_u:
        psi = p.U._apply(psi)
    return RunResult(StateVector(psi, check=False), trace)


def compose_algorithm(gates) -> Sequence:
    """Temporal composition of elementary gates."""
    gates = tuple(gates)
    if not gates:
        raise ContractViolation("cannot compose an empty gate list without a dimension")
    return Sequence(gates)


def invert_algorithm(alg) -> LinearOp:
    """Adjoints in reverse order; accepts a composed operator or a gate list."""
    if not isinstance(alg, LinearOp):
        alg = compose_algorithm(alg)
    return alg.adjoint()


@dataclass(frozen=True)
class GeneralResult:
    coupling: CouplingReport
    eta: int
    initial_probability: float
    final_probability: float
    predicted_probability: float
    state: StateVector
    trace: IterationTrace | None


def amplify_general(
    alg: LinearOp, s: int, t: int, eta: int | None = None, want_trace: bool = False
) -> GeneralResult:
    """Boost an arbitrary algorithm's ``s -> t`` transition by iterating ``-I_s alg^-1 I_t alg``."""
    p = AmplificationProblem(alg, s, t)
    c = coupling(p)
    eta = c.eta_opt if eta is None else eta
    state, trace = run(p, eta, want_trace=want_trace)
    return GeneralResult(
        coupling=c,
        eta=eta,
        initial_probability=c.magnitude**2,
        final_probability=state.probability(t),
        predicted_probability=success_probability(c.theta, eta),
        state=state,
        trace=trace,
    )
