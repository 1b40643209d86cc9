"""Search built on the amplification engine: from |0>, from any basis state, and near a known word."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplify import AmplificationProblem, CouplingReport, IterationTrace, coupling, run, success_probability
from .errors import ContractViolation, DomainError
from .statevector import LinearOp, StateVector
from .statistics import sample_outcomes
from .transforms import alpha_gate, tensor_gate, walsh_hadamard

MAX_SEARCH_QUBITS = 24  # the CLI applies a tighter memory guard (--max-dim)


@dataclass(frozen=True)
class SearchResult:
    eta_used: int
    predicted_success: float
    simulated_success: float
    sampled_outcome: int
    oracle_applications: int
    seed: int
    coupling: CouplingReport
    amp_t: complex
    state: StateVector
    trace: IterationTrace | None = None


@dataclass(frozen=True)
class NearbyProblem:
    """Target differs from ``known_word`` in exactly ``k`` of ``n`` bits."""

    n: int
    known_word: int
    k: int
    target: int
    alpha: float | None = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ContractViolation(f"k must lie in [1, n], got k={self.k}, n={self.n}")
        dim = 1 << self.n
        for name, x in (("known_word", self.known_word), ("target", self.target)):
            if not 0 <= x < dim:
                raise ContractViolation(f"{name} = {x} outside [0, {dim})")
        dist = bin(self.known_word ^ self.target).count("1")
        if dist != self.k:
            raise ContractViolation(f"target is {dist} bits from the known word, expected k = {self.k}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.n / self.k)
        elif self.alpha < 1:
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_SEARCH_QUBITS:
        raise ContractViolation(f"n must lie in [1, {MAX_SEARCH_QUBITS}], got {n}")


def _search(U: LinearOp, s: int, t: int, seed: int, eta: int | None, want_trace: bool) -> SearchResult:
    p = AmplificationProblem(U, s, t)
    c = coupling(p)
    eta = c.eta_opt if eta is None else eta
    state, trace = run(p, eta, want_trace=want_trace)
    outcome = int(sample_outcomes(state, 1, seed)[0])
    return SearchResult(
        eta_used=eta,
        predicted_success=success_probability(c.theta, eta),
        simulated_success=state.probability(t),
        sampled_outcome=outcome,
        oracle_applications=eta,
        seed=seed,
        coupling=c,
        amp_t=state[t],
        state=state,
        trace=trace,
    )


def search_from_zero(n: int, target: int, seed: int = 0, eta: int | None = None, want_trace: bool = False) -> SearchResult:
    """Search with ``U = W`` starting from ``|0...0>``; ``eta`` defaults to the optimum."""
    return search_from_basis(n, 0, target, seed, eta, want_trace)


def search_from_basis(
    n: int, s: int, target: int, seed: int = 0, eta: int | None = None, want_trace: bool = False
) -> SearchResult:
    _check_n(n)
    return _search(walsh_hadamard(n), s, target, seed, eta, want_trace)


def nearby_search(p: NearbyProblem, seed: int = 0, eta: int | None = None, want_trace: bool = False) -> SearchResult:
    """Search with the alpha gate on every qubit, starting from the known word."""
    _check_n(p.n)
    U = tensor_gate(p.n, alpha_gate(p.alpha))
    return _search(U, p.known_word, p.target, seed, eta, want_trace)


def nearby_coupling(n: int, k: int, alpha: float) -> float:
    """``|<t|U|s>| = (1 - 1/alpha)**((n-k)/2) * alpha**(-k/2)``; maximal at ``alpha = n/k``."""
    if not 1 <= k <= n:
        raise ContractViolation(f"k must lie in [1, n], got k={k}, n={n}")
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if n == k:
        return alpha ** (-k / 2)
    return (1.0 - 1.0 / alpha) ** ((n - k) / 2) * alpha ** (-k / 2)


@dataclass(frozen=True)
class StirlingEstimate:
    steps: float           # 1 / coupling at alpha = n/k
    sqrt_binomial: float   # sqrt(C(n, k)), the square root of the search-space size


def stirling_steps(n: int, k: int) -> StirlingEstimate:
    return StirlingEstimate(1.0 / nearby_coupling(n, k, n / k), math.sqrt(math.comb(n, k)))


def classical_search(n: int, target: int, seed: int = 0) -> int:
    """Evaluations used by a classical sampler drawing without replacement until it hits ``target``."""
    N = 1 << n
    if not 0 <= target < N:
        raise ContractViolation(f"target {target} outside [0, {N})")
    order = np.random.default_rng(seed).permutation(N)
    return int(np.flatnonzero(order == target)[0]) + 1
