"""Median and mean estimation by amplitude amplification, plus Born-rule sampling.

Median: with ``R`` inverting every state whose value is below ``theta``,
``<0|W R W|0>`` equals the imbalance ``eps(theta) = (#above - #below) / N``.

Mean: on ``2**(n+2)`` states (``S_a`` = ``a``, ``R_a`` = ``N + a``,
``Q`` = ``2N``) the sequence M1, W1, R1, W1, M2 gives
``<S0|U|S0> = i c mu / sqrt(2)``.

Both amplitudes are small, so they are boosted with ``Q = -I_0 U^-1 I_0 U``
and read out from the frequency of the start state.  After ``eta`` iterations
and a final ``U`` the amplitude is ``sin((2 eta + 1) asin|a|)``, which the
estimators invert exactly.

Sampling uses NumPy's PCG64 generator (``numpy.random.default_rng(seed)``):
each shot draws one ``Generator.random()`` double and maps it through the
cumulative Born distribution, so a seed fixes every sample on every platform.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .amplify import AmplificationProblem, build_q, run
from .errors import ContractViolation, DataFormatError, DomainError
from .statevector import Diagonal, LinearOp, PairBlocks, Sequence, StateVector
from .transforms import m_gate, walsh_hadamard

DEFAULT_SHOTS = 256
RANGES = ("unit", "centered")
_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_outcomes(v: StateVector, shots: int, seed) -> np.ndarray:
    """``shots`` basis indices drawn with probabilities ``|amps|^2``."""
    if shots < 1:
        raise ContractViolation(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(v.probabilities())
    u = rng.random(shots) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), v.dim - 1)


def born_sample(v: StateVector, outcome_set: Iterable[int], shots: int, seed) -> float:
    """Fraction of ``shots`` Born samples that land in ``outcome_set``."""
    draws = sample_outcomes(v, shots, seed)
    hits = np.isin(draws, np.fromiter(outcome_set, dtype=np.int64))
    return float(np.count_nonzero(hits)) / shots


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DataSet:
    """``N = 2**n`` real values; ``unit`` means each in [0, 1], ``centered`` each in (-0.5, 0.5)."""

    values: np.ndarray
    declared_range: str = "unit"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if self.declared_range not in RANGES:
            raise ContractViolation(f"declared_range must be one of {RANGES}")
        N = v.size
        if N < 2 or N & (N - 1):
            raise ContractViolation(f"dataset length must be a power of two >= 2, got {N}")
        if not np.all(np.isfinite(v)):
            raise ContractViolation("dataset contains NaN or Inf")
        if self.declared_range == "unit":
            bad = np.flatnonzero((v < 0.0) | (v > 1.0))
        else:
            bad = np.flatnonzero((v <= -0.5) | (v >= 0.5))
        if bad.size:
            i = int(bad[0])
            raise ContractViolation(f"value {v[i]!r} at index {i} outside the {self.declared_range} range")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size.bit_length() - 1


def load_values(path: str | Path, declared_range: str) -> DataSet:
    """Read newline-separated decimals or a JSON array of numbers."""
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(raw, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw
        ):
            raise DataFormatError(f"{path}: expected a JSON array of numbers")
        values = [float(x) for x in raw]
    else:
        values = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: not a number: {line!r}") from None
    return DataSet(np.array(values), declared_range)


# ---------------------------------------------------------------------------
# Shared amplified read-out
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Readout:
    amplitude: float   # |amplitude| on the start state before sampling
    frequency: float
    estimate: float    # |a| recovered from the frequency
    saturated: bool


def _amplified_readout(U: LinearOp, eta: int, shots: int, rng, clamp: float) -> _Readout:
    p = AmplificationProblem(U, 0, 0)
    state, _ = run(p, eta)
    freq = born_sample(state, (0,), shots, rng)
    saturated = freq >= 1.0
    if saturated:
        est = clamp
    else:
        est = math.sin(math.asin(math.sqrt(freq)) / (2 * eta + 1))
    return _Readout(abs(state[0]), freq, est, saturated)


def invert_frequency(p: float, eta: int) -> float:
    """``|a|`` such that ``sin((2 eta + 1) asin|a|)^2 = p``."""
    return math.sin(math.asin(math.sqrt(min(max(p, 0.0), 1.0))) / (2 * eta + 1))


# ---------------------------------------------------------------------------
# Median
# ---------------------------------------------------------------------------


def _as_unit(d) -> DataSet:
    if not isinstance(d, DataSet):
        d = DataSet(d, "unit")
    if d.declared_range != "unit":
        raise ContractViolation("median estimation needs a dataset declared on the unit range")
    return d


def epsilon_of(d: DataSet, theta: float) -> float:
    """Classical imbalance ``(#{x >= theta} - #{x < theta}) / N``; ties count as above."""
    d = _as_unit(d)
    below = int(np.count_nonzero(d.values < theta))
    return (d.N - 2 * below) / d.N


def threshold_inversion(d: DataSet, theta: float) -> Diagonal:
    """``R``: -1 on states whose value is below ``theta``."""
    d = _as_unit(d)
    return Diagonal(np.where(d.values < theta, -1.0, 1.0).astype(np.complex128))


def median_unitary(d: DataSet, theta: float) -> Sequence:
    """``W R W``; self-inverse, with ``<0|U|0> = eps(theta)``."""
    d = _as_unit(d)
    w = walsh_hadamard(d.n)
    return Sequence((w, threshold_inversion(d, theta), w))


def shifted_median_unitary(d: DataSet, theta: float, shift: float) -> tuple[Sequence, float]:
    """``W R' W`` on ``n + 1`` qubits with ``<0|U|0> = (eps(theta) + delta) / 2``.

    The upper half of the register is data-independent padding whose
    inversion count sets ``delta = 1 - 2j/N``; ``delta`` is ``shift`` rounded
    to that grid and is returned with the operator.
    """
    d = _as_unit(d)
    N = d.N
    j = int(round(N * (1.0 - shift) / 2.0))
    j = min(max(j, 0), N)
    pad = np.ones(N)
    pad[:j] = -1.0
    diag = np.concatenate([np.where(d.values < theta, -1.0, 1.0), pad]).astype(np.complex128)
    w = walsh_hadamard(d.n + 1)
    return Sequence((w, Diagonal(diag), w)), 1.0 - 2.0 * j / N


def median_iterations(epsilon_0: float) -> int:
    """``max(1, floor(1/(8 eps0)))``, or 0 when ``eps0 > 1/4``.

    With one iteration the read-out folds over for ``|eps| > 1/2``, which the
    bound ``|eps| < 2 eps0`` only excludes when ``eps0 <= 1/4``.
    """
    if epsilon_0 <= 0:
        raise DomainError("epsilon_0 must be positive")
    if epsilon_0 > 0.25:
        return 0
    return max(1, math.floor(1.0 / (8.0 * epsilon_0)))


@dataclass(frozen=True)
class MedianRun:
    theta: float
    epsilon_true: float
    epsilon_0: float
    eta: int
    shots: int
    epsilon_estimate: float
    amplitude: float
    frequency: float
    saturated: bool
    queries: int


def _median_run(d: DataSet, theta: float, epsilon_0: float, shots: int, rng) -> MedianRun:
    eta = median_iterations(epsilon_0)
    r = _amplified_readout(median_unitary(d, theta), eta, shots, rng, clamp=2 * epsilon_0)
    return MedianRun(
        theta=theta,
        epsilon_true=epsilon_of(d, theta),
        epsilon_0=epsilon_0,
        eta=eta,
        shots=shots,
        epsilon_estimate=r.estimate,
        amplitude=r.amplitude,
        frequency=r.frequency,
        saturated=r.saturated,
        queries=shots * (2 * eta + 1),
    )


def estimate_epsilon(d: DataSet, theta: float, epsilon_0: float, shots: int = DEFAULT_SHOTS, seed=0) -> MedianRun:
    """Estimate ``|eps(theta)|`` given ``|eps(theta)| < 2 epsilon_0``.

    Each shot runs ``eta`` iterations of ``-I_0 U^-1 I_0 U`` then ``U`` and
    observes whether the register is back in ``0``; one ``R`` is one query.
    The ``epsilon_true`` field is the classical value, kept for reporting.
    """
    d = _as_unit(d)
    return _median_run(d, theta, epsilon_0, shots, np.random.default_rng(seed))


def _shifted_magnitude(d, theta, shift, epsilon_0, shots, rng) -> tuple[float, int]:
    eta = median_iterations(epsilon_0)
    U, delta = shifted_median_unitary(d, theta, shift)
    r = _amplified_readout(U, eta, shots, rng, clamp=2 * epsilon_0)
    return 2.0 * r.estimate, shots * (2 * eta + 1)


@dataclass
class MedianReport:
    theta_hat: float
    precision: float
    epsilon_estimate: float | None
    terminated_by: str
    queries: int
    probes: int
    seed: int
    runs: list = field(default_factory=list, repr=False)


def _ladder(eps: float) -> list[float]:
    levels = [eps]
    while levels[-1] * 2 <= 0.5:
        levels.append(levels[-1] * 2)
    return levels


def estimate_median(
    d: DataSet, eps: float, seed=0, shots: int = DEFAULT_SHOTS
) -> tuple[float, MedianReport]:
    """Find ``theta`` with ``|eps(theta)| <= eps`` by bisection on ``[0, 1]``.

    At each midpoint ``|eps|`` is estimated on a ladder ``eps0 = eps * 2**k``,
    starting at the coarsest rung and stepping down while the estimate is
    below ``0.75 * eps0``.  At the finest rung an estimate ``<= 0.75 * eps``
    is accepted.  Otherwise the sign of ``eps`` is read by comparing the
    magnitudes of ``eps + delta`` and ``eps - delta`` (padded register,
    ``delta = eps0``) and the bracket is halved.  The bracket also stops at
    width ``1/N``.
    """
    d = _as_unit(d)
    N = d.N
    if not 4.0 / N <= eps < 1.0:
        raise ContractViolation(f"precision must lie in [4/N, 1) = [{4.0 / N}, 1), got {eps}")
    rng = np.random.default_rng(seed)
    levels = _ladder(eps)
    top = len(levels) - 1
    lo, hi = 0.0, 1.0
    queries = 0
    probes = 0
    runs = []
    last_est = None

    while True:
        m = 0.5 * (lo + hi)
        if hi - lo <= 1.0 / N:
            return m, MedianReport(m, eps, last_est, "bracket", queries, probes, int(seed), runs)
        probes += 1
        k, floor_k = top, 0
        while True:
            r = _median_run(d, m, levels[k], shots, rng)
            runs.append(r)
            queries += r.queries
            last_est = r.epsilon_estimate
            if r.saturated and k < top:
                k += 1
                floor_k = k
                continue
            if k == 0 and r.epsilon_estimate <= 0.75 * eps:
                return m, MedianReport(m, eps, last_est, "precision", queries, probes, int(seed), runs)
            if k > floor_k and r.epsilon_estimate < 0.75 * levels[k]:
                k -= 1
                continue
            break
        eps0 = levels[k]
        plus, q1 = _shifted_magnitude(d, m, eps0, eps0, shots, rng)
        minus, q2 = _shifted_magnitude(d, m, -eps0, eps0, shots, rng)
        queries += q1 + q2
        if plus >= minus:
            lo = m
        else:
            hi = m


def classical_median_error(d: DataSet, theta: float) -> float:
    return abs(epsilon_of(d, theta))


# ---------------------------------------------------------------------------
# Mean
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanStateSpace:
    """Index map on ``n + 2`` qubits: ``S_a = a``, ``R_a = N + a``, ``Q = 2N``."""

    n: int

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def dim(self) -> int:
        return 1 << (self.n + 2)

    def s_index(self, a: int) -> int:
        return a

    def r_index(self, a: int) -> int:
        return self.N + a

    @property
    def q_index(self) -> int:
        return 2 * self.N


def _raw_values(d) -> np.ndarray:
    if isinstance(d, DataSet):
        return d.values
    v = np.asarray(d, dtype=np.float64).reshape(-1)
    if v.size < 2 or v.size & (v.size - 1):
        raise ContractViolation(f"dataset length must be a power of two >= 2, got {v.size}")
    return v


def scale_for(values) -> float:
    """Largest ``c <= 1`` with ``c * max|x| <= 1/sqrt(2)``."""
    peak = float(np.max(np.abs(_raw_values(values))))
    return 1.0 if peak == 0.0 else min(1.0, 1.0 / (_SQRT2 * peak))


_M1 = np.array([[math.sqrt(3) / 2, 0.5], [0.5, -math.sqrt(3) / 2]], dtype=np.complex128)
_M2 = np.array([[1, -1], [1, 1]], dtype=np.complex128) / _SQRT2


def mean_ops(d, c: float) -> tuple[PairBlocks, PairBlocks, PairBlocks, Sequence]:
    """``(M1, M2, R1, W1)`` on the ``2**(n+2)``-state encoding."""
    x = _raw_values(d)
    if c <= 0:
        raise DomainError(f"scale must be positive, got {c}")
    cx = c * x
    if np.max(np.abs(cx)) > 1.0 / _SQRT2 + 1e-12:
        raise DomainError(f"scale violation: c * max|x| = {np.max(np.abs(cx))!r} > 1/sqrt(2)")
    space = MeanStateSpace(x.size.bit_length() - 1)
    dim, N = space.dim, space.N
    s0, q = space.s_index(0), space.q_index

    m1 = PairBlocks(dim, [s0], [q], _M1[None])
    m2 = PairBlocks(dim, [s0], [q], _M2[None])

    off = np.sqrt(np.clip(2.0 / 3.0 - (4.0 / 3.0) * cx**2, 0.0, None))
    blocks = np.empty((N, 2, 2), dtype=np.complex128)
    blocks[:, 0, 0] = (1 + 2j * cx) / math.sqrt(3)
    blocks[:, 0, 1] = off
    blocks[:, 1, 0] = off
    blocks[:, 1, 1] = (-1 + 2j * cx) / math.sqrt(3)
    a = np.arange(N)
    r1 = PairBlocks(dim, a, N + a, blocks)

    # W-H on the low n qubits, restricted to the S block
    m = m_gate()
    stages = []
    for bit in range(space.n):
        lo = a[(a >> bit) & 1 == 0]
        stages.append(PairBlocks(dim, lo, lo | (1 << bit), np.broadcast_to(m, (lo.size, 2, 2))))
    w1 = Sequence(tuple(stages), dim)
    return m1, m2, r1, w1


def mean_unitary(d, c: float) -> Sequence:
    """M1, W1, R1, W1, M2 applied in that order; ``<S0|U|S0> = i c mu / sqrt(2)``."""
    m1, m2, r1, w1 = mean_ops(d, c)
    return Sequence((m1, w1, r1, w1, m2))


def mean_iterations(epsilon_0: float) -> int:
    if epsilon_0 <= 0:
        raise DomainError("epsilon_0 must be positive")
    return max(1, math.floor(1.0 / (2.0 * epsilon_0)))


@dataclass(frozen=True)
class MeanRun:
    c: float
    epsilon_0: float
    eta: int
    shots: int
    mu_estimate: float
    magnitude: float
    amplitude: float
    frequency: float
    saturated: bool
    queries: int


def _mean_magnitude(x, epsilon_0, shots, rng, c=None) -> tuple[float, _Readout, float, int]:
    c = scale_for(x) if c is None else c
    eta = mean_iterations(epsilon_0)
    clamp = c * 2 * epsilon_0 / _SQRT2
    r = _amplified_readout(mean_unitary(x, c), eta, shots, rng, clamp=clamp)
    return _SQRT2 * r.estimate / c, r, c, shots * (2 * eta + 1)


def _mu_stage(x: np.ndarray, epsilon_0: float, shots: int, rng, c=None) -> MeanRun:
    mag, r, c, queries = _mean_magnitude(x, epsilon_0, shots, rng, c)
    sign = 1.0
    if mag > 0.0:
        delta = epsilon_0 / 2
        plus, _, _, q1 = _mean_magnitude(x + delta, epsilon_0, shots, rng)
        minus, _, _, q2 = _mean_magnitude(x - delta, epsilon_0, shots, rng)
        queries += q1 + q2
        sign = 1.0 if plus >= minus else -1.0
    return MeanRun(
        c=c,
        epsilon_0=epsilon_0,
        eta=mean_iterations(epsilon_0),
        shots=shots,
        mu_estimate=sign * mag,
        magnitude=mag,
        amplitude=r.amplitude,
        frequency=r.frequency,
        saturated=r.saturated,
        queries=queries,
    )


def estimate_mu_stage(d, c: float | None, epsilon_0: float, shots: int = DEFAULT_SHOTS, seed=0) -> MeanRun:
    """One loop stage: estimate ``mu`` to within ``epsilon_0 / 2`` given ``c |mu| < epsilon_0``.

    The magnitude comes from the amplified ``S0`` frequency.  The sign comes
    from two more runs on the data shifted by ``+epsilon_0/2`` and
    ``-epsilon_0/2``: the larger magnitude shows which way ``mu`` points.
    Those runs are skipped when the magnitude is exactly zero.  ``c`` defaults
    to :func:`scale_for`.
    """
    return _mu_stage(_raw_values(d), epsilon_0, shots, np.random.default_rng(seed), c)


@dataclass
class MeanReport:
    mu_hat: float
    precision: float
    queries: int
    stages: list
    seed: int


def estimate_mean(d: DataSet, eps: float, seed=0, shots: int = DEFAULT_SHOTS) -> tuple[float, MeanReport]:
    """Halving loop: estimate the residual mean, subtract it, halve ``eps0`` until ``eps0 <= eps``."""
    if isinstance(d, DataSet) and d.declared_range != "centered":
        raise ContractViolation("mean estimation needs a dataset declared on the centered range")
    x = _raw_values(d).copy()
    floor_eps = 2.0 ** -(x.size.bit_length() - 1 + 2)
    if eps < floor_eps:
        raise ContractViolation(f"precision {eps} below the resolution floor 2**-(n+2) = {floor_eps}")
    rng = np.random.default_rng(seed)
    eps0 = 0.5
    mu_hat = 0.0
    stages = []
    queries = 0
    while True:
        stage = _mu_stage(x, eps0, shots, rng)
        stages.append(stage)
        queries += stage.queries
        mu_hat += stage.mu_estimate
        x = x - stage.mu_estimate
        if eps0 > eps:
            eps0 /= 2
        else:
            break
    return mu_hat, MeanReport(mu_hat, eps, queries, stages, int(seed))
