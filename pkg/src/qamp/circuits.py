"""JSON gate lists for composed circuits.

A circuit file is either a bare list of gates or an object
``{"n": 3, "s": 0, "t": 5, "gates": [...]}``.  Gates::

    {"gate": "h", "qubit": 0}
    {"gate": "phase", "state": 3, "angle": 0.25}
    {"gate": "invert", "states": [1, 6]}
    {"gate": "dense", "matrix": [[...], ...]}            # full 2**n x 2**n
    {"gate": "dense", "qubit": 1, "matrix": [[...], ...]}  # 2x2 on one qubit

Matrix entries are real numbers or ``[re, im]`` pairs.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ContractViolation, DataFormatError
from .statevector import Dense, LinearOp, Sequence, SingleQubit, random_unitary
from .transforms import Predicate, m_gate, selective_inversion, selective_phase


def _entry(z) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise DataFormatError(f"complex entry must be [re, im], got {z!r}")
        return complex(float(z[0]), float(z[1]))
    if isinstance(z, bool) or not isinstance(z, (int, float)):
        raise DataFormatError(f"matrix entry must be a number or [re, im], got {z!r}")
    return complex(z)


def _matrix(raw) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise DataFormatError("matrix must be a non-empty list of rows")
    return np.array([[_entry(z) for z in row] for row in raw], dtype=np.complex128)


def _require(g: dict, key: str, i: int):
    if key not in g:
        raise DataFormatError(f"gate {i}: missing field {key!r}")
    return g[key]


def gate_from_json(g: dict, n: int, i: int = 0) -> LinearOp:
    dim = 1 << n
    if not isinstance(g, dict) or "gate" not in g:
        raise DataFormatError(f"gate {i}: expected an object with a 'gate' field")
    kind = g["gate"]
    if kind == "h":
        return SingleQubit(dim, int(_require(g, "qubit", i)), m_gate())
    if kind == "phase":
        return selective_phase(dim, {int(_require(g, "state", i)): float(_require(g, "angle", i))})
    if kind == "invert":
        return selective_inversion(dim, Predicate.of_states(dim, [int(x) for x in _require(g, "states", i)]))
    if kind == "dense":
        m = _matrix(_require(g, "matrix", i))
        if "qubit" in g:
            return SingleQubit(dim, int(g["qubit"]), m)
        if m.shape != (dim, dim):
            raise ContractViolation(f"gate {i}: dense matrix must be {dim}x{dim}, got {m.shape}")
        return Dense(m)
    raise DataFormatError(f"gate {i}: unknown gate type {kind!r}")


def circuit_from_json(gates: list, n: int) -> Sequence:
    """Temporal composition of the listed gates on ``n`` qubits (identity when empty)."""
    if not isinstance(gates, list):
        raise DataFormatError("gates must be a list")
    ops = tuple(gate_from_json(g, n, i) for i, g in enumerate(gates))
    return Sequence(ops, 1 << n)


def load_circuit(path: str | Path) -> dict:
    """Parse a circuit file into ``{"n", "s", "t", "gates"}`` (missing fields are None)."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(raw, list):
        return {"n": None, "s": None, "t": None, "gates": raw}
    if not isinstance(raw, dict) or "gates" not in raw:
        raise DataFormatError(f"{path}: expected a gate list or an object with 'gates'")
    return {"n": raw.get("n"), "s": raw.get("s"), "t": raw.get("t"), "gates": raw["gates"]}


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _cnot(n: int, control: int, target: int) -> np.ndarray:
    dim = 1 << n
    perm = np.arange(dim)
    flip = (perm >> control) & 1 == 1
    perm[flip] ^= 1 << target
    m = np.zeros((dim, dim))
    m[perm, np.arange(dim)] = 1.0
    return m


def random_circuit(n: int, n_gates: int, seed) -> list[dict]:
    """Seeded list of elementary gates: H, random 1-qubit unitaries, phases, inversions, CNOTs."""
    if n < 1:
        raise ContractViolation("n must be positive")
    rng = np.random.default_rng(seed)
    dim = 1 << n
    gates = []
    for _ in range(n_gates):
        kind = rng.integers(0, 5 if n > 1 else 4)
        if kind == 0:
            gates.append({"gate": "h", "qubit": int(rng.integers(n))})
        elif kind == 1:
            u = random_unitary(2, rng).matrix
            gates.append({"gate": "dense", "qubit": int(rng.integers(n)), "matrix": _matrix_json(u)})
        elif kind == 2:
            gates.append({"gate": "phase", "state": int(rng.integers(dim)), "angle": float(rng.uniform(0, 2 * np.pi))})
        elif kind == 3:
            k = int(rng.integers(1, dim))
            gates.append({"gate": "invert", "states": sorted(int(x) for x in rng.choice(dim, k, replace=False))})
        else:
            c, t = (int(x) for x in rng.choice(n, 2, replace=False))
            gates.append({"gate": "dense", "matrix": _matrix_json(_cnot(n, c, t))})
    return gates
