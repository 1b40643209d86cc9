import json

import numpy as np
import pytest

from qamp.circuits import circuit_from_json, gate_from_json, load_circuit, random_circuit
from qamp.errors import ContractViolation, DataFormatError, NotUnitaryError
from qamp.statevector import materialize
from qamp.transforms import walsh_hadamard

from conftest import kron_all


class TestParsing:
    def test_walsh_hadamard_list(self):
        gates = [{"gate": "h", "qubit": q} for q in range(3)]
        np.testing.assert_allclose(materialize(circuit_from_json(gates, 3)), materialize(walsh_hadamard(3)), atol=1e-15)

    def test_phase_and_invert(self):
        op = circuit_from_json(
            [{"gate": "phase", "state": 1, "angle": np.pi}, {"gate": "invert", "states": [1, 2]}], 2
        )
        np.testing.assert_allclose(np.diag(materialize(op)), [1, 1, -1, 1], atol=1e-15)

    def test_complex_entries(self):
        g = gate_from_json({"gate": "dense", "qubit": 0, "matrix": [[1, 0], [0, [0, 1]]]}, 1)
        np.testing.assert_allclose(materialize(g), np.diag([1, 1j]))

    def test_dense_full(self):
        x = [[0, 1], [1, 0]]
        g = gate_from_json({"gate": "dense", "qubit": 1, "matrix": x}, 2)
        np.testing.assert_allclose(materialize(g), kron_all([np.eye(2), np.array(x)]))

    def test_empty_is_identity(self):
        np.testing.assert_array_equal(materialize(circuit_from_json([], 2)), np.eye(4))

    def test_non_unitary(self):
        with pytest.raises(NotUnitaryError):
            gate_from_json({"gate": "dense", "matrix": [[1, 1], [0, 1]]}, 1)

    def test_dense_shape(self):
        with pytest.raises(ContractViolation):
            gate_from_json({"gate": "dense", "matrix": [[1, 0], [0, 1]]}, 2)

    @pytest.mark.parametrize(
        "gate",
        [{"gate": "cnot"}, {"qubit": 0}, {"gate": "h"}, {"gate": "dense", "matrix": [[1, "x"], [0, 1]]}],
    )
    def test_malformed(self, gate):
        with pytest.raises(DataFormatError):
            gate_from_json(gate, 2)

    def test_load_forms(self, tmp_path):
        a = tmp_path / "a.json"
        a.write_text(json.dumps([{"gate": "h", "qubit": 0}]))
        b = tmp_path / "b.json"
        b.write_text(json.dumps({"n": 2, "t": 3, "gates": []}))
        assert load_circuit(a)["n"] is None
        assert load_circuit(b)["t"] == 3
        c = tmp_path / "c.json"
        c.write_text("{\n  oops")
        with pytest.raises(DataFormatError, match="line 2"):
            load_circuit(c)


class TestRandomCircuit:
    def test_seeded(self):
        assert random_circuit(3, 10, 5) == random_circuit(3, 10, 5)
        assert random_circuit(3, 10, 5) != random_circuit(3, 10, 6)

    def test_round_trips_through_json(self):
        gates = random_circuit(3, 10, 2)
        back = json.loads(json.dumps(gates))
        np.testing.assert_array_equal(materialize(circuit_from_json(gates, 3)), materialize(circuit_from_json(back, 3)))

    def test_unitary(self):
        m = materialize(circuit_from_json(random_circuit(4, 12, 0), 4))
        np.testing.assert_allclose(m.conj().T @ m, np.eye(16), atol=1e-12)
