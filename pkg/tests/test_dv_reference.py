import math

import numpy as np
import pytest

from cviqp.errors import NumericalError, ValidationError
from cviqp.gadgets import QubitState, dv_hadamard_gadget, dv_iqp_circuit, qubit_state

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
X = np.array([[0, 1], [1, 0]])

CARDINAL = {
    "zero": (1, 0),
    "one": (0, 1),
    "plus": (1, 1),
    "minus": (1, -1),
    "plus_i": (1, 1j),
    "minus_i": (1, -1j),
}


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return abs(np.vdot(a, b)) ** 2


class TestHadamardGadget:
    @pytest.mark.parametrize("name", sorted(CARDINAL))
    @pytest.mark.parametrize("postselect", [1, -1])
    def test_exact_output_and_probability(self, name, postselect):
        psi = qubit_state(*CARDINAL[name])
        out, h, prob = dv_hadamard_gadget(psi, postselect=postselect)
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert h == (0 if postselect == 1 else 1)
        expected = np.linalg.matrix_power(X, h) @ H @ psi.amplitudes
        assert state_fidelity(out.amplitudes, expected / np.linalg.norm(expected)) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_matrix_oracle_specific_state(self):
        # psi = (|0> + i|1>)/sqrt(2), outcome -: output equals X H psi
        psi = qubit_state(1.0, 1.0j)
        out, h, _ = dv_hadamard_gadget(psi, postselect=-1)
        expected = X @ H @ psi.amplitudes
        assert h == 1
        assert state_fidelity(out.amplitudes, expected / np.linalg.norm(expected)) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_sampled_outcomes_balanced(self):
        psi = qubit_state(0.3, 0.9539392014169456)
        hs = [dv_hadamard_gadget(psi, seed=s)[1] for s in range(2000)]
        assert abs(np.mean(hs) - 0.5) < 0.05

    def test_multi_qubit_input_rejected(self):
        with pytest.raises(ValidationError):
            dv_hadamard_gadget(QubitState(2, np.full(4, 0.5)), postselect=1)


class TestIqpCircuit:
    def test_no_gates_deterministic_all_plus(self):
        probs = dv_iqp_circuit(3, [])
        assert probs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.sum(probs[1:]) < 1e-12

    def test_distribution_normalized(self):
        gates = [((0,), 0.3), ((1, 2), 1.1), ((0, 1, 2), -0.7)]
        probs = dv_iqp_circuit(3, gates)
        assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)

    def test_cz_gadget_cross_check(self):
        # CZ = global phase * exp(-i pi/4 Z0) exp(-i pi/4 Z1) exp(i pi/4 Z0 Z1):
        # post-selecting qubit 0 on + reproduces the Hadamard gadget on |+>
        gates = [((0,), -math.pi / 4), ((1,), -math.pi / 4), ((0, 1), math.pi / 4)]
        probs = dv_iqp_circuit(2, gates)
        assert np.allclose(probs, 0.25, atol=1e-12)
        conditional = dv_iqp_circuit(2, gates, postselect=[(0, 1)])
        # qubit 0 is bit 0: outcomes 0b00 and 0b10 survive, each 1/2
        assert conditional[0] == pytest.approx(0.5, abs=1e-12)
        assert conditional[2] == pytest.approx(0.5, abs=1e-12)
        assert conditional[1] == 0.0 and conditional[3] == 0.0
        # matches the gadget's input-independent 1/2 statistics
        _out, _h, prob = dv_hadamard_gadget(qubit_state(1.0, 1.0), postselect=1)
        assert prob == pytest.approx(0.5, abs=1e-12)

    def test_single_qubit_phase_interference(self):
        # exp(i theta Z) on |+> measured in X: P(+) = cos^2(theta)
        theta = 0.4
        probs = dv_iqp_circuit(1, [((0,), theta)])
        assert probs[0] == pytest.approx(math.cos(theta) ** 2, abs=1e-12)
        assert probs[1] == pytest.approx(math.sin(theta) ** 2, abs=1e-12)

    def test_zero_probability_conditioning_rejected(self):
        with pytest.raises(NumericalError):
            dv_iqp_circuit(2, [], postselect=[(0, -1)])

    def test_too_many_qubits_rejected(self):
        with pytest.raises(ValidationError):
            dv_iqp_circuit(15, [])

    def test_normalization_validated(self):
        with pytest.raises(ValidationError):
            QubitState(1, np.array([1.0, 1.0]))
