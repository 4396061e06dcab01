"""trotter: lowering soundness and Suzuki-Trotter convergence vs expm oracles."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emqsim import models, qcore, trotter
from emqsim.errors import UnsupportedLocalityError
from emqsim.trotter import Circuit, Gate, NativeSet, TrotterPlan
from oracles import SX, SY, SZ, I2, expm_herm, phase_aligned_opnorm, tim_hamiltonian

PAULI = {"X": SX, "Y": SY, "Z": SZ, "I": I2}


def pauli_string_matrix(axes: str) -> np.ndarray:
    out = PAULI[axes[0]].copy()
    for ax in axes[1:]:
        out = np.kron(out, PAULI[ax])
    return out


def lowered_unitary(gates, n_qubits=2):
    c = Circuit(n_qubits=n_qubits, gates=tuple(gates), native_set=_set_of(gates))
    return trotter.circuit_unitary(c)


def _set_of(gates):
    names = {g.name for g in gates}
    if names & {"XY", "SQISWAP"}:
        return NativeSet.SQISWAP_SET
    return NativeSet.CNOT_SET


class TestGateValidation:
    def test_cnot_needs_two_distinct(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (1, 1))
        with pytest.raises(ValueError):
            Gate("CNOT", (0,))

    def test_rotation_needs_angle(self):
        with pytest.raises(ValueError):
            Gate("RZ", (0,))

    def test_non_rotation_rejects_angle(self):
        with pytest.raises(ValueError):
            Gate("H", (0,), angle=0.3)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            Gate("T", (0,))

    def test_native_set_admissibility(self):
        with pytest.raises(ValueError):
            Circuit(2, (Gate("CNOT", (0, 1)),), NativeSet.SQISWAP_SET)
        with pytest.raises(ValueError):
            Circuit(2, (Gate("XY", (0, 1), 0.5),), NativeSet.CNOT_SET)

    def test_qubit_range(self):
        with pytest.raises(ValueError):
            Circuit(1, (Gate("H", (1,)),), NativeSet.CNOT_SET)


class TestGateMatrices:
    def test_rz_convention(self):
        """RZ(a) = exp(-i a sigma_z / 2)."""
        a = 0.7318
        got = trotter.gate_matrix(trotter.rz(0, a))
        assert_allclose(got, expm_herm(SZ, -0.5j * a), atol=1e-14)

    def test_xy_convention(self):
        """XY(a) = exp(-i a (XX+YY)/4)."""
        a = 1.234
        gen = (np.kron(SX, SX) + np.kron(SY, SY)) / 4
        assert_allclose(trotter.gate_matrix(trotter.xy(0, 1, a)), expm_herm(gen, -1j * a), atol=1e-14)

    def test_sqiswap_is_quarter_swap(self):
        sq = trotter.gate_matrix(Gate("SQISWAP", (0, 1)))
        assert_allclose(sq, trotter.gate_matrix(trotter.xy(0, 1, np.pi / 2)), atol=1e-14)
        # |01> -> (|01> - i|10>)/sqrt2 at the 50% transfer point
        out = sq @ qcore.bitstring_state("01")
        assert abs(abs(out[1]) ** 2 - 0.5) < 1e-12
        assert abs(abs(out[2]) ** 2 - 0.5) < 1e-12

    def test_cnot_truth_table(self):
        cn = trotter.gate_matrix(Gate("CNOT", (0, 1)))
        assert_allclose(cn @ qcore.bitstring_state("10"), qcore.bitstring_state("11"), atol=0)
        assert_allclose(cn @ qcore.bitstring_state("11"), qcore.bitstring_state("10"), atol=0)
        assert_allclose(cn @ qcore.bitstring_state("00"), qcore.bitstring_state("00"), atol=0)

    def test_hadamard_exact(self):
        h = trotter.gate_matrix(Gate("H", (0,)))
        assert_allclose(h @ h, np.eye(2), atol=1e-15)
        assert_allclose(h @ SZ @ h, SX, atol=1e-15)


class TestCircuitUnitary:
    def test_empty_identity(self):
        c = Circuit(2, (), NativeSet.CNOT_SET)
        assert_allclose(trotter.circuit_unitary(c), np.eye(4), atol=0)

    def test_single_x(self):
        c = Circuit(1, (Gate("X", (0,)),), NativeSet.CNOT_SET)
        assert_allclose(trotter.circuit_unitary(c), SX, atol=0)

    def test_gate_order_left_to_right(self):
        """[H, X] composes to X @ H."""
        c = Circuit(1, (Gate("H", (0,)), Gate("X", (0,))), NativeSet.CNOT_SET)
        h = trotter.gate_matrix(Gate("H", (0,)))
        assert_allclose(trotter.circuit_unitary(c), SX @ h, atol=1e-15)

    def test_reversed_control_target(self):
        """CNOT with control on qubit 1 flips qubit 0."""
        c = Circuit(2, (Gate("CNOT", (1, 0)),), NativeSet.CNOT_SET)
        u = trotter.circuit_unitary(c)
        assert_allclose(u @ qcore.bitstring_state("01"), qcore.bitstring_state("11"), atol=0)

    def test_nonadjacent_embedding(self):
        """Two-qubit gate on qubits (0, 2) of three == kron-permutation oracle."""
        rng = np.random.default_rng(5)
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = expm_herm(h + h.conj().T, -1j * 0.37)
        got = trotter._embed_two_qubit(m, 3, 0, 2)
        # oracle: act on axes (0, 2) of the rank-3 tensor index
        want = np.zeros((8, 8), dtype=complex)
        for col in range(8):
            b0, b1, b2 = (col >> 2) & 1, (col >> 1) & 1, col & 1
            for r0 in (0, 1):
                for r2 in (0, 1):
                    row = (r0 << 2) | (b1 << 1) | r2
                    want[row, col] += m[2 * r0 + r2, 2 * b0 + b2]
        assert np.max(np.abs(got - want)) < 1e-14

    def test_barrier_is_identity(self):
        c = Circuit(2, (Gate("BARRIER", ()),), NativeSet.CNOT_SET)
        assert_allclose(trotter.circuit_unitary(c), np.eye(4), atol=0)

    def test_guardrail(self):
        with pytest.raises(ValueError):
            trotter.circuit_unitary(Circuit(11, (), NativeSet.CNOT_SET))


class TestLoweringSoundness:
    """Composed gate unitaries == exp(-i theta P) up to global phase, 1e-11."""

    N_ANGLES = 100

    def _angles(self):
        rng = np.random.default_rng(2024)
        return rng.uniform(-2 * np.pi, 2 * np.pi, size=self.N_ANGLES)

    @pytest.mark.parametrize("axis", ["X", "Y", "Z"])
    @pytest.mark.parametrize("native_set", [NativeSet.CNOT_SET, NativeSet.SQISWAP_SET])
    def test_single_qubit_terms(self, axis, native_set):
        term = models.PauliTerm(1.0, ((1, axis),))
        p = pauli_string_matrix("I" + axis)
        for theta in self._angles():
            u = lowered_unitary(trotter.lower_term(term, theta, native_set))
            assert phase_aligned_opnorm(u, expm_herm(p, -1j * theta)) < 1e-11

    @pytest.mark.parametrize(
        "axes", ["XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"]
    )
    @pytest.mark.parametrize("native_set", [NativeSet.CNOT_SET, NativeSet.SQISWAP_SET])
    def test_two_qubit_terms(self, axes, native_set):
        term = models.PauliTerm(1.0, ((0, axes[0]), (1, axes[1])))
        p = pauli_string_matrix(axes)
        for theta in self._angles():
            u = lowered_unitary(trotter.lower_term(term, theta, native_set))
            assert phase_aligned_opnorm(u, expm_herm(p, -1j * theta)) < 1e-11

    def test_xy_pair_equal_sign(self):
        """{XX:+c, YY:+c} lowers to a single XY(4 theta)."""
        gen = pauli_string_matrix("XX") + pauli_string_matrix("YY")
        for theta in self._angles()[:40]:
            gates = trotter.lower_xy_pair(0, 1, theta, opposite_sign=False)
            assert [g.name for g in gates] == ["XY"]
            u = lowered_unitary(gates)
            assert phase_aligned_opnorm(u, expm_herm(gen, -1j * theta)) < 1e-12

    def test_xy_pair_opposite_sign(self):
        """{XX:+c, YY:-c} (the spin-1 image pair) lowers to X-conjugated XY."""
        gen = pauli_string_matrix("XX") - pauli_string_matrix("YY")
        for theta in self._angles()[:40]:
            gates = trotter.lower_xy_pair(0, 1, theta, opposite_sign=True)
            u = lowered_unitary(gates)
            assert phase_aligned_opnorm(u, expm_herm(gen, -1j * theta)) < 1e-12

    def test_z_half_pi_is_sigma_z(self):
        """(Z0, theta=pi/2) -> [RZ(pi)] == sigma_z up to phase."""
        gates = trotter.lower_term(models.PauliTerm(1.0, ((0, "Z"),)), np.pi / 2, NativeSet.CNOT_SET)
        assert [g.name for g in gates] == ["RZ"]
        assert gates[0].angle == pytest.approx(np.pi)
        u = lowered_unitary(gates, n_qubits=1)
        assert phase_aligned_opnorm(u, SZ) < 1e-12

    def test_xx_cnot_shape_matches_textbook(self):
        """XX lowering through the ZZ core: H H CNOT RZ CNOT H H."""
        theta = 0.613
        gates = trotter.lower_term(models.PauliTerm(1.0, ((0, "X"), (1, "X"))), theta, NativeSet.CNOT_SET)
        assert [g.name for g in gates] == ["H", "H", "CNOT", "RZ", "CNOT", "H", "H"]
        assert gates[3].angle == pytest.approx(2 * theta)

    def test_weight_three_rejected(self):
        term = models.PauliTerm(1.0, ((0, "X"), (1, "X"), (2, "X")))
        with pytest.raises(UnsupportedLocalityError):
            trotter.lower_term(term, 0.1, NativeSet.CNOT_SET)


class TestTrotterize:
    def test_spin1_n1_exact(self):
        """Commuting terms: one step reproduces the exact propagator."""
        h = models.build_spin1_qubit_hamiltonian(models.SpinOneParams(D=1.0, E=0.25))
        u_exact = expm_herm(h.to_matrix(), -1j * 3.7)
        for ns in NativeSet:
            c = trotter.trotterize(TrotterPlan(h, 3.7, 1), ns)
            assert phase_aligned_opnorm(trotter.circuit_unitary(c), u_exact) < 1e-10

    def test_zero_time_identity(self):
        h = models.build_tim_hamiltonian(models.TimParams())
        for ns in NativeSet:
            c = trotter.trotterize(TrotterPlan(h, 0.0, 3), ns)
            assert phase_aligned_opnorm(trotter.circuit_unitary(c), np.eye(4)) < 1e-12

    def test_barrier_between_steps(self):
        h = models.build_tim_hamiltonian(models.TimParams())
        c = trotter.trotterize(TrotterPlan(h, 1.0, 4), NativeSet.CNOT_SET)
        assert sum(g.name == "BARRIER" for g in c.gates) == 3

    def test_gate_set_equivalence(self):
        """CNOT_SET and SQISWAP_SET compile to the same unitary."""
        for h, t, n in [
            (models.build_spin1_qubit_hamiltonian(models.SpinOneParams(D=1.0, E=0.25)), 2.5, 2),
            (models.build_tim_hamiltonian(models.TimParams(gamma=2.0, b=1.0)), 4.0, 5),
        ]:
            plan = TrotterPlan(h, t, n)
            u1 = trotter.circuit_unitary(trotter.trotterize(plan, NativeSet.CNOT_SET))
            u2 = trotter.circuit_unitary(trotter.trotterize(plan, NativeSet.SQISWAP_SET))
            assert phase_aligned_opnorm(u1, u2) < 1e-10

    def test_spin1_exchange_step_uses_one_xy(self):
        """The spin-1 XX/YY pair fuses into a single exchange per step."""
        h = models.build_spin1_qubit_hamiltonian(models.SpinOneParams(D=1.0, E=0.25))
        c = trotter.trotterize(TrotterPlan(h, 1.0, 1), NativeSet.SQISWAP_SET)
        assert sum(g.name == "XY" for g in c.gates) == 3  # 2 for ZZ core + 1 fused pair

    def test_convergence_to_exact(self):
        """Trotter circuit unitary converges to the exact propagator."""
        h = models.build_tim_hamiltonian(models.TimParams(gamma=2.0, b=1.0))
        errs = [trotter.digital_error(TrotterPlan(h, 2.0, n)) for n in (4, 16, 64)]
        assert errs[2] < errs[1] / 2 < errs[0] / 4


class TestDigitalError:
    def test_commuting_hamiltonian_zero(self):
        h = models.build_spin1_qubit_hamiltonian(models.SpinOneParams(D=1.0, E=0.25))
        for n in (1, 3, 7):
            assert trotter.digital_error(TrotterPlan(h, 5.0, n)) < 1e-10

    def test_zero_time_zero(self):
        h = models.build_tim_hamiltonian(models.TimParams())
        assert trotter.digital_error(TrotterPlan(h, 0.0, 4)) < 1e-12

    def test_monotone_in_steps_at_gt20(self):
        """error(n=20) < error(n=10) < error(n=5) at Gamma t = 20."""
        h = models.build_tim_hamiltonian(models.TimParams(gamma=2.0, b=1.0))
        e5, e10, e20 = (trotter.digital_error(TrotterPlan(h, 10.0, n)) for n in (5, 10, 20))
        assert e20 < e10 < e5

    def test_first_order_slope_at_fixed_time(self):
        """log-log slope of digital_error vs n is -1 +- 0.15 (Gamma t = 4)."""
        h = models.build_tim_hamiltonian(models.TimParams(gamma=2.0, b=1.0))
        ns = np.array([2, 5, 10, 20])
        errs = np.array([trotter.digital_error(TrotterPlan(h, 2.0, int(n))) for n in ns])
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.15)

    def test_matches_independent_oracle(self):
        """digital_error agrees with a hand-rolled per-term product oracle."""
        gamma, b = 2.0, 1.0
        h = models.build_tim_hamiltonian(models.TimParams(gamma=gamma, b=b))
        t, n = 3.0, 7
        terms = [
            (gamma / 4) * pauli_string_matrix("XX"),
            (b / 2) * pauli_string_matrix("ZI"),
            (b / 2) * pauli_string_matrix("IZ"),
        ]
        step = np.eye(4, dtype=complex)
        for m in terms:
            step = expm_herm(m, -1j * t / n) @ step
        u_trot = np.linalg.matrix_power(step, n)
        want = phase_aligned_opnorm(u_trot, expm_herm(tim_hamiltonian(gamma, b), -1j * t))
        got = trotter.digital_error(TrotterPlan(h, t, n))
        assert got == pytest.approx(want, abs=1e-9)


class TestRelower:
    def test_xy_circuit_to_cnot(self):
        c = Circuit(2, (trotter.xy(0, 1, 0.83), Gate("SQISWAP", (0, 1))), NativeSet.SQISWAP_SET)
        rc = trotter.relower(c, NativeSet.CNOT_SET)
        assert rc.native_set is NativeSet.CNOT_SET
        assert all(g.name not in ("XY", "SQISWAP") for g in rc.gates)
        assert phase_aligned_opnorm(trotter.circuit_unitary(rc), trotter.circuit_unitary(c)) < 1e-10

    def test_identity_when_same_set(self):
        c = Circuit(2, (Gate("CNOT", (0, 1)),), NativeSet.CNOT_SET)
        assert trotter.relower(c, NativeSet.CNOT_SET) is c
