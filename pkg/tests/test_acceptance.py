"""Acceptance suite: the ten headline guarantees of the toolkit.

Each test prints one ``ACCEPTANCE <k> PASS/FAIL`` line with the measured
quantities and enforces both the stated tolerance and the stated runtime
budget.  Run with ``pytest tests/test_acceptance.py -v -s`` to see every
line; without ``-s`` the lines surface for failing criteria only.

Known red: criterion 3 pins the convergence rate of the TIM observable
error to first order (log-log slope -1 +/- 0.15).  The max-abs <S_x> error
does shrink strictly with n, but it shrinks *faster* than first order
(measured slope about -1.5): expectation-value errors partially cancel
odd-order Trotter defects that the operator-norm bound cannot see.  The
assertion is kept in its stated form rather than weakened to match the
implementation, so the test documents the discrepancy by failing.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from emqsim import gatesim, qcore
from emqsim.devsim import DeviceSpec, LindbladProblem, lindblad_evolve, run_digital_on_device
from emqsim.experiments import ExperimentConfig, run_experiment, run_fidelity_experiment
from emqsim.models import PauliTerm, TimParams, build_tim_hamiltonian
from emqsim.qasm import export_qasm, parse_qasm
from emqsim.trotter import (
    Circuit,
    Gate,
    NativeSet,
    TrotterPlan,
    circuit_unitary,
    lower_term,
    phase_aligned_distance,
    trotterize,
)

from oracles import (
    S1Z,
    evolve,
    expm_herm,
    phase_aligned_opnorm,
    spin1_hamiltonian,
)

PAULI = {"X": qcore.pauli("X"), "Y": qcore.pauli("Y"), "Z": qcore.pauli("Z")}


def _cfg(**kw) -> ExperimentConfig:
    return ExperimentConfig.model_validate(kw)


def _report(number: int, ok: bool, detail: str, elapsed: float, budget: float) -> str:
    line = (
        f"ACCEPTANCE {number} {'PASS' if ok and elapsed < budget else 'FAIL'}: "
        f"{detail} [{elapsed:.2f} s < {budget:.0f} s]"
    )
    print(line)
    return line


class TestAcceptance:
    def test_01_spin1_single_step_exactness(self):
        """Noiseless digital spin-1 dynamics with n = 1 is exact to 1e-9."""
        t0 = time.perf_counter()
        rng = np.random.default_rng(20260814)
        worst = 0.0
        for _ in range(5):
            d = float(rng.uniform(-2.0, 2.0))
            e = float(rng.uniform(0.1, 1.5))
            grid = {"t_max": 10.0, "points": 50}
            spin1 = {"d": d, "e": e}
            exact = run_experiment(_cfg(grid=grid, spin1=spin1))
            gate = run_experiment(_cfg(backend="gate", steps=1, grid=grid, spin1=spin1))
            worst = max(worst, float(np.max(np.abs(gate.value - exact.value))))
        elapsed = time.perf_counter() - t0
        ok = worst < 1e-9
        line = _report(1, ok, f"spin-1 n=1 gate vs exact max err = {worst:.3e} (< 1e-9)", elapsed, 1.0)
        assert ok and elapsed < 1.0, line

    def test_02_closed_form_tunneling(self):
        """<S_z>(t) = cos(2Et), cross-checked against the genuine 3-level model."""
        t0 = time.perf_counter()
        worst_cos = 0.0
        worst_oracle = 0.0
        m_plus = np.array([1.0, 0.0, 0.0], dtype=complex)
        for d, e in ((1.0, 0.25), (-0.6, 0.9), (0.3, 1.4)):
            ts = run_experiment(_cfg(grid={"t_max": 9.0, "points": 60}, spin1={"d": d, "e": e}))
            worst_cos = max(worst_cos, float(np.max(np.abs(ts.value - np.cos(2.0 * ts.t)))))
            h3 = spin1_hamiltonian(d, e)
            for tau, got in zip(ts.t, ts.value):
                psi3 = evolve(h3, m_plus, tau / e)
                worst_oracle = max(worst_oracle, abs(got - qcore.expectation(psi3, S1Z)))
        elapsed = time.perf_counter() - t0
        ok = worst_cos < 1e-9 and worst_oracle < 1e-9
        line = _report(
            2, ok,
            f"cos(2Et) max err = {worst_cos:.3e}, 3x3 oracle max err = {worst_oracle:.3e} (< 1e-9)",
            elapsed, 1.0,
        )
        assert ok and elapsed < 1.0, line

    def test_03_tim_trotter_convergence(self):
        """TIM observable error shrinks strictly with n and at first order.

        The slope assertion is the stated contract; the measured convergence
        is faster than first order (see module docstring), so this criterion
        is expected to fail on the slope while passing monotonicity.
        """
        t0 = time.perf_counter()
        grid = {"t_max": 20.0, "points": 81}
        exact = run_experiment(_cfg(model="tim", grid=grid))
        steps = (2, 5, 10, 20)
        errors = []
        for n in steps:
            ts = run_experiment(_cfg(model="tim", backend="gate", steps=n, grid=grid))
            errors.append(float(np.max(np.abs(ts.value - exact.value))))
        decreasing = all(a > b for a, b in zip(errors, errors[1:]))
        slope = float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
        elapsed = time.perf_counter() - t0
        ok = decreasing and abs(slope + 1.0) <= 0.15
        line = _report(
            3, ok,
            f"errors@n{steps} = {[f'{e:.4f}' for e in errors]}, strictly decreasing = {decreasing}, "
            f"log-log slope = {slope:.3f} (required -1 +/- 0.15)",
            elapsed, 10.0,
        )
        assert ok and elapsed < 10.0, line

    def test_04_lindblad_solver_integrity(self):
        """Trace/Hermiticity drift, closed-form decay laws, step-halving."""
        t0 = time.perf_counter()
        sm = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |1> -> |0|
        grid = np.linspace(0.0, 2.0, 21)

        # (a) driven lossy qubit: trace and Hermiticity stay pinned
        h = 2.0 * np.pi * 0.8 * PAULI["X"] / 2.0
        rho0 = qcore.to_density(np.array([0.0, 1.0], dtype=complex))
        states = lindblad_evolve(
            LindbladProblem(h, [(0.7, sm), (0.4, PAULI["Z"] / np.sqrt(2.0))], rho0, grid),
            max_step=1e-3,
        )
        trace_drift = max(abs(np.trace(r).real - 1.0) for r in states)
        herm_drift = max(float(np.max(np.abs(r - r.conj().T))) for r in states)

        # (b) closed-form T1 law: excited population = exp(-t/T1)
        t1 = 0.9
        decay = lindblad_evolve(
            LindbladProblem(np.zeros((2, 2)), [(1.0 / t1, sm)], rho0, grid), max_step=1e-3
        )
        pops = np.array([r[1, 1].real for r in decay])
        t1_rel = float(np.max(np.abs(pops - np.exp(-grid / t1)) / np.exp(-grid / t1)))

        # (c) closed-form Tphi law: coherence = exp(-t/Tphi)
        tphi = 1.3
        plus = qcore.to_density(qcore.plus_state(1))
        deph = lindblad_evolve(
            LindbladProblem(
                np.zeros((2, 2)), [(1.0 / tphi, PAULI["Z"] / np.sqrt(2.0))], plus, grid
            ),
            max_step=1e-3,
        )
        cohs = np.array([abs(r[0, 1]) for r in deph])
        tphi_rel = float(np.max(np.abs(cohs - 0.5 * np.exp(-grid / tphi)) / (0.5 * np.exp(-grid / tphi))))

        # (d) step-halving stability on the driven lossy problem
        kw = dict(
            collapse=[(0.7, sm), (0.4, PAULI["Z"] / np.sqrt(2.0))],
            rho0=rho0,
            t_grid=np.array([0.0, 2.0]),
        )
        coarse = lindblad_evolve(LindbladProblem(h, **kw), max_step=2e-3)[-1]
        fine = lindblad_evolve(LindbladProblem(h, **kw), max_step=1e-3)[-1]
        halving = float(np.max(np.abs(coarse - fine)))

        elapsed = time.perf_counter() - t0
        ok = trace_drift < 1e-7 and herm_drift < 1e-8 and t1_rel < 1e-5 and tphi_rel < 1e-5 and halving < 1e-8
        line = _report(
            4, ok,
            f"trace drift = {trace_drift:.2e} (< 1e-7), herm = {herm_drift:.2e} (< 1e-8), "
            f"T1 law rel = {t1_rel:.2e}, Tphi law rel = {tphi_rel:.2e} (< 1e-5), "
            f"step-halving = {halving:.2e} (< 1e-8)",
            elapsed, 30.0,
        )
        assert ok and elapsed < 30.0, line

    def test_05_device_gate_coherence(self):
        """Zero-rate pulse backend reproduces the noiseless gate spin-1 series."""
        t0 = time.perf_counter()
        grid = {"t_max": 6.0, "points": 13}
        dev = {k: math.inf for k in ("t1_nr", "t2_nr", "t1_tr", "t2_tr")}
        gate = run_experiment(_cfg(backend="gate", grid=grid))
        device = run_experiment(_cfg(backend="device", grid=grid, device=dev))
        err = float(np.max(np.abs(device.value - gate.value)))
        leakage = device.diagnostics["max_leakage"]
        elapsed = time.perf_counter() - t0
        ok = err < 0.02 and leakage < 0.01
        line = _report(
            5, ok,
            f"device vs gate max |d<Sz>| = {err:.4f} (< 0.02), leakage = {leakage:.4f} (< 0.01), n_fock = 3",
            elapsed, 300.0,
        )
        assert ok and elapsed < 300.0, line

    def test_06_t2_fidelity_monotonicity(self):
        """Time-averaged fidelity to the ideal digital state rises with NR T2."""
        t0 = time.perf_counter()
        t2_grid = (100e-6, 1e-3, 10e-3, math.inf)
        summary = []
        ok = True
        for model, steps, tmax in (("spin1", 1, 6.0), ("tim", 5, 10.0)):
            means = []
            for t2 in t2_grid:
                ts = run_fidelity_experiment(
                    _cfg(
                        model=model,
                        backend="device",
                        steps=steps,
                        grid={"t_max": tmax, "points": 7},
                        t2=t2,
                    )
                )
                means.append(float(np.mean(ts.value)))
            monotone = all(b >= a for a, b in zip(means, means[1:]))
            ok = ok and monotone
            summary.append(f"{model}: {[f'{m:.4f}' for m in means]} monotone={monotone}")
        elapsed = time.perf_counter() - t0
        line = _report(
            6, ok, "mean fidelity over T2_nr {100us, 1ms, 10ms, inf} " + "; ".join(summary),
            elapsed, 1200.0,
        )
        assert ok and elapsed < 1200.0, line

    def test_07_transmon_insensitivity(self):
        """Halving transmon T2 hurts the sqrt-iSWAP far less than halving NR T2."""
        t0 = time.perf_counter()
        sq = Circuit(2, [Gate("SQISWAP", (0, 1))], NativeSet.SQISWAP_SET)
        probes = [
            qcore.bitstring_state("00"),
            qcore.bitstring_state("01"),
            qcore.bitstring_state("10"),
            qcore.bitstring_state("11"),
            qcore.plus_state(2),
            np.kron(np.array([1.0, 1.0j]) / np.sqrt(2.0), np.array([1.0, 1.0]) / np.sqrt(2.0)),
        ]
        ideals = [
            gatesim.run_circuit(sq, qcore.to_density(p), gatesim.NoiseSpec.noiseless())
            for p in probes
        ]

        def avg_fidelity(spec: DeviceSpec) -> float:
            fids = [
                qcore.fidelity(run_digital_on_device(sq, spec, qcore.to_density(p)).rho, ideal)
                for p, ideal in zip(probes, ideals)
            ]
            return float(np.mean(fids))

        default = DeviceSpec()
        f0 = avg_fidelity(default)
        d_tr = f0 - avg_fidelity(dataclasses.replace(default, t2_tr=default.t2_tr / 2.0))
        d_nr = f0 - avg_fidelity(dataclasses.replace(default, t2_nr=default.t2_nr / 2.0))
        elapsed = time.perf_counter() - t0
        ok = d_tr < d_nr
        line = _report(
            7, ok,
            f"sqrt-iSWAP fidelity {f0:.5f}; degradation transmon-T2/2 = {d_tr:.2e} "
            f"< NR-T2/2 = {d_nr:.2e} (strict)",
            elapsed, 120.0,
        )
        assert ok and elapsed < 120.0, line

    def test_08_lowering_soundness(self):
        """Every lowering rule matches its expm oracle; both sets agree."""
        t0 = time.perf_counter()
        rng = np.random.default_rng(8)
        angles = rng.uniform(-2.0 * np.pi, 2.0 * np.pi, size=100)
        terms = [PauliTerm(1.0, ((1, ax),)) for ax in "XYZ"] + [
            PauliTerm(1.0, ((0, a), (1, b))) for a in "XYZ" for b in "XYZ"
        ]
        worst_lower = 0.0
        for term in terms:
            ops = [np.eye(2, dtype=complex)] * 2
            for q, ax in term.factors:
                ops[q] = PAULI[ax]
            target = np.kron(ops[0], ops[1])
            for native in (NativeSet.CNOT_SET, NativeSet.SQISWAP_SET):
                for theta in angles:
                    c = Circuit(2, lower_term(term, float(theta), native), native)
                    dist = phase_aligned_opnorm(
                        circuit_unitary(c), expm_herm(target, -1j * float(theta))
                    )
                    worst_lower = max(worst_lower, dist)

        worst_equiv = 0.0
        ham = build_tim_hamiltonian(TimParams())
        for total_time, steps in ((1.0, 1), (4.0, 3), (10.0, 5)):
            plan = TrotterPlan(ham, total_time=total_time, steps=steps)
            u_cnot = circuit_unitary(trotterize(plan, NativeSet.CNOT_SET))
            u_xy = circuit_unitary(trotterize(plan, NativeSet.SQISWAP_SET))
            worst_equiv = max(worst_equiv, phase_aligned_distance(u_cnot, u_xy))

        elapsed = time.perf_counter() - t0
        ok = worst_lower < 1e-11 and worst_equiv < 1e-10
        line = _report(
            8, ok,
            f"lowering vs expm worst = {worst_lower:.2e} (< 1e-11) over 100 angles x 12 terms x 2 sets, "
            f"set equivalence worst = {worst_equiv:.2e} (< 1e-10)",
            elapsed, 5.0,
        )
        assert ok and elapsed < 5.0, line

    def test_09_qasm_round_trip(self):
        """Exported TIM n=2 program re-parses to the same unitary, same bytes."""
        t0 = time.perf_counter()
        plan = TrotterPlan(build_tim_hamiltonian(TimParams()), total_time=2.0, steps=2)
        circuit = trotterize(plan, NativeSet.CNOT_SET)
        text = export_qasm(circuit)
        dist = phase_aligned_distance(
            circuit_unitary(parse_qasm(text)), circuit_unitary(circuit)
        )
        deterministic = export_qasm(circuit) == text and export_qasm(parse_qasm(text)) == text
        elapsed = time.perf_counter() - t0
        ok = dist < 1e-9 and deterministic
        line = _report(
            9, ok,
            f"round-trip unitary distance = {dist:.2e} (< 1e-9), byte-deterministic = {deterministic}",
            elapsed, 1.0,
        )
        assert ok and elapsed < 1.0, line

    def test_10_sampling_statistics(self):
        """8192-shot <S_x> estimates stay within 3 stderr in >= 99% of trials."""
        t0 = time.perf_counter()
        noise = gatesim.NoiseSpec(t1=50e-6, t2=40e-6, readout_flip=0.03)
        plan = TrotterPlan(build_tim_hamiltonian(TimParams()), total_time=3.5, steps=5)
        circuit = trotterize(plan, NativeSet.CNOT_SET)
        rotated = Circuit(
            2, list(circuit.gates) + [Gate("H", (0,)), Gate("H", (1,))], NativeSet.CNOT_SET
        )
        rho = gatesim.run_circuit(rotated, qcore.to_density(qcore.plus_state(2)), noise)
        strings = {(0,): 0.5, (1,): 0.5}
        # density-matrix reference: <S_x> before rotation == <S_z> after
        dm_value = qcore.expectation(rho, np.kron(PAULI["Z"], np.eye(2)) / 2 + np.kron(np.eye(2), PAULI["Z"]) / 2)
        hits = 0
        trials = 200
        for seed in range(trials):
            sr = gatesim.sample(rho, 8192, noise, seed)
            value, stderr = gatesim.estimate_observable(sr, strings, readout_flip=noise.readout_flip)
            if abs(value - dm_value) <= 3.0 * stderr:
                hits += 1
        elapsed = time.perf_counter() - t0
        ok = hits >= int(0.99 * trials)
        line = _report(
            10, ok,
            f"{hits}/{trials} trials within 3 stderr of the density-matrix value (need >= 198)",
            elapsed, 30.0,
        )
        assert ok and elapsed < 30.0, line
