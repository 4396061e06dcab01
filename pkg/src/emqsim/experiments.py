"""End-to-end experiment runner: models x backends x sweeps x CSV.

An :class:`ExperimentConfig` names a spin model, a backend and a time grid
in the model's dimensionless units (E*t for the spin-1 tunneling model,
Gamma*t for the transverse-field Ising model).  ``run_experiment`` builds
the model, Trotterizes it (except on the exact backend, which bypasses
digitization), executes every grid point and reports the model observable
-- <S_z> for spin-1, <S_x> for TIM -- either as an exact expectation value
(``shots = 0``) or as a readout-mitigated estimate from sampled shots.

Backends:
    exact   dense eigensolver evolution of the model Hamiltonian;
    gate    CNOT-native circuit on the density-matrix gate simulator with
            optional T1/T2/readout noise (noiseless when no noise is given);
    device  exchange-native circuit compiled to pulses on the Lindblad
            model of the electromechanical unit.

Sweeps fan a base config out along one axis (``steps`` or ``t2``), compute
the series concurrently and return them in axis order; all file output
happens afterwards from the caller's single thread.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import gatesim, qcore
from .devsim import DeviceSpec, run_digital_on_device
from .devsim.calibration import device_calibration
from .errors import ConfigError
from .models import (
    PauliHamiltonian,
    SpinOneParams,
    TimParams,
    build_spin1_qubit_hamiltonian,
    build_tim_hamiltonian,
    exact_evolve,
    spin1_initial_state,
    tim_initial_state,
    total_spin_observable,
)
from .trotter import Circuit, Gate, NativeSet, TrotterPlan, gate_matrix, trotterize


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(_StrictModel):
    """Time grid in the model's dimensionless units."""

    t_min: float = 0.0
    t_max: float = 10.0
    points: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if not self.t_max > self.t_min:
            raise ValueError("t_max must exceed t_min")
        if self.t_min < 0:
            raise ValueError("t_min must be non-negative")
        return self

    def times(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.points)


class Spin1Model(_StrictModel):
    """Axial (d) and transverse (e) anisotropy of the spin-1 Hamiltonian."""

    d: float = 1.0
    e: float = 0.25

    @model_validator(mode="after")
    def _usable(self) -> "Spin1Model":
        if self.e <= 0:
            raise ValueError("e must be positive (it sets the E*t time unit)")
        return self


class TimModel(_StrictModel):
    """Coupling (gamma) and transverse field (b) of the two-spin TIM."""

    gamma: float = 2.0
    b: float = 1.0

    @model_validator(mode="after")
    def _usable(self) -> "TimModel":
        if self.gamma <= 0:
            raise ValueError("gamma must be positive (it sets the Gamma*t time unit)")
        return self


class GateNoise(_StrictModel):
    """Noise for the gate backend; omit the whole table for a noiseless run."""

    t1: float = 50e-6
    t2: float = 40e-6
    readout_flip: float = 0.03


class DeviceParams(_StrictModel):
    """Overridable physical parameters of the electromechanical unit."""

    omega1: float = DeviceSpec().omega[0]
    omega2: float = DeviceSpec().omega[1]
    big_omega: float = DeviceSpec().big_omega
    g: float = DeviceSpec().g
    anharm: float = DeviceSpec().anharm
    n_fock: int = DeviceSpec().n_fock
    t1_nr: float = DeviceSpec().t1_nr
    t2_nr: float = DeviceSpec().t2_nr
    t1_tr: float = DeviceSpec().t1_tr
    t2_tr: float = DeviceSpec().t2_tr
    drive_amp: float = DeviceSpec().drive_amp

    def to_spec(self, t2_override: float | None = None) -> DeviceSpec:
        return DeviceSpec(
            omega=(self.omega1, self.omega2),
            big_omega=self.big_omega,
            g=self.g,
            anharm=self.anharm,
            n_fock=self.n_fock,
            t1_nr=self.t1_nr,
            t2_nr=self.t2_nr if t2_override is None else t2_override,
            t1_tr=self.t1_tr,
            t2_tr=self.t2_tr,
            drive_amp=self.drive_amp,
        )


DEFAULT_T2_SWEEP = (100e-6, 1e-3, 10e-3, math.inf)


class SweepSpec(_StrictModel):
    """Sweep axis for multi-series runs: Trotter steps or coherence time."""

    axis: Literal["steps", "t2"] = "t2"
    values: list[float] = Field(default_factory=lambda: list(DEFAULT_T2_SWEEP), min_length=1)


class ExperimentConfig(_StrictModel):
    """One experiment: model, backend, grid, noise and output knobs.

    ``t2`` is the swept coherence time: on the gate backend it sets a
    pure-dephasing :class:`~emqsim.gatesim.NoiseSpec` (T1 = inf), on the
    device backend it overrides the NR T2.  ``shots = 0`` reports exact
    expectation values (no stderr column).
    """

    model: Literal["spin1", "tim"] = "spin1"
    backend: Literal["exact", "gate", "device"] = "exact"
    steps: int = Field(default=1, ge=1)
    grid: GridSpec = Field(default_factory=GridSpec)
    shots: int = Field(default=0, ge=0)
    seed: int = 0
    t2: Optional[float] = Field(default=None, gt=0)
    spin1: Spin1Model = Field(default_factory=Spin1Model)
    tim: TimModel = Field(default_factory=TimModel)
    noise: Optional[GateNoise] = None
    device: DeviceParams = Field(default_factory=DeviceParams)
    sweep: Optional[SweepSpec] = None
    out: Optional[str] = None


@dataclass
class TimeSeries:
    """One simulated curve plus the labels that identify it in the CSV.

    ``t`` is dimensionless (E*t or Gamma*t), strictly increasing; ``stderr``
    is present exactly when the series was sampled (shots > 0).
    """

    t: np.ndarray
    value: np.ndarray
    stderr: Optional[np.ndarray]
    backend: str
    model: str
    n: int
    t2: float
    shots: int
    seed: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if (self.stderr is not None) != (self.shots > 0):
            raise ValueError("stderr must be present exactly when shots > 0")


# -- model plumbing ----------------------------------------------------------


def _model_pieces(cfg: ExperimentConfig) -> tuple[PauliHamiltonian, np.ndarray, str, float]:
    """Hamiltonian, initial state, observable axis and time-unit coefficient."""
    if cfg.model == "spin1":
        params = SpinOneParams(D=cfg.spin1.d, E=cfg.spin1.e)
        return (
            build_spin1_qubit_hamiltonian(params),
            spin1_initial_state(),
            "Z",
            cfg.spin1.e,
        )
    params = TimParams(gamma=cfg.tim.gamma, b=cfg.tim.b)
    return build_tim_hamiltonian(params), tim_initial_state(), "X", cfg.tim.gamma


def _gate_noise(cfg: ExperimentConfig) -> gatesim.NoiseSpec:
    if cfg.t2 is not None:
        return gatesim.NoiseSpec(t1=math.inf, t2=cfg.t2, readout_flip=0.0)
    if cfg.noise is None:
        return gatesim.NoiseSpec.noiseless()
    return gatesim.NoiseSpec(
        t1=cfg.noise.t1, t2=cfg.noise.t2, readout_flip=cfg.noise.readout_flip
    )


def _effective_t2(cfg: ExperimentConfig) -> float:
    """The coherence-time label recorded in the CSV for this run."""
    if cfg.backend == "gate":
        noise = _gate_noise(cfg)
        return min(noise.t2_for(2))
    if cfg.backend == "device":
        return cfg.t2 if cfg.t2 is not None else cfg.device.t2_nr
    return math.inf


_MEASUREMENT_STRINGS = {(0,): 0.5, (1,): 0.5}  # <S_axis> = (sigma_0 + sigma_1)/2


def _sample_observable(
    rho: np.ndarray,
    axis: str,
    shots: int,
    noise: gatesim.NoiseSpec,
    seed,
) -> tuple[float, float]:
    """Sampled (value, stderr) of the total-spin observable on ``rho``.

    Measuring along X is realised the way hardware does it: rotate with a
    Hadamard on every qubit, then read out in the computational basis.
    """
    if axis == "X":
        h1 = gate_matrix(Gate("H", (0,)))
        h2 = np.kron(h1, h1)
        rho = h2 @ rho @ h2.conj().T
    result = gatesim.sample(rho, shots, noise, seed)
    return gatesim.estimate_observable(
        result, _MEASUREMENT_STRINGS, readout_flip=noise.readout_flip
    )


def _measurement_rotation(axis: str) -> list[Gate]:
    if axis == "X":
        return [Gate("H", (0,)), Gate("H", (1,))]
    return []


def run_experiment(cfg: ExperimentConfig) -> TimeSeries:
    """Execute one experiment over its whole time grid.

    Returns:
        A :class:`TimeSeries` of the model observable; device runs also
        carry ``max_leakage`` / ``max_trace_drift`` diagnostics.
    """
    ham, psi0, axis, unit = _model_pieces(cfg)
    obs = total_spin_observable(axis)
    taus = cfg.grid.times()
    rho0 = qcore.to_density(psi0)
    values = np.empty(taus.size)
    stderrs = np.empty(taus.size) if cfg.shots > 0 else None
    seeds = np.random.default_rng(cfg.seed).integers(2**63, size=taus.size)
    diagnostics: dict = {}

    if cfg.backend == "device":
        spec = cfg.device.to_spec(t2_override=cfg.t2)
        calibration = device_calibration(spec)
        sample_noise = gatesim.NoiseSpec.noiseless()
        max_leakage = 0.0
        max_drift = 0.0
    elif cfg.backend == "gate":
        noise = _gate_noise(cfg)
        sample_noise = noise
    else:
        sample_noise = gatesim.NoiseSpec.noiseless()

    for i, tau in enumerate(taus):
        t_phys = float(tau) / unit
        if cfg.backend == "exact":
            rho_t = exact_evolve(ham, rho0, t_phys)
        else:
            if t_phys == 0.0:
                circuit = Circuit(
                    ham.n_qubits,
                    _measurement_rotation(axis) if cfg.shots > 0 else [],
                    _native_set(cfg.backend),
                )
            else:
                plan = TrotterPlan(ham, total_time=t_phys, steps=cfg.steps)
                circuit = trotterize(plan, _native_set(cfg.backend))
                if cfg.shots > 0:
                    circuit = Circuit(
                        circuit.n_qubits,
                        list(circuit.gates) + _measurement_rotation(axis),
                        circuit.native_set,
                    )
            if cfg.backend == "gate":
                rho_t = gatesim.run_circuit(circuit, rho0, noise)
            else:
                res = run_digital_on_device(circuit, spec, rho0, calibration=calibration)
                rho_t = res.rho
                max_leakage = max(max_leakage, res.leakage)
                max_drift = max(max_drift, res.trace_drift)

        if cfg.shots > 0:
            if cfg.backend == "exact":
                # No circuit was run; rotate the state directly.
                value, err = _sample_observable(
                    rho_t, axis, cfg.shots, sample_noise, seeds[i]
                )
            else:
                # The rotation is already part of the executed circuit.
                value, err = _sample_observable(
                    rho_t, "Z", cfg.shots, sample_noise, seeds[i]
                )
            values[i] = value
            stderrs[i] = err
        else:
            values[i] = qcore.expectation(rho_t, obs)

    if cfg.backend == "device":
        diagnostics = {"max_leakage": max_leakage, "max_trace_drift": max_drift}
    return TimeSeries(
        t=taus,
        value=values,
        stderr=stderrs,
        backend=cfg.backend,
        model=cfg.model,
        n=cfg.steps,
        t2=_effective_t2(cfg),
        shots=cfg.shots,
        seed=cfg.seed,
        diagnostics=diagnostics,
    )


def run_fidelity_experiment(cfg: ExperimentConfig) -> TimeSeries:
    """Fidelity of the noisy backend state to the ideal digital state.

    For every grid point the Trotter circuit is executed both on the
    configured noisy backend (gate or device) and as an ideal unitary; the
    series value is the Uhlmann fidelity between the two outputs.  This is
    the quantity whose T2 trend the coherence-sweep acceptance checks.
    """
    if cfg.backend == "exact":
        raise ConfigError("fidelity-to-ideal is defined for the gate and device backends")
    ham, psi0, _axis, unit = _model_pieces(cfg)
    taus = cfg.grid.times()
    rho0 = qcore.to_density(psi0)
    values = np.empty(taus.size)
    if cfg.backend == "device":
        spec = cfg.device.to_spec(t2_override=cfg.t2)
        calibration = device_calibration(spec)
    else:
        noise = _gate_noise(cfg)
    for i, tau in enumerate(taus):
        t_phys = float(tau) / unit
        if t_phys == 0.0:
            circuit = Circuit(ham.n_qubits, [], _native_set(cfg.backend))
        else:
            circuit = trotterize(
                TrotterPlan(ham, total_time=t_phys, steps=cfg.steps),
                _native_set(cfg.backend),
            )
        ideal = gatesim.run_circuit(circuit, rho0, gatesim.NoiseSpec.noiseless())
        if cfg.backend == "gate":
            noisy = gatesim.run_circuit(circuit, rho0, noise)
        else:
            noisy = run_digital_on_device(circuit, spec, rho0, calibration=calibration).rho
        values[i] = qcore.fidelity(noisy, ideal)
    return TimeSeries(
        t=taus,
        value=values,
        stderr=None,
        backend=cfg.backend,
        model=cfg.model,
        n=cfg.steps,
        t2=_effective_t2(cfg),
        shots=0,
        seed=cfg.seed,
    )


def _native_set(backend: str) -> NativeSet:
    return NativeSet.SQISWAP_SET if backend == "device" else NativeSet.CNOT_SET


def compile_circuit(cfg: ExperimentConfig) -> Circuit:
    """The Trotter circuit for the final grid time, in the backend's gate set.

    This is the printable/exportable artifact: the full-evolution circuit at
    ``t_max`` with the configured number of steps.  The exact backend has no
    native gate set, so it compiles to the CNOT set for inspection.
    """
    ham, _psi0, _axis, unit = _model_pieces(cfg)
    t_phys = cfg.grid.t_max / unit
    if t_phys == 0.0:
        return Circuit(ham.n_qubits, [], _native_set(cfg.backend))
    plan = TrotterPlan(ham, total_time=t_phys, steps=cfg.steps)
    return trotterize(plan, _native_set(cfg.backend))


SweepAxis = Literal["steps", "t2"]


def sweep(
    cfg: ExperimentConfig,
    axis: SweepAxis,
    values: Sequence[Union[int, float]],
    max_workers: int | None = None,
) -> list[TimeSeries]:
    """Run ``cfg`` once per axis value, concurrently, in axis order.

    Compute happens in a thread pool (one task per axis value; the heavy
    numerics release the GIL); results are collected in the order of
    ``values`` and nothing is written to disk here, so output stays
    serialized in the caller.
    """
    if len(values) == 0:
        raise ConfigError("sweep axis must contain at least one value")
    configs = []
    for v in values:
        if axis == "steps":
            configs.append(cfg.model_copy(update={"steps": int(v)}))
        else:
            configs.append(cfg.model_copy(update={"t2": float(v)}))
    if len(configs) == 1:
        return [run_experiment(configs[0])]
    workers = max_workers or min(len(configs), 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


# -- CSV ---------------------------------------------------------------------

CSV_HEADER = ["t", "value", "stderr", "backend", "model", "n", "t2", "shots", "seed"]


def fmt_float(x: float) -> str:
    """Deterministic scalar rendering for CSV cells and wire payloads."""
    if math.isinf(x):
        return "inf"
    return format(x, ".12g")


def csv_text(series: Union[TimeSeries, Sequence[TimeSeries]]) -> str:
    """Render one or more series as deterministic RFC-4180-style CSV text."""
    if isinstance(series, TimeSeries):
        series = [series]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for ts in series:
        for i in range(ts.t.size):
            writer.writerow(
                [
                    fmt_float(float(ts.t[i])),
                    fmt_float(float(ts.value[i])),
                    fmt_float(float(ts.stderr[i])) if ts.stderr is not None else "",
                    ts.backend,
                    ts.model,
                    str(ts.n),
                    fmt_float(ts.t2),
                    str(ts.shots),
                    str(ts.seed),
                ]
            )
    return buf.getvalue()


def write_csv(series: Union[TimeSeries, Sequence[TimeSeries]], path) -> None:
    """Write the CSV artifact (single writer; call after all compute)."""
    text = csv_text(series)
    with open(path, "w", newline="") as fh:
        fh.write(text)
