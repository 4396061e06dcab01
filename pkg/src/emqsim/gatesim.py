"""Gate-level noisy density-matrix backend (transmon-NISQ style).

Gates are applied as exact unitaries; after every gate, every qubit (idle
ones included) decoheres for that gate's duration through an amplitude
damping channel, p1 = 1 - exp(-dt/T1), followed by a pure-dephasing
channel, p_phi = (1 - exp(-dt/T_phi))/2 with 1/T_phi = 1/T2 - 1/(2 T1).
The combined off-diagonal contraction is exactly exp(-dt/T2).

Measurement is Z-basis only: diagonal sampling with independent per-qubit
readout flips.  Observables needing another basis get their basis-change
rotations appended to the circuit before sampling (see experiments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import qcore
from .trotter import Circuit, Gate, embed_gate

DEFAULT_GATE_DURATIONS: dict[str, float] = {
    "RX": 50e-9,
    "RY": 50e-9,
    "RZ": 50e-9,
    "H": 50e-9,
    "X": 50e-9,
    "CNOT": 300e-9,
    "XY": 300e-9,
    "SQISWAP": 300e-9,
    "BARRIER": 0.0,
}

INF = float("inf")


def _as_per_qubit(value: float | Sequence[float], n_qubits: int, what: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * n_qubits
    out = tuple(float(v) for v in value)
    if len(out) != n_qubits:
        raise ValueError(f"{what} has {len(out)} entries for {n_qubits} qubits")
    return out


@dataclass(frozen=True)
class NoiseSpec:
    """Per-qubit T1/T2, per-gate durations, and readout flip probability.

    ``t1``/``t2`` may be scalars (same for every qubit) or per-qubit
    sequences.  Physicality t2 <= 2*t1 is enforced; infinities are fine.
    """

    t1: float | tuple[float, ...] = 50e-6
    t2: float | tuple[float, ...] = 40e-6
    gate_durations: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_GATE_DURATIONS))
    readout_flip: float = 0.03

    def __post_init__(self):
        if isinstance(self.t1, list):
            object.__setattr__(self, "t1", tuple(self.t1))
        if isinstance(self.t2, list):
            object.__setattr__(self, "t2", tuple(self.t2))
        for q, (t1, t2) in enumerate(self._pairs()):
            if t1 <= 0 or t2 <= 0:
                raise ValueError(f"qubit {q}: T1/T2 must be positive, got {t1}, {t2}")
            if t2 > 2.0 * t1 + 1e-30:
                raise ValueError(f"qubit {q}: T2={t2} violates T2 <= 2*T1={2 * t1}")
        if not 0.0 <= self.readout_flip < 0.5:
            raise ValueError(f"readout_flip must be in [0, 0.5), got {self.readout_flip}")
        for name, d in self.gate_durations.items():
            if d < 0:
                raise ValueError(f"negative duration for {name}")

    def _pairs(self):
        t1s = self.t1 if isinstance(self.t1, tuple) else (float(self.t1),)
        t2s = self.t2 if isinstance(self.t2, tuple) else (float(self.t2),)
        n = max(len(t1s), len(t2s))
        t1s = t1s * n if len(t1s) == 1 else t1s
        t2s = t2s * n if len(t2s) == 1 else t2s
        return list(zip(t1s, t2s))

    def t1_for(self, n_qubits: int) -> tuple[float, ...]:
        return _as_per_qubit(self.t1, n_qubits, "t1")

    def t2_for(self, n_qubits: int) -> tuple[float, ...]:
        return _as_per_qubit(self.t2, n_qubits, "t2")

    def duration_of(self, gate_name: str) -> float:
        try:
            return float(self.gate_durations[gate_name])
        except KeyError:
            raise ValueError(f"no duration configured for gate {gate_name!r}") from None

    @staticmethod
    def noiseless() -> "NoiseSpec":
        return NoiseSpec(t1=INF, t2=INF, readout_flip=0.0)


@dataclass(frozen=True)
class ShotResult:
    """Measured bitstring counts; keys are MSB-first bitstrings like '10'."""

    counts: Mapping[str, int]
    shots: int

    def __post_init__(self):
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("negative count")


# ---------------------------------------------------------------------------
# channels


def amplitude_damping_kraus(p: float) -> list[np.ndarray]:
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - p)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return [k0, k1]


def dephasing_kraus(p: float) -> list[np.ndarray]:
    k0 = math.sqrt(1.0 - p) * np.eye(2, dtype=complex)
    k1 = math.sqrt(p) * qcore.SIGMA_Z
    return [k0, k1]


def apply_kraus(rho: np.ndarray, kraus: Sequence[np.ndarray], n_qubits: int, qubit: int) -> np.ndarray:
    dims = [2] * n_qubits
    out = np.zeros_like(rho)
    for k in kraus:
        kk = qcore.embed(k, dims, qubit)
        out += kk @ rho @ kk.conj().T
    return out


def apply_noise(rho: np.ndarray, qubit: int, dt: float, ns: NoiseSpec) -> np.ndarray:
    """Amplitude damping then pure dephasing on one qubit for a time slot dt."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0.0:
        return rho
    n_qubits = int(round(math.log2(rho.shape[0])))
    t1 = ns.t1_for(n_qubits)[qubit]
    t2 = ns.t2_for(n_qubits)[qubit]
    p1 = 1.0 - math.exp(-dt / t1)
    inv_tphi = 1.0 / t2 - 1.0 / (2.0 * t1)
    p_phi = (1.0 - math.exp(-dt * inv_tphi)) / 2.0
    if p1 > 0.0:
        rho = apply_kraus(rho, amplitude_damping_kraus(p1), n_qubits, qubit)
    if p_phi > 0.0:
        rho = apply_kraus(rho, dephasing_kraus(p_phi), n_qubits, qubit)
    return rho


# ---------------------------------------------------------------------------
# execution


def apply_gate(rho: np.ndarray, g: Gate, n_qubits: int | None = None) -> np.ndarray:
    """rho -> U rho U^dagger with the gate unitary embedded on its qubits."""
    rho = qcore.to_density(np.asarray(rho, dtype=complex))
    if n_qubits is None:
        n_qubits = int(round(math.log2(rho.shape[0])))
    u = embed_gate(g, n_qubits)
    if u is None:  # BARRIER
        return rho
    return u @ rho @ u.conj().T


def run_circuit(c: Circuit, rho0: np.ndarray, ns: NoiseSpec) -> np.ndarray:
    """Gates in order; after each, every qubit decoheres for the gate duration."""
    rho = qcore.to_density(np.asarray(rho0, dtype=complex))
    if rho.shape[0] != 2**c.n_qubits:
        raise ValueError(f"state dim {rho.shape[0]} != 2^{c.n_qubits}")
    for g in c.gates:
        rho = apply_gate(rho, g, c.n_qubits)
        dt = g.duration if g.duration is not None else ns.duration_of(g.name)
        if dt > 0.0:
            for q in range(c.n_qubits):
                rho = apply_noise(rho, q, dt, ns)
    return rho


def sample(rho: np.ndarray, shots: int, ns: NoiseSpec, seed: int) -> ShotResult:
    """Z-basis bitstring counts from diag(rho) with independent readout flips."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    rho = qcore.to_density(np.asarray(rho, dtype=complex))
    dim = rho.shape[0]
    n_qubits = int(round(math.log2(dim)))
    probs = np.clip(np.diag(rho).real, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    drawn = rng.choice(dim, size=shots, p=probs)
    # unpack to bits (MSB first), flip each independently with prob readout_flip
    bits = (drawn[:, None] >> np.arange(n_qubits - 1, -1, -1)[None, :]) & 1
    if ns.readout_flip > 0.0:
        flips = rng.random(size=bits.shape) < ns.readout_flip
        bits = bits ^ flips
    keys = bits @ (1 << np.arange(n_qubits - 1, -1, -1))
    counts: dict[str, int] = {}
    for k, n in zip(*np.unique(keys, return_counts=True)):
        counts[format(int(k), f"0{n_qubits}b")] = int(n)
    return ShotResult(counts=counts, shots=shots)


def estimate_observable(
    sr: ShotResult,
    z_strings: Mapping[tuple[int, ...], float],
    readout_flip: float = 0.0,
) -> tuple[float, float]:
    """Monte-Carlo estimate of a Z-string combination, with its standard error.

    Args:
        sr: measured counts.
        z_strings: map from tuples of qubit indices to weights; e.g.
            {(0,): 0.5, (1,): 0.5} is (Z0 + Z1)/2.  The empty tuple is the
            identity and contributes its weight as a constant.
        readout_flip: per-qubit flip probability used when sampling; each
            string estimate is divided by (1-2r)^weight, which unbiases the
            estimator against independent readout flips.

    Returns:
        (value, stderr); stderr is the per-shot sample deviation / sqrt(shots).
    """
    if not sr.counts:
        raise ValueError("empty counts")
    n_bits = len(next(iter(sr.counts)))
    contraction = 1.0 - 2.0 * readout_flip
    # per-bitstring value of the composite estimator
    values = []
    weights = []
    for bitstring, n in sr.counts.items():
        if len(bitstring) != n_bits:
            raise ValueError("inconsistent bitstring lengths")
        bits = [1 - 2 * int(b) for b in bitstring]  # 0 -> +1, 1 -> -1
        x = 0.0
        for qubits, w in z_strings.items():
            prod = 1.0
            for q in qubits:
                prod *= bits[q]
            x += w * prod / contraction ** len(qubits)
        values.append(x)
        weights.append(n)
    values = np.array(values)
    weights = np.array(weights, dtype=float)
    mean = float(np.sum(weights * values) / sr.shots)
    if sr.shots > 1:
        var = float(np.sum(weights * (values - mean) ** 2) / (sr.shots - 1))
    else:
        var = 0.0
    return mean, math.sqrt(max(var, 0.0) / sr.shots)
