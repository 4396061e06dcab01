"""Pulse schedules and the gate-to-pulse compiler.

A schedule is a flat sequence of hardware segments executed back to back:

* ``DriveSegment`` -- resonant tone on one NR; rotation axis set by the
  tone phase, rotation angle by amplitude * duration.
* ``ExchangeSegment`` -- NR-transmon coupling gated on for a fixed time,
  implementing XY(2*J*duration) on the computational pair.  ``flip_sign``
  realises the opposite exchange sign by sandwiching the segment between
  pi phase jumps of NR1's local oscillator (virtual, zero duration).
* ``IdleSegment`` -- free evolution (barriers compile to zero idles).

Single-qubit gates map to drives as

    RX(theta)           one pulse, phase 0 (pi for negative theta)
    RY(theta)           one pulse, phase -pi/2 (+pi/2 for negative theta)
    RZ(lambda)          RX(-pi/2), RY(lambda), RX(pi/2)
    H                   RY(pi/2), X
    X                   RX(pi)

(sequences listed in application order; H and X equal their unitaries up to
global phase, which density matrices do not see).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from ..errors import CompileError
from ..trotter import Circuit, NativeSet
from .calibration import DeviceCalibration, device_calibration
from .device import DeviceSpec

#: Drive amplitude must stay below this fraction of |anharm| so the 1->2
#: transition of the driven NR is never addressed.
AMPLITUDE_RATIO_MAX = 0.2


@dataclass(frozen=True)
class DriveSegment:
    """Resonant drive tone on one NR.

    Attributes:
        qubit: NR index (0 or 1).
        axis: Rotation-axis label ("x", "y", "-x", "-y"), informational.
        amplitude: Tone amplitude A (rad/s).
        phase: Tone phase; the computational-pair drive term is
            (A/2)(cos(phase) sx - sin(phase) sy).
        carrier: Tone angular frequency (Stark-compensated).
        duration: Pulse length; rotation angle = amplitude * duration.
    """

    qubit: int
    axis: str
    amplitude: float
    phase: float
    carrier: float
    duration: float

    def __post_init__(self) -> None:
        if self.qubit not in (0, 1):
            raise ValueError("qubit must be 0 or 1")
        if self.amplitude <= 0 or self.carrier <= 0:
            raise ValueError("amplitude and carrier must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


@dataclass(frozen=True)
class ExchangeSegment:
    """Coupling gated on for ``duration``; XY angle = 2 * J * duration."""

    duration: float
    flip_sign: bool = False

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


@dataclass(frozen=True)
class IdleSegment:
    """Free evolution for ``duration`` (may be zero, e.g. a barrier)."""

    duration: float

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


Segment = Union[DriveSegment, ExchangeSegment, IdleSegment]


@dataclass(frozen=True)
class PulseSchedule:
    """Compiled pulse program bound to the device it was compiled for."""

    spec: DeviceSpec
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        limit = AMPLITUDE_RATIO_MAX * abs(self.spec.anharm)
        for seg in self.segments:
            if isinstance(seg, DriveSegment) and seg.amplitude >= limit:
                raise ValueError(
                    f"drive amplitude {seg.amplitude:.3e} exceeds "
                    f"{AMPLITUDE_RATIO_MAX} * |anharm|; the pulse would drive "
                    "the 1->2 transition"
                )

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def counts(self) -> dict[str, int]:
        """Segment tally by kind (diagnostic)."""
        out = {"drive": 0, "exchange": 0, "idle": 0}
        for seg in self.segments:
            if isinstance(seg, DriveSegment):
                out["drive"] += 1
            elif isinstance(seg, ExchangeSegment):
                out["exchange"] += 1
            else:
                out["idle"] += 1
        return out


def compile_to_pulses(
    circuit: Circuit,
    spec: DeviceSpec,
    calibration: DeviceCalibration | None = None,
) -> PulseSchedule:
    """Compile an exchange-native circuit into a pulse schedule.

    Args:
        circuit: Two-qubit circuit on the SQiSWAP native set.
        spec: Target device (fixes amplitudes, carriers and J).
        calibration: Reuse an existing calibration; fitted from ``spec``
            (cached) when omitted.

    Raises:
        CompileError: If the circuit is not on the exchange-native set or
            not two-qubit.
    """
    if circuit.native_set is not NativeSet.SQISWAP_SET:
        raise CompileError(
            "device execution requires a circuit lowered to the sqiswap "
            f"native set, got {circuit.native_set.value!r}"
        )
    if circuit.n_qubits != 2:
        raise CompileError("the electromechanical unit hosts exactly two qubits")
    cal = calibration if calibration is not None else device_calibration(spec)
    amp = cal.drive.amplitude
    segments: list[Segment] = []

    def add_drive(qubit: int, theta: float, axis: str) -> None:
        if theta == 0.0:
            return
        phase = 0.0 if axis == "x" else -0.5 * math.pi
        label = axis
        if theta < 0.0:
            phase += math.pi
            label = "-" + axis
        segments.append(
            DriveSegment(
                qubit=qubit,
                axis=label,
                amplitude=amp,
                phase=phase,
                carrier=spec.omega[qubit] + cal.drive.stark[qubit],
                duration=abs(theta) / amp,
            )
        )

    def add_exchange(theta: float) -> None:
        if theta == 0.0:
            return
        segments.append(
            ExchangeSegment(
                duration=abs(theta / (2.0 * cal.exchange.j_fit)),
                flip_sign=theta * cal.exchange.j_fit < 0.0,
            )
        )

    for gate in circuit.gates:
        if gate.name == "BARRIER":
            segments.append(IdleSegment(0.0))
            continue
        q = gate.qubits[0]
        if gate.name == "RX":
            add_drive(q, gate.angle, "x")
        elif gate.name == "RY":
            add_drive(q, gate.angle, "y")
        elif gate.name == "RZ":
            if gate.angle != 0.0:
                add_drive(q, -0.5 * math.pi, "x")
                add_drive(q, gate.angle, "y")
                add_drive(q, 0.5 * math.pi, "x")
        elif gate.name == "H":
            add_drive(q, 0.5 * math.pi, "y")
            add_drive(q, math.pi, "x")
        elif gate.name == "X":
            add_drive(q, math.pi, "x")
        elif gate.name == "XY":
            add_exchange(gate.angle)
        elif gate.name == "SQISWAP":
            add_exchange(0.5 * math.pi)
        else:  # pragma: no cover - Circuit admissibility already filters
            raise CompileError(f"gate {gate.name} has no pulse realisation")
    return PulseSchedule(spec=spec, segments=tuple(segments))
