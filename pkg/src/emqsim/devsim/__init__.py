"""Pulse-level Lindblad simulator of the electromechanical unit.

Two anharmonic nanoresonators (NRs) host the qubits in their two lowest
vibrational levels; a two-level transmon between them mediates an effective
XY exchange when the coupling is gated on.  Single-qubit gates are resonant
drive pulses; two-qubit gates are timed exchange segments.
"""

from .device import DeviceSpec, build_device_hamiltonian, build_static_hamiltonian, build_interaction, collapse_operators
from .lindblad import LindbladProblem, lindblad_evolve, liouvillian
from .calibration import ExchangeCalibration, DriveCalibration, DeviceCalibration, calibrate_exchange, calibrate_drive, device_calibration
from .pulses import PulseSchedule, DriveSegment, ExchangeSegment, IdleSegment, compile_to_pulses
from .executor import DeviceRunResult, run_schedule, run_digital_on_device

__all__ = [
    "DeviceSpec",
    "build_device_hamiltonian",
    "build_static_hamiltonian",
    "build_interaction",
    "collapse_operators",
    "LindbladProblem",
    "lindblad_evolve",
    "liouvillian",
    "ExchangeCalibration",
    "DriveCalibration",
    "DeviceCalibration",
    "calibrate_exchange",
    "calibrate_drive",
    "device_calibration",
    "PulseSchedule",
    "DriveSegment",
    "ExchangeSegment",
    "IdleSegment",
    "compile_to_pulses",
    "DeviceRunResult",
    "run_schedule",
    "run_digital_on_device",
]
