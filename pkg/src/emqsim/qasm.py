"""OpenQASM 2.0 export and a minimal reader for round-trip checks.

Only CNOT-native circuits are exported; exchange-native (SQISWAP-set)
circuits are first re-lowered so the emitted program uses nothing beyond
``qelib1.inc`` (h, x, rx, ry, rz, cx, barrier).  Angles are printed with
``repr`` so parsing the text back reproduces the exact floats, and the
whole rendering is deterministic: the same circuit always yields the same
bytes.

The reader accepts the subset this module emits (plus whitespace and
``//`` comments), which is enough to verify that export -> parse is the
identity up to the unitary's global phase.
"""

from __future__ import annotations

import re

from .errors import ConfigError
from .trotter import Circuit, Gate, NativeSet, relower

_EXPORT_NAME = {
    "H": "h",
    "X": "x",
    "RX": "rx",
    "RY": "ry",
    "RZ": "rz",
    "CNOT": "cx",
}
_IMPORT_NAME = {v: k for k, v in _EXPORT_NAME.items()}
_PARAMETRIC = {"rx", "ry", "rz"}


def export_qasm(circuit: Circuit) -> str:
    """Render a circuit as an OpenQASM 2.0 program with final measurements.

    Args:
        circuit: any circuit; SQISWAP-set circuits are re-lowered to the
            CNOT set before rendering.

    Returns:
        The program text, ending with one ``measure`` per qubit.
    """
    circuit = relower(circuit, NativeSet.CNOT_SET)
    n = circuit.n_qubits
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{n}];",
        f"creg c[{n}];",
    ]
    for g in circuit.gates:
        if g.name == "BARRIER":
            args = ",".join(f"q[{q}]" for q in range(n))
            lines.append(f"barrier {args};")
            continue
        name = _EXPORT_NAME[g.name]
        args = ",".join(f"q[{q}]" for q in g.qubits)
        if name in _PARAMETRIC:
            lines.append(f"{name}({angle_repr(g.angle)}) {args};")
        else:
            lines.append(f"{name} {args};")
    for q in range(n):
        lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


def angle_repr(angle: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(angle))


_GATE_RE = re.compile(
    r"^(?P<name>[a-z]+)\s*(?:\((?P<param>[^)]*)\))?\s*(?P<args>q\[\d+\](?:\s*,\s*q\[\d+\])*)$"
)
_QREG_RE = re.compile(r"^qreg\s+q\[(\d+)\]$")
_MEASURE_RE = re.compile(r"^measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\]$")


def parse_qasm(text: str) -> Circuit:
    """Parse the OpenQASM 2.0 subset produced by :func:`export_qasm`.

    Measure statements are consumed but not represented (the simulator
    measures every qubit implicitly); anything outside the emitted subset
    raises :class:`~emqsim.errors.ConfigError` with its line number.
    """
    n_qubits = None
    gates: list[Gate] = []
    saw_version = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        for stmt in filter(None, (s.strip() for s in line.split(";"))):
            if stmt.startswith("OPENQASM"):
                if stmt != "OPENQASM 2.0":
                    raise ConfigError(f"line {lineno}: unsupported QASM version {stmt!r}")
                saw_version = True
                continue
            if stmt.startswith("include") or stmt.startswith("creg"):
                continue
            m = _QREG_RE.match(stmt)
            if m:
                n_qubits = int(m.group(1))
                continue
            if _MEASURE_RE.match(stmt):
                continue
            m = _GATE_RE.match(stmt)
            if m is None:
                raise ConfigError(f"line {lineno}: cannot parse statement {stmt!r}")
            if n_qubits is None:
                raise ConfigError(f"line {lineno}: gate before qreg declaration")
            name = m.group("name")
            qubits = tuple(int(q) for q in re.findall(r"q\[(\d+)\]", m.group("args")))
            if name == "barrier":
                gates.append(Gate("BARRIER", ()))
                continue
            if name not in _IMPORT_NAME:
                raise ConfigError(f"line {lineno}: unsupported gate {name!r}")
            if name in _PARAMETRIC:
                if m.group("param") is None:
                    raise ConfigError(f"line {lineno}: {name} requires an angle")
                try:
                    angle = float(m.group("param"))
                except ValueError as exc:
                    raise ConfigError(f"line {lineno}: bad angle {m.group('param')!r}") from exc
                gates.append(Gate(_IMPORT_NAME[name], qubits, angle))
            else:
                if m.group("param") is not None:
                    raise ConfigError(f"line {lineno}: {name} takes no parameter")
                gates.append(Gate(_IMPORT_NAME[name], qubits))
    if not saw_version:
        raise ConfigError("missing OPENQASM 2.0 header")
    if n_qubits is None:
        raise ConfigError("missing qreg declaration")
    try:
        return Circuit(n_qubits, gates, NativeSet.CNOT_SET)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
