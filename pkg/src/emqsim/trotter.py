"""Suzuki-Trotter compiler: Pauli Hamiltonians -> native-gate circuits.

First-order (Lie-Trotter) product only: exp(-iHt) ~ (prod_k U_k(t/n))^n
with the product taken in the Hamiltonian's stable term order.

Angle conventions (enforced by the lowering-soundness tests):
    RX(a) = exp(-i a sigma_x / 2)     (same for RY, RZ)
    XY(a) = exp(-i a (XX + YY) / 4)   SQISWAP == XY(pi/2)

Gate lists apply left to right: the composed unitary of [g1, g2] is
U(g2) @ U(g1).

Native sets:
    CNOT_SET    - two-body terms via CNOT . RZ . CNOT cores (transmon NISQ style)
    SQISWAP_SET - two-body terms via timed XY exchange gates; a jointly
                  occurring XX/YY pair with matching |coefficient| lowers to a
                  single exchange (plus an X conjugation when the signs differ,
                  which is exactly what the spin-1 image produces)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import CompileError, UnsupportedLocalityError
from .models import PauliHamiltonian, PauliTerm

MAX_UNITARY_QUBITS = 10  # guardrail for dense circuit_unitary()


class NativeSet(str, enum.Enum):
    CNOT_SET = "cnot"
    SQISWAP_SET = "sqiswap"


_ROTATIONS = frozenset({"RX", "RY", "RZ", "XY"})
_ADMISSIBLE = {
    NativeSet.CNOT_SET: frozenset({"RX", "RY", "RZ", "H", "X", "CNOT", "BARRIER"}),
    NativeSet.SQISWAP_SET: frozenset({"RX", "RY", "RZ", "H", "X", "XY", "SQISWAP", "BARRIER"}),
}
_TWO_QUBIT = frozenset({"CNOT", "XY", "SQISWAP"})
_ALL_NAMES = frozenset().union(*_ADMISSIBLE.values())


@dataclass(frozen=True)
class Gate:
    """One timed gate; ``duration`` stays None until a backend fills it in."""

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None
    duration: float | None = None

    def __post_init__(self):
        if self.name not in _ALL_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.name in _TWO_QUBIT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.name} needs two distinct qubits, got {self.qubits}")
        elif self.name != "BARRIER" and len(self.qubits) != 1:
            raise ValueError(f"{self.name} acts on exactly one qubit, got {self.qubits}")
        needs_angle = self.name in _ROTATIONS
        if needs_angle and self.angle is None:
            raise ValueError(f"{self.name} needs an angle")
        if not needs_angle and self.angle is not None:
            raise ValueError(f"{self.name} takes no angle")


def rx(q: int, angle: float) -> Gate:
    return Gate("RX", (q,), angle)


def ry(q: int, angle: float) -> Gate:
    return Gate("RY", (q,), angle)


def rz(q: int, angle: float) -> Gate:
    return Gate("RZ", (q,), angle)


def xy(a: int, b: int, angle: float) -> Gate:
    return Gate("XY", (a, b), angle)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    native_set: NativeSet

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        object.__setattr__(self, "gates", tuple(self.gates))
        allowed = _ADMISSIBLE[self.native_set]
        for g in self.gates:
            if g.name not in allowed:
                raise ValueError(f"gate {g.name} not admissible in {self.native_set.name}")
            if any(q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} outside {self.n_qubits} qubits")


@dataclass(frozen=True)
class TrotterPlan:
    hamiltonian: PauliHamiltonian
    total_time: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not math.isfinite(self.total_time):
            raise ValueError("total_time must be finite")


# ---------------------------------------------------------------------------
# gate matrices


def gate_matrix(g: Gate) -> np.ndarray | None:
    """Local unitary of a gate (2x2 or 4x4); None for BARRIER."""
    if g.name == "BARRIER":
        return None
    if g.name == "RX":
        return qcore.expm(qcore.SIGMA_X, -0.5j * g.angle, hermitian=True)
    if g.name == "RY":
        return qcore.expm(qcore.SIGMA_Y, -0.5j * g.angle, hermitian=True)
    if g.name == "RZ":
        a = g.angle / 2.0
        return np.diag([np.exp(-1j * a), np.exp(1j * a)])
    if g.name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if g.name == "X":
        return qcore.SIGMA_X.copy()
    if g.name == "CNOT":
        # control = first listed qubit
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    if g.name in ("XY", "SQISWAP"):
        angle = np.pi / 2 if g.name == "SQISWAP" else g.angle
        gen = (qcore.kron(qcore.SIGMA_X, qcore.SIGMA_X) + qcore.kron(qcore.SIGMA_Y, qcore.SIGMA_Y)) / 4.0
        return qcore.expm(gen, -1j * angle, hermitian=True)
    raise ValueError(f"unknown gate {g.name!r}")  # pragma: no cover


def embed_gate(g: Gate, n_qubits: int) -> np.ndarray | None:
    """Gate unitary on the full 2^n space (None for BARRIER)."""
    m = gate_matrix(g)
    if m is None:
        return None
    dims = [2] * n_qubits
    if len(g.qubits) == 1:
        return qcore.embed(m, dims, g.qubits[0])
    return _embed_two_qubit(m, n_qubits, g.qubits[0], g.qubits[1])


def _embed_two_qubit(m: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    """Embed a 4x4 operator acting on qubits (a, b) of an n-qubit register."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in (a, b)]
    shifts = {q: n - 1 - q for q in range(n)}  # leftmost qubit = most significant bit
    for col in range(dim):
        ca = (col >> shifts[a]) & 1
        cb = (col >> shifts[b]) & 1
        base = col & ~((1 << shifts[a]) | (1 << shifts[b]))
        for ra in (0, 1):
            for rb in (0, 1):
                amp = m[2 * ra + rb, 2 * ca + cb]
                if amp != 0.0:
                    row = base | (ra << shifts[a]) | (rb << shifts[b])
                    out[row, col] += amp
    return out


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense composed unitary of the whole circuit (verification oracle)."""
    if c.n_qubits > MAX_UNITARY_QUBITS:
        raise ValueError(f"circuit_unitary guardrail: {c.n_qubits} > {MAX_UNITARY_QUBITS}")
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        m = embed_gate(g, c.n_qubits)
        if m is not None:
            u = m @ u
    return u


# ---------------------------------------------------------------------------
# lowering

# single-qubit basis changes: C such that C @ Z @ C^dag = P (CNOT-set cores are
# ZZ-based) and C @ X @ C^dag = P (exchange-set cores are XX-based).
# Lists are gate factories f(q) -> Gate.
_TO_Z = {
    "Z": ([], []),
    "X": ([lambda q: Gate("H", (q,))], [lambda q: Gate("H", (q,))]),
    "Y": ([lambda q: rx(q, np.pi / 2)], [lambda q: rx(q, -np.pi / 2)]),
}
_TO_X = {
    "X": ([], []),
    "Z": ([lambda q: Gate("H", (q,))], [lambda q: Gate("H", (q,))]),
    "Y": ([lambda q: rz(q, -np.pi / 2)], [lambda q: rz(q, np.pi / 2)]),
}


def _zz_core_cnot(a: int, b: int, theta: float) -> list[Gate]:
    """exp(-i theta Z_a Z_b) = CNOT . RZ(2 theta) . CNOT."""
    cnot = Gate("CNOT", (a, b))
    return [cnot, rz(b, 2.0 * theta), cnot]


def _xx_core_exchange(a: int, b: int, theta: float) -> list[Gate]:
    """exp(-i theta X_a X_b) from two exchange gates.

    (XX+YY) and (XX-YY) commute with zero product, and X on one qubit maps
    one onto the other, so exp(-i theta XX) = XY(2t) . X_b . XY(2t) . X_b.
    """
    flip = Gate("X", (b,))
    return [flip, xy(a, b, 2.0 * theta), flip, xy(a, b, 2.0 * theta)]


def lower_term(term: PauliTerm, theta: float, native_set: NativeSet) -> list[Gate]:
    """Gates whose composition equals exp(-i theta P) up to global phase.

    ``theta`` is coefficient * (t/n); the coefficient is *not* re-applied here.
    """
    if term.weight > 2:
        raise UnsupportedLocalityError(
            f"term on qubits {term.qubits} has weight {term.weight} > 2: unsupported locality"
        )
    if term.weight == 0:
        return []  # identity term: global phase only
    if term.weight == 1:
        ((q, ax),) = term.factors
        pre, post = _TO_Z[ax]
        return [f(q) for f in pre] + [rz(q, 2.0 * theta)] + [f(q) for f in post]

    (a, ax_a), (b, ax_b) = term.factors
    if native_set is NativeSet.CNOT_SET:
        table, core = _TO_Z, _zz_core_cnot(a, b, theta)
    else:
        table, core = _TO_X, _xx_core_exchange(a, b, theta)
    pre_a, post_a = table[ax_a]
    pre_b, post_b = table[ax_b]
    gates = [f(a) for f in pre_a] + [f(b) for f in pre_b]
    gates += core
    gates += [f(a) for f in post_a] + [f(b) for f in post_b]
    return gates


def lower_xy_pair(a: int, b: int, theta: float, opposite_sign: bool) -> list[Gate]:
    """Joint lowering of an XX/YY pair with matching |coefficient|.

    {XX:+c, YY:+c} -> exp(-i theta (XX+YY)) = XY(4 theta);
    {XX:+c, YY:-c} -> exp(-i theta (XX-YY)) = X_b . XY(4 theta) . X_b.
    """
    core = [xy(a, b, 4.0 * theta)]
    if not opposite_sign:
        return core
    flip = Gate("X", (b,))
    return [flip] + core + [flip]


def _step_gates(h: PauliHamiltonian, dt: float, native_set: NativeSet) -> list[Gate]:
    """Lower one Trotter step, fusing adjacent XX/YY pairs in the exchange set."""
    gates: list[Gate] = []
    i = 0
    while i < len(h.terms):
        t = h.terms[i]
        if (
            native_set is NativeSet.SQISWAP_SET
            and i + 1 < len(h.terms)
            and t.weight == 2
            and h.terms[i + 1].weight == 2
            and t.qubits == h.terms[i + 1].qubits
            and {ax for _, ax in t.factors} == {"X"}
            and {ax for _, ax in h.terms[i + 1].factors} == {"Y"}
            and math.isclose(abs(t.coefficient), abs(h.terms[i + 1].coefficient), rel_tol=1e-12)
        ):
            nxt = h.terms[i + 1]
            a, b = t.qubits
            theta = t.coefficient * dt
            opposite = (t.coefficient > 0) != (nxt.coefficient > 0)
            gates += lower_xy_pair(a, b, theta, opposite_sign=opposite)
            i += 2
            continue
        gates += lower_term(t, t.coefficient * dt, native_set)
        i += 1
    return gates


def trotterize(plan: TrotterPlan, native_set: NativeSet) -> Circuit:
    """n concatenated per-term lowerings in stable term order, BARRIER-separated."""
    h = plan.hamiltonian
    dt = plan.total_time / plan.steps
    step = _step_gates(h, dt, native_set)
    gates: list[Gate] = []
    for k in range(plan.steps):
        if k:
            gates.append(Gate("BARRIER", ()))
        gates += step
    return Circuit(n_qubits=h.n_qubits, gates=tuple(gates), native_set=native_set)


def relower(c: Circuit, target: NativeSet) -> Circuit:
    """Re-express a circuit in another native set (used for QASM export).

    XY(theta) splits exactly into commuting XX and YY quarters, each lowered
    through the CNOT core; single-qubit gates pass through unchanged.
    """
    if target is c.native_set:
        return c
    if target is not NativeSet.CNOT_SET:
        raise CompileError("re-lowering is only supported toward CNOT_SET")
    gates: list[Gate] = []
    for g in c.gates:
        if g.name in ("XY", "SQISWAP"):
            angle = np.pi / 2 if g.name == "SQISWAP" else g.angle
            a, b = g.qubits
            xx = PauliTerm(1.0, ((a, "X"), (b, "X")))
            yy = PauliTerm(1.0, ((a, "Y"), (b, "Y")))
            gates += lower_term(xx, angle / 4.0, NativeSet.CNOT_SET)
            gates += lower_term(yy, angle / 4.0, NativeSet.CNOT_SET)
        else:
            gates.append(g)
    return Circuit(n_qubits=c.n_qubits, gates=tuple(gates), native_set=target)


# ---------------------------------------------------------------------------
# digital error


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral-norm distance after optimizing one global phase (Frobenius-optimal)."""
    tr = np.trace(v.conj().T @ u)
    phase = tr / abs(tr) if abs(tr) > 1e-14 else 1.0
    return float(np.linalg.norm(u - phase * v, ord=2))


def digital_error(plan: TrotterPlan, native_set: NativeSet = NativeSet.CNOT_SET) -> float:
    """Operator-norm gap between the Trotter circuit and the exact propagator."""
    u_exact = qcore.expm(plan.hamiltonian.to_matrix(), -1j * plan.total_time, hermitian=True)
    u_circ = circuit_unitary(trotterize(plan, native_set))
    return phase_aligned_distance(u_circ, u_exact)


# ---------------------------------------------------------------------------
# listing


def format_circuit(c: Circuit) -> str:
    """Human-readable listing, one gate per line in execution order.

    Example line: ``RZ(1.5707963267948966) q0``; two-qubit gates list both
    qubits, barriers span the register.
    """
    lines = [f"{c.native_set.value} circuit on {c.n_qubits} qubits ({len(c.gates)} gates)"]
    for g in c.gates:
        if g.name == "BARRIER":
            lines.append("BARRIER")
            continue
        qubits = " ".join(f"q{q}" for q in g.qubits)
        if g.angle is not None:
            lines.append(f"{g.name}({g.angle!r}) {qubits}")
        else:
            lines.append(f"{g.name} {qubits}")
    return "\n".join(lines) + "\n"
