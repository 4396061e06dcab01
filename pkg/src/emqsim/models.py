"""Pauli-string Hamiltonian IR and the two target models.

Two models are built here, both on 2 qubits with s_alpha = sigma_alpha/2:

* spin-1 tunneling, D*Sz^2 + E*(Sx^2 - Sy^2), encoded into its two-qubit
  image 2D s_z1 s_z2 + 2E (s_x1 s_x2 - s_y1 s_y2).  All three Pauli terms
  commute, so a single Trotter step is already exact.
* transverse-field Ising, Gamma s_x1 s_x2 + b (s_z1 + s_z2), whose terms do
  not commute — the model that actually exercises Trotterization.

Coefficients are angular frequencies in the declared ``unit``; experiment
grids use the dimensionless products E*t and Gamma*t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore

_AXES = ("X", "Y", "Z")
MAX_QUBITS = 12  # guardrail for dense to_matrix()


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string: coefficient * prod_q sigma_axis(q).

    ``factors`` maps qubit index -> axis; identity on absent indices.  Stored
    as a sorted tuple of (qubit, axis) pairs so terms are hashable values.
    """

    coefficient: float
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not math.isfinite(self.coefficient) or self.coefficient == 0.0:
            raise ValueError(f"coefficient must be finite and nonzero, got {self.coefficient}")
        seen = set()
        for q, ax in self.factors:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if ax not in _AXES:
                raise ValueError(f"axis must be one of {_AXES}, got {ax!r}")
            if q in seen:
                raise ValueError(f"duplicate qubit index {q}")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @property
    def weight(self) -> int:
        return len(self.factors)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    def matrix(self, n_qubits: int) -> np.ndarray:
        """Dense matrix of the bare Pauli string (without the coefficient)."""
        ops = {q: qcore.pauli(ax) for q, ax in self.factors}
        return qcore.kron_all(*[ops.get(q, qcore.ID2) for q in range(n_qubits)])


@dataclass(frozen=True)
class PauliHamiltonian:
    """Ordered weighted sum of Pauli strings.

    Term order is part of the value: it fixes the Trotter product order, so
    two Hamiltonians with the same terms in different order compile to
    different (equally valid) circuits.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...]
    unit: str = "rad/time"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if any(q >= self.n_qubits for q in t.qubits):
                raise ValueError(f"term {t} acts outside {self.n_qubits} qubits")

    def to_matrix(self) -> np.ndarray:
        """Dense Hermitian matrix sum_k coeff_k * string_k."""
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"dense matrix guardrail: {self.n_qubits} > {MAX_QUBITS} qubits")
        dim = 2**self.n_qubits
        h = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            h += t.coefficient * t.matrix(self.n_qubits)
        return h


@dataclass(frozen=True)
class SpinOneParams:
    """Axial (D) and rhombic (E) anisotropies of the spin-1 Hamiltonian."""

    D: float = 1.0
    E: float = 0.25

    def __post_init__(self):
        if not (math.isfinite(self.D) and math.isfinite(self.E)):
            raise ValueError("D and E must be finite")


@dataclass(frozen=True)
class TimParams:
    """Ising coupling Gamma and transverse field b; the demo fixes Gamma = 2b."""

    gamma: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.b)):
            raise ValueError("gamma and b must be finite")


def build_spin1_qubit_hamiltonian(p: SpinOneParams) -> PauliHamiltonian:
    """Two-qubit image of the spin-1 Hamiltonian.

    2D s_z1 s_z2 + 2E (s_x1 s_x2 - s_y1 s_y2) rewritten in Pauli strings:
    ZZ with D/2, XX with E/2, YY with -E/2, in that fixed order.  Constant
    terms from S_z^2 = 1/2 + 2 s_z1 s_z2 are dropped (global phase only).
    Zero-coefficient terms are dropped too.
    """
    candidates = [
        (p.D / 2.0, ((0, "Z"), (1, "Z"))),
        (p.E / 2.0, ((0, "X"), (1, "X"))),
        (-p.E / 2.0, ((0, "Y"), (1, "Y"))),
    ]
    terms = tuple(PauliTerm(c, f) for c, f in candidates if c != 0.0)
    return PauliHamiltonian(n_qubits=2, terms=terms)


def build_tim_hamiltonian(p: TimParams) -> PauliHamiltonian:
    """Transverse-field Ising model on 2 qubits.

    Gamma s_x1 s_x2 + b (s_z1 + s_z2) -> [X0X1: Gamma/4, Z0: b/2, Z1: b/2]
    in that fixed order.
    """
    candidates = [
        (p.gamma / 4.0, ((0, "X"), (1, "X"))),
        (p.b / 2.0, ((0, "Z"),)),
        (p.b / 2.0, ((1, "Z"),)),
    ]
    terms = tuple(PauliTerm(c, f) for c, f in candidates if c != 0.0)
    return PauliHamiltonian(n_qubits=2, terms=terms)


def exact_evolve(h: PauliHamiltonian, state0: np.ndarray, t: float) -> np.ndarray:
    """Undigitized reference evolution exp(-i H t) applied to a state.

    Accepts a pure state (returns the evolved vector) or a density matrix
    (returns U rho U^dagger).
    """
    state0 = np.asarray(state0, dtype=complex)
    dim = 2**h.n_qubits
    if state0.shape[0] != dim:
        raise ValueError(f"state dim {state0.shape[0]} != 2^{h.n_qubits}")
    u = qcore.expm(h.to_matrix(), -1j * t, hermitian=True)
    if state0.ndim == 1:
        return u @ state0
    return u @ state0 @ u.conj().T


def total_spin_observable(axis: str, n_qubits: int = 2) -> np.ndarray:
    """sum_i s_axis,i — e.g. <S_x> = Tr[rho (s_x1 + s_x2)] for the TIM."""
    dims = [2] * n_qubits
    s = qcore.spin_half(axis)
    out = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for q in range(n_qubits):
        out += qcore.embed(s, dims, q)
    return out


def spin1_initial_state() -> np.ndarray:
    """|up,up> = |00>: the m=+1 spin-1 level, so tunneling to m=-1 shows in <S_z>."""
    return qcore.bitstring_state("00")


def tim_initial_state() -> np.ndarray:
    """|+>|+>: S_x-polarized start, <S_x>(0) = +1.

    Starting the TIM from |up,up> would be a mistake: the Hamiltonian
    commutes with Z0 Z1 and <S_x> stays identically zero (parity trap,
    guarded by a regression test).
    """
    return qcore.plus_state(2)
