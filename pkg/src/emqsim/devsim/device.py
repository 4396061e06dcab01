"""Static model of the electromechanical unit: NR -- transmon -- NR.

Hilbert space and ordering
    The device state lives on NR1 (x) transmon (x) NR2 with dimensions
    (n_fock, 2, n_fock); the leftmost Kronecker factor is the most
    significant index, matching the package-wide convention.  The transmon
    enters through ``(Omega/2) sigma_z`` with sigma_z = diag(1, -1), so its
    *ground* state is basis index 1 of the middle factor.

Hamiltonian (lab frame, angular-frequency units, hbar = 1)

    H0    = sum_i [ omega_i n_i + (anharm/2) n_i (n_i - 1) ] + (Omega/2) sz
    H_int = sum_i g (b_i + b_i^dag) sx

The anharmonicity is negative, so the 1->2 transition of each NR is detuned
by |anharm| from the 0->1 qubit transition and resonant drives address the
computational pair selectively.  The transmon is far detuned (dispersive
regime g << |Omega - omega_i|); gating H_int on induces the second-order
exchange between the NRs that implements the native XY(theta) gate.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..qcore import destroy, embed, number, pauli

TWO_PI = 2.0 * math.pi

#: Warn when g / |Omega - omega_i| exceeds this: the dispersive (second-order
#: exchange) picture degrades and the compiled gates lose accuracy.
DISPERSIVE_RATIO_MAX = 0.05


@dataclass(frozen=True)
class DeviceSpec:
    """Physical parameters of one electromechanical unit.

    All frequencies and rates are angular (rad/s).  Coherence times are in
    seconds; ``math.inf`` disables the corresponding channel.

    Attributes:
        omega: NR fundamental frequencies (omega_1, omega_2).
        big_omega: Transmon splitting Omega.
        g: NR-transmon coupling strength (applies to both NRs).
        anharm: NR anharmonicity (negative; shifts the 1->2 transition).
        n_fock: Fock levels retained per NR (>= 3 so leakage is visible).
        t1_nr: NR energy-relaxation time.
        t2_nr: NR total coherence time (T2 <= 2*T1).
        t1_tr: Transmon energy-relaxation time.
        t2_tr: Transmon total coherence time.
        drive_amp: Resonant drive amplitude used by the pulse compiler.
            Must stay well below |anharm| so the 1->2 transition is not
            addressed (enforced at schedule level).
    """

    omega: tuple[float, float] = (TWO_PI * 80e6, TWO_PI * 80e6)
    big_omega: float = TWO_PI * 2.5e9
    g: float = TWO_PI * 6e6
    anharm: float = -TWO_PI * 5e6
    n_fock: int = 3
    t1_nr: float = math.inf
    t2_nr: float = 1e-3
    t1_tr: float = 50e-6
    t2_tr: float = 40e-6
    drive_amp: float = TWO_PI * 100e3

    def __post_init__(self) -> None:
        omega = tuple(float(w) for w in self.omega)
        if len(omega) != 2:
            raise ValueError("omega must hold exactly two NR frequencies")
        object.__setattr__(self, "omega", omega)
        if any(w <= 0 for w in omega) or self.big_omega <= 0:
            raise ValueError("mode frequencies must be positive")
        if self.g <= 0:
            raise ValueError("coupling g must be positive")
        if self.anharm >= 0:
            raise ValueError("anharm must be negative")
        if self.n_fock < 3:
            raise ValueError("n_fock must be >= 3 to resolve leakage")
        for t1, t2, label in (
            (self.t1_nr, self.t2_nr, "NR"),
            (self.t1_tr, self.t2_tr, "transmon"),
        ):
            if t1 <= 0 or t2 <= 0:
                raise ValueError(f"{label} coherence times must be positive")
            if t2 > 2.0 * t1 * (1.0 + 1e-12):
                raise ValueError(f"{label} violates T2 <= 2*T1 ({t2} > 2*{t1})")
        if not 0 < self.drive_amp < 0.2 * abs(self.anharm):
            raise ValueError("drive_amp must satisfy 0 < A < 0.2*|anharm|")
        ratio = max(self.g / abs(self.big_omega - w) for w in omega)
        if ratio >= DISPERSIVE_RATIO_MAX:
            warnings.warn(
                f"dispersive ratio g/|Omega-omega| = {ratio:.3f} >= "
                f"{DISPERSIVE_RATIO_MAX}; exchange gates will be inaccurate",
                stacklevel=2,
            )

    @property
    def dims(self) -> tuple[int, int, int]:
        """Subsystem dimensions (NR1, transmon, NR2)."""
        return (self.n_fock, 2, self.n_fock)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension."""
        return 2 * self.n_fock * self.n_fock

    def detunings(self) -> tuple[float, float]:
        """Transmon-NR detunings Delta_i = Omega - omega_i."""
        return (self.big_omega - self.omega[0], self.big_omega - self.omega[1])

    def noiseless(self) -> "DeviceSpec":
        """Copy of this spec with every decoherence channel disabled."""
        return dataclasses.replace(
            self, t1_nr=math.inf, t2_nr=math.inf, t1_tr=math.inf, t2_tr=math.inf
        )


# -- operator builders ------------------------------------------------------


def nr_lowering(spec: DeviceSpec, which: int) -> np.ndarray:
    """Annihilation operator of NR ``which`` (0 or 1) on the full space."""
    site = 0 if which == 0 else 2
    return embed(destroy(spec.n_fock), spec.dims, site)


def nr_number(spec: DeviceSpec, which: int) -> np.ndarray:
    """Number operator of NR ``which`` on the full space."""
    site = 0 if which == 0 else 2
    return embed(number(spec.n_fock), spec.dims, site)


def transmon_op(spec: DeviceSpec, name: str) -> np.ndarray:
    """Transmon Pauli operator (``"X"``, ``"Y"`` or ``"Z"``) on the full space."""
    return embed(pauli(name), spec.dims, 1)


def build_static_hamiltonian(spec: DeviceSpec) -> np.ndarray:
    """Uncoupled Hamiltonian H0: bare modes plus anharmonicity (diagonal)."""
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i in (0, 1):
        n = nr_number(spec, i)
        h += spec.omega[i] * n + 0.5 * spec.anharm * (n @ n - n)
    h += 0.5 * spec.big_omega * transmon_op(spec, "Z")
    return h


def build_interaction(spec: DeviceSpec) -> np.ndarray:
    """Gateable NR-transmon coupling H_int = sum_i g (b_i + b_i^dag) sx."""
    sx = transmon_op(spec, "X")
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i in (0, 1):
        b = nr_lowering(spec, i)
        h += spec.g * ((b + b.conj().T) @ sx)
    return h


def build_device_hamiltonian(spec: DeviceSpec, coupling_on: bool = True) -> np.ndarray:
    """Full static Hamiltonian, with or without the gateable coupling."""
    h = build_static_hamiltonian(spec)
    if coupling_on:
        h = h + build_interaction(spec)
    return h


def collapse_operators(spec: DeviceSpec) -> list[tuple[float, np.ndarray]]:
    """Lindblad channels as (rate, operator) pairs; zero rates are omitted.

    Channels per NR: energy relaxation through ``b`` at rate 1/T1 and pure
    dephasing through the number operator.  A number-operator dissipator
    D[n] at rate ``gamma`` decays the 0-1 coherence as exp(-gamma*t/2), so
    reproducing the pure-dephasing law exp(-t/Tphi) on the qubit levels
    requires ``gamma = 2/Tphi``.  The transmon relaxes through sigma_minus
    at 1/T1 and dephases through sigma_z/sqrt(2) at 1/Tphi (this
    normalisation makes the rate itself the coherence-decay rate).  In all
    cases 1/Tphi = 1/T2 - 1/(2*T1).
    """
    ops: list[tuple[float, np.ndarray]] = []
    for i in (0, 1):
        if math.isfinite(spec.t1_nr):
            ops.append((1.0 / spec.t1_nr, nr_lowering(spec, i)))
        inv_tphi = _inv_tphi(spec.t1_nr, spec.t2_nr, "NR")
        if inv_tphi > 0.0:
            ops.append((2.0 * inv_tphi, nr_number(spec, i)))
    sm = 0.5 * (transmon_op(spec, "X") + 1j * transmon_op(spec, "Y"))
    # sigma_minus maps the excited transmon state (index 0, sz=+1) to the
    # ground state (index 1): |1><0| in the middle factor.
    sm = sm.conj().T
    if math.isfinite(spec.t1_tr):
        ops.append((1.0 / spec.t1_tr, sm))
    inv_tphi = _inv_tphi(spec.t1_tr, spec.t2_tr, "transmon")
    if inv_tphi > 0.0:
        ops.append((inv_tphi, transmon_op(spec, "Z") / math.sqrt(2.0)))
    return ops


def _inv_tphi(t1: float, t2: float, label: str) -> float:
    """Pure-dephasing rate 1/Tphi = 1/T2 - 1/(2*T1), clipped at zero."""
    inv_t1 = 0.0 if math.isinf(t1) else 1.0 / t1
    inv_t2 = 0.0 if math.isinf(t2) else 1.0 / t2
    inv = inv_t2 - 0.5 * inv_t1
    if inv < -1e-9 * max(inv_t2, 1.0):
        raise ValueError(f"{label} T2 exceeds the 2*T1 limit")
    return max(inv, 0.0)


# -- rotating-frame builders --------------------------------------------------
#
# The executor keeps the state in a "storage" frame generated by the bare
# number operators, W(t) = exp(+i H_rot t).  Because H_rot is built from
# number operators only, every collapse operator above is exactly invariant
# under the frame transformation, and the remaining in-frame statics are the
# diagonal anharmonic terms (zero on the computational levels).


def rot_generator(spec: DeviceSpec) -> np.ndarray:
    """Storage-frame generator H_rot = sum_i omega_i n_i + (Omega/2) sz."""
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i in (0, 1):
        h += spec.omega[i] * nr_number(spec, i)
    h += 0.5 * spec.big_omega * transmon_op(spec, "Z")
    return h


def anharm_hamiltonian(spec: DeviceSpec) -> np.ndarray:
    """In-frame idle Hamiltonian H0 - H_rot = sum_i (anharm/2) n_i (n_i - 1)."""
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i in (0, 1):
        n = nr_number(spec, i)
        h += 0.5 * spec.anharm * (n @ n - n)
    return h


def drive_frame_hamiltonian(
    spec: DeviceSpec,
    which: int,
    amplitude: float,
    phase: float,
    carrier: float,
) -> np.ndarray:
    """Constant Hamiltonian of a resonant drive segment in its carrier frame.

    A lab-frame tone A cos(carrier*t + phase) on NR ``which``, viewed in the
    frame rotating at the carrier, becomes (after dropping the 2*carrier
    counter-rotating term)

        H' = H_anh + (omega_q - carrier) n_q
             + (A/2) (e^{i phase} b_q + e^{-i phase} b_q^dag)

    On the computational pair the drive term is
    (A/2)(cos(phase) sx - sin(phase) sy), so phase selects the rotation axis.
    """
    h = anharm_hamiltonian(spec)
    h += (spec.omega[which] - carrier) * nr_number(spec, which)
    b = nr_lowering(spec, which)
    h += 0.5 * amplitude * (np.exp(1j * phase) * b + np.exp(-1j * phase) * b.conj().T)
    return h


# -- computational-subspace embedding ---------------------------------------


def computational_isometry(spec: DeviceSpec) -> np.ndarray:
    """Isometry V (dim x 4) mapping 2-qubit basis |q1 q2> into the device.

    Qubit q_i occupies Fock levels {0, 1} of NR i; the transmon sits in its
    ground state (middle-factor index 1).
    """
    v = np.zeros((spec.dim, 4))
    for q1 in (0, 1):
        for q2 in (0, 1):
            v[device_index(spec, q1, 1, q2), 2 * q1 + q2] = 1.0
    return v


def device_index(spec: DeviceSpec, n1: int, s: int, n2: int) -> int:
    """Flat index of the product basis state |n1> (x) |s> (x) |n2>."""
    return (n1 * 2 + s) * spec.n_fock + n2


def embed_qubit_state(spec: DeviceSpec, rho_2q: np.ndarray) -> np.ndarray:
    """Lift a 2-qubit density matrix into the device space (transmon ground)."""
    rho_2q = np.asarray(rho_2q, dtype=complex)
    if rho_2q.shape != (4, 4):
        raise ValueError("expected a 4x4 two-qubit density matrix")
    v = computational_isometry(spec)
    return v @ rho_2q @ v.conj().T


def reduce_to_qubits(spec: DeviceSpec, rho_dev: np.ndarray) -> tuple[np.ndarray, float]:
    """Project a device state back to the 2-qubit space.

    The transmon is traced out first, then each NR is projected onto its two
    lowest levels.  Returns the renormalised 4x4 density matrix and the
    leakage = 1 - trace of the projected block (population that escaped the
    computational subspace of the NRs).
    """
    from ..qcore import partial_trace

    rho_nr = partial_trace(rho_dev, list(spec.dims), keep=[0, 2])
    nf = spec.n_fock
    proj = np.zeros((4, nf * nf))
    for q1 in (0, 1):
        for q2 in (0, 1):
            proj[2 * q1 + q2, q1 * nf + q2] = 1.0
    block = proj @ rho_nr @ proj.T
    kept = float(np.real(np.trace(block)))
    leakage = 1.0 - kept
    if kept <= 0.0:
        raise ValueError("no population left in the computational subspace")
    return block / kept, leakage
