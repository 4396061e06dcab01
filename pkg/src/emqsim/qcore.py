"""Dense complex linear algebra and quantum primitives.

Everything in this package runs on plain ``numpy`` arrays: operators are
2-d complex arrays, pure states are 1-d complex arrays, density matrices
are 2-d complex arrays with unit trace.  Hilbert-space factorizations are
given as ordered sequences of local dimensions, e.g. ``[3, 2, 3]`` for
oscillator-qubit-oscillator.

Tensor-ordering convention (used everywhere, asserted in tests): the
*leftmost* Kronecker factor is the *most significant* index, so the basis
state |q0 q1> of two qubits has flat index ``2*q0 + q1`` and
``kron(A, B)`` acts with ``A`` on the left subsystem.

Spin-1/2 operators come in both conventions used in the model definitions:
``pauli(axis)`` returns sigma_alpha and ``spin_half(axis)`` returns
s_alpha = sigma_alpha / 2.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "ID2",
    "pauli",
    "spin_half",
    "destroy",
    "create",
    "number",
    "kron",
    "kron_all",
    "embed",
    "expm",
    "is_hermitian",
    "is_unitary",
    "check_pure_state",
    "check_density_matrix",
    "basis_state",
    "bitstring_state",
    "plus_state",
    "to_density",
    "partial_trace",
    "expectation",
    "fidelity",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

_PAULIS = {"I": ID2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix sigma_alpha for axis in {I, X, Y, Z} (case-insensitive)."""
    try:
        return _PAULIS[axis.upper()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def spin_half(axis: str) -> np.ndarray:
    """Spin-1/2 operator s_alpha = sigma_alpha / 2."""
    return pauli(axis) / 2.0


def destroy(dim: int) -> np.ndarray:
    """Bosonic annihilation operator b on a ``dim``-level truncated ladder."""
    if dim < 2:
        raise ValueError("ladder needs dim >= 2")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def create(dim: int) -> np.ndarray:
    """Bosonic creation operator b^dagger."""
    return destroy(dim).conj().T


def number(dim: int) -> np.ndarray:
    """Number operator n = b^dagger b."""
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor most significant."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(*ops: np.ndarray) -> np.ndarray:
    """Left-to-right Kronecker product of any number of operators."""
    if not ops:
        raise ValueError("kron_all needs at least one operator")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, dims: Sequence[int], site: int) -> np.ndarray:
    """Embed a local operator at ``site`` of a tensor factorization.

    Args:
        op: local operator, shape (dims[site], dims[site]).
        dims: local dimensions, leftmost most significant.
        site: which factor ``op`` acts on.

    Returns:
        The operator acting as ``op`` on ``site`` and identity elsewhere.
    """
    if not 0 <= site < len(dims):
        raise ValueError(f"site {site} outside factorization {list(dims)}")
    if op.shape != (dims[site], dims[site]):
        raise ValueError(f"operator shape {op.shape} != local dim {dims[site]}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = op
    return kron_all(*factors)


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T)) <= tol


def is_unitary(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) <= tol


def expm(h: np.ndarray, scale: complex = 1.0, hermitian: bool | None = None) -> np.ndarray:
    """Matrix exponential exp(scale * h).

    Hermitian inputs take the eigendecomposition path, which keeps
    exp(-i t H) unitary to machine precision at these dimensions; anything
    else (Liouvillians in particular) falls through to scipy's
    scaling-and-squaring Pade routine.

    Args:
        h: square matrix.
        scale: scalar multiplied into the exponent, e.g. ``-1j * t``.
        hermitian: force or forbid the eigendecomposition path; ``None``
            autodetects with a 1e-10 tolerance.

    Returns:
        exp(scale * h) as a dense complex matrix.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {h.shape}")
    if hermitian is None:
        hermitian = is_hermitian(h, tol=1e-10)
    elif hermitian and not is_hermitian(h, tol=1e-10):
        raise ValueError("hermitian fast path requested for a non-Hermitian matrix")
    if hermitian:
        evals, vecs = np.linalg.eigh(h)
        return (vecs * np.exp(scale * evals)) @ vecs.conj().T
    return scipy.linalg.expm(scale * h)


# ---------------------------------------------------------------------------
# states


def check_pure_state(psi: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a pure state: 1-d, unit norm within ``tol``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"pure state must be a vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"pure state norm {norm} deviates from 1 by more than {tol}")
    return psi


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10, eig_tol: float = 1e-8) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, eigenvalues >= -eig_tol."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian within tolerance")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1 by more than {tol}")
    low = np.linalg.eigvalsh(rho).min()
    if low < -eig_tol:
        raise ValueError(f"density matrix has eigenvalue {low} < -{eig_tol}")
    return rho


def basis_state(dim: int, index: int) -> np.ndarray:
    """Computational basis vector |index> in a ``dim``-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} outside dimension {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def bitstring_state(bits: str | Iterable[int]) -> np.ndarray:
    """Multi-qubit basis state |b0 b1 ...> with b0 the most significant bit."""
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    index = 0
    for b in bits:
        index = 2 * index + b
    return basis_state(2 ** len(bits), index)


def plus_state(n_qubits: int = 1) -> np.ndarray:
    """|+>^(x n): the uniform superposition, sigma_x eigenstate."""
    dim = 2**n_qubits
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def to_density(state: np.ndarray) -> np.ndarray:
    """Promote a pure state to its density matrix; pass density matrices through."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix over the kept subsystems.

    Args:
        rho: density matrix on the full space (a pure state is promoted).
        dims: local dimensions, leftmost most significant.
        keep: subsystem indices to keep, in their original order.

    Returns:
        Density matrix on the kept factors (ordered as in ``dims``).
    """
    rho = to_density(rho)
    dims = list(dims)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if any(not 0 <= k < len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} outside factorization {dims}")
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"state dim {rho.shape} != product of {dims}")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # trace out every factor not kept, highest axis first so indices stay valid
    for site in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=site, axis2=site + (t.ndim // 2))
    kept_dim = int(np.prod([dims[k] for k in keep]))
    return t.reshape(kept_dim, kept_dim)


def expectation(state: np.ndarray, obs: np.ndarray, imag_tol: float = 1e-6) -> float:
    """Expectation value Tr[rho . obs] (or <psi|obs|psi>).

    Raises:
        ValueError: if the imaginary residue exceeds ``imag_tol`` — that
            signals a non-Hermitian observable or a corrupted state.
    """
    state = np.asarray(state, dtype=complex)
    obs = np.asarray(obs, dtype=complex)
    if state.ndim == 1:
        val = complex(state.conj() @ obs @ state)
    else:
        val = complex(np.trace(state @ obs))
    if abs(val.imag) > imag_tol:
        raise ValueError(f"expectation has imaginary part {val.imag}; observable not Hermitian?")
    return val.real


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity in [0, 1]; |<a|b>|^2 when both states are pure."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dim_a = a.shape[0]
    dim_b = b.shape[0]
    if dim_a != dim_b:
        raise ValueError(f"state dims differ: {dim_a} vs {dim_b}")
    if a.ndim == 1 and b.ndim == 1:
        return float(np.clip(abs(np.vdot(a, b)) ** 2, 0.0, 1.0))
    if a.ndim == 1:
        return float(np.clip((a.conj() @ b @ a).real, 0.0, 1.0))
    if b.ndim == 1:
        return float(np.clip((b.conj() @ a @ b).real, 0.0, 1.0))
    # general Uhlmann: (tr sqrt(sqrt(a) b sqrt(a)))^2 via eigendecompositions
    evals, vecs = np.linalg.eigh(a)
    evals = np.clip(evals, 0.0, None)
    sqrt_a = (vecs * np.sqrt(evals)) @ vecs.conj().T
    inner = sqrt_a @ b @ sqrt_a
    ivals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    # zero out eigenvalues at the eigh noise floor: sqrt() would otherwise
    # amplify 1e-16 jitter into 1e-8 fidelity error
    ivals[ivals < max(ivals.max(), 1.0) * 1e-14] = 0.0
    return float(np.clip(np.sum(np.sqrt(ivals)) ** 2, 0.0, 1.0))
