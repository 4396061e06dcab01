"""Lindblad master-equation propagation.

Two complementary engines:

* :func:`lindblad_evolve` -- classic fixed-step RK4 on the density matrix
  for a (possibly time-dependent) Hamiltonian.  Transparent, handles any
  H(t), and is the reference integrator for convergence checks.
* :func:`liouvillian` / :func:`propagator` -- for piecewise-*constant*
  Hamiltonians the master equation is a linear ODE, so one matrix
  exponential of the superoperator gives the exact channel for a whole
  segment.  The pulse executor leans on this: a cached propagator is reused
  across every occurrence of the same segment.

Vectorisation is row-major (C order): vec(A rho B) = (A (x) B^T) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg

from ..errors import IntegrityError

HamiltonianLike = Union[np.ndarray, Callable[[float], np.ndarray]]

#: Trace drift that aborts a propagation (numerical-integrity failure).
TRACE_ABORT = 1e-6

#: Hermiticity defect that aborts a propagation.
HERMITICITY_ABORT = 1e-6


@dataclass
class LindbladProblem:
    """One master-equation integration task.

    Attributes:
        hamiltonian: Constant matrix or callable ``t -> matrix`` (rad/s).
        collapse: Sequence of ``(rate, operator)`` pairs; each contributes
            rate * (L rho L^dag - {L^dag L, rho}/2).
        rho0: Initial density matrix.
        t_grid: Strictly increasing sample times starting at the initial
            time; the state is reported at each grid point.
    """

    hamiltonian: HamiltonianLike
    collapse: Sequence[tuple[float, np.ndarray]]
    rho0: np.ndarray
    t_grid: np.ndarray

    def __post_init__(self) -> None:
        self.rho0 = np.asarray(self.rho0, dtype=complex)
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if self.rho0.ndim != 2 or self.rho0.shape[0] != self.rho0.shape[1]:
            raise ValueError("rho0 must be a square density matrix")
        if self.t_grid.ndim != 1 or self.t_grid.size < 1:
            raise ValueError("t_grid must be a 1-D array of times")
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        for rate, op in self.collapse:
            if rate < 0:
                raise ValueError("collapse rates must be non-negative")
            if np.asarray(op).shape != self.rho0.shape:
                raise ValueError("collapse operator shape mismatch")

    def h_at(self, t: float) -> np.ndarray:
        if callable(self.hamiltonian):
            return np.asarray(self.hamiltonian(t), dtype=complex)
        return np.asarray(self.hamiltonian, dtype=complex)


def lindblad_rhs(
    rho: np.ndarray,
    h: np.ndarray,
    collapse: Sequence[tuple[float, np.ndarray]],
) -> np.ndarray:
    """d(rho)/dt = -i[H, rho] + sum_k rate_k D[L_k](rho)."""
    out = -1j * (h @ rho - rho @ h)
    for rate, op in collapse:
        if rate == 0.0:
            continue
        od = op.conj().T
        anti = od @ op
        out += rate * (op @ rho @ od - 0.5 * (anti @ rho + rho @ anti))
    return out


def default_max_step(problem: LindbladProblem) -> float:
    """Step bound resolving the fastest Hamiltonian and dissipative scales.

    Uses 1/100 of the shortest period implied by the largest Hamiltonian
    element and, if tighter, of the fastest collapse rate.  (On the device
    Hamiltonian the largest element is Omega/2, so this reduces to the
    familiar h = 2*pi / (50 * Omega).)
    """
    h0 = problem.h_at(float(problem.t_grid[0]))
    scale = float(np.max(np.abs(h0)))
    for rate, _ in problem.collapse:
        scale = max(scale, rate)
    if scale == 0.0:
        return math.inf
    return (2.0 * math.pi / scale) / 100.0


def lindblad_evolve(
    problem: LindbladProblem,
    max_step: float | None = None,
) -> list[np.ndarray]:
    """Integrate a :class:`LindbladProblem` with fixed-step RK4.

    Each grid interval is subdivided into equal steps no longer than
    ``max_step`` (default from :func:`default_max_step`).  After every grid
    point the trace and hermiticity of the state are checked; drifting past
    ``TRACE_ABORT`` / ``HERMITICITY_ABORT`` raises :class:`IntegrityError`
    rather than returning silently corrupted output.

    Returns:
        List of density matrices, one per entry of ``problem.t_grid``.
    """
    if max_step is None:
        max_step = default_max_step(problem)
    if not max_step > 0.0:
        raise ValueError("max_step must be positive")
    time_dependent = callable(problem.hamiltonian)
    h_const = None if time_dependent else problem.h_at(0.0)

    rho = problem.rho0.copy()
    out = [rho.copy()]
    _integrity_check(rho, float(problem.t_grid[0]))
    for t0, t1 in zip(problem.t_grid[:-1], problem.t_grid[1:]):
        span = float(t1 - t0)
        n_sub = max(1, int(math.ceil(span / max_step)))
        if n_sub > 50_000_000:
            raise ValueError("step-size underflow: interval needs too many RK4 steps")
        h = span / n_sub
        t = float(t0)
        for _ in range(n_sub):
            if time_dependent:
                h_a = problem.h_at(t)
                h_b = problem.h_at(t + 0.5 * h)
                h_c = problem.h_at(t + h)
            else:
                h_a = h_b = h_c = h_const
            k1 = lindblad_rhs(rho, h_a, problem.collapse)
            k2 = lindblad_rhs(rho + 0.5 * h * k1, h_b, problem.collapse)
            k3 = lindblad_rhs(rho + 0.5 * h * k2, h_b, problem.collapse)
            k4 = lindblad_rhs(rho + h * k3, h_c, problem.collapse)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        _integrity_check(rho, float(t1))
        out.append(rho.copy())
    return out


def _integrity_check(rho: np.ndarray, t: float) -> None:
    trace_drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_drift > TRACE_ABORT:
        raise IntegrityError(
            f"trace drift {trace_drift:.3e} exceeds {TRACE_ABORT:.0e} at t={t:.3e}"
        )
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITICITY_ABORT:
        raise IntegrityError(
            f"hermiticity defect {herm:.3e} exceeds {HERMITICITY_ABORT:.0e} at t={t:.3e}"
        )


# -- superoperator path (piecewise-constant segments) ------------------------


def liouvillian(
    h: np.ndarray,
    collapse: Sequence[tuple[float, np.ndarray]],
) -> np.ndarray:
    """Liouvillian superoperator in row-major vectorisation (d^2 x d^2)."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d)
    l_super = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, op in collapse:
        if rate == 0.0:
            continue
        op = np.asarray(op, dtype=complex)
        anti = op.conj().T @ op
        l_super += rate * (
            np.kron(op, op.conj())
            - 0.5 * (np.kron(anti, eye) + np.kron(eye, anti.T))
        )
    return l_super


def propagator(
    h: np.ndarray,
    collapse: Sequence[tuple[float, np.ndarray]],
    duration: float,
) -> np.ndarray:
    """Exact channel matrix exp(L * duration) for a constant segment."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return scipy.linalg.expm(liouvillian(h, collapse) * duration)


def apply_propagator(prop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a vectorised channel to a density matrix."""
    d = rho.shape[0]
    return (prop @ rho.reshape(-1)).reshape(d, d)
