"""Dense complex linear algebra kernel.

Conventions used project-wide:

* Vectorization is column-stacking: ``vec(rho)[i + n*j] = rho[i, j]``,
  i.e. ``numpy`` order ``"F"``.  The normative identity is
  ``vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)``.
* "Leading eigenvalue" means the one of maximum real part; near-ties in
  the real part (within 1e-10) are broken toward the smallest
  ``|imag|``, because the physically meaningful branch of a cumulant
  generating function is real.

Everything here is dense and targets superoperators up to about
1024 x 1024 (32 graph nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DegeneracyError, DivergenceError

# A ComplexMatrix is just a 2-d complex ndarray; the alias documents intent
# in signatures without wrapping numpy.
ComplexMatrix = np.ndarray

_REAL_PART_TIE = 1e-10  # eigenvalues closer than this in Re are tied
_RESIDUAL_FACTOR = 1e-8  # eigenpair residual bound, relative to ||M||_F


@dataclass(frozen=True)
class SpectralResult:
    """Full spectrum of a general matrix plus the selected leading pair."""

    leading_eigenvalue: complex
    leading_right_eigenvector: np.ndarray  # unit 2-norm
    full_spectrum: Optional[np.ndarray] = None


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product with shape ``(rA*rB, cA*cB)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron expects 2-d arrays")
    if a.shape[0] * b.shape[0] > 1 << 20:
        raise ValueError("kron result would exceed the dense size budget")
    return np.kron(a, b)


def vec(rho: ComplexMatrix) -> np.ndarray:
    """Column-stack a square matrix: vec(rho)[i + n*j] = rho[i, j]."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"vec expects a square matrix, got shape {rho.shape}")
    return rho.ravel(order="F")


def unvec(v: np.ndarray) -> ComplexMatrix:
    """Inverse of :func:`vec`; the length must be a perfect square."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError("unvec expects a 1-d array")
    n = math.isqrt(v.size)
    if n * n != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


def eig_general(m: ComplexMatrix) -> SpectralResult:
    """Eigendecompose a general (non-Hermitian) square matrix.

    Returns the full spectrum together with the leading eigenpair,
    selected by maximum real part.  Among eigenvalues whose real parts
    agree within 1e-10 the one with smallest ``|imag|`` wins (then
    non-negative imaginary part, for determinism across conjugate
    pairs).  The returned eigenvector has unit 2-norm and residual
    ``||Mv - lambda v||_2 <= 1e-8 * ||M||_F``.

    Backed by LAPACK's Hessenberg + shifted-QR driver via
    ``numpy.linalg.eig``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")

    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:  # QR failed to converge
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc

    lead = _select_leading(values)
    v = vectors[:, lead]
    v = v / np.linalg.norm(v)

    scale = np.linalg.norm(m)  # Frobenius
    residual = np.linalg.norm(m @ v - values[lead] * v)
    if scale > 0 and residual > _RESIDUAL_FACTOR * scale:
        raise ConvergenceError(
            f"eigenpair residual {residual:.3e} exceeds {_RESIDUAL_FACTOR:g}*||M||_F"
        )
    return SpectralResult(
        leading_eigenvalue=complex(values[lead]),
        leading_right_eigenvector=v,
        full_spectrum=values,
    )


def _select_leading(values: np.ndarray) -> int:
    """Index of the leading eigenvalue under the project tie-break rule."""
    re = values.real
    tied = np.flatnonzero(re >= re.max() - _REAL_PART_TIE)
    im = np.abs(values[tied].imag)
    best = tied[im <= im.min() + _REAL_PART_TIE]
    # prefer the +imag member of a conjugate pair, then the lowest index
    pos = best[values[best].imag >= 0]
    return int(pos[0]) if pos.size else int(best[0])


def null_vector(m: ComplexMatrix, tol: float = 1e-9) -> np.ndarray:
    """Unit vector spanning the (simple) kernel of ``m``.

    The eigenvalue nearest zero must be the only one within
    ``tol * max(1, ||M||_F)``; otherwise a :class:`DegeneracyError` is
    raised, which downstream signals non-relaxing dynamics.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc

    scale = max(1.0, float(np.linalg.norm(m)))
    near_zero = np.flatnonzero(np.abs(values) <= tol * scale)
    if near_zero.size != 1:
        raise DegeneracyError(
            f"kernel dimension {near_zero.size} within tol*scale="
            f"{tol * scale:.3e}; expected a simple zero eigenvalue"
        )
    v = vectors[:, near_zero[0]]
    return v / np.linalg.norm(v)


def rk4_step_matrix(m: ComplexMatrix, dt: float) -> ComplexMatrix:
    """One-step propagator of the classical RK4 scheme for v' = M v.

    For a constant coefficient matrix the RK4 update is exactly the
    degree-4 Taylor polynomial of exp(M*dt); precomputing it turns each
    step into a single matrix-vector product.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    p = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    # callers check finiteness downstream; don't warn on overflow here
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, 5):
            term = term @ m * (dt / k)
            p = p + term
    return p


def integrate_linear(
    m: ComplexMatrix, v0: np.ndarray, t: float, dt: float
) -> np.ndarray:
    """Integrate v' = M v from 0 to t with fixed-step RK4; returns v(t).

    Takes floor(t/dt) full steps and one final partial step so the
    endpoint is hit exactly.  Global error is O(dt^4).  Raises
    :class:`DivergenceError` if the state leaves the finite range.
    """
    m = np.asarray(m, dtype=complex)
    v = np.asarray(v0, dtype=complex).copy()
    if v.ndim != 1:
        raise ValueError("v0 must be 1-d")
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != v.size:
        raise ValueError("dimension mismatch between matrix and state")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return v

    n_full, remainder = divmod(t, dt)
    p = rk4_step_matrix(m, dt)
    # overflow is caught by the finiteness guard, not worth a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(int(n_full)):
            v = p @ v
            if k % 256 == 0 and not np.all(np.isfinite(v)):
                raise DivergenceError(f"non-finite state at t={(k + 1) * dt:g}")
        if remainder > 0:
            v = rk4_step_matrix(m, remainder) @ v
    if not np.all(np.isfinite(v)):
        raise DivergenceError("non-finite state at the end of integration")
    return v
