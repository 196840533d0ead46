"""Dissipative quantum walk models and their Liouvillian superoperators.

A model couples a coherent hop Hamiltonian (the de-directed adjacency,
scaled by ``coherent_weight``) with incoherent hops between nodes at the
Google-matrix rates: the jump operator for the move j -> i is
``sqrt(G_ij) |i><j|``.  The generator acts on density matrices as

    d(rho)/dt = -i[H, rho] + sum_k L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}

and is materialized as an n^2 x n^2 matrix over column-stacked states,

    -i(I (x) H - H^T (x) I) + sum_k (conj(L_k) (x) L_k)
        - 1/2 (I (x) L_k^dag L_k + (L_k^dag L_k)^T (x) I).

Because every jump operator here has a single nonzero entry, the sums
collapse: the recycling part scatters the rate matrix onto the
population block, and sum_k L_k^dag L_k is the diagonal matrix of
column sums of the rates (the identity whenever the rate matrix is
column-stochastic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegeneracyError
from .graph import DEFAULT_DAMPING, DirectedGraph, google_matrix, symmetrized_adjacency
from .linalg import integrate_linear, null_vector, unvec, vec

# Aliases in the spirit of linalg.ComplexMatrix: a DensityMatrix is an
# n x n complex ndarray (Hermitian, unit trace), a Superoperator an
# n^2 x n^2 complex ndarray over column-stacked density matrices.
DensityMatrix = np.ndarray
Superoperator = np.ndarray

_STEADY_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class QswModel:
    """Quantum stochastic walk: Hamiltonian plus single-entry jumps.

    ``jumps`` is a tuple of (destination i, source j, amplitude) with
    amplitude = sqrt(rate of j -> i); every strictly positive rate of
    the generating stochastic matrix appears (no amplitude cutoff), in
    destination-major order.
    """

    n: int
    hamiltonian: np.ndarray
    jumps: tuple

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=float)
        if h.shape != (self.n, self.n):
            raise ValueError(f"hamiltonian shape {h.shape} does not match n={self.n}")
        if not np.array_equal(h, h.T):
            raise ValueError("hamiltonian must be exactly symmetric")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        col_sums = np.zeros(self.n)
        for (i, j, amp) in self.jumps:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"jump ({i}, {j}) out of range for n={self.n}")
            if not amp > 0:
                raise ValueError(f"jump amplitude must be positive, got {amp}")
            col_sums[j] += amp * amp
        if np.abs(col_sums - 1.0).max() > 1e-12:
            raise ValueError(
                "squared jump amplitudes must sum to 1 per source node "
                f"(worst deviation {np.abs(col_sums - 1.0).max():.3e})"
            )

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)

    def jump_rate_matrix(self) -> np.ndarray:
        """Rate matrix R with R[i, j] = amplitude(i, j)^2 (column-stochastic)."""
        r = np.zeros((self.n, self.n))
        for (i, j, amp) in self.jumps:
            r[i, j] = amp * amp
        return r


def build_qsw(
    g: DirectedGraph,
    damping: float = DEFAULT_DAMPING,
    coherent_weight: float = 1.0,
) -> QswModel:
    """Assemble the walk model for a directed graph.

    H is ``coherent_weight`` times the de-directed 0/1 adjacency (zero
    diagonal); jump amplitudes are square roots of the Google-matrix
    entries, one jump per strictly positive entry.  coherent_weight = 0
    yields the purely classical dissipative walk.
    """
    if coherent_weight < 0:
        raise ValueError(f"coherent_weight must be >= 0, got {coherent_weight}")
    h = coherent_weight * symmetrized_adjacency(g)
    rates = google_matrix(g, damping)
    jumps = tuple(
        (i, j, math.sqrt(rates[i, j]))
        for i in range(g.n)
        for j in range(g.n)
        if rates[i, j] > 0.0
    )
    return QswModel(n=g.n, hamiltonian=h, jumps=jumps)


def dissipator_diagonal(model: QswModel) -> np.ndarray:
    """Diagonal of sum_k L_k^dag L_k as a length-n vector of column sums."""
    d = np.zeros(model.n)
    for (_i, j, amp) in model.jumps:
        d[j] += amp * amp
    return d


def effective_hamiltonian(model: QswModel) -> np.ndarray:
    """Non-Hermitian H_eff = H - (i/2) sum_k L_k^dag L_k driving the
    deterministic segments of jump trajectories."""
    return model.hamiltonian - 0.5j * np.diag(dissipator_diagonal(model))


def recycling_superoperator(model: QswModel, nodes=None) -> Superoperator:
    """Matrix of rho -> sum L_ij rho L_ij^dag over jumps landing on ``nodes``.

    With single-entry jump operators, conj(L_ij) (x) L_ij has its only
    entry at row i*(n+1), column j*(n+1): the map reads populations and
    writes populations.  ``nodes=None`` includes every destination.
    """
    n = model.n
    keep = set(range(n) if nodes is None else nodes)
    r = np.zeros((n * n, n * n), dtype=complex)
    diag = np.arange(n) * (n + 1)
    for (i, j, amp) in model.jumps:
        if i in keep:
            r[diag[i], diag[j]] += amp * amp
    return r


def liouvillian(model: QswModel) -> Superoperator:
    """Dense matrix of the Lindblad generator over column-stacked states.

    Trace preservation holds structurally: vec(I)^dag annihilates the
    result from the left (columns of the population block sum to the
    dissipator diagonal, cancelling the anticommutator).
    """
    n = model.n
    h = model.hamiltonian
    eye = np.eye(n)
    lmat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    lmat += recycling_superoperator(model)
    d = np.diag(dissipator_diagonal(model))
    lmat -= 0.5 * (np.kron(eye, d) + np.kron(d.T, eye))
    return lmat


def steady_state(model: QswModel, tol: float = 1e-9) -> DensityMatrix:
    """Unique stationary density matrix of the walk.

    Computed as the kernel vector of the Liouvillian, trace-normalized
    and hermitized.  Degenerate kernels (non-relaxing dynamics, only
    possible without damping) surface as :class:`DegeneracyError`.
    """
    lmat = liouvillian(model)
    v = null_vector(lmat, tol=tol)
    x = unvec(v)
    tr = np.trace(x)
    if abs(tr) < 1e-6:
        raise DegeneracyError(
            "kernel vector is nearly traceless; no normalizable steady state"
        )
    rho = x / tr
    rho = 0.5 * (rho + rho.conj().T)
    residual = np.linalg.norm(lmat @ vec(rho))
    if residual > _STEADY_RESIDUAL_TOL:
        raise ConvergenceError(
            f"steady-state residual {residual:.3e} exceeds {_STEADY_RESIDUAL_TOL:g}"
        )
    return rho


def evolve(model: QswModel, rho0: DensityMatrix, t: float, dt: float = 1e-3) -> DensityMatrix:
    """Propagate a density matrix for time ``t`` under the Liouvillian.

    Fixed-step 4th-order integration of the vectorized state; trace and
    Hermiticity are preserved up to the integration tolerance.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.n, model.n):
        raise ValueError(f"rho0 shape {rho0.shape} does not match n={model.n}")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-8:
        raise ValueError("rho0 must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-8:
        raise ValueError("rho0 must have unit trace")
    return unvec(integrate_linear(liouvillian(model), vec(rho0), t, dt))
