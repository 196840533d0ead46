"""Tilted generators and large-deviation thermodynamics of jump counts.

Jump events are counted per *destination node*: the counting group of
node i consists of every jump operator landing on i.  Biasing the count
of node i by a conjugate field s_i reweights its recycling terms by
exp(-s_i), giving the tilted generator

    W_s = L + sum_i (exp(-s_i) - 1) sum_j conj(L_ij) (x) L_ij.

The largest real part of its spectrum is the dynamical free energy
(scaled cumulant generating function) of the count vector.  First and
second partial derivatives in s yield the per-node activity and index
of dispersion; both are taken by central finite differences with a
step-halving self-check, since the generator has no closed-form
derivative here.

Extreme tilts are handled structurally rather than by exponentiating
huge arguments: the fully inactive limit (all s_i -> +infinity) drops
the recycling terms, and the active limit (s -> -infinity) keeps only
the recycling map, rescaled by its diverging prefactor.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, ZeroActivityError
from .lindblad import QswModel, Superoperator, liouvillian, recycling_superoperator, steady_state
from .linalg import eig_general

# Conjugate fields, one per node; plain 1-d float ndarray.
TiltVector = np.ndarray

DEFAULT_FD_STEP = 1e-4
_EXP_ARG_LIMIT = 700.0  # exp overflow threshold for float64
_ACTIVITY_FLOOR = 1e-12  # |d(theta)/d(s_i)| below this: dispersion undefined
_SELF_CHECK_TOL = 1e-6


@dataclass(frozen=True)
class ThermoPoint:
    """Thermodynamic observables at one tilt vector.

    ``theta`` is the dynamical free energy (units 1/time), ``alpha`` the
    per-node activity (jumps per unit time), ``alpha_norm`` the activity
    normalized to unit total, ``delta`` the per-node index of dispersion
    (None entries where the activity vanishes), ``delta_global`` the sum
    of the per-node indices (None if any entry is undefined).  A failed
    evaluation leaves the observables None and stores ``error``.
    """

    s: np.ndarray
    theta: Optional[float] = None
    alpha: Optional[np.ndarray] = None
    alpha_norm: Optional[np.ndarray] = None
    delta: Optional[tuple] = None
    delta_global: Optional[float] = None
    error: Optional[str] = None


def _as_tilt(model: QswModel, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (model.n,):
        raise ValueError(f"tilt vector must have length n={model.n}, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("tilt vector must be finite; use the limit generators instead")
    if np.any(-s > _EXP_ARG_LIMIT):
        raise ValueError(
            "tilt too negative for exp evaluation; use limit_generator('active')"
        )
    return s


def uniform_tilt(model: QswModel, value: float) -> TiltVector:
    """Tilt vector with every entry equal to ``value``."""
    return np.full(model.n, float(value))


def tilted_superoperator(
    model: QswModel, s, inactive_nodes: Sequence[int] = ()
) -> Superoperator:
    """Counting-biased generator W_s over column-stacked states.

    Node i's factor exp(-s_i) multiplies all jumps landing on i.  Nodes
    listed in ``inactive_nodes`` have their recycling terms dropped
    entirely (the s_i -> +infinity limit); their s entries are ignored.
    At s = 0 with no inactive nodes the result equals the Liouvillian
    bitwise.
    """
    s = _as_tilt(model, s)
    inactive = set(inactive_nodes)
    for i in inactive:
        if not 0 <= i < model.n:
            raise ValueError(f"inactive node {i} out of range")
    w = liouvillian(model)
    n = model.n
    diag = np.arange(n) * (n + 1)
    factors = np.exp(-s)
    for (i, j, amp) in model.jumps:
        f = 0.0 if i in inactive else factors[i]
        if f != 1.0:
            w[diag[i], diag[j]] += (f - 1.0) * amp * amp
    return w


def tilted_superoperator_per_jump(model: QswModel, s_matrix) -> Superoperator:
    """Edge-resolved variant: entry (i, j) of ``s_matrix`` biases the
    single jump j -> i.  Counting groups of the node-level API are the
    rows of this matrix at a common value."""
    s_matrix = np.asarray(s_matrix, dtype=float)
    if s_matrix.shape != (model.n, model.n):
        raise ValueError(f"s_matrix must be {model.n} x {model.n}")
    if not np.all(np.isfinite(s_matrix)) or np.any(-s_matrix > _EXP_ARG_LIMIT):
        raise ValueError("per-jump tilts must be finite and exp-representable")
    w = liouvillian(model)
    diag = np.arange(model.n) * (model.n + 1)
    for (i, j, amp) in model.jumps:
        f = np.exp(-s_matrix[i, j])
        if f != 1.0:
            w[diag[i], diag[j]] += (f - 1.0) * amp * amp
    return w


def limit_generator(model: QswModel, mode: str) -> Superoperator:
    """Generator of an extreme-tilt limit.

    ``"inactive"``: the Liouvillian with every recycling term removed;
    its spectrum governs the jump-free (coherent, norm-decaying) branch.
    ``"active"``: the bare recycling map, i.e. the tilted generator
    rescaled by exp(s) as s -> -infinity; its leading eigenvector gives
    the limiting jump-destination profile.
    """
    if mode == "inactive":
        return liouvillian(model) - recycling_superoperator(model)
    if mode == "active":
        return recycling_superoperator(model)
    raise ValueError(f"mode must be 'inactive' or 'active', got {mode!r}")


def free_energy(model: QswModel, s) -> float:
    """Dynamical free energy: largest real part of the spectrum of W_s.

    Zero at s = 0 (stationarity), non-increasing and convex in each
    coordinate.
    """
    s = _as_tilt(model, s)
    return eig_general(tilted_superoperator(model, s)).leading_eigenvalue.real


def active_limit_normalized_activity(model: QswModel) -> np.ndarray:
    """Normalized activity in the s -> -infinity limit.

    The rescaled generator is the bare recycling map; jumps then land on
    node i at a rate proportional to row i of the rate matrix applied to
    the populations of the leading eigenvector.  For column-stochastic
    rates this reproduces the classical pagerank.
    """
    res = eig_general(limit_generator(model, "active"))
    pops = np.abs(np.diag(res.leading_right_eigenvector.reshape((model.n, model.n), order="F")))
    rate = model.jump_rate_matrix() @ pops
    total = rate.sum()
    if total <= _ACTIVITY_FLOOR:
        raise ZeroActivityError("active-limit jump profile has vanishing total rate")
    return rate / total


def _stencil(model: QswModel, s: np.ndarray, h: float):
    """theta at s and at s +/- h along every coordinate axis."""
    t0 = free_energy(model, s)
    n = model.n
    tp = np.empty(n)
    tm = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        tp[i] = free_energy(model, s + e)
        tm[i] = free_energy(model, s - e)
    return t0, tp, tm


def activity(
    model: QswModel,
    s,
    h: float = DEFAULT_FD_STEP,
    self_check: bool = True,
    check_tol: float = _SELF_CHECK_TOL,
) -> np.ndarray:
    """Per-node activity alpha_i = -d(theta)/d(s_i) by central differences.

    ``self_check=True`` repeats the stencil at h/2 and raises
    :class:`ConvergenceError` if any component moves by more than
    ``check_tol`` — the Richardson guard against an ill-chosen step.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    s = _as_tilt(model, s)
    _t0, tp, tm = _stencil(model, s, h)
    alpha = -(tp - tm) / (2.0 * h)
    if self_check:
        _t0, tp2, tm2 = _stencil(model, s, 0.5 * h)
        alpha_half = -(tp2 - tm2) / h
        drift = np.abs(alpha - alpha_half).max()
        if drift > check_tol:
            raise ConvergenceError(
                f"activity step-halving drift {drift:.3e} exceeds {check_tol:g}; "
                f"h={h:g} is unreliable here"
            )
        alpha = alpha_half  # the finer estimate
    return alpha


def activity_from_steady_state(model: QswModel) -> np.ndarray:
    """Derivative-free activity at s = 0: rate matrix applied to the
    steady-state populations.

    Cross-checks the finite-difference path; with zero coherent weight
    it reduces to the classical pagerank.
    """
    rho = steady_state(model)
    return model.jump_rate_matrix() @ np.real(np.diag(rho))


def dispersion(
    model: QswModel,
    s,
    h: float = DEFAULT_FD_STEP,
    self_check: bool = True,
    check_tol: float = _SELF_CHECK_TOL,
):
    """Per-node index of dispersion and its global sum.

    delta_i = -d2(theta)/d(s_i)2 / (d(theta)/d(s_i)): the variance-to-
    mean ratio of the node's jump count.  Components where the first
    derivative magnitude falls below 1e-12 are returned as None (the
    ratio is undefined there), and delta_global is None whenever any
    component is.  Returns ``(delta, delta_global)``.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    s = _as_tilt(model, s)
    point = _observables(model, s, h, self_check=self_check, check_tol=check_tol)
    return point.delta, point.delta_global


def normalized_activity(alpha) -> np.ndarray:
    """Activity rescaled to unit total; the dynamical node ranking."""
    alpha = np.asarray(alpha, dtype=float)
    total = alpha.sum()
    if total <= _ACTIVITY_FLOOR:
        raise ZeroActivityError(
            f"total activity {total:.3e} too small to normalize"
        )
    return alpha / total


def _observables(
    model: QswModel,
    s: np.ndarray,
    h: float,
    self_check: bool = False,
    check_tol: float = _SELF_CHECK_TOL,
) -> ThermoPoint:
    """All observables at one tilt from a shared derivative stencil."""
    t0, tp, tm = _stencil(model, s, h)
    alpha = -(tp - tm) / (2.0 * h)
    if self_check:
        _t0b, tp2, tm2 = _stencil(model, s, 0.5 * h)
        alpha_half = -(tp2 - tm2) / h
        drift = np.abs(alpha - alpha_half).max()
        if drift > check_tol:
            raise ConvergenceError(
                f"step-halving drift {drift:.3e} exceeds {check_tol:g} at s={s}"
            )
        alpha = alpha_half
    second = (tp - 2.0 * t0 + tm) / (h * h)
    delta = tuple(
        (second[i] / alpha[i]) if abs(alpha[i]) > _ACTIVITY_FLOOR else None
        for i in range(model.n)
    )
    delta_global = None if any(d is None for d in delta) else float(sum(delta))
    total = alpha.sum()
    alpha_norm = alpha / total if total > _ACTIVITY_FLOOR else None
    return ThermoPoint(
        s=s.copy(),
        theta=t0,
        alpha=alpha,
        alpha_norm=alpha_norm,
        delta=delta,
        delta_global=delta_global,
    )


def _scan_worker(args) -> ThermoPoint:
    model, s, h, self_check = args
    try:  # per-point failures are recorded, never abort the scan
        return _observables(model, _as_tilt(model, s), h, self_check=self_check)
    except Exception as exc:
        return ThermoPoint(
            s=np.atleast_1d(np.asarray(s, dtype=float)).copy(), error=str(exc)
        )


def scan(
    model: QswModel,
    s_grid: Sequence,
    h: float = DEFAULT_FD_STEP,
    self_check: bool = False,
    n_workers: Optional[int] = None,
) -> list[ThermoPoint]:
    """Evaluate :class:`ThermoPoint` on every tilt of ``s_grid``.

    Points are independent; with ``n_workers`` > 1 they are distributed
    over a process pool and gathered back in input order.  A failing
    point records its error instead of aborting the scan.
    """
    if len(s_grid) == 0:
        raise ValueError("s_grid must be non-empty")
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    jobs = [(model, s, h, self_check) for s in s_grid]
    if n_workers is not None and n_workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_scan_worker, jobs, chunksize=max(1, len(jobs) // (4 * n_workers))))
    return [_scan_worker(job) for job in jobs]
