"""Quantum-jump unraveling and the integration route to the free energy.

The sampler is validated against closed-form statistics (unit-rate
Poisson process for the single-node walk), against the deterministic
master equation (ensemble average of pure-state projectors vs evolve),
and for bitwise reproducibility under its counter-based generator.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import qswalk as q
from qswalk.trajectory import _check_decay
from oracles import reconstruct_state


# -- simulate: record contract and determinism --------------------------------


def test_simulate_is_deterministic(two_node_model):
    a = q.simulate(two_node_model, t_max=20.0, dt=0.05, seed=42)
    b = q.simulate(two_node_model, t_max=20.0, dt=0.05, seed=42)
    assert a.jump_events == b.jump_events
    assert np.array_equal(a.counts, b.counts)
    assert a.seed == 42 and a.t_final == 20.0


def test_simulate_seeds_give_distinct_streams(two_node_model):
    a = q.simulate(two_node_model, t_max=20.0, dt=0.05, seed=0)
    b = q.simulate(two_node_model, t_max=20.0, dt=0.05, seed=1)
    assert a.jump_events != b.jump_events


def test_simulate_record_contract(six_node_model):
    rec = q.simulate(six_node_model, t_max=30.0, dt=0.05, seed=3)
    times = [e[0] for e in rec.jump_events]
    assert times == sorted(times)
    assert all(0.0 < t <= 30.0 for t in times)
    assert all(0 <= dst < 6 and 0 <= src < 6 for _, dst, src in rec.jump_events)
    expected_counts = np.bincount(
        [dst for _, dst, _ in rec.jump_events], minlength=6
    )
    assert np.array_equal(rec.counts, expected_counts)
    assert rec.counts.sum() == len(rec.jump_events)


def test_simulate_validation(two_node_model):
    with pytest.raises(ValueError):
        q.simulate(two_node_model, t_max=0.0)
    with pytest.raises(ValueError):
        q.simulate(two_node_model, dt=0.0)
    with pytest.raises(ValueError):
        q.simulate(two_node_model, seed=-1)
    with pytest.raises(ValueError):
        q.simulate(two_node_model, seed=1 << 64)
    with pytest.raises(ValueError):
        q.simulate(two_node_model, psi0=np.ones(3, dtype=complex))
    with pytest.raises(ValueError):
        q.simulate(two_node_model, psi0=np.array([1.0, 1.0], dtype=complex))


def test_single_node_waiting_times_are_unit_exponential(single_node_model):
    # survival amplitude decays at rate 1/2, so |psi|^2 crosses a
    # uniform threshold after Exp(1) time: a unit-rate Poisson process
    rec = q.simulate(single_node_model, t_max=400.0, dt=0.05, seed=11)
    times = np.array([e[0] for e in rec.jump_events])
    waits = np.diff(np.concatenate([[0.0], times]))
    n = len(waits)
    assert n > 300
    # mean 1 and variance 1 within 4 standard errors
    assert abs(waits.mean() - 1.0) < 4.0 / np.sqrt(n)
    assert abs(waits.var() - 1.0) < 4.0 * np.sqrt(8.0 / n)


def test_jump_rates_approach_activity(two_node_model):
    # one long trajectory: empirical rates near the tilt-zero activity
    rec = q.simulate(two_node_model, t_max=400.0, dt=0.05, seed=5)
    rates = rec.counts / 400.0
    assert_allclose(rates, [66.0 / 217.0, 151.0 / 217.0], atol=0.12)


def test_unraveling_average_matches_master_equation(two_node_model):
    # mean of |psi><psi| over trajectories vs deterministic evolve,
    # with trajectory states rebuilt through integrate_linear (a
    # different propagation path from the sampler's cached powers)
    t_obs, n_traj = 1.5, 1200
    acc = np.zeros((2, 2, n_traj), dtype=complex)
    for k in range(n_traj):
        rec = q.simulate(two_node_model, t_max=t_obs, dt=0.01, seed=1000 + k)
        psi = reconstruct_state(two_node_model, rec, t_obs, dt=0.005)
        acc[:, :, k] = np.outer(psi, psi.conj())
    mean = acc.mean(axis=2)
    se = acc.std(axis=2, ddof=1) / np.sqrt(n_traj)
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    target = q.evolve(two_node_model, rho0, t=t_obs, dt=1e-3)
    assert np.all(np.abs(mean - target) <= 5.0 * np.abs(se) + 1e-4)


def test_check_decay_guards():
    _check_decay(0.5, 1.0)  # decay is fine
    _check_decay(1.0 + 1e-12, 1.0)  # roundoff growth is tolerated
    with pytest.raises(q.NonDissipativeError):
        _check_decay(1.1, 1.0)
    with pytest.raises(q.DivergenceError):
        _check_decay(float("nan"), 1.0)
    with pytest.raises(q.DivergenceError):
        _check_decay(float("inf"), 1.0)


# -- ensemble_stats --------------------------------------------------------------


def test_ensemble_matches_manual_loop(two_node_model):
    stats = q.ensemble_stats(two_node_model, t_max=10.0, dt=0.05, n_traj=6, seed0=50)
    counts = np.array(
        [
            q.simulate(two_node_model, t_max=10.0, dt=0.05, seed=50 + k).counts
            for k in range(6)
        ],
        dtype=float,
    )
    rates = counts / 10.0
    assert_allclose(stats.mean_rate, rates.mean(axis=0), atol=1e-14)
    assert_allclose(stats.var_rate, rates.var(axis=0, ddof=1), atol=1e-14)
    assert_allclose(
        stats.standard_errors, np.sqrt(rates.var(axis=0, ddof=1) / 6.0), atol=1e-14
    )
    disp = counts.var(axis=0, ddof=1) / counts.mean(axis=0)
    assert_allclose(stats.dispersion_hat, disp, atol=1e-12)
    assert stats.n_traj == 6


def test_ensemble_parallel_matches_serial(two_node_model):
    serial = q.ensemble_stats(two_node_model, t_max=5.0, dt=0.05, n_traj=8, seed0=7)
    parallel = q.ensemble_stats(
        two_node_model, t_max=5.0, dt=0.05, n_traj=8, seed0=7, n_workers=2
    )
    assert np.array_equal(serial.mean_rate, parallel.mean_rate)
    assert np.array_equal(serial.var_rate, parallel.var_rate)
    assert np.array_equal(serial.dispersion_hat, parallel.dispersion_hat)


def test_ensemble_requires_two_trajectories(two_node_model):
    with pytest.raises(ValueError):
        q.ensemble_stats(two_node_model, n_traj=1)


def test_ensemble_dispersion_se_is_positive(two_node_model):
    stats = q.ensemble_stats(two_node_model, t_max=20.0, dt=0.05, n_traj=40, seed0=0)
    assert np.all(stats.dispersion_se > 0)
    assert np.all(np.isfinite(stats.dispersion_se))


# -- integration route to the free energy ------------------------------------------


def test_integration_route_matches_eigenvalue_route(two_node_model, six_node_model):
    for model, s in (
        (two_node_model, q.uniform_tilt(two_node_model, 0.5)),
        (two_node_model, np.array([0.8, -0.3])),
        (six_node_model, q.uniform_tilt(six_node_model, -0.4)),
    ):
        slope = q.free_energy_by_integration(model, s, t_max=60.0, dt=0.01)
        assert_allclose(slope, q.free_energy(model, s), atol=1e-8)


def test_integration_invariant_under_renorm_period(two_node_model):
    s = np.array([0.4, 0.1])
    thetas = [
        q.free_energy_by_integration(
            two_node_model, s, t_max=40.0, dt=0.01, renorm_every=k
        )
        for k in (1, 7, 64)
    ]
    assert_allclose(thetas, thetas[0], atol=1e-9)


def test_integration_full_output(two_node_model):
    out = q.free_energy_by_integration(
        two_node_model, q.uniform_tilt(two_node_model, 0.4), t_max=50.0, dt=0.01,
        full_output=True,
    )
    assert isinstance(out, q.TiltedIntegration)
    assert_allclose(out.theta, np.expm1(-0.4), atol=1e-8)
    # uniform tilt shifts only the stationary mode: gap is exp(-sigma)
    assert_allclose(out.spectral_gap, np.exp(-0.4), atol=1e-9)
    assert out.window == (0.8 * 50.0, 50.0)
    assert out.n_samples >= 2


def test_integration_validation(two_node_model):
    s = np.zeros(2)
    with pytest.raises(ValueError):
        q.free_energy_by_integration(two_node_model, s, t_max=0.0)
    with pytest.raises(ValueError):
        q.free_energy_by_integration(two_node_model, s, renorm_every=0)
    with pytest.raises(ValueError):
        # only one sample lands in the final-20% window
        q.free_energy_by_integration(two_node_model, s, t_max=1.0, dt=1.0)


def test_integration_detects_divergence(two_node_model):
    # a strongly negative tilt grows the trace as exp(e^{|s|}); with a
    # huge step the scheme overflows and must say so
    with pytest.raises((q.DivergenceError, OverflowError)):
        q.free_energy_by_integration(
            two_node_model, q.uniform_tilt(two_node_model, -600.0), t_max=100.0, dt=1.0
        )


# -- steady-state sampling ----------------------------------------------------------


def test_sample_steady_state_vector(two_node_model):
    v = q.sample_steady_state_vector(two_node_model, seed=0)
    assert_allclose(np.linalg.norm(v), 1.0, atol=1e-12)
    assert np.array_equal(v, q.sample_steady_state_vector(two_node_model, seed=0))
    rho = q.steady_state(two_node_model)
    evals = np.linalg.eigvalsh(rho)
    # drawn frequencies track the eigenvalue weights
    draws = [q.sample_steady_state_vector(two_node_model, seed=s) for s in range(300)]
    top = sum(
        1
        for v in draws
        if abs(abs(v @ np.linalg.eigh(rho)[1][:, 1].conj()) - 1.0) < 1e-9
    )
    assert abs(top / 300.0 - evals[1]) < 0.1
