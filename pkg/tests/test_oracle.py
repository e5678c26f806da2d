import math

import numpy as np
import pytest

from qheat.errors import StepRejected
from qheat.heatstats import asymptotic_distribution, invert_charfn, mean_heat
from qheat.model import ModelParams, nbar, relaxation_pair
from qheat.oracle import (
    PopulationState,
    _propagator,
    birth_death_generator,
    evolve,
    evolve_matrix,
    heat_distribution_bruteforce,
)


def _stationary_vector(nbar2, n_max):
    p = (nbar2 / (1.0 + nbar2)) ** np.arange(n_max + 1) / (1.0 + nbar2)
    return p


def test_generator_zero_temperature_decay_chain():
    a = birth_death_generator(0.0, 5)
    m = np.arange(6, dtype=float)
    assert np.allclose(np.diag(a), -m)
    assert np.allclose(np.diag(a, k=1), m[1:])
    assert np.count_nonzero(np.diag(a, k=-1)) == 0


def test_generator_columns_conserve_mass_except_boundary():
    nbar2 = nbar(2.5)
    a = birth_death_generator(nbar2, 12)
    sums = a.sum(axis=0)
    assert np.allclose(sums[:-1], 0.0, atol=1e-13)
    assert sums[-1] == pytest.approx(-13.0 * nbar2, rel=1e-13)


def test_generator_stationary_vector():
    nbar2 = nbar(2.0)
    n_max = 30
    a = birth_death_generator(nbar2, n_max)
    p = _stationary_vector(nbar2, n_max)
    # truncated-boundary flux is the only residual
    assert np.max(np.abs(a @ p)[:-1]) < 1e-12
    # detailed balance ratio
    assert p[5] / p[4] == pytest.approx(nbar2 / (1.0 + nbar2), rel=1e-13)


def test_evolve_identity_at_tau_zero():
    p0 = np.eye(11)[:, 3]
    state = evolve(PopulationState(p=p0, tau=0.0, leakage=0.0), 0.0, nbar(2.5))
    assert np.array_equal(state.p, p0)


def test_evolve_ground_state_matches_geometric_law():
    params = ModelParams(beta1=1.0, beta2=2.5, tau=2.0)
    pair = relaxation_pair(params)
    u = pair.u
    state = evolve(
        PopulationState(p=np.eye(41)[:, 0], tau=0.0, leakage=0.0), 2.0, params.nbar2
    )
    law = u ** np.arange(41) / (1 + u) ** (np.arange(41) + 1)
    assert np.max(np.abs(state.p - law)) < 1e-7


def test_evolve_preserves_stationary_state():
    nbar2 = nbar(2.5)
    p = _stationary_vector(nbar2, 40)
    state = evolve(PopulationState(p=p, tau=0.0, leakage=0.0), 1.0, nbar2)
    assert np.max(np.abs(state.p - p)) < 1e-10


def test_relative_entropy_decreases_towards_stationary():
    nbar2 = nbar(2.5)
    n_max = 40
    pi = _stationary_vector(nbar2, n_max)
    state = PopulationState(p=np.eye(n_max + 1)[:, 4], tau=0.0, leakage=0.0)
    kl_prev = math.inf
    for _ in range(6):
        state = evolve(state, 0.5, nbar2)
        mask = state.p > 1e-300
        kl = float(np.sum(state.p[mask] * np.log(state.p[mask] / pi[mask])))
        assert kl < kl_prev + 1e-12
        kl_prev = kl


def test_step_rejection_on_coarse_grid():
    a = birth_death_generator(nbar(0.5), 60)
    with pytest.raises(StepRejected):
        _propagator(a, 5.0, h_max=1.0)


def test_evolve_matrix_column_leakage_tracked():
    nbar2 = nbar(3.0)
    x = evolve_matrix(nbar2, 20, 1.0)
    sums = x.sum(axis=0)
    assert np.all(sums <= 1.0 + 1e-10)  # absorbing boundary is one-signed


def test_bruteforce_cross_checks():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.1)
    brute = heat_distribution_bruteforce(params, n_max=33)
    inverted = invert_charfn(params)
    keys = set(brute.masses) | set(inverted.masses)
    tv = 0.5 * sum(
        abs(brute.masses.get(k, 0.0) - inverted.masses.get(k, 0.0)) for k in keys
    )
    assert tv < 1e-6
    assert brute.mean() == pytest.approx(mean_heat(params), abs=1e-6)
    assert abs(brute.total_mass() - 1.0) <= brute.truncation_error + 1e-10


def test_bruteforce_reaches_asymptotic_law():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=20.0)
    brute = heat_distribution_bruteforce(params, n_max=33)
    closed = asymptotic_distribution(params)
    worst = max(
        abs(brute.masses.get(k, 0.0) - closed.masses[k])
        for k in closed.masses
        if abs(k) <= 33
    )
    assert worst < 1e-7
