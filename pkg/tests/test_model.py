import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qheat.errors import ConditionLoss, SeriesNonConvergent
from qheat.model import (
    ModelParams,
    RelaxationPair,
    _transformed_series,
    build_transition_matrix,
    certified_n_max,
    nbar,
    relaxation_pair,
    transition_direct,
    transition_hypergeometric,
)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(beta1=0.0, beta2=1.0, tau=1.0)
    with pytest.raises(ValueError):
        ModelParams(beta1=1.0, beta2=-2.0, tau=1.0)
    with pytest.raises(ValueError):
        ModelParams(beta1=1.0, beta2=1.0, tau=-0.5)
    with pytest.raises(ValueError):
        ModelParams(beta1=1.0, beta2=1.0, tau=1.0, hbar_omega=0.0)


def test_relaxation_pair_limits():
    n2 = nbar(2.5)
    pair_inf = relaxation_pair(ModelParams(beta1=1.0, beta2=2.5, tau=math.inf))
    assert pair_inf.u == pytest.approx(n2, abs=0.0)
    assert pair_inf.v == pytest.approx(n2, abs=0.0)

    pair0 = relaxation_pair(ModelParams(beta1=1.0, beta2=2.5, tau=0.0))
    assert pair0.u == 0.0
    assert pair0.v == -1.0

    pair2 = relaxation_pair(ModelParams(beta1=1.0, beta2=2.5, tau=2.0))
    e2 = math.exp(-2.0)
    assert pair2.u == pytest.approx(n2 * (1 - e2), rel=1e-15)
    assert pair2.v == pytest.approx(n2 - (n2 + 1) * e2, rel=1e-15)
    # u - v = e^-tau exactly
    assert pair2.u - pair2.v == pytest.approx(e2, rel=1e-12)


def test_ground_state_geometric_law():
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=2.5, tau=2.0))
    u = pair.u
    for m in range(12):
        direct, cond = transition_direct(m, 0, pair)
        assert direct == pytest.approx(u**m / (1 + u) ** (m + 1), rel=1e-13)
        assert cond <= 1.0 + 1e-12  # single-term sum cannot cancel


def test_identity_at_tau_zero():
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=3.0, tau=0.0))
    for m in range(5):
        for n in range(5):
            val, _ = transition_direct(m, n, pair)
            assert val == (1.0 if m == n else 0.0)
            assert transition_hypergeometric(m, n, pair) == (1.0 if m == n else 0.0)


def test_stationary_columns_are_thermal():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=20.0)
    pair = relaxation_pair(params)
    n2 = params.nbar2
    for m in range(8):
        # residual time dependence decays like e^-tau, growing mildly with n
        values = [transition_hypergeometric(m, n, pair) for n in range(6)]
        assert max(values) - min(values) < 1e-8
        law = (n2 / (1 + n2)) ** m / (1 + n2)
        assert values[0] == pytest.approx(law, abs=1e-8)
        # detailed balance of the stationary law
        if m:
            prev = transition_hypergeometric(m - 1, 0, pair)
            assert values[0] / prev == pytest.approx(n2 / (1 + n2), rel=1e-8)


def test_hypergeometric_matches_direct_where_positive():
    # v < 0 regime: the direct sum has one sign and is exact to rounding
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=3.0, tau=0.5))
    for m in range(0, 25, 4):
        for n in range(0, 25, 4):
            direct, _ = transition_direct(m, n, pair)
            hyp = transition_hypergeometric(m, n, pair)
            assert abs(direct - hyp) < 1e-12


def test_condition_loss_and_extended_recovery():
    # v > 0 regime with large indices: alternating sum cancels catastrophically
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=3.0, tau=5.0))
    with pytest.raises(ConditionLoss):
        transition_direct(30, 30, pair)
    extended, cond = transition_direct(30, 30, pair, extended=True)
    assert cond > 1e6
    hyp = transition_hypergeometric(30, 30, pair)
    assert extended == pytest.approx(hyp, rel=1e-9)


def test_series_requires_unit_disk():
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=3.0, tau=0.5))
    assert pair.y > 1.0
    with pytest.raises(SeriesNonConvergent):
        _transformed_series(3, 3, pair.u, pair.v, pair.y)


def test_certified_n_max_geometric_tail():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=1.0)
    n = certified_n_max(params, 1e-12)
    assert math.exp(-min(params.beta1, params.beta2) * (n + 1)) < 1e-12
    assert n in (27, 28)  # 12*ln(10) / 1 up to the off-by-one convention
    with pytest.raises(ValueError):
        certified_n_max(params, 0.0)


def test_build_matrix_stochastic_and_nonnegative():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=1.0)
    tm = build_transition_matrix(params, epsilon=1e-12)
    assert np.all(tm.entries >= -1e-12)
    assert np.all(tm.entries <= 1.0 + 1e-10)
    deficits = np.abs(tm.column_sums() - 1.0)
    assert np.all(deficits <= tm.leakage + 1e-10)


def test_build_matrix_identity_at_tau_zero():
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.0)
    tm = build_transition_matrix(params, epsilon=1e-12)
    assert np.array_equal(tm.entries, np.eye(tm.n_max + 1))


@settings(max_examples=25, deadline=None)
@given(
    beta2=st.floats(min_value=0.3, max_value=5.0),
    tau=st.floats(min_value=0.01, max_value=10.0),
    n=st.integers(min_value=0, max_value=12),
)
def test_column_mass_property(beta2, tau, n):
    # the infinite column sums to 1; summing far past the occupied band
    # must come out at 1 within rounding
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=beta2, tau=tau))
    top = n + 80 + int(10 * nbar(beta2))
    total = math.fsum(transition_hypergeometric(m, n, pair) for m in range(top))
    assert total == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    beta2=st.floats(min_value=0.3, max_value=5.0),
    tau=st.floats(min_value=0.01, max_value=30.0),
)
def test_relaxation_pair_invariants(beta2, tau):
    pair = relaxation_pair(ModelParams(beta1=1.0, beta2=beta2, tau=tau))
    assert pair.u >= 0.0
    assert -1.0 <= pair.v <= nbar(beta2)
    assert pair.u - pair.v == pytest.approx(math.exp(-tau), rel=1e-10)
