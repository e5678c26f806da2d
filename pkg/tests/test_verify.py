import json
import math

import pytest

from qheat.errors import InsufficientSupport
from qheat.heatstats import asymptotic_distribution, charfn, low_temperature_distribution
from qheat.model import ModelParams
from qheat.verify import (
    CHECKS,
    TOLERANCES,
    check_fluctuation_theorem,
    check_symmetry,
    run_suite,
)


def test_fluctuation_theorem_asymptotic_exact():
    params = ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)
    report = check_fluctuation_theorem(
        asymptotic_distribution(params), params.delta_beta, 1e-12
    )
    assert report["pass"]
    assert report["max_residual"] < 1e-12


def test_fluctuation_theorem_insufficient_support():
    dist = low_temperature_distribution(ModelParams(beta1=9.0, beta2=9.0, tau=math.inf))
    with pytest.raises(InsufficientSupport):
        check_fluctuation_theorem(dist, 0.0, 1e-12)


def test_symmetry_check_isothermal_reduces_to_conjugation():
    params = ModelParams(beta1=2.0, beta2=2.0, tau=1.0)
    report = check_symmetry(params, [0.4, 1.3, 2.7], 1e-12)
    assert report["pass"]
    for mu in (0.4, 1.3, 2.7):
        assert charfn(params, -mu).value == pytest.approx(
            charfn(params, mu).value.conjugate(), abs=1e-14
        )


def test_run_suite_all_green():
    report = run_suite()
    assert report["all_pass"]
    names = {entry["check"] for entry in report["checks"]}
    assert names == set(CHECKS)
    for entry in report["checks"]:
        assert set(entry) >= {"check", "params", "residual", "tolerance", "pass", "seconds"}
        assert entry["residual"] <= entry["tolerance"]
    json.dumps(report)  # report must be serializable as-is


def test_run_suite_single_check():
    report = run_suite(names=["charfn_symmetry"])
    assert [e["check"] for e in report["checks"]] == ["charfn_symmetry"]
    assert report["all_pass"]


def test_run_suite_unknown_name():
    with pytest.raises(KeyError):
        run_suite(names=["no_such_check"])
    with pytest.raises(ValueError):
        run_suite(profile="lenient")


def test_strict_profile_tightens_tolerances():
    report = run_suite(names=["charfn_symmetry", "stationary_limits"], profile="strict")
    for entry in report["checks"]:
        assert entry["tolerance"] == pytest.approx(TOLERANCES[entry["check"]] / 10.0)
