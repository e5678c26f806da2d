"""Named, tolerance-tagged checks binding every analytic claim to a test.

Each check computes a residual; it passes when the residual is at or below
the tolerance drawn from a single table (``TOLERANCES``).  ``run_suite``
executes any subset and returns a machine-readable report with entries
{check, params, residual, tolerance, pass, seconds}.
"""

from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from .errors import ConditionLoss, InsufficientSupport
from .heatstats import (
    asymptotic_distribution,
    charfn,
    classical_density,
    classical_variance,
    cumulant_trace,
    default_k_max,
    invert_charfn,
    isothermal_distribution,
    low_temperature_distribution,
    mean_heat,
    stationary_charfn,
    stationary_mean,
    stationary_variance,
    variance_heat,
)
from .model import (
    ModelParams,
    relaxation_pair,
    transition_direct,
    transition_hypergeometric,
)
from .oracle import evolve_matrix, heat_distribution_bruteforce

#: single source of truth for every per-check tolerance
TOLERANCES = {
    "kernel_cross_validation": 1e-6,
    "path_equivalence": 1e-10,
    "column_stochasticity": 1e-10,
    "charfn_symmetry": 1e-12,
    "fluctuation_theorem_asymptotic": 1e-12,
    "fluctuation_theorem_finite_tau": 1e-8,
    "cumulant_closure_moments": 1e-8,
    "cumulant_closure_fd": 1e-7,
    "stationary_limits": 1e-7,
    "normalization": 1e-10,
    "variance_monotone": 1e-12,
    "swap_invariance": 1e-10,
    "quantum_narrower_than_classical": 0.0,
    "classical_limit": 1e-2,
    "stationary_charfn_pair": 1e-10,
}

_TAU_SET = (0.1, 0.5, 1.0, 2.0, 5.0)
_MU_SEED = 20200517


def check_fluctuation_theorem(dist, delta_beta: float, tol: float, floor: float = 1e-300) -> dict:
    """Per-k residuals of ln P(k) - ln P(-k) + delta_beta*k*hbar_omega.

    ``floor`` excludes masses below the caller's underflow/noise threshold;
    quadrature-derived masses sit on a ~1e-16 absolute noise floor, so their
    log-ratios are only meaningful well above it.
    """
    residuals = {}
    for k, p in dist.masses.items():
        if k <= 0:
            continue
        q = dist.masses.get(-k, 0.0)
        if p > floor and q > floor:
            residuals[k] = abs(
                math.log(p) - math.log(q) + delta_beta * k * dist.hbar_omega
            )
    if len(residuals) < 3:
        raise InsufficientSupport(
            f"only {len(residuals)} testable lattice pairs (need >= 3)"
        )
    worst = max(residuals.values())
    return {"residuals": residuals, "max_residual": worst, "pass": worst <= tol}


def check_symmetry(params: ModelParams, mu_samples, tol: float) -> dict:
    """Max |G(-i*delta_beta - mu) - G(mu)| over real mu samples."""
    shift = -1j * params.delta_beta / params.hbar_omega
    worst = 0.0
    for mu in mu_samples:
        g = charfn(params, float(mu)).value
        g_shifted = charfn(params, shift - float(mu)).value
        worst = max(worst, abs(g_shifted - g))
    return {"max_residual": worst, "pass": worst <= tol}


# ---------------------------------------------------------------------------
# suite checks: each returns (residual, params-description)

def _closed_kernel(pair, m, n):
    try:
        val, _ = transition_direct(m, n, pair)
        return val
    except ConditionLoss:
        return transition_hypergeometric(m, n, pair)


def _chk_kernel_cross_validation(tol):
    n_max = 40
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.0)
    worst = 0.0
    for tau in _TAU_SET:
        pair = relaxation_pair(replace(params, tau=tau))
        closed = np.array(
            [[_closed_kernel(pair, m, n) for n in range(n_max + 1)] for m in range(n_max + 1)]
        )
        oracle = evolve_matrix(params.nbar2, n_max, tau, pad=15)
        worst = max(worst, float(np.max(np.abs(closed - oracle))))
    return worst, {"beta1": 1.0, "beta2": 3.0, "taus": list(_TAU_SET), "n_max": n_max}


def _chk_path_equivalence(tol):
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.0)
    worst = 0.0
    for tau in _TAU_SET:
        pair = relaxation_pair(replace(params, tau=tau))
        for m in range(31):
            for n in range(31):
                hyp = transition_hypergeometric(m, n, pair)
                try:
                    direct, _ = transition_direct(m, n, pair)
                except ConditionLoss:
                    direct, _ = transition_direct(m, n, pair, extended=True)
                worst = max(worst, abs(direct - hyp))
    return worst, {"beta2": 3.0, "taus": list(_TAU_SET), "m_n_max": 30}


def _chk_column_stochasticity(tol):
    n_max = 40
    pad = 30  # closed-form rows above the window account for escaped mass
    worst = 0.0
    for tau in _TAU_SET:
        pair = relaxation_pair(ModelParams(beta1=1.0, beta2=3.0, tau=tau))
        for n in range(n_max + 1):
            total = math.fsum(_closed_kernel(pair, m, n) for m in range(n_max + pad + 1))
            tail = (pair.u / (1.0 + pair.u)) ** (n_max + pad + 1)  # geometric envelope
            worst = max(worst, max(0.0, abs(total - 1.0) - tail))
    return worst, {"beta2": 3.0, "taus": list(_TAU_SET), "n_max": n_max}


def _chk_charfn_symmetry(tol):
    rng = np.random.default_rng(_MU_SEED)
    worst = 0.0
    triples = [(1.0, 3.0, 0.7), (1.0, 2.5, 2.0), (2.0, 2.0, 1.0)]  # includes delta_beta = 0
    for b1, b2, tau in triples:
        params = ModelParams(beta1=b1, beta2=b2, tau=tau)
        mus = rng.uniform(-math.pi, math.pi, size=20)
        worst = max(worst, check_symmetry(params, mus, tol)["max_residual"])
    return worst, {"triples": triples, "samples": 20, "seed": _MU_SEED}


def _chk_fluctuation_theorem_asymptotic(tol):
    params = ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)
    report = check_fluctuation_theorem(asymptotic_distribution(params), params.delta_beta, tol)
    iso = isothermal_distribution(2.5)
    report_iso = check_fluctuation_theorem(iso, 0.0, tol)
    worst = max(report["max_residual"], report_iso["max_residual"])
    return worst, {"beta1": 1.0, "beta2": 2.5, "isothermal_beta": 2.5}


def _chk_fluctuation_theorem_finite_tau(tol):
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.7)
    dist = invert_charfn(params)
    report = check_fluctuation_theorem(dist, params.delta_beta, tol, floor=1e-9)
    return report["max_residual"], {"beta1": 1.0, "beta2": 3.0, "tau": 0.7, "floor": 1e-9}


def _chk_cumulant_closure_moments(tol):
    worst = 0.0
    for tau in (0.3, 1.0, 3.0):
        params = ModelParams(beta1=1.0, beta2=3.0, tau=tau)
        dist = invert_charfn(params)
        worst = max(
            worst,
            abs(dist.mean() - mean_heat(params)),
            abs(dist.variance() - variance_heat(params)),
        )
    return worst, {"beta1": 1.0, "beta2": 3.0, "taus": [0.3, 1.0, 3.0]}


def _chk_cumulant_closure_fd(tol):
    from .heatstats import FD_STEP, _fd_cumulants

    worst = 0.0
    for tau in (0.3, 1.0, 3.0):
        params = ModelParams(beta1=1.0, beta2=3.0, tau=tau)
        fd_mean, fd_var = _fd_cumulants(params, FD_STEP)
        worst = max(
            worst,
            abs(fd_mean - mean_heat(params)),
            abs(fd_var - variance_heat(params)),
        )
    cumulant_trace(ModelParams(beta1=1.0, beta2=3.0, tau=0.0), [0.3, 1.0, 3.0], fd_tolerance=tol)
    return worst, {"beta1": 1.0, "beta2": 3.0, "taus": [0.3, 1.0, 3.0], "fd_step": FD_STEP}


def _chk_stationary_limits(tol):
    params = ModelParams(beta1=1.0, beta2=2.5, tau=20.0)
    res = max(
        abs(mean_heat(params) - stationary_mean(params)),
        abs(variance_heat(params) - stationary_variance(params)),
        abs(stationary_mean(params) - (params.nbar2 - params.nbar1)),
    )
    return res, {"beta1": 1.0, "beta2": 2.5, "tau": 20.0}


def _chk_normalization(tol):
    dists = [
        asymptotic_distribution(ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)),
        isothermal_distribution(2.5),
        low_temperature_distribution(ModelParams(beta1=8.0, beta2=8.0, tau=math.inf)),
        invert_charfn(ModelParams(beta1=1.0, beta2=3.0, tau=0.1)),
        invert_charfn(ModelParams(beta1=1.0, beta2=3.0, tau=2.0)),
        heat_distribution_bruteforce(ModelParams(beta1=1.0, beta2=3.0, tau=0.5), n_max=35),
    ]
    worst = 0.0
    for dist in dists:
        worst = max(worst, max(0.0, abs(dist.total_mass() - 1.0) - dist.truncation_error))
    return worst, {"cases": len(dists)}


def _chk_variance_monotone(tol):
    params = ModelParams(beta1=1.0, beta2=3.0, tau=0.0)
    taus = np.arange(0.0, 8.0 + 1e-9, 0.05)
    var = np.array([variance_heat(replace(params, tau=float(t))) for t in taus])
    worst_drop = float(max(0.0, np.max(-np.diff(var))))
    return worst_drop, {"beta1": 1.0, "beta2": 3.0, "grid": "0:8:0.05"}


def _chk_swap_invariance(tol):
    a = ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)
    b = ModelParams(beta1=2.5, beta2=1.0, tau=math.inf)
    res = max(
        abs(stationary_variance(a) - stationary_variance(b)),
        abs(stationary_mean(a) + stationary_mean(b)),
    )
    return res, {"beta_pair": [1.0, 2.5]}


def _chk_quantum_narrower(tol):
    params = ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)
    excess = stationary_variance(params) - classical_variance(params)
    return max(0.0, excess), {"beta1": 1.0, "beta2": 2.5}


def _chk_classical_limit(tol):
    params = ModelParams(beta1=0.01, beta2=0.01, tau=math.inf)
    dist = asymptotic_distribution(params, k_max=math.ceil(5.0 / 0.01))
    density = classical_density(params)
    worst = 0.0
    for k, p in dist.masses.items():
        q = k * params.hbar_omega
        if abs(q) <= 5.0 / 0.01:
            ref = density(q)
            worst = max(worst, abs(p / params.hbar_omega - ref) / ref)
    return worst, {"beta": 0.01, "window": "|Q| <= 5/beta2"}


def _chk_stationary_charfn_pair(tol):
    params = ModelParams(beta1=1.0, beta2=2.5, tau=math.inf)
    dist = asymptotic_distribution(params, k_max=default_k_max(params) + 20)
    worst = 0.0
    for x in np.linspace(0.1, 2.0 * math.pi - 0.1, 20):
        forward = sum(p * np.exp(1j * x * k) for k, p in dist.masses.items())
        worst = max(worst, abs(forward - stationary_charfn(params, x)))
        worst = max(worst, abs(charfn(params, x).value - stationary_charfn(params, x)))
    return worst, {"beta1": 1.0, "beta2": 2.5, "samples": 20}


CHECKS = {
    "kernel_cross_validation": _chk_kernel_cross_validation,
    "path_equivalence": _chk_path_equivalence,
    "column_stochasticity": _chk_column_stochasticity,
    "charfn_symmetry": _chk_charfn_symmetry,
    "fluctuation_theorem_asymptotic": _chk_fluctuation_theorem_asymptotic,
    "fluctuation_theorem_finite_tau": _chk_fluctuation_theorem_finite_tau,
    "cumulant_closure_moments": _chk_cumulant_closure_moments,
    "cumulant_closure_fd": _chk_cumulant_closure_fd,
    "stationary_limits": _chk_stationary_limits,
    "normalization": _chk_normalization,
    "variance_monotone": _chk_variance_monotone,
    "swap_invariance": _chk_swap_invariance,
    "quantum_narrower_than_classical": _chk_quantum_narrower,
    "classical_limit": _chk_classical_limit,
    "stationary_charfn_pair": _chk_stationary_charfn_pair,
}


def run_suite(names=None, profile: str = "default") -> dict:
    """Run the named checks (all by default) and assemble the JSON report."""
    if profile not in ("default", "strict"):
        raise ValueError(f"unknown tolerance profile {profile!r}")
    scale = 0.1 if profile == "strict" else 1.0
    selected = list(CHECKS) if names is None else list(names)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check name(s): {', '.join(unknown)}")
    entries = []
    for name in selected:
        tol = TOLERANCES[name] * scale
        start = time.perf_counter()
        try:
            residual, desc = CHECKS[name](tol)
            residual = float(residual)
            passed = bool(residual <= tol)
            error = None
        except Exception as exc:  # failures are report entries, not crashes
            residual, desc, passed = math.inf, {}, False
            error = f"{type(exc).__name__}: {exc}"
        entries.append(
            {
                "check": name,
                "params": desc,
                "residual": residual,
                "tolerance": tol,
                "pass": passed,
                "seconds": time.perf_counter() - start,
                **({"error": error} if error else {}),
            }
        )
    return {
        "profile": profile,
        "checks": entries,
        "all_pass": all(e["pass"] for e in entries),
    }
