"""Heat distribution, characteristic function, asymptotic laws and cumulants.

Sign convention: Q > 0 means energy gained by the oscillator (final minus
initial oscillator energy).  The distribution lives on the lattice
Q = k * hbar_omega, k integer, so the characteristic function G(mu, tau) is a
Fourier series in mu with period 2*pi/hbar_omega and the lattice masses are
its exact Fourier coefficients.

The characteristic function obeys G(-i*delta_beta - mu, tau) = G(mu, tau)
with delta_beta = beta2 - beta1, which is the Fourier-side statement of the
exchange fluctuation theorem P(Q)/P(-Q) = exp(-delta_beta * Q).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from math import cosh, exp, expm1, fsum, log, sinh, tanh

import numpy as np

from .errors import AliasingDetected, ConvergenceDomainError, CumulantMismatch
from .model import ModelParams, TransitionMatrix, relaxation_pair

#: default bound on lattice mass allowed at the truncation boundary
TAIL_TOLERANCE = 1e-12

#: finite-difference step (dimensionless mu) for the cumulant cross-check
FD_STEP = 1e-3


@dataclass(frozen=True)
class HeatDistribution:
    """Discrete probability mass on the heat lattice Q = k * hbar_omega."""

    hbar_omega: float
    masses: dict[int, float]
    tau: float
    truncation_error: float

    def total_mass(self) -> float:
        return fsum(self.masses.values())

    def mean(self) -> float:
        return self.hbar_omega * fsum(k * p for k, p in self.masses.items())

    def variance(self) -> float:
        mu = self.mean()
        m2 = self.hbar_omega**2 * fsum(k * k * p for k, p in self.masses.items())
        return m2 - mu * mu

    def sorted_items(self) -> list[tuple[int, float]]:
        return sorted(self.masses.items())


@dataclass(frozen=True)
class CharFnSample:
    """One evaluation of the characteristic function."""

    mu: complex
    value: complex
    tau: float


@dataclass(frozen=True)
class CumulantTrace:
    """Mean and variance of the heat over a tau grid with stationary limits."""

    tau_grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    mean_inf: float
    variance_inf: float


def _check_strip(params: ModelParams, x: complex) -> None:
    """Reject complex arguments outside the fluctuation-theorem strip.

    For the convention G(mu) = sum P(Q) e^{i mu Q} the valid imaginary shift
    runs from 0 to -delta_beta (dimensionless); anything outside signals a
    malformed symmetry-test argument.
    """
    im = x.imag
    lo = min(0.0, -params.delta_beta) - 1e-9
    hi = max(0.0, -params.delta_beta) + 1e-9
    if not lo <= im <= hi:
        raise ConvergenceDomainError(
            f"Im(mu*hbar_omega) = {im:.6g} outside the convergence strip "
            f"[{lo:.6g}, {hi:.6g}] for delta_beta = {params.delta_beta:.6g}"
        )


def charfn(params: ModelParams, mu: complex) -> CharFnSample:
    """Exact closed-form characteristic function G(mu, tau).

    ``mu`` is the conjugate variable to Q (so mu * hbar_omega is
    dimensionless).  A purely real mu is always valid; complex arguments are
    restricted to the fluctuation-theorem strip.
    """
    x = complex(mu) * params.hbar_omega
    if x.imag != 0.0:
        _check_strip(params, x)
    if x == 0.0:
        return CharFnSample(mu=complex(mu), value=1.0 + 0.0j, tau=params.tau)
    pair = relaxation_pair(params)
    u, v = pair.u, pair.v
    b1 = params.beta1
    e = cmath.exp(1j * x)
    num = expm1(b1) * e
    den = e * ((u + 1.0) * exp(b1) - u * cmath.exp(b1 + 1j * x) + v) - v - 1.0
    if abs(den) < 1e-300:
        raise ConvergenceDomainError(f"characteristic-function pole at mu = {mu!r}")
    return CharFnSample(mu=complex(mu), value=num / den, tau=params.tau)


def stationary_charfn(params: ModelParams, mu: complex) -> complex:
    """Closed-form tau -> inf characteristic function (rational in e^{i mu})."""
    x = complex(mu) * params.hbar_omega
    b1, b2 = params.beta1, params.beta2
    num = 1.0 - exp(-b1) - exp(-b2) + exp(-(b1 + b2))
    den = 1.0 - cmath.exp(-(b2 - 1j * x)) - cmath.exp(-(b1 + 1j * x)) + exp(-(b1 + b2))
    return num / den


def charfn_from_matrix(tm: TransitionMatrix, params: ModelParams, mu: complex) -> CharFnSample:
    """Truncated double-sum characteristic function from the kernel matrix.

    Independent check of the closed form: weights each column by the initial
    thermal occupation and sums the lattice phases directly.
    """
    x = complex(mu) * params.hbar_omega
    size = tm.n_max + 1
    w = np.exp(-params.beta1 * np.arange(size)) * (-expm1(-params.beta1))
    phase = np.exp(1j * x * np.arange(size))
    # sum_{m,n} X[m,n] w_n e^{i x (m - n)}
    value = phase @ tm.entries @ (w / phase)
    return CharFnSample(mu=complex(mu), value=complex(value), tau=tm.tau)


def default_k_max(params: ModelParams, tail: float = 1e-14) -> int:
    """Smallest k whose stationary tail weight drops below ``tail`` (floor 8)."""
    beta = min(params.beta1, params.beta2)
    return max(8, math.ceil(log(1.0 / tail) / beta))


def invert_charfn(
    params: ModelParams,
    k_max: int | None = None,
    quadrature_points: int | None = None,
    tail_tolerance: float = TAIL_TOLERANCE,
) -> HeatDistribution:
    """Recover the lattice masses as Fourier coefficients of G.

    The trapezoid rule on one period is spectrally exact for this analytic
    periodic integrand, so the masses are obtained from a plain DFT of
    equispaced samples of the closed-form characteristic function.
    """
    if k_max is None:
        k_max = default_k_max(params)
    m_pts = quadrature_points if quadrature_points is not None else 4 * k_max
    if m_pts < 4 * k_max:
        raise ValueError(f"quadrature_points must be >= 4*k_max = {4 * k_max}")
    xs = 2.0 * np.pi * np.arange(m_pts) / m_pts
    g = np.array([charfn(params, x / params.hbar_omega).value for x in xs])
    coeff = np.fft.fft(g) / m_pts

    worst_imag = float(np.max(np.abs(coeff.imag)))
    if worst_imag > 1e-10:
        raise AliasingDetected(
            f"imaginary residue {worst_imag:.3e} in Fourier coefficients; "
            "increase quadrature_points"
        )
    masses = {}
    for k in range(-k_max, k_max + 1):
        p = float(coeff[k % m_pts].real)
        if p < -1e-12:
            raise ValueError(f"negative mass {p!r} at lattice index {k}")
        masses[k] = max(p, 0.0)
    if max(masses[k_max], masses[-k_max]) > tail_tolerance:
        raise AliasingDetected(
            f"boundary mass {max(masses[k_max], masses[-k_max]):.3e} exceeds "
            f"tail tolerance {tail_tolerance:.1e}; increase k_max"
        )
    # bins beyond +-k_max are computed by the same DFT; their mass is exactly
    # what the returned support discards
    discarded = [
        float(coeff[k % m_pts].real)
        for k in range(-(m_pts // 2), m_pts - m_pts // 2)
        if abs(k) > k_max and (k % m_pts) < m_pts
    ]
    truncation_error = abs(fsum(discarded))
    return HeatDistribution(
        hbar_omega=params.hbar_omega,
        masses=masses,
        tau=params.tau,
        truncation_error=truncation_error,
    )


def asymptotic_distribution(params: ModelParams, k_max: int | None = None) -> HeatDistribution:
    """Closed-form tau -> inf lattice law: two-sided geometric decay."""
    if k_max is None:
        k_max = default_k_max(params)
    b1, b2 = params.beta1, params.beta2
    a = (1.0 - exp(-b1) - exp(-b2) + exp(-(b1 + b2))) / (1.0 - exp(-(b1 + b2)))
    masses = {}
    for k in range(-k_max, k_max + 1):
        masses[k] = a * exp(-b2 * k) if k >= 0 else a * exp(b1 * k)
    tail = a * (
        exp(-b2 * (k_max + 1)) / -expm1(-b2) + exp(-b1 * (k_max + 1)) / -expm1(-b1)
    )
    return HeatDistribution(
        hbar_omega=params.hbar_omega, masses=masses, tau=math.inf, truncation_error=tail
    )


def isothermal_distribution(
    beta: float, k_max: int | None = None, hbar_omega: float = 1.0
) -> HeatDistribution:
    """Symmetric equal-temperature law P(k) = (cosh(b)-1)/sinh(b) * e^{-b|k|}."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    if k_max is None:
        k_max = max(8, math.ceil(log(1e14) / beta))
    pref = (cosh(beta) - 1.0) / sinh(beta)
    masses = {k: pref * exp(-beta * abs(k)) for k in range(-k_max, k_max + 1)}
    tail = 2.0 * pref * exp(-beta * (k_max + 1)) / -expm1(-beta)
    return HeatDistribution(
        hbar_omega=hbar_omega, masses=masses, tau=math.inf, truncation_error=tail
    )


def classical_density(params: ModelParams):
    """Continuous high-temperature heat density as a callable of Q.

    Density b1*b2/(b1+b2) * e^{-b2 Q} for Q >= 0 and e^{b1 Q} for Q < 0, with
    Q measured in the same energy units as hbar_omega and b1, b2 the
    dimensionful inverse temperatures beta_i = (beta_i*hbar_omega)/hbar_omega.
    """
    b1 = params.beta1 / params.hbar_omega
    b2 = params.beta2 / params.hbar_omega
    pref = b1 * b2 / (b1 + b2)

    def density(q: float) -> float:
        return pref * (exp(-b2 * q) if q >= 0.0 else exp(b1 * q))

    return density


def classical_variance(params: ModelParams) -> float:
    """Variance of the classical two-sided exponential density."""
    b1 = params.beta1 / params.hbar_omega
    b2 = params.beta2 / params.hbar_omega
    pref = b1 * b2 / (b1 + b2)
    m1 = pref * (1.0 / b2**2 - 1.0 / b1**2)
    m2 = pref * 2.0 * (1.0 / b2**3 + 1.0 / b1**3)
    return m2 - m1 * m1


def low_temperature_distribution(params: ModelParams) -> HeatDistribution:
    """Three-peak law on k in {-1, 0, 1} valid deep in the quantum regime."""
    b1, b2 = params.beta1, params.beta2
    norm = 1.0 + exp(-b1) + exp(-b2)
    masses = {-1: exp(-b1) / norm, 0: 1.0 / norm, 1: exp(-b2) / norm}
    return HeatDistribution(
        hbar_omega=params.hbar_omega, masses=masses, tau=math.inf, truncation_error=0.0
    )


def mean_heat(params: ModelParams) -> float:
    """Closed-form average heat at time tau (in energy units)."""
    pair = relaxation_pair(params)
    if params.tau == 0.0:
        return 0.0
    u, v = pair.u, pair.v
    b1 = params.beta1
    return params.hbar_omega * (u * exp(b1) - v - 1.0) / expm1(b1)


def variance_heat(params: ModelParams) -> float:
    """Closed-form heat variance at time tau (in energy-squared units)."""
    pair = relaxation_pair(params)
    if params.tau == 0.0:
        return 0.0
    u, v = pair.u, pair.v
    b1 = params.beta1
    num = u * (u + 1.0) * exp(2.0 * b1) + (1.0 - u * (2.0 * v + 3.0) + v) * exp(b1) + v * v + v
    return params.hbar_omega**2 * num / expm1(b1) ** 2


def stationary_mean(params: ModelParams) -> float:
    """Long-time mean heat hbar_omega*(nbar2 - nbar1)."""
    h = 0.5 * params.hbar_omega
    return h * (1.0 / tanh(0.5 * params.beta2) - 1.0 / tanh(0.5 * params.beta1))


def stationary_variance(params: ModelParams) -> float:
    """Long-time heat variance, invariant under beta1 <-> beta2."""
    b1, b2 = params.beta1, params.beta2
    num = (
        -4.0 * exp(b1 + b2)
        + exp(2.0 * b1 + b2)
        + exp(b1 + 2.0 * b2)
        + exp(b1)
        + exp(b2)
    )
    return params.hbar_omega**2 * num / (expm1(b1) ** 2 * expm1(b2) ** 2)


def _fd_cumulants(params: ModelParams, h: float) -> tuple[float, float]:
    """Richardson-extrapolated central differences of G at mu = 0.

    Returns (mean, variance) in lattice units (hbar_omega = 1 internally);
    the step ``h`` is in dimensionless mu.
    """

    def g(x: float) -> complex:
        return charfn(params, x / params.hbar_omega).value

    def first(step: float) -> complex:
        return (g(step) - g(-step)) / (2.0 * step)

    def second(step: float) -> complex:
        return (g(step) - 2.0 * g(0.0) + g(-step)) / (step * step)

    d1 = (4.0 * first(h / 2.0) - first(h)) / 3.0
    d2 = (4.0 * second(h / 2.0) - second(h)) / 3.0
    mean = (-1j * d1).real
    second_moment = (-d2).real
    return mean, second_moment - mean * mean


def cumulant_trace(
    params: ModelParams,
    tau_grid,
    fd_step: float = FD_STEP,
    fd_tolerance: float = 1e-7,
) -> CumulantTrace:
    """Closed-form cumulants on a tau grid, cross-checked by differentiation.

    Every grid point is verified against Richardson finite differences of the
    characteristic function at mu = 0; a mismatch beyond ``fd_tolerance`` (in
    lattice units) raises :class:`CumulantMismatch`.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or len(taus) == 0:
        raise ValueError("tau grid must be a non-empty 1-d sequence")
    if np.any(np.diff(taus) <= 0) and len(taus) > 1:
        raise ValueError("tau grid must be strictly ascending")
    means = np.empty_like(taus)
    variances = np.empty_like(taus)
    h = params.hbar_omega
    for i, t in enumerate(taus):
        pt = replace(params, tau=float(t))
        means[i] = mean_heat(pt)
        variances[i] = variance_heat(pt)
        fd_mean, fd_var = _fd_cumulants(pt, fd_step)
        err = max(abs(fd_mean - means[i] / h), abs(fd_var - variances[i] / h**2))
        if err > fd_tolerance:
            raise CumulantMismatch(
                f"closed-form vs differentiated cumulants differ by {err:.3e} "
                f"at tau = {t:g} (tolerance {fd_tolerance:.1e})"
            )
    return CumulantTrace(
        tau_grid=taus,
        mean=means,
        variance=variances,
        mean_inf=stationary_mean(params),
        variance_inf=stationary_variance(params),
    )
