"""Physical parameters and the exact Fock-state transition kernel.

All internal arithmetic is dimensionless: inverse temperatures enter as the
products beta*hbar_omega and time as tau = gamma*t.  The energy quantum
hbar_omega only rescales reported heat values.

The kernel X[m, n](tau) (probability of ending in Fock state m after starting
in n, for a damped oscillator attached to a bath with mean occupation nbar2)
has two independent evaluation routes:

* ``transition_direct`` - the finite alternating sum over j <= min(m, n),
  summed with exact (Shewchuk) accumulation and a cancellation condition
  estimate.  Terms all share one sign whenever v <= 0 (tau <= beta2*hbar_omega),
  where this route is therefore exact to rounding.
* ``transition_hypergeometric`` - the same quantity written through the
  terminating Gauss series F[-n, -m, 1; y] with y = (u - v)/(u*(1 + v)) > 0,
  whose terms are all positive, plus the transformed convergent series
  (1-y)^(1+m+n) * F[1+n, 1+m, 1; y] inside the unit disk |y| < 1.

The two regimes are exactly complementary: y < 1 iff v > 0, which is the only
region where the direct sum alternates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import exp, expm1, fsum, lgamma, log, log1p

import mpmath
import numpy as np

from .errors import ConditionLoss, SeriesNonConvergent, TruncationFailure

#: cancellation threshold above which the direct path refuses its float result
CONDITION_THRESHOLD = 1.0e6

#: iteration cap for the transformed convergent series
SERIES_MAX_TERMS = 200_000


def nbar(beta: float) -> float:
    """Bose-Einstein mean occupation 1/(e^beta - 1) for dimensionless beta."""
    return 1.0 / expm1(beta)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless configuration of oscillator, bath and contact time.

    beta1, beta2 are the products (inverse temperature) * hbar * omega for the
    oscillator's initial state and for the bath; tau = gamma * t >= 0 (may be
    ``math.inf`` for the stationary limit).
    """

    beta1: float
    beta2: float
    tau: float
    hbar_omega: float = 1.0

    def __post_init__(self):
        if not self.beta1 > 0:
            raise ValueError(f"beta1 must be > 0, got {self.beta1}")
        if not self.beta2 > 0:
            raise ValueError(f"beta2 must be > 0, got {self.beta2}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not self.hbar_omega > 0:
            raise ValueError(f"hbar_omega must be > 0, got {self.hbar_omega}")

    @property
    def nbar1(self) -> float:
        return nbar(self.beta1)

    @property
    def nbar2(self) -> float:
        return nbar(self.beta2)

    @property
    def delta_beta(self) -> float:
        """Dimensionless beta2 - beta1 (positive when the bath is colder)."""
        return self.beta2 - self.beta1


@dataclass(frozen=True)
class RelaxationPair:
    """The two relaxation parameters u and v driving the kernel.

    u = nbar2*(1 - e^-tau) and v = nbar2 - (nbar2 + 1)*e^-tau, so (u, v) runs
    from (0, -1) at tau = 0 to (nbar2, nbar2) at tau = inf, with
    u - v = e^-tau >= 0 throughout.
    """

    u: float
    v: float

    @property
    def y(self) -> float:
        """Argument of the hypergeometric route, (u - v)/(u*(1 + v))."""
        return (self.u - self.v) / (self.u * (1.0 + self.v))


def relaxation_pair(params: ModelParams) -> RelaxationPair:
    """Evaluate (u, v) at the parameters' bath occupation and time."""
    n2 = params.nbar2
    if math.isinf(params.tau):
        return RelaxationPair(u=n2, v=n2)
    e = exp(-params.tau)
    return RelaxationPair(u=n2 * (1.0 - e), v=n2 - (n2 + 1.0) * e)


def _log_prefactor(m: int, n: int, u: float, v: float) -> float:
    return m * log(u) - (m + 1) * log1p(u) + n * (log1p(v) - log1p(u))


def transition_direct(
    m: int,
    n: int,
    pair: RelaxationPair,
    cond_threshold: float = CONDITION_THRESHOLD,
    extended: bool = False,
) -> tuple[float, float]:
    """Evaluate X[m, n] by the finite alternating sum.

    Returns ``(value, condition)`` where condition is the ratio of the largest
    term magnitude to the result.  Raises :class:`ConditionLoss` when the
    condition exceeds ``cond_threshold`` unless ``extended`` is set, in which
    case the sum is redone in multiple precision sized to the observed
    cancellation.
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    u, v = pair.u, pair.v
    if u == 0.0:
        # tau = 0 identity shortcut: the formula has a removable singularity.
        return (1.0 if m == n else 0.0), 1.0

    # z = -v(1+u)/(u(1+v)); positive for v < 0, zero at v = 0.
    z = -v * (1.0 + u) / (u * (1.0 + v))
    lp = _log_prefactor(m, n, u, v)
    terms = []
    for j in range(min(m, n) + 1):
        lc = lgamma(m + n - j + 1) - lgamma(n - j + 1) - lgamma(j + 1) - lgamma(m - j + 1)
        if z == 0.0:
            terms.append(exp(lp + lc) if j == 0 else 0.0)
        else:
            sign = 1.0 if (z > 0.0 or j % 2 == 0) else -1.0
            terms.append(sign * exp(lp + lc + j * log(abs(z))))
    total = fsum(terms)
    peak = max(abs(t) for t in terms)
    condition = peak / abs(total) if total != 0.0 else math.inf

    if condition <= cond_threshold:
        return total, condition
    if not extended:
        raise ConditionLoss(
            f"direct sum for X[{m},{n}] lost {math.log10(condition):.1f} digits "
            f"(condition {condition:.3e} > {cond_threshold:.1e})",
            condition=condition,
        )

    dps = 20 + int(math.log10(condition)) if math.isfinite(condition) else 60
    with mpmath.workdps(dps):
        uu, vv = mpmath.mpf(u), mpmath.mpf(v)
        zz = -vv * (1 + uu) / (uu * (1 + vv))
        pref = uu**m / (1 + uu) ** (m + 1) * ((1 + vv) / (1 + uu)) ** n
        acc = mpmath.mpf(0)
        for j in range(min(m, n) + 1):
            coef = mpmath.factorial(m + n - j) / (
                mpmath.factorial(n - j) * mpmath.factorial(j) * mpmath.factorial(m - j)
            )
            acc += coef * zz**j
        return float(pref * acc), condition


def _terminating_positive_sum(m: int, n: int, u: float, v: float, y: float) -> float:
    # F[-n,-m,1;y] = sum_k C(m,k) C(n,k) y^k, all terms positive for y > 0.
    lp = _log_prefactor(m, n, u, v)
    logs = []
    ly = log(y) if y > 0.0 else -math.inf
    for k in range(min(m, n) + 1):
        lc = (
            lgamma(m + 1) - lgamma(k + 1) - lgamma(m - k + 1)
            + lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)
        )
        logs.append(lc + (0.0 if k == 0 else k * ly))
    peak = max(logs)
    scaled = fsum(exp(lg - peak) for lg in logs)
    return exp(lp + peak) * scaled


def _transformed_series(m: int, n: int, u: float, v: float, y: float) -> float:
    # (1-y)^(1+m+n) * sum_k y^k C(n+k,k) C(m+k,k); converges for |y| < 1 only.
    if abs(y) >= 1.0:
        raise SeriesNonConvergent(
            f"transformed series requires |y| < 1, got y = {y:.6g}"
        )
    pref = exp(_log_prefactor(m, n, u, v) + (1 + m + n) * log1p(-y))
    acc = 0.0
    term = 1.0
    comp = 0.0  # Kahan compensation
    k = 0
    while True:
        t = term - comp
        s = acc + t
        comp = (s - acc) - t
        acc = s
        ratio = y * (n + k + 1) * (m + k + 1) / ((k + 1) * (k + 1))
        term *= ratio
        k += 1
        if ratio < 1.0 and term / (1.0 - ratio) <= 1e-17 * acc + 5e-324:
            break
        if k >= SERIES_MAX_TERMS:
            raise TruncationFailure(
                f"series tail bound not met within {SERIES_MAX_TERMS} terms "
                f"for X[{m},{n}], y = {y:.6g}"
            )
    return pref * acc


def transition_hypergeometric(m: int, n: int, pair: RelaxationPair) -> float:
    """Evaluate X[m, n] through the hypergeometric representation.

    Inside the unit disk (y < 1) the transformed all-positive series is used;
    outside, F[-n,-m,1;y] is a terminating polynomial whose terms are all
    positive for y > 0, so it is summed directly.  Both routes are stable for
    every tau > 0.
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    u, v = pair.u, pair.v
    if u == 0.0:
        return 1.0 if m == n else 0.0
    y = pair.y
    if 0.0 <= y < 1.0:
        try:
            return _transformed_series(m, n, u, v, y)
        except TruncationFailure:
            # slow convergence near y -> 1; the terminating form is exact
            return _terminating_positive_sum(m, n, u, v, y)
    return _terminating_positive_sum(m, n, u, v, y)


@dataclass(frozen=True)
class TransitionMatrix:
    """Truncated kernel X[m, n] for 0 <= m, n <= n_max with its certificate.

    ``leakage`` bounds the column mass lost to the truncation: the worst
    discarded tail of any relevant stationary/initial geometric law.
    """

    entries: np.ndarray
    n_max: int
    leakage: float
    tau: float

    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)


def certified_n_max(params: ModelParams, epsilon: float) -> int:
    """Smallest Fock cutoff whose discarded geometric tails stay below epsilon.

    Both the initial thermal law at beta1 and the stationary law at beta2 are
    covered; the discarded tail of a normalized geometric law with decay beta
    beyond N is e^(-beta*(N+1)).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    beta = min(params.beta1, params.beta2)
    n = math.ceil(log(1.0 / epsilon) / beta) - 1
    return max(n, 1)


def build_transition_matrix(params: ModelParams, epsilon: float = 1e-12) -> TransitionMatrix:
    """Fill X up to the certified cutoff, direct path first, fallbacks after.

    Entry order is deterministic (ascending j within each entry, row-major
    fill).  Raises if any entry falls below -1e-12 or above 1 + 1e-10, rather
    than clamping silently.
    """
    n_max = certified_n_max(params, epsilon)
    pair = relaxation_pair(params)
    size = n_max + 1
    x = np.zeros((size, size))
    if params.tau == 0.0:
        np.fill_diagonal(x, 1.0)
        return TransitionMatrix(entries=x, n_max=n_max, leakage=epsilon, tau=params.tau)

    for mm in range(size):
        for nn in range(size):
            try:
                val, _ = transition_direct(mm, nn, pair)
            except ConditionLoss:
                try:
                    val = transition_hypergeometric(mm, nn, pair)
                except (SeriesNonConvergent, TruncationFailure) as exc:
                    raise type(exc)(f"X[{mm},{nn}]: {exc}") from exc
            if val < -1e-12 or val > 1.0 + 1e-10:
                raise ValueError(
                    f"kernel entry X[{mm},{nn}] = {val!r} outside [0, 1] "
                    "beyond rounding tolerance"
                )
            x[mm, nn] = val

    # Column mass escaping above n_max: bound each column by the larger of the
    # two geometric tails that bracket the evolving populations.
    tail1 = exp(-params.beta1 * (n_max + 1))
    tail2 = exp(-params.beta2 * (n_max + 1))
    leakage = max(tail1, tail2, float(np.max(np.abs(x.sum(axis=0) - 1.0))))
    return TransitionMatrix(entries=x, n_max=n_max, leakage=leakage, tau=params.tau)
