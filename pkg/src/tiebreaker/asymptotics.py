"""Asymptotic MSE comparison of the sharp RDD and the three-level tie-breaker.

The RDD estimates both mean functions at a boundary point and so uses the
half-line constants ``c1_tilde, c2_tilde``; the tie-breaker estimates them at
an interior point and uses ``c1, c2``.  Everything here is a closed form in
those constants and the local problem primitives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .errors import DomainError
from .kernels import Kernel, kernel_constants


@dataclass(frozen=True)
class ProblemPrimitives:
    """Local data-generating quantities at the threshold.

    f_t : density of the running variable at t
    sigma2_plus, sigma2_minus : conditional response variances at t
    mu2_plus, mu2_minus : second derivatives of the mean functions at t
    """

    f_t: float
    sigma2_plus: float
    sigma2_minus: float
    mu2_plus: float
    mu2_minus: float

    def __post_init__(self):
        if not self.f_t > 0:
            raise DomainError(f"f_t must be > 0, got {self.f_t}")
        if not (self.sigma2_plus > 0 and self.sigma2_minus > 0):
            raise DomainError("conditional variances must be > 0")
        if self.mu2_plus == self.mu2_minus:
            raise DomainError("mu2_plus must differ from mu2_minus")

    @property
    def mu2_diff(self) -> float:
        return self.mu2_plus - self.mu2_minus

    @property
    def sigma2_sum(self) -> float:
        return self.sigma2_plus + self.sigma2_minus

    @property
    def relative_variance(self) -> float:
        """Share of the summed variance contributed by the treated arm."""
        return self.sigma2_plus / self.sigma2_sum


class Design(str, Enum):
    RDD = "rdd"
    TBD = "tbd"


class AmseTerms(NamedTuple):
    bias_sq: float
    variance: float

    @property
    def total(self) -> float:
        return self.bias_sq + self.variance


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise DomainError(f"assignment probability must lie in (0, 1), got {p}")


def _check_hn(h, n):
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    if not n >= 1:
        raise DomainError(f"sample size must be >= 1, got {n}")


def _weighted_variance(prims: ProblemPrimitives, p: float) -> float:
    return prims.sigma2_plus / (2 * p) + prims.sigma2_minus / (2 * (1 - p))


def gamma(prims: ProblemPrimitives, p: float = 0.5) -> float:
    """Data-dependent bandwidth factor; ``p`` generalises the variance term."""
    _check_p(p)
    s = _weighted_variance(prims, p)
    return (s / (prims.f_t * prims.mu2_diff**2)) ** 0.2


def alpha(prims: ProblemPrimitives) -> float:
    """Kernel-free scale of the optimal AMSE, used to normalise curves."""
    return 1.25 * abs(prims.mu2_diff) ** 0.4 * (prims.sigma2_sum / prims.f_t) ** 0.8


def amse_rdd_terms(h, n, prims: ProblemPrimitives, k: Kernel) -> AmseTerms:
    _check_hn(h, n)
    m = kernel_constants(k)
    return AmseTerms(
        m.c1_tilde * prims.mu2_diff**2 * h**4,
        m.c2_tilde / (n * h) * prims.sigma2_sum / prims.f_t,
    )


def amse_tbd_p_terms(h, n, prims: ProblemPrimitives, k: Kernel, p: float = 0.5) -> AmseTerms:
    _check_hn(h, n)
    _check_p(p)
    m = kernel_constants(k)
    return AmseTerms(
        m.c1 * prims.mu2_diff**2 * h**4,
        m.c2 / (n * h) * _weighted_variance(prims, p) / prims.f_t,
    )


def amse_tbd_terms(h, n, prims, k) -> AmseTerms:
    return amse_tbd_p_terms(h, n, prims, k, 0.5)


def amse_rdd(h, n, prims, k) -> float:
    return amse_rdd_terms(h, n, prims, k).total


def amse_tbd(h, n, prims, k) -> float:
    return amse_tbd_terms(h, n, prims, k).total


def amse_tbd_p(h, n, prims, k, p) -> float:
    return amse_tbd_p_terms(h, n, prims, k, p).total


def h_opt(design, n, prims: ProblemPrimitives, k: Kernel, p: float = 0.5) -> float:
    """Closed-form AMSE-minimising bandwidth ``(C2 / (4 C1))^{1/5} gamma n^{-1/5}``.

    ``p`` only affects the tie-breaker.
    """
    design = Design(design)
    if not n >= 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    m = kernel_constants(k)
    if design is Design.RDD:
        return (m.c2_tilde / (4 * m.c1_tilde)) ** 0.2 * gamma(prims) * n**-0.2
    return (m.c2 / (4 * m.c1)) ** 0.2 * gamma(prims, p) * n**-0.2


def mse_constant_ratio(k: Kernel) -> float:
    """``(c1_tilde c2_tilde^4 / (c1 c2^4))^{1/5}``."""
    m = kernel_constants(k)
    return (m.c1_tilde * m.c2_tilde**4 / (m.c1 * m.c2**4)) ** 0.2


def relative_amse(k: Kernel, theta: float = 1.0) -> float:
    """Limit of MSE_RDD(N) / MSE_TBD(theta N) at the optimal bandwidths."""
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    return theta**0.8 * mse_constant_ratio(k)


def relative_amse_p(k: Kernel, theta: float, p: float, r: float) -> float:
    """Relative AMSE when the window treats with probability ``p``.

    ``r`` is the treated arm's share of the summed conditional variance.
    """
    _check_p(p)
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"relative variance must lie in [0, 1], got {r}")
    bracket = r / (2 * p) + (1 - r) / (2 * (1 - p))
    return relative_amse(k, theta) * bracket**-0.8


def optimal_p(prims: ProblemPrimitives) -> float:
    """Window treatment probability minimising the tie-breaker AMSE."""
    sp, sm = math.sqrt(prims.sigma2_plus), math.sqrt(prims.sigma2_minus)
    return sp / (sp + sm)


def theta_star(k: Kernel) -> float:
    """Fraction of the RDD sample size a tie-breaker needs for equal AMSE."""
    m = kernel_constants(k)
    return m.c1**0.25 * m.c2 / (m.c1_tilde**0.25 * m.c2_tilde)


def safe_p_interval(k: Kernel) -> tuple[float, float]:
    """Window probabilities beating the RDD whatever the variance split."""
    ts = theta_star(k)
    return ts / 2, 1 - ts / 2


@dataclass(frozen=True)
class DesignComparison:
    relative_amse: float
    theta_star: float
    h_opt_rdd: float
    h_opt_tbd: float
    safe_p_lo: float
    safe_p_hi: float


def compare_designs(k: Kernel, prims: ProblemPrimitives, n, theta: float = 1.0) -> DesignComparison:
    lo, hi = safe_p_interval(k)
    return DesignComparison(
        relative_amse=relative_amse(k, theta),
        theta_star=theta_star(k),
        h_opt_rdd=h_opt(Design.RDD, n, prims, k),
        h_opt_tbd=h_opt(Design.TBD, theta * n, prims, k),
        safe_p_lo=lo,
        safe_p_hi=hi,
    )


class CurvePoint(NamedTuple):
    h_mult: float
    bias_sq_rdd: float
    variance_rdd: float
    bias_sq_tbd: float
    variance_tbd: float


def bias_variance_curve(
    k: Kernel,
    prims: ProblemPrimitives,
    n,
    h_multiples: Sequence[float],
) -> list[CurvePoint]:
    """Squared bias and variance of both designs at multiples of the RDD
    optimal bandwidth, in units of ``alpha * n^{-4/5}``."""
    h0 = h_opt(Design.RDD, n, prims, k)
    unit = alpha(prims) * n**-0.8
    out = []
    for mult in h_multiples:
        if not mult > 0:
            raise DomainError(f"bandwidth multiples must be > 0, got {mult}")
        r = amse_rdd_terms(mult * h0, n, prims, k)
        t = amse_tbd_terms(mult * h0, n, prims, k)
        out.append(
            CurvePoint(mult, r.bias_sq / unit, r.variance / unit, t.bias_sq / unit, t.variance / unit)
        )
    return out
