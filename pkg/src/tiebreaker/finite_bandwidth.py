"""Fixed-bandwidth variance and bias of the tie-breaker estimator.

Here the bandwidth does not shrink, so the local regression may reach past
the randomisation window.  The running variable is standardised to
``[-1, 1]`` with threshold 0 and the kernel enters through the six integrals
``kappa0, kappa2, lambda0, lambda2, phi(Delta), psi(Delta)``.  Kernels are
rescaled to unit peak for these integrals (the boxcar is the indicator of
``[-1, 1]``); variance ratios do not depend on that scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .errors import BracketError, DomainError, SingularFitError
from .kernels import Kernel, full_moment, kernel_peak, partial_moment, truncated_moment


@dataclass(frozen=True)
class FixedBwMoments:
    kappa0: float
    kappa2: float
    lambda0: float
    lambda2: float
    phi: float
    psi: float
    h: float
    delta_abs: float


def effective_bandwidth(k: Kernel, h: float) -> float:
    """Validate ``h``; boxcar bandwidths above 1 act exactly like ``h = 1``."""
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    if h > 1:
        if k.kind == "boxcar":
            return 1.0
        raise DomainError(
            f"bandwidth {h} exceeds the data support [-1, 1]; only the boxcar kernel is clamped"
        )
    return float(h)


def fixed_bw_moments(k: Kernel, h: float, delta: float) -> FixedBwMoments:
    h = effective_bandwidth(k, h)
    if delta < 0:
        raise DomainError(f"experimental radius must be >= 0, got {delta}")
    c = kernel_peak(k)
    s = delta / h
    return FixedBwMoments(
        kappa0=h * partial_moment(k, 0, 1, 0) / c,
        kappa2=h**3 * partial_moment(k, 0, 1, 2) / c,
        lambda0=h * partial_moment(k, 0, 1, 0, squared=True) / c**2,
        lambda2=h**3 * partial_moment(k, 0, 1, 2, squared=True) / c**2,
        phi=h**2 * partial_moment(k, s, math.inf, 1) / c,
        psi=h**2 * partial_moment(k, s, math.inf, 1, squared=True) / c**2,
        h=h,
        delta_abs=float(delta),
    )


def _var_factor(m: FixedBwMoments) -> float:
    det = m.kappa0 * m.kappa2 - m.phi**2
    if not det > 1e-14 * m.kappa0 * m.kappa2:
        raise SingularFitError("fixed-bandwidth moment matrix is singular")
    num = m.kappa2**2 * m.lambda0 - 2 * m.kappa2 * m.phi * m.psi + m.lambda2 * m.phi**2
    return num / det**2


def asymptotic_var_beta3(k: Kernel, h: float, delta: float, sigma2: float = 1.0) -> float:
    """Limit of ``N var(beta3_hat | X)`` for the uniform grid design."""
    return sigma2 * _var_factor(fixed_bw_moments(k, h, delta))


def eff_theory(k: Kernel, h: float, delta: float) -> float:
    """Asymptotic efficiency ratio var(RDD) / var(TBD) at fixed ``h``."""
    return asymptotic_var_beta3(k, h, 0.0) / asymptotic_var_beta3(k, h, delta)


def eff_bc(delta_ratio: float) -> float:
    """Closed-form efficiency ratio for the boxcar kernel."""
    if delta_ratio < 0:
        raise DomainError(f"delta ratio must be >= 0, got {delta_ratio}")
    if delta_ratio >= 1:
        return 4.0
    d2 = delta_ratio * delta_ratio
    return 1 + 6 * d2 - 3 * d2 * d2


def eff_ts(delta_ratio: float) -> float:
    """Closed-form efficiency ratio for the triangular kernel.

    Ratios beyond 1 (window wider than the bandwidth) give the endpoint value.
    """
    if delta_ratio < 0:
        raise DomainError(f"delta ratio must be >= 0, got {delta_ratio}")
    d = min(delta_ratio, 1.0)
    a = 1 - 3 * d**2 + 2 * d**3
    b = 1 - 6 * d**2 + 8 * d**3 - 3 * d**4
    return 2 * (3 - 2 * a * a) ** 2 / (5 - 5 * a * b + 2 * a * a)


class CurveSource(str, Enum):
    THEORY = "theory"
    CLOSED_FORM = "closed"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class EffCurve:
    points: tuple[tuple[float, float], ...]
    kernel: Kernel
    source: CurveSource


def eff_curve(k: Kernel, delta_ratios: Sequence[float], source="theory", h: float = 1.0) -> EffCurve:
    """Efficiency ratio over a grid of ``delta / h``.

    ``closed`` is only available for the boxcar and triangular kernels.
    """
    source = CurveSource(source)
    if source is CurveSource.THEORY:
        pts = [(float(d), eff_theory(k, h, d * h)) for d in delta_ratios]
    elif source is CurveSource.CLOSED_FORM:
        fn = {"boxcar": eff_bc, "triangular": eff_ts}.get(k.kind)
        if fn is None:
            raise DomainError(f"no closed form for kernel {k.kind!r}; use source='theory'")
        pts = [(float(d), fn(d)) for d in delta_ratios]
    else:
        raise DomainError("Monte Carlo curves come from monte_carlo.empirical_eff")
    return EffCurve(tuple(pts), k, source)


# --------------------------------------------------------------------------
# monotonicity certificate for the triangular efficiency curve

# n4(x), x = 1 - delta, in ascending powers; the x^3 coefficient is zero
N4_COEFFS = (156.0, -254.0, 105.0, 0.0, 216.0, -972.0, 1458.0, -904.0, 200.0)
N4PPP_BOUND = 2**19


def horner(coeffs_ascending: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs_ascending):
        acc = acc * x + c
    return acc


def _derivative(coeffs: Sequence[float]) -> tuple[float, ...]:
    return tuple(i * c for i, c in enumerate(coeffs))[1:]


class CertificateReport(NamedTuple):
    min_n4: float
    min_n4pp: float
    lipschitz_slack: float
    n4pp_abs_coeff_sum: float
    n4_at_1: float
    n4p_at_1: float
    certified: bool


def monotonicity_certificate(grid_size: int = 2**12 + 1) -> CertificateReport:
    """Grid certificate that n4 > 0 on [0, 1].

    n4'' is evaluated by Horner's rule on a uniform grid; together with the
    bound ``|n4'''| <= 2^19`` the grid minimum minus the Lipschitz slack
    bounds n4'' from below everywhere.  Since ``n4'(1) = -20`` and
    ``n4(1) = 5``, n4'' > 0 forces n4' < 0 and hence n4 > 0.
    """
    if grid_size < 4097:
        raise DomainError(f"grid_size must be >= 4097, got {grid_size}")
    d1 = _derivative(N4_COEFFS)
    d2 = _derivative(d1)
    d3 = _derivative(d2)
    xs = [i / (grid_size - 1) for i in range(grid_size)]
    min_n4 = min(horner(N4_COEFFS, x) for x in xs)
    min_n4pp = min(horner(d2, x) for x in xs)
    slack = N4PPP_BOUND / (2 * (grid_size - 1))
    bound = sum(abs(c) for c in d3)
    n4_1 = horner(N4_COEFFS, 1.0)
    n4p_1 = horner(d1, 1.0)
    certified = (
        bound <= N4PPP_BOUND
        and min_n4pp - slack > 0
        and n4p_1 < 0
        and n4_1 > 0
        and min_n4 > 0
    )
    return CertificateReport(min_n4, min_n4pp, slack, bound, n4_1, n4p_1, certified)


# --------------------------------------------------------------------------
# leading-order bias at fixed bandwidth


def bias_constant(k: Kernel, delta_ratio: float) -> float:
    """``(nu2^2 - 4 T1 T3) / (nu0 nu2 - 4 T1^2)`` with ``T_j`` truncated at
    ``delta_ratio``.  Equals the interior constant for ratios >= 1 and the
    boundary constant at 0."""
    nu0, nu2 = full_moment(k, 0), full_moment(k, 2)
    t1 = truncated_moment(k, delta_ratio, 1)
    t3 = truncated_moment(k, delta_ratio, 3)
    return (nu2**2 - 4 * t1 * t3) / (nu0 * nu2 - 4 * t1**2)


def leading_bias(k: Kernel, h: float, delta: float, mu2_diff: float) -> float:
    """Leading ``O(h^2)`` bias of the threshold effect estimate."""
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    if delta < 0:
        raise DomainError(f"experimental radius must be >= 0, got {delta}")
    return 0.5 * mu2_diff * bias_constant(k, delta / h) * h**2


def bias_balance(k: Kernel, delta: float, h: float) -> float:
    """``4 T1(delta/h) T3(delta/h)``; the bias vanishes where it equals nu2^2."""
    s = delta / h
    return 4 * truncated_moment(k, s, 1) * truncated_moment(k, s, 3)


def bias_free_bandwidth(k: Kernel, delta: float, scan_points: int = 4000) -> float:
    """Smallest ``h > delta`` removing the leading bias term.

    The bracket ``(delta, 1000 delta]`` is scanned on a geometric grid for
    the first sign change, which is then refined by bisection.
    """
    if not delta > 0:
        raise DomainError(f"experimental radius must be > 0, got {delta}")
    target = full_moment(k, 2) ** 2

    def g(h):
        return bias_balance(k, delta, h) - target

    hs = delta * np.geomspace(1.0, 1e3, scan_points)
    prev_h, prev_g = hs[0], g(hs[0])
    for h in hs[1:]:
        cur = g(h)
        if prev_g < 0 <= cur:
            if cur == 0:
                return float(h)
            return float(optimize.bisect(g, prev_h, h, xtol=1e-15 * delta, rtol=1e-12))
        prev_h, prev_g = h, cur
    raise BracketError(f"no bias-free bandwidth found in ({delta}, {1e3 * delta}]")
