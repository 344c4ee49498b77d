"""Symmetric kernels on [-1, 1] and their moments.

Every kernel is described on the half line ``[0, 1]`` (the other half
follows by symmetry).  The polynomial kernels and tabulated kernels are
stored as piecewise polynomials, so all moments ``int u^j K(u)^s du`` with
``s in {1, 2}`` are obtained from exact antiderivatives.  The cosine kernel
has its own closed form.  :func:`adaptive_simpson` is kept as the
independent check (``method="quadrature"``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, KernelValidationError
from .io import read_columns
from .quadrature import adaptive_simpson

MAX_MOMENT = 4

_POLY_KERNELS = {
    "boxcar": (0.5,),
    "triangular": (1.0, -1.0),
    "epanechnikov": (0.75, 0.0, -0.75),
    "quartic": tuple(15 / 16 * c for c in (1, 0, -2, 0, 1)),
    "triweight": tuple(35 / 32 * c for c in (1, 0, -3, 0, 3, 0, -1)),
    "tricube": tuple(70 / 81 * c for c in (1, 0, 0, -3, 0, 0, 3, 0, 0, -1)),
}
_COSINE_SCALE = math.pi / 4
_COSINE_FREQ = math.pi / 2

KERNEL_NAMES = (
    "boxcar",
    "triangular",
    "epanechnikov",
    "quartic",
    "triweight",
    "tricube",
    "cosine",
)


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel supported on [-1, 1].

    ``kind`` is one of :data:`KERNEL_NAMES` or ``"tabulated"``.  A tabulated
    kernel carries ``grid``: ``(u, K(u))`` pairs on ``[0, 1]``, linearly
    interpolated and mirrored for negative ``u``.
    """

    kind: str
    grid: tuple[tuple[float, float], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind == "tabulated":
            object.__setattr__(self, "grid", _validate_grid(self.grid))
        elif kind in KERNEL_NAMES:
            if self.grid is not None:
                raise KernelValidationError(f"named kernel {kind!r} takes no grid")
        else:
            raise KernelValidationError(
                f"unknown kernel {self.kind!r}; valid names: {', '.join(KERNEL_NAMES)}"
            )

    @property
    def name(self) -> str:
        return self.kind

    def __call__(self, u):
        return eval_kernel(self, u)


def _validate_grid(grid):
    if grid is None:
        raise KernelValidationError("tabulated kernel requires a grid")
    pts = tuple((float(u), float(k)) for u, k in grid)
    if len(pts) < 8:
        raise KernelValidationError(f"tabulated grid needs >= 8 points, got {len(pts)}")
    us = np.array([p[0] for p in pts])
    ks = np.array([p[1] for p in pts])
    if not (np.all(np.isfinite(us)) and np.all(np.isfinite(ks))):
        raise KernelValidationError("tabulated grid contains non-finite values")
    if np.any(np.diff(us) <= 0):
        raise KernelValidationError("tabulated grid u values must be strictly increasing")
    if us[0] != 0.0 or us[-1] != 1.0:
        raise KernelValidationError("tabulated grid must start at u=0 and end at u=1")
    if np.any(ks < 0):
        raise KernelValidationError("tabulated kernel values must be non-negative")
    if not np.any(ks > 0):
        raise KernelValidationError("tabulated kernel must be positive somewhere")
    return pts


def get_kernel(name: str | Kernel) -> Kernel:
    if isinstance(name, Kernel):
        return name
    return Kernel(str(name))


def tabulated_kernel(u, k) -> Kernel:
    return Kernel("tabulated", tuple(zip(u, k)))


def load_kernel_csv(path) -> Kernel:
    """Load a tabulated kernel from a CSV with header ``u,k``."""
    cols = read_columns(path, ["u", "k"])
    return tabulated_kernel(cols["u"], cols["k"])


def eval_kernel(k: Kernel, u):
    """Evaluate ``K(u)``; zero outside [-1, 1].  Accepts scalars or arrays."""
    a = np.abs(np.asarray(u, dtype=float))
    inside = a <= 1.0
    if k.kind == "tabulated":
        gu, gk = _grid_arrays(k)
        val = np.interp(a, gu, gk)
    elif k.kind == "cosine":
        val = _COSINE_SCALE * np.cos(_COSINE_FREQ * a)
    elif k.kind == "triangular":
        val = 1.0 - a
    elif k.kind == "boxcar":
        val = np.full_like(a, 0.5)
    elif k.kind == "tricube":
        val = 70 / 81 * (1.0 - a**3) ** 3
    else:
        val = np.polynomial.polynomial.polyval(a, _POLY_KERNELS[k.kind])
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_peak(k: Kernel) -> float:
    """Largest value of the kernel (at u = 0 for every named kernel)."""
    if k.kind == "tabulated":
        return float(max(v for _, v in k.grid))
    return float(eval_kernel(k, 0.0))


# --------------------------------------------------------------------------
# piecewise representation and exact integration


@lru_cache(maxsize=None)
def _grid_arrays(k: Kernel):
    gu = np.array([p[0] for p in k.grid])
    gk = np.array([p[1] for p in k.grid])
    return gu, gk


@lru_cache(maxsize=None)
def _pieces(k: Kernel):
    """``(lo, hi, Polynomial)`` pieces of K on [0, 1]; None for cosine."""
    if k.kind == "cosine":
        return None
    if k.kind == "tabulated":
        gu, gk = _grid_arrays(k)
        pieces = []
        for u0, u1, k0, k1 in zip(gu[:-1], gu[1:], gk[:-1], gk[1:]):
            slope = (k1 - k0) / (u1 - u0)
            pieces.append((u0, u1, Polynomial([k0 - slope * u0, slope])))
        return tuple(pieces)
    return ((0.0, 1.0, Polynomial(_POLY_KERNELS[k.kind])),)


@lru_cache(maxsize=None)
def _antiderivatives(k: Kernel, j: int, squared: bool):
    out = []
    for lo, hi, p in _pieces(k):
        integrand = (p * p if squared else p) * Polynomial([0.0] * j + [1.0])
        out.append((lo, hi, integrand.integ()))
    return tuple(out)


def _cos_power_integral(j: int, w: float, a: float, b: float) -> float:
    """``int_a^b u^j cos(w u) du`` from the closed-form antiderivative."""

    def anti(u):
        total = 0.0
        for m in range(j + 1):
            coef = math.factorial(j) / math.factorial(j - m)
            total += coef * u ** (j - m) * math.sin(w * u + m * math.pi / 2) / w ** (m + 1)
        return total

    return anti(b) - anti(a)


def _exact_partial(k: Kernel, a: float, b: float, j: int, squared: bool) -> float:
    if k.kind == "cosine":
        if squared:
            c2 = _COSINE_SCALE**2 / 2.0
            poly = (b ** (j + 1) - a ** (j + 1)) / (j + 1)
            return c2 * (poly + _cos_power_integral(j, 2 * _COSINE_FREQ, a, b))
        return _COSINE_SCALE * _cos_power_integral(j, _COSINE_FREQ, a, b)
    total = 0.0
    for lo, hi, anti in _antiderivatives(k, j, squared):
        lo_c, hi_c = max(lo, a), min(hi, b)
        if hi_c > lo_c:
            total += anti(hi_c) - anti(lo_c)
    return float(total)


def _quad_partial(k: Kernel, a: float, b: float, j: int, squared: bool) -> float:
    power = 2 if squared else 1

    def integrand(u):
        return u**j * eval_kernel(k, u) ** power

    # split at interpolation nodes so every panel is smooth
    if k.kind == "tabulated":
        nodes = [u for u in _grid_arrays(k)[0] if a < u < b]
    else:
        nodes = []
    edges = [a, *nodes, b]
    return sum(adaptive_simpson(integrand, lo, hi, tol=1e-10 / len(edges)) for lo, hi in zip(edges[:-1], edges[1:]))


def _check_order(j: int):
    if not (0 <= int(j) <= MAX_MOMENT) or int(j) != j:
        raise DomainError(f"moment order must be an integer in [0, {MAX_MOMENT}], got {j}")
    return int(j)


def partial_moment(
    k: Kernel,
    a: float,
    b: float,
    j: int,
    squared: bool = False,
    method: str = "exact",
) -> float:
    """``int_a^b u^j K(u)^s du`` for ``0 <= a <= b`` (``b`` may be inf)."""
    j = _check_order(j)
    if a < 0 or b < a:
        raise DomainError(f"need 0 <= a <= b, got a={a}, b={b}")
    b = min(b, 1.0)
    if a >= b:
        return 0.0
    if method == "exact":
        return _exact_partial(k, float(a), float(b), j, bool(squared))
    if method == "quadrature":
        return _quad_partial(k, float(a), float(b), j, bool(squared))
    raise ValueError(f"unknown method {method!r}")


def half_moment(k: Kernel, j: int, squared: bool = False, method: str = "exact") -> float:
    """Half-line moment ``int_0^inf u^j K(u)^s du``."""
    return partial_moment(k, 0.0, 1.0, j, squared, method)


def full_moment(k: Kernel, j: int, squared: bool = False, method: str = "exact") -> float:
    """Full-line moment; odd orders vanish by symmetry."""
    j = _check_order(j)
    if j % 2:
        return 0.0
    return 2.0 * half_moment(k, j, squared, method)


def truncated_moment(k: Kernel, a: float, j: int, method: str = "exact") -> float:
    """``int_a^inf u^j K(u) du`` for ``a >= 0``."""
    if a < 0:
        raise DomainError(f"truncation point must be >= 0, got {a}")
    return partial_moment(k, a, math.inf, j, False, method)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSet:
    nu: tuple[float, ...]
    pi: tuple[float, ...]
    nu_half: tuple[float, ...]
    pi_half: tuple[float, ...]
    c1: float
    c2: float
    c1_tilde: float
    c2_tilde: float


@lru_cache(maxsize=None)
def kernel_constants(k: Kernel) -> MomentSet:
    """All kernel moments plus the interior (c1, c2) and boundary
    (c1_tilde, c2_tilde) bias and variance constants."""
    nu = tuple(full_moment(k, j) for j in range(5))
    pi = tuple(full_moment(k, j, squared=True) for j in range(3))
    nh = tuple(half_moment(k, j) for j in range(5))
    ph = tuple(half_moment(k, j, squared=True) for j in range(3))

    det = nu[0] * nu[2] - nu[1] ** 2
    c1 = 0.25 * ((nu[2] ** 2 - nu[1] * nu[3]) / det) ** 2
    c2 = (2 * nu[2] ** 2 * pi[0] - 4 * nu[1] * nu[2] * pi[1] + 2 * nu[1] ** 2 * pi[2]) / det**2

    det_h = nh[0] * nh[2] - nh[1] ** 2
    c1t = 0.25 * ((nh[2] ** 2 - nh[1] * nh[3]) / det_h) ** 2
    c2t = (nh[2] ** 2 * ph[0] - 2 * nh[1] * nh[2] * ph[1] + nh[1] ** 2 * ph[2]) / det_h**2
    return MomentSet(nu, pi, nh, ph, c1, c2, c1t, c2t)
