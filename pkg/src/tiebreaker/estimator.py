"""Treatment assignment and the kernel-weighted local linear estimator.

The regression is ``Y ~ 1 + x + Z + x Z`` with ``Z in {-1, +1}`` and weights
``K((x - t) / h)``.  It is solved in coordinates centred at ``t`` and mapped
back, so ``tau_thresh = 2 beta3 + 2 beta4 t`` equals twice the centred
``Z`` coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularFitError
from .io import read_columns, write_rows
from .kernels import Kernel, eval_kernel

COLUMN_NAMES = ("intercept", "x", "z", "x*z")
MAX_CONDITION = 1e12


class Strategy(str, Enum):
    INDEPENDENT_BERNOULLI = "independent"
    STRATIFIED_PAIRS = "stratified"


@dataclass(frozen=True)
class AssignmentRule:
    """Three-level tie-breaker rule.

    Points with ``|x - t| <= delta`` are randomised; above the window they
    are treated, below it they are not.  ``delta = 0`` is the sharp RDD.
    """

    threshold: float = 0.0
    delta: float = 0.0
    p: float = 0.5
    strategy: Strategy = Strategy.STRATIFIED_PAIRS

    def __post_init__(self):
        if not self.delta >= 0:
            raise DomainError(f"delta must be >= 0, got {self.delta}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        object.__setattr__(self, "strategy", Strategy(self.strategy))


def assign(x, rule: AssignmentRule, seed=None) -> np.ndarray:
    """Draw treatment labels in ``{-1, +1}`` for running-variable values ``x``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DomainError("x must be non-empty")
    xc = x - rule.threshold
    if rule.delta == 0:
        return np.where(xc > 0, 1, -1).astype(np.int8)

    z = np.where(xc > 0, 1, -1).astype(np.int8)
    window = np.flatnonzero(np.abs(xc) <= rule.delta)
    if window.size == 0:
        return z
    rng = np.random.default_rng(seed)
    if rule.strategy is Strategy.INDEPENDENT_BERNOULLI:
        z[window] = np.where(rng.random(window.size) < rule.p, 1, -1)
        return z

    # stable sort keeps tied x values in their original row order
    order = window[np.argsort(xc[window], kind="stable")]
    n_pairs = order.size // 2
    first = order[0 : 2 * n_pairs : 2]
    second = order[1 : 2 * n_pairs : 2]
    flip = rng.random(n_pairs) < 0.5
    z[first] = np.where(flip, 1, -1)
    z[second] = -z[first]
    if order.size % 2:
        z[order[-1]] = 1 if rng.random() < rule.p else -1
    return z


@dataclass(frozen=True)
class Dataset:
    """One study: running variable, labels and (optionally) responses."""

    x: np.ndarray
    z: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        if x.size < 4:
            raise DomainError(f"a dataset needs at least 4 points, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise DomainError("x contains non-finite values")
        object.__setattr__(self, "x", x)
        if self.z is not None:
            z = np.asarray(self.z).ravel()
            if z.shape != x.shape:
                raise DomainError("z and x differ in length")
            if not np.all((z == 1) | (z == -1)):
                raise DomainError("z must contain only -1 and +1")
            object.__setattr__(self, "z", z.astype(np.int8))
        if self.y is not None:
            y = np.asarray(self.y, dtype=float).ravel()
            if y.shape != x.shape:
                raise DomainError("y and x differ in length")
            object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    def with_assignment(self, rule: AssignmentRule, seed=None) -> "Dataset":
        return Dataset(self.x, assign(self.x, rule, seed), self.y)

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        cols = read_columns(path, ["x"], ["z", "y"])
        return cls(np.array(cols["x"]), cols.get("z"), cols.get("y"))

    def to_csv(self, path, comments=None) -> None:
        header = ["x"]
        cols = [self.x.tolist()]
        if self.z is not None:
            header.append("z")
            cols.append([int(v) for v in self.z])
        if self.y is not None:
            header.append("y")
            cols.append(self.y.tolist())
        write_rows(path, header, zip(*cols), comments)


@dataclass(frozen=True)
class FitResult:
    beta: np.ndarray
    tau_thresh: float
    var_beta3_over_sigma2: float
    n_eff: int


@dataclass(frozen=True)
class _Solved:
    coef_c: np.ndarray  # centred-coordinate coefficients
    hat: np.ndarray  # rows of (X'WX)^{-1} X' sqrt(W), shape (n_eff, 4)
    w: np.ndarray
    keep: np.ndarray


def _require_z(data: Dataset):
    if data.z is None:
        raise DomainError("dataset has no treatment labels; assign them first")


def _deficient_columns(a: np.ndarray) -> tuple[str, ...]:
    scale = np.linalg.norm(a, axis=0)
    scale[scale == 0] = 1.0
    _, r, piv = scipy.linalg.qr(a / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(a.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0)
    rank = int(np.sum(diag > max(tol, diag[0] / MAX_CONDITION if diag.size else 0.0)))
    return tuple(COLUMN_NAMES[i] for i in sorted(piv[rank:]))


def _solve(data: Dataset, t: float, h: float, k: Kernel) -> _Solved:
    _require_z(data)
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    xc = data.x - t
    w_all = eval_kernel(k, xc / h)
    keep = np.flatnonzero(w_all > 0)
    if keep.size < 4:
        raise SingularFitError(
            f"only {keep.size} points have positive kernel weight; need at least 4",
            COLUMN_NAMES,
        )
    xk, zk, w = xc[keep], data.z[keep].astype(float), w_all[keep]
    sw = np.sqrt(w)
    a = np.column_stack([np.ones_like(xk), xk, zk, xk * zk]) * sw[:, None]

    scale = np.linalg.norm(a, axis=0)
    if np.any(scale == 0):
        raise SingularFitError("weighted design has an all-zero column", _deficient_columns(a))
    u, s, vt = np.linalg.svd(a / scale, full_matrices=False)
    if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
        cols = _deficient_columns(a)
        raise SingularFitError(
            f"weighted design is rank deficient (deficient columns: {', '.join(cols)})", cols
        )
    # hat = A (A'A)^{-1} expressed through the SVD of the equilibrated design
    hat = (u / s) @ vt / scale
    coef_c = hat.T @ (sw * data.y[keep]) if data.y is not None else None
    return _Solved(coef_c, hat, w, keep)


def fit_local_linear(data: Dataset, t: float, h: float, k: Kernel) -> FitResult:
    """Kernel-weighted least squares fit of the four-parameter model at ``t``.

    Returns
    -------
    FitResult
        ``beta`` in the original x coordinates, ``tau_thresh``, the sandwich
        factor for the centred ``Z`` coefficient and the number of points with
        positive weight.
    """
    if data.y is None:
        raise DomainError("dataset has no responses")
    sol = _solve(data, t, h, k)
    b1, b2, b3, b4 = sol.coef_c
    beta = np.array([b1 - b2 * t, b2, b3 - b4 * t, b4])
    return FitResult(
        beta=beta,
        tau_thresh=float(2 * beta[2] + 2 * beta[3] * t),
        var_beta3_over_sigma2=_sandwich(sol),
        n_eff=int(sol.keep.size),
    )


def _sandwich(sol: _Solved) -> float:
    col = sol.hat[:, 2]
    return float(np.sum(sol.w * col * col))


def sandwich_variance(data: Dataset, t: float, h: float, k: Kernel) -> float:
    """``var(beta3_hat | x, z) / sigma^2`` for homoscedastic errors.

    The ``Z`` coefficient is taken in coordinates centred at ``t``, so
    the result equals ``var(tau_hat) / (4 sigma^2)`` for any ``t``.
    """
    return _sandwich(_solve(data, t, h, k))


def smoother_weights(data: Dataset, t: float, h: float, k: Kernel) -> np.ndarray:
    """Weights ``l`` with ``tau_hat = l @ y`` (zero outside the kernel support)."""
    sol = _solve(data, t, h, k)
    out = np.zeros(len(data))
    out[sol.keep] = 2 * sol.hat[:, 2] * np.sqrt(sol.w)
    return out
