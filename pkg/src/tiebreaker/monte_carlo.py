"""Monte Carlo evaluation of tie-breaker designs.

Two workflows live here: the empirical efficiency ratio on a fixed set of
running-variable values (only the labels are random), and simulations from a
polynomial data-generating process that check the asymptotic bias, variance
and MSE-ratio formulas.

Every replication draws from its own substream
``SeedSequence(seed, spawn_key=(i, rep))``, so results do not depend on the
order or thread in which replications run.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .asymptotics import Design, ProblemPrimitives, h_opt, relative_amse
from .errors import DomainError, SingularFitError
from .estimator import (
    AssignmentRule,
    Dataset,
    Strategy,
    assign,
    fit_local_linear,
    sandwich_variance,
    smoother_weights,
)
from .finite_bandwidth import leading_bias
from .io import read_columns, write_rows
from .kernels import Kernel, kernel_constants


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# empirical efficiency ratio


@dataclass(frozen=True)
class EffSummary:
    delta: float
    reps: int
    mean: float
    sd: float
    q05: float
    q50: float
    q95: float

    @classmethod
    def from_values(cls, delta: float, values) -> "EffSummary":
        v = np.asarray(values, dtype=float)
        q05, q50, q95 = np.quantile(v, [0.05, 0.5, 0.95])
        sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        return cls(float(delta), int(v.size), float(v.mean()), sd, float(q05), float(q50), float(q95))


def empirical_eff_values(
    x,
    deltas: Sequence[float],
    h: float,
    k: Kernel,
    reps: int,
    seed: int,
    strategy=Strategy.STRATIFIED_PAIRS,
    workers: int = 1,
) -> np.ndarray:
    """Efficiency ratios, one row per ``delta`` and one column per rep.

    ``x`` must already be centred so that the threshold is 0.
    """
    if not h > 0:
        raise DomainError(f"bandwidth must be > 0, got {h}")
    if reps < 2:
        raise DomainError(f"reps must be >= 2, got {reps}")
    x = np.asarray(x, dtype=float)
    deltas = [float(d) for d in deltas]
    if any(d < 0 for d in deltas):
        raise DomainError("deltas must be >= 0")

    z_rdd = assign(x, AssignmentRule(0.0, 0.0))
    try:
        var_rdd = sandwich_variance(Dataset(x, z_rdd), 0.0, h, k)
    except SingularFitError as exc:
        raise SingularFitError(f"RDD reference fit failed: {exc}", exc.columns) from exc

    def one(job):
        i, rep = job
        d = deltas[i]
        if d == 0:
            return 1.0
        rule = AssignmentRule(0.0, d, 0.5, strategy)
        z = assign(x, rule, substream(seed, i, rep))
        try:
            return var_rdd / sandwich_variance(Dataset(x, z), 0.0, h, k)
        except SingularFitError as exc:
            raise SingularFitError(f"delta={d}, rep={rep}: {exc}", exc.columns) from exc

    jobs = [(i, r) for i in range(len(deltas)) for r in range(reps)]
    flat = _map(one, jobs, workers)
    return np.array(flat, dtype=float).reshape(len(deltas), reps)


def empirical_eff(
    x,
    deltas: Sequence[float],
    h: float,
    k: Kernel,
    reps: int,
    seed: int,
    strategy=Strategy.STRATIFIED_PAIRS,
    workers: int = 1,
) -> list[EffSummary]:
    """Summaries of the Monte Carlo efficiency ratio at each ``delta``."""
    vals = empirical_eff_values(x, deltas, h, k, reps, seed, strategy, workers)
    return [EffSummary.from_values(d, row) for d, row in zip(deltas, vals)]


def write_eff_long(path, deltas, values, comments=None) -> None:
    rows = [(float(d), r, float(v)) for d, row in zip(deltas, values) for r, v in enumerate(row)]
    write_rows(path, ["delta", "rep", "eff"], rows, comments)


def write_eff_summary(path, summaries: Sequence[EffSummary], comments=None) -> None:
    rows = [(s.delta, s.mean, s.sd, s.q05, s.q50, s.q95) for s in summaries]
    write_rows(path, ["delta", "mean", "sd", "q05", "q50", "q95"], rows, comments)


# --------------------------------------------------------------------------
# data-generating processes


class XSamplerKind(str, Enum):
    UNIFORM_GRID = "grid"
    UNIFORM_RANDOM = "uniform"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class XSampler:
    """How running-variable values are produced.

    ``grid`` gives ``x_i = (2i - n - 1) / n``; ``uniform`` draws from
    ``U(a, b)``; ``tabulated`` resamples ``values`` with replacement.
    """

    kind: XSamplerKind = XSamplerKind.UNIFORM_GRID
    a: float = -1.0
    b: float = 1.0
    values: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", XSamplerKind(self.kind))
        if self.kind is XSamplerKind.UNIFORM_RANDOM and not self.b > self.a:
            raise DomainError(f"need a < b, got a={self.a}, b={self.b}")
        if self.kind is XSamplerKind.TABULATED:
            if not self.values:
                raise DomainError("tabulated sampler needs values")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def from_csv(cls, path) -> "XSampler":
        return cls(XSamplerKind.TABULATED, values=tuple(read_columns(path, ["x"])["x"]))

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is XSamplerKind.UNIFORM_GRID:
            return (2 * np.arange(1, n + 1) - n - 1) / n
        if self.kind is XSamplerKind.UNIFORM_RANDOM:
            return rng.uniform(self.a, self.b, n)
        return rng.choice(np.asarray(self.values), size=n, replace=True)

    def density(self, t: float) -> float:
        """Density of x at ``t``; needed for the asymptotic predictions."""
        lo, hi = (-1.0, 1.0) if self.kind is XSamplerKind.UNIFORM_GRID else (self.a, self.b)
        if self.kind is XSamplerKind.TABULATED:
            raise DomainError("tabulated samplers have no closed-form density")
        if not lo < t < hi:
            raise DomainError(f"threshold {t} is not interior to [{lo}, {hi}]")
        return 1.0 / (hi - lo)


@dataclass(frozen=True)
class DgpSpec:
    """Polynomial mean functions in ``x - t`` (ascending, degree <= 3) with
    Gaussian noise."""

    mu_plus: tuple = (0.0,)
    mu_minus: tuple = (0.0,)
    sigma_plus: float = 1.0
    sigma_minus: float = 1.0
    x_sampler: XSampler = XSampler()
    t: float = 0.0

    def __post_init__(self):
        for name in ("mu_plus", "mu_minus"):
            c = tuple(float(v) for v in getattr(self, name))
            if not 1 <= len(c) <= 4:
                raise DomainError(f"{name} needs 1 to 4 coefficients, got {len(c)}")
            object.__setattr__(self, name, c)
        if self.sigma_plus < 0 or self.sigma_minus < 0:
            raise DomainError("noise standard deviations must be >= 0")

    def mean(self, x, z) -> np.ndarray:
        u = np.asarray(x, dtype=float) - self.t
        mp = np.polynomial.polynomial.polyval(u, self.mu_plus)
        mm = np.polynomial.polynomial.polyval(u, self.mu_minus)
        return np.where(np.asarray(z) > 0, mp, mm)

    def sd(self, z) -> np.ndarray:
        return np.where(np.asarray(z) > 0, self.sigma_plus, self.sigma_minus)

    @property
    def tau(self) -> float:
        return self.mu_plus[0] - self.mu_minus[0]

    def second_derivative(self, coeffs) -> float:
        return 2 * coeffs[2] if len(coeffs) > 2 else 0.0

    def primitives(self) -> ProblemPrimitives:
        return ProblemPrimitives(
            f_t=self.x_sampler.density(self.t),
            sigma2_plus=self.sigma_plus**2,
            sigma2_minus=self.sigma_minus**2,
            mu2_plus=self.second_derivative(self.mu_plus),
            mu2_minus=self.second_derivative(self.mu_minus),
        )


def simulate_dgp(spec: DgpSpec, n: int, rule: AssignmentRule, seed) -> Dataset:
    """Draw ``x``, assign ``Z`` and generate ``Y = mu_Z(x) + sigma_Z eps``."""
    if n < 4:
        raise DomainError(f"n must be >= 4, got {n}")
    rng = np.random.default_rng(seed)
    x = spec.x_sampler.draw(n, rng)
    z = assign(x, rule, rng)
    y = spec.mean(x, z) + spec.sd(z) * rng.standard_normal(n)
    return Dataset(x, z, y)


# --------------------------------------------------------------------------
# validation of the asymptotic formulas


@dataclass(frozen=True)
class BiasVarianceReport:
    emp_bias: float
    emp_var: float
    pred_bias: float
    pred_var: float
    bias_se: float
    reps: int

    @property
    def bias_z(self) -> float:
        return (self.emp_bias - self.pred_bias) / self.bias_se if self.bias_se > 0 else math.inf

    @property
    def var_ratio(self) -> float:
        return self.emp_var / self.pred_var


def validate_bias_variance(
    spec: DgpSpec,
    rule: AssignmentRule,
    h: float,
    k: Kernel,
    reps: int,
    seed: int,
    n: int = 100_000,
    workers: int = 1,
) -> BiasVarianceReport:
    """Empirical bias and variance of ``tau_hat`` against the leading terms.

    The predicted bias uses the second derivatives of the mean polynomials;
    when they coincide it is zero.
    """
    if reps < 200:
        raise DomainError(f"reps must be >= 200, got {reps}")
    if not 0 < h < rule.delta:
        raise DomainError(f"need 0 < h < delta, got h={h}, delta={rule.delta}")
    if rule.threshold != spec.t:
        raise DomainError("rule threshold and DGP threshold differ")

    def one(rep):
        data = simulate_dgp(spec, n, rule, substream(seed, 0, rep))
        return fit_local_linear(data, spec.t, h, k).tau_thresh

    taus = np.array(_map(one, range(reps), workers))
    err = taus - spec.tau

    d = spec.second_derivative(spec.mu_plus) - spec.second_derivative(spec.mu_minus)
    pred_bias = leading_bias(k, h, rule.delta, d)
    f_t = spec.x_sampler.density(spec.t)
    p = rule.p
    s2 = spec.sigma_plus**2 / (2 * p) + spec.sigma_minus**2 / (2 * (1 - p))
    pred_var = kernel_constants(k).c2 * s2 / (n * h * f_t)
    return BiasVarianceReport(
        emp_bias=float(err.mean()),
        emp_var=float(err.var(ddof=1)),
        pred_bias=pred_bias,
        pred_var=pred_var,
        bias_se=float(err.std(ddof=1) / math.sqrt(reps)),
        reps=reps,
    )


@dataclass(frozen=True)
class MseRatioReport:
    ratio: float
    predicted: float
    ratio_simulated: float
    mse_rdd: float
    mse_tbd: float
    h_rdd: float
    h_tbd: float
    n_rdd: int
    n_tbd: int


def validate_mse_ratio(
    spec: DgpSpec,
    theta: float,
    k: Kernel,
    n: int,
    reps: int,
    seed: int,
    delta: float = 0.5,
    strategy=Strategy.INDEPENDENT_BERNOULLI,
    workers: int = 1,
) -> MseRatioReport:
    """MSE of the RDD with ``n`` points over that of the tie-breaker with
    ``theta n`` points, both at their closed-form optimal bandwidths.

    ``ratio`` averages the exact conditional MSE given ``(x, z)`` (squared
    conditional bias plus conditional variance) over replications, which
    removes the response noise from the Monte Carlo error.
    ``ratio_simulated`` uses simulated responses instead.
    """
    if not theta > 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    if reps < 2:
        raise DomainError(f"reps must be >= 2, got {reps}")
    prims = spec.primitives()
    n_tbd = int(round(theta * n))
    h_r = h_opt(Design.RDD, n, prims, k)
    h_t = h_opt(Design.TBD, n_tbd, prims, k)
    if h_t >= delta:
        raise DomainError(f"tie-breaker bandwidth {h_t:.4g} is not below delta={delta}")
    rdd = AssignmentRule(spec.t, 0.0)
    tbd = AssignmentRule(spec.t, delta, 0.5, strategy)

    def one(job):
        design, rep = job
        rule, m, h = (rdd, n, h_r) if design == 0 else (tbd, n_tbd, h_t)
        data = simulate_dgp(spec, m, rule, substream(seed, design, rep))
        lw = smoother_weights(data, spec.t, h, k)
        mu = spec.mean(data.x, data.z)
        cond_bias = lw @ mu - spec.tau
        cond_var = np.sum(lw**2 * spec.sd(data.z) ** 2)
        sim_err = lw @ data.y - spec.tau
        return cond_bias**2 + cond_var, sim_err**2

    out = np.array(_map(one, [(d, r) for d in (0, 1) for r in range(reps)], workers))
    exact = out[:, 0].reshape(2, reps).mean(axis=1)
    sim = out[:, 1].reshape(2, reps).mean(axis=1)
    return MseRatioReport(
        ratio=float(exact[0] / exact[1]),
        predicted=relative_amse(k, theta),
        ratio_simulated=float(sim[0] / sim[1]),
        mse_rdd=float(exact[0]),
        mse_tbd=float(exact[1]),
        h_rdd=h_r,
        h_tbd=h_t,
        n_rdd=n,
        n_tbd=n_tbd,
    )
