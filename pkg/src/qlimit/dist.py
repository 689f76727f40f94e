"""Exact q-binomial (first kind), q-trinomial, q-multinomial, Heine and
multiple Heine distributions.

The q-multinomial is handled through its conditional chain: X_1 is
q-binomial(n, theta_1) and X_j given the earlier counts is
q-binomial(n - s_{j-1}, theta_j), where s_{j-1} is the running total.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ._backend import kernels
from .errors import QDomainError
from .qcalc import (
    QContext,
    as_context,
    log_qfactorial_table,
    q_binomial_coeff_log,
    q_exponential,
    q_factorial_log,
    q_multinomial_coeff_log,
    q_number,
)

HEINE_TAIL_TOL = 1e-12


def _positive(name, value):
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise QDomainError(f"{name} must be a positive finite real, got {value!r}")
    return value


def _count(name, value):
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise QDomainError(f"{name} must be a nonnegative integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class QBinomialParams:
    n: int
    theta: float
    ctx: QContext

    def __post_init__(self):
        object.__setattr__(self, "n", _count("n", self.n))
        object.__setattr__(self, "theta", _positive("theta", self.theta))
        object.__setattr__(self, "ctx", as_context(self.ctx))


@dataclass(frozen=True)
class QMultinomialParams:
    """n trials, k = len(thetas) success kinds.

    Any theta_j > 0 is accepted; the limit regime uses theta_j = q^{-alpha_j n}.
    """

    n: int
    thetas: tuple[float, ...]
    ctx: QContext

    def __post_init__(self):
        object.__setattr__(self, "n", _count("n", self.n))
        thetas = tuple(_positive("theta", t) for t in self.thetas)
        if not thetas:
            raise QDomainError("at least one theta is required (k >= 1)")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "ctx", as_context(self.ctx))

    @property
    def k(self) -> int:
        return len(self.thetas)

    @classmethod
    def from_alphas(cls, n: int, alphas: Sequence[float], ctx: QContext | float) -> "QMultinomialParams":
        """theta_j = q^{-alpha_j n}, the regime of the local limit theorems."""
        ctx = as_context(ctx)
        return cls(n, tuple(math.exp(-a * n * ctx.log_q) for a in alphas), ctx)

    def marginal(self) -> QBinomialParams:
        return QBinomialParams(self.n, self.thetas[0], self.ctx)


@dataclass(frozen=True)
class HeineParams:
    lam: float
    ctx: QContext

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive("lambda", self.lam))
        object.__setattr__(self, "ctx", as_context(self.ctx))


@dataclass(frozen=True)
class MultipleHeineParams:
    lambdas: tuple[float, ...]
    ctx: QContext

    def __post_init__(self):
        lambdas = tuple(_positive("lambda", v) for v in self.lambdas)
        if not lambdas:
            raise QDomainError("at least one lambda is required")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "ctx", as_context(self.ctx))

    @classmethod
    def from_thetas(cls, thetas: Sequence[float], ctx: QContext | float) -> "MultipleHeineParams":
        """lambda_j = theta_j / (1 - q): the n -> infinity limit at fixed thetas."""
        ctx = as_context(ctx)
        return cls(tuple(t / (1.0 - ctx.q) for t in thetas), ctx)

    def component(self, j: int) -> HeineParams:
        return HeineParams(self.lambdas[j], self.ctx)


@dataclass(frozen=True)
class MomentPair:
    """Mean and variance of a (possibly conditional) deformed variable [X]_{1/q}."""

    mean: float
    variance: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def _outcome(xs, k=None) -> tuple[int, ...]:
    xs = tuple(_count("x", x) for x in xs)
    if k is not None and len(xs) != k:
        raise QDomainError(f"outcome has {len(xs)} coordinates, expected {k}")
    return xs


# ---------------------------------------------------------------- q-binomial

def _log_geom_denominator(log_theta: float, m: int, ctx: QContext) -> float:
    # log prod_{i=1}^{m} (1 + theta q^{i-1})
    return float(kernels.log_geom_denominators(log_theta, ctx.q, m)[m])


def qbinomial_logpmf(params: QBinomialParams, x: int) -> float:
    n, ctx = params.n, params.ctx
    x = _count("x", x)
    if x > n:
        raise QDomainError(f"x={x} exceeds n={n}")
    log_theta = math.log(params.theta)
    return (
        q_binomial_coeff_log(n, x, ctx)
        + 0.5 * x * (x - 1) * ctx.log_q
        + x * log_theta
        - _log_geom_denominator(log_theta, n, ctx)
    )


def qbinomial_pmf(params: QBinomialParams, x: int) -> float:
    return math.exp(qbinomial_logpmf(params, x))


def qbinomial_pmf_all(params: QBinomialParams) -> np.ndarray:
    """pmf over the full support 0..n."""
    grid = np.arange(params.n + 1, dtype=np.int64)[:, None]
    return np.exp(qmultinomial_logpmf_grid(QMultinomialParams(params.n, (params.theta,), params.ctx), grid))


# ------------------------------------------------------------- q-multinomial

def _qmultinomial_tables(params: QMultinomialParams):
    ctx, n = params.ctx, params.n
    log_thetas = np.log(np.asarray(params.thetas, dtype=float))
    lfact = log_qfactorial_table(n, ctx)
    denoms = np.vstack([kernels.log_geom_denominators(lt, ctx.q, n) for lt in log_thetas])
    return log_thetas, lfact, denoms


def qmultinomial_logpmf(params: QMultinomialParams, outcome: Sequence[int]) -> float:
    """Joint log pmf, written out factor by factor."""
    xs = _outcome(outcome, params.k)
    n, ctx = params.n, params.ctx
    if sum(xs) > n:
        raise QDomainError(f"counts sum to {sum(xs)}, more than n={n}")
    acc = q_multinomial_coeff_log(n, xs, ctx)
    s = 0
    for x, theta in zip(xs, params.thetas):
        log_theta = math.log(theta)
        acc += x * log_theta + 0.5 * x * (x - 1) * ctx.log_q
        acc -= _log_geom_denominator(log_theta, n - s, ctx)
        s += x
    return acc


def qmultinomial_pmf(params: QMultinomialParams, outcome: Sequence[int]) -> float:
    return math.exp(qmultinomial_logpmf(params, outcome))


def qtrinomial_pmf(n: int, theta1: float, theta2: float, x1: int, x2: int, ctx: QContext | float) -> float:
    return qmultinomial_pmf(QMultinomialParams(n, (theta1, theta2), ctx), (x1, x2))


def qmultinomial_logpmf_grid(params: QMultinomialParams, outcomes) -> np.ndarray:
    """Vectorised joint log pmf over the rows of an (m, k) integer array."""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    if outcomes.ndim != 2 or outcomes.shape[1] != params.k:
        raise QDomainError(f"outcomes must have shape (m, {params.k})")
    log_thetas, lfact, denoms = _qmultinomial_tables(params)
    return kernels.qmultinomial_logpmf_batch(outcomes, params.n, log_thetas, params.ctx.log_q, lfact, denoms)


def simplex_size(n: int, k: int) -> int:
    """Number of k-vectors of nonnegative integers with sum <= n."""
    return math.comb(n + k, k)


def simplex_points(n: int, k: int) -> np.ndarray:
    """All k-vectors of nonnegative integers summing to at most n, in
    lexicographic order."""
    rows = []

    def rec(prefix, left):
        if len(prefix) == k:
            rows.append(prefix)
            return
        for x in range(left + 1):
            rec(prefix + (x,), left - x)

    rec((), n)
    return np.array(rows, dtype=np.int64).reshape(len(rows), k)


def iter_simplex(n: int, k: int) -> Iterator[tuple[int, ...]]:
    for xs in itertools.product(range(n + 1), repeat=k):
        if sum(xs) <= n:
            yield xs


# ------------------------------------------------------------------- Heine

def heine_logpmf(params: HeineParams, x: int) -> float:
    x = _count("x", x)
    ctx, lam = params.ctx, params.lam
    return (
        q_exponential(-lam, ctx)
        + 0.5 * x * (x - 1) * ctx.log_q
        + x * math.log(lam)
        - q_factorial_log(x, ctx)
    )


def heine_pmf(params: HeineParams, x: int) -> float:
    return math.exp(heine_logpmf(params, x))


def heine_support_cutoff(params: HeineParams, tol: float = HEINE_TAIL_TOL) -> tuple[int, float]:
    """Smallest x_max with P(X > x_max) <= bound < tol.

    Uses the successive ratio r_x = pmf(x+1)/pmf(x) = lam q^x / [x+1]_q,
    which is decreasing in x; once r_x < 1 the tail beyond x is bounded by
    pmf(x) r_x / (1 - r_x).
    """
    q, lam = params.ctx.q, params.lam
    x = 0
    logp = heine_logpmf(params, 0)
    while True:
        r = lam * q ** x / q_number(x + 1, q)
        if r < 1.0:
            bound = math.exp(logp) * r / (1.0 - r)
            if bound < tol:
                return x, bound
        logp += math.log(r)
        x += 1


def multiple_heine_logpmf(params: MultipleHeineParams, outcome: Sequence[int]) -> float:
    xs = _outcome(outcome, len(params.lambdas))
    return sum(heine_logpmf(params.component(j), x) for j, x in enumerate(xs))


def multiple_heine_pmf(params: MultipleHeineParams, outcome: Sequence[int]) -> float:
    return math.exp(multiple_heine_logpmf(params, outcome))


def log_limit_ratio(params: QMultinomialParams, outcome: Sequence[int]) -> float:
    """log of qmultinomial_pmf / multiple_heine_pmf at lambda_j = theta_j/(1-q).

    Evaluated as a sum of small terms,

        sum_{i=n-s+1}^{n} log(1 - q^i)
        + sum_j sum_{i > n - s_{j-1}} log(1 + theta_j q^{i-1}),

    so it stays accurate when both pmfs agree to far below machine epsilon.
    """
    xs = _outcome(outcome, params.k)
    n, ctx = params.n, params.ctx
    total = sum(xs)
    if total > n:
        raise QDomainError(f"counts sum to {total}, more than n={n}")
    q = ctx.q
    acc = math.fsum(math.log1p(-q ** i) for i in range(n - total + 1, n + 1))
    s = 0
    for x, theta in zip(xs, params.thetas):
        # prod_{i > m} (1 + theta q^{i-1}) = (-theta q^m; q)_inf
        acc += kernels.log_qpochhammer(-theta * q ** (n - s), q, -1, ctx.tail_tol, int(ctx.max_terms))[0]
        s += x
    return acc


# ----------------------------------------------------------------- moments

def _deformed_moments(m: int, theta: float, q: float) -> MomentPair:
    # mean and variance of [X]_{1/q} for X ~ q-binomial(m, theta)
    if m == 0:
        return MomentPair(0.0, 0.0)
    qm = q_number(m, q)
    a = 1.0 + theta * q ** (m - 1)
    b = 1.0 + theta * q ** (m - 2)
    mean = qm * theta / a
    variance = (1.0 - q) / q * qm ** 2 * theta ** 2 / (a * a * b) + qm * theta / (a * b)
    return MomentPair(mean, variance)


def marginal_moments(params: QMultinomialParams | QBinomialParams) -> MomentPair:
    """Moments of [X_1]_{1/q}."""
    theta = params.theta if isinstance(params, QBinomialParams) else params.thetas[0]
    return _deformed_moments(params.n, theta, params.ctx.q)


def conditional_moments(params: QMultinomialParams, j: int, prefix: Sequence[int]) -> MomentPair:
    """Moments of [X_j]_{1/q} given X_1..X_{j-1} = prefix (j is 1-based).

    Depends on the prefix only through s_{j-1} = sum(prefix).
    """
    if not 1 <= j <= params.k:
        raise QDomainError(f"j must lie in 1..{params.k}, got {j!r}")
    prefix = _outcome(prefix)
    if len(prefix) != j - 1:
        raise QDomainError(f"prefix must have {j - 1} counts, got {len(prefix)}")
    s = sum(prefix)
    if s > params.n:
        raise QDomainError(f"prefix sums to {s}, more than n={params.n}")
    return _deformed_moments(params.n - s, params.thetas[j - 1], params.ctx.q)


def chain_moments(params: QMultinomialParams, outcome: Sequence[int]) -> list[MomentPair]:
    """Marginal then conditional moments for each coordinate of ``outcome``."""
    xs = _outcome(outcome, params.k)
    return [conditional_moments(params, j + 1, xs[:j]) for j in range(params.k)]


def heine_deformed_moments(params: HeineParams, *, literal: bool = False) -> MomentPair:
    """Moments of [X]_{1/q} for X ~ Heine(lam).

    mean = lam and variance = lam^2 q^{-1}(1-q) + lam, the n -> infinity limit
    of the q-binomial moments at theta = lam (1 - q). ``literal=True`` gives
    lam q^{-1}(1-q) + lam instead, a form linear in lam that disagrees with
    the pmf; it is kept only for comparison.
    """
    q, lam = params.ctx.q, params.lam
    scale = lam if literal else lam * lam
    return MomentPair(lam, scale * (1.0 - q) / q + lam)


# ---------------------------------------------------------------- sampling

@dataclass
class _ConditionalTables:
    params: QMultinomialParams
    cdfs: list = field(default_factory=list)

    def __post_init__(self):
        # cdfs[j][m] = cdf of q-binomial(m, theta_j) over 0..m
        p = self.params
        for theta in p.thetas:
            per_m = []
            for m in range(p.n + 1):
                pmf = qbinomial_pmf_all(QBinomialParams(m, theta, p.ctx))
                cdf = np.cumsum(pmf)
                cdf[-1] = 1.0
                per_m.append(cdf)
            self.cdfs.append(per_m)


def sample(params: QMultinomialParams, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` outcomes as a (count, k) integer array.

    Each coordinate is drawn by inverse-CDF from its conditional q-binomial
    given the running total of the earlier coordinates. Deterministic in
    ``seed``.
    """
    count = int(count)
    if count < 1:
        raise QDomainError(f"count must be positive, got {count!r}")
    rng = np.random.default_rng(seed)
    tables = _ConditionalTables(params)
    out = np.zeros((count, params.k), dtype=np.int64)
    remaining = np.full(count, params.n, dtype=np.int64)
    for j in range(params.k):
        u = rng.random(count)
        for m in np.unique(remaining):
            rows = remaining == m
            out[rows, j] = np.searchsorted(tables.cdfs[j][m], u[rows], side="right")
        remaining -= out[:, j]
    return out
