"""q-calculus primitives evaluated in the natural-log domain.

Every quantity here is a product of strictly positive factors, so functions
suffixed ``_log`` return the natural log of the value as a plain float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from ._backend import kernels
from .errors import QDomainError

DEFAULT_TAIL_TOL = 1e-15
DEFAULT_MAX_TERMS = 10_000


def check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise QDomainError(f"q must lie strictly inside (0, 1), got {q!r}")
    return q


@dataclass(frozen=True)
class QContext:
    """Deformation parameter plus truncation settings for infinite products."""

    q: float
    tail_tol: float = DEFAULT_TAIL_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self):
        object.__setattr__(self, "q", check_q(self.q))
        if not self.tail_tol > 0:
            raise QDomainError(f"tail_tol must be positive, got {self.tail_tol!r}")
        if int(self.max_terms) < 1:
            raise QDomainError(f"max_terms must be >= 1, got {self.max_terms!r}")

    @property
    def log_q(self) -> float:
        return math.log(self.q)


def as_context(ctx: QContext | float) -> QContext:
    """Accept either a QContext or a bare q value."""
    if isinstance(ctx, QContext):
        return ctx
    return QContext(ctx)


def _check_count(name: str, value: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise QDomainError(f"{name} must be a nonnegative integer, got {value!r}")
    return int(value)


def q_number(t: float, q: float) -> float:
    """[t]_q = (1 - q^t) / (1 - q), for any real t."""
    q = check_q(q)
    return -math.expm1(t * math.log(q)) / (1.0 - q)


def q_number_inv(x: float, q: float) -> float:
    """The deformed value [x]_{1/q} = (q^{-x} - 1) / (q^{-1} - 1)."""
    q = check_q(q)
    return math.expm1(-x * math.log(q)) / (1.0 / q - 1.0)


@lru_cache(maxsize=64)
def _factorial_table(nmax: int, q: float):
    table = kernels.log_qfactorials(nmax, q)
    table.flags.writeable = False
    return table


def log_qfactorial_table(nmax: int, ctx: QContext | float):
    """Read-only array of log [m]_q! for m = 0..nmax."""
    ctx = as_context(ctx)
    nmax = _check_count("nmax", nmax)
    # round up so nearby requests share a cached table
    size = max(32, 1 << (nmax.bit_length()))
    return _factorial_table(size, ctx.q)[: nmax + 1]


def q_factorial_log(n: int, ctx: QContext | float) -> float:
    n = _check_count("n", n)
    return float(log_qfactorial_table(n, ctx)[n])


def q_binomial_coeff_log(n: int, x: int, ctx: QContext | float) -> float:
    """Log of the Gaussian binomial coefficient (n choose x)_q."""
    n = _check_count("n", n)
    x = _check_count("x", x)
    if x > n:
        raise QDomainError(f"x={x} exceeds n={n}")
    lf = log_qfactorial_table(n, ctx)
    return float(lf[n] - lf[x] - lf[n - x])


def q_multinomial_coeff_log(n: int, xs: Sequence[int], ctx: QContext | float) -> float:
    """Log of [n]_q! / ([x_1]_q! ... [x_k]_q! [n - sum(xs)]_q!)."""
    n = _check_count("n", n)
    xs = [_check_count("x", x) for x in xs]
    total = sum(xs)
    if total > n:
        raise QDomainError(f"counts sum to {total}, more than n={n}")
    lf = log_qfactorial_table(n, ctx)
    return float(lf[n] - sum(lf[x] for x in xs) - lf[n - total])


def q_pochhammer_log(a: float, n: int | None, ctx: QContext | float, *, with_bound: bool = False):
    """Log of (a; q)_n = prod_{i=1}^{n} (1 - a q^{i-1}).

    ``n=None`` (or ``math.inf``) requests the infinite product, truncated once
    ``|a| q^{i-1} < ctx.tail_tol``. The neglected tail satisfies
    ``|log remainder| <= |a| q^N / (1 - q)``; pass ``with_bound=True`` to get
    ``(log_value, tail_bound)``.
    """
    ctx = as_context(ctx)
    if n is None or n == math.inf:
        steps = -1
    else:
        steps = _check_count("n", n)
    value, _, bound = kernels.log_qpochhammer(float(a), ctx.q, steps, ctx.tail_tol, int(ctx.max_terms))
    if with_bound:
        return value, bound
    return value


def q_exponential(z: float, ctx: QContext | float) -> float:
    """log e_q(z), evaluated through the product 1 / ((1 - q) z; q)_inf.

    Valid for z < 0 and for 0 <= (1 - q) z < 1.
    """
    ctx = as_context(ctx)
    return -q_pochhammer_log((1.0 - ctx.q) * z, None, ctx)


def q_exponential_series(z: float, ctx: QContext | float, terms: int = 30) -> float:
    """Partial sum of sum_m z^m / [m]_q!, in the linear domain."""
    ctx = as_context(ctx)
    term, parts = 1.0, [1.0]
    for m in range(1, terms):
        term *= z / q_number(m, ctx.q)
        parts.append(term)
    return math.fsum(parts)


def q_stirling_log(n: int, ctx: QContext | float) -> float:
    """Log of the q-Stirling approximation to [n]_q! with the 1 + O(1/n)
    factor dropped."""
    ctx = as_context(ctx)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise QDomainError(f"n must be a positive integer, got {n!r}")
    q, log_q = ctx.q, ctx.log_q
    constant = (
        -log_q / 8.0
        + 0.5 * math.log(2.0 * math.pi * (1.0 - q))
        - 0.5 * math.log(-q * log_q)
    )
    power = 0.5 * n * (n - 1) * log_q - 0.5 * n * log_q
    deformed = (n + 0.5) * math.log(q_number_inv(n, q))
    # prod_j (1 + (q^{-n} - 1) q^{j-1}) = (-(q^{-n} - 1); q)_inf
    denominator = q_pochhammer_log(-math.expm1(-n * log_q), None, ctx)
    return constant + power + deformed - denominator
