"""Stieltjes-Wigert density and the deformed standardized Stieltjes-Wigert
approximations to the q-binomial, q-trinomial, q-multinomial and multiple
Heine probability functions.

Each approximation is a product over coordinates of the same univariate
factor, evaluated at the shifted argument

    u = q^{-3/2} (1-q)^{1/2} ([x]_{1/q} - mean) / sd + q^{-1},

which maps a standardized deformed count onto the Stieltjes-Wigert scale
(mean q^{-1}, sd q^{-3/2}(1-q)^{1/2}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .dist import (
    MomentPair,
    MultipleHeineParams,
    QMultinomialParams,
    chain_moments,
    heine_deformed_moments,
)
from .errors import OutOfSupportError, QDomainError
from .qcalc import check_q, q_number, q_number_inv


@dataclass(frozen=True)
class StandardizationFrame:
    """Mean and standard deviation used to standardize one deformed coordinate."""

    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise QDomainError(f"standardization sd must be positive, got {self.sd!r}")

    @classmethod
    def from_moments(cls, moments: MomentPair) -> "StandardizationFrame":
        return cls(moments.mean, moments.sd)


def sw_mean(q: float) -> float:
    return 1.0 / check_q(q)


def sw_sd(q: float) -> float:
    q = check_q(q)
    return q ** -1.5 * math.sqrt(1.0 - q)


def sw_log_density(w: float, q: float) -> float:
    q = check_q(q)
    if not w > 0:
        raise QDomainError(f"Stieltjes-Wigert density needs w > 0, got {w!r}")
    log_q = math.log(q)
    lw = math.log(w)
    # q^{1/8} / sqrt(2 pi log(1/q) w) * exp(log(w)^2 / (2 log q))
    return log_q / 8.0 - 0.5 * (math.log(2.0 * math.pi * -log_q) + lw) + lw * lw / (2.0 * log_q)


def sw_density(w: float, q: float) -> float:
    return math.exp(sw_log_density(w, q))


def shifted_argument(deformed: float, frame: StandardizationFrame, q: float) -> float:
    return q ** -1.5 * math.sqrt(1.0 - q) * (deformed - frame.mean) / frame.sd + 1.0 / q


def _log_factor(x: int, frame: StandardizationFrame, q: float, *, deformed=None, shift=True) -> float:
    # log of one coordinate's factor in the product-form approximation
    if deformed is None:
        deformed = q_number_inv(x, q)
    u = shifted_argument(deformed, frame, q)
    if not u > 0:
        raise OutOfSupportError(
            f"shifted argument {u!r} <= 0 at x={x}; approximation undefined here"
        )
    log_q = math.log(q)
    log_pref = (
        -0.875 * log_q
        - 0.5 * math.log(2.0 * math.pi)
        + 0.5 * (math.log(-log_q) - math.log(1.0 / q - 1.0))
    )
    lu = math.log(u)
    inner = lu
    if not shift:
        unshifted = u - 1.0 / q
        if not unshifted > 0:
            raise OutOfSupportError(f"unshifted log argument {unshifted!r} <= 0 at x={x}")
        inner = math.log(unshifted)
    return log_pref - math.log(frame.sd) - 0.5 * lu - x * log_q + inner * inner / (2.0 * log_q)


def qbinomial_sw_log_approx(x: int, frame: StandardizationFrame, q: float) -> float:
    q = check_q(q)
    return _log_factor(x, frame, q)


def qbinomial_sw_approx(x: int, frame: StandardizationFrame, q: float) -> float:
    """Univariate deformed standardized Stieltjes-Wigert approximation to the
    q-binomial pmf at x, given the moments of [X]_{1/q} in ``frame``.

    Raises OutOfSupportError when the shifted argument is nonpositive.
    """
    return math.exp(qbinomial_sw_log_approx(x, frame, q))


def qtrinomial_sw_approx(
    x1: int,
    x2: int,
    frames: tuple[StandardizationFrame, StandardizationFrame],
    q: float,
    *,
    literal: bool = False,
) -> float:
    """Bivariate approximation: marginal frame for x1, conditional frame
    (built at prefix x1) for x2.

    ``literal=True`` uses [x2]_q in place of [x2]_{1/q} in the second
    coordinate, for comparison only.
    """
    q = check_q(q)
    marginal, conditional = frames
    deformed2 = q_number(x2, q) if literal else None
    return math.exp(_log_factor(x1, marginal, q) + _log_factor(x2, conditional, q, deformed=deformed2))


def qmultinomial_sw_log_approx(outcome: Sequence[int], frames: Sequence[StandardizationFrame], q: float) -> float:
    q = check_q(q)
    if len(outcome) != len(frames):
        raise QDomainError("need one standardization frame per coordinate")
    return math.fsum(_log_factor(x, f, q) for x, f in zip(outcome, frames))


def qmultinomial_sw_approx(outcome: Sequence[int], frames: Sequence[StandardizationFrame], q: float) -> float:
    return math.exp(qmultinomial_sw_log_approx(outcome, frames, q))


def chain_frames(params: QMultinomialParams, outcome: Sequence[int]) -> list[StandardizationFrame]:
    """Marginal frame for x_1 and conditional frames for x_2..x_k."""
    return [StandardizationFrame.from_moments(m) for m in chain_moments(params, outcome)]


def qmultinomial_sw_approx_at(params: QMultinomialParams, outcome: Sequence[int]) -> float:
    """Approximation at ``outcome`` with frames derived from ``params``."""
    return qmultinomial_sw_approx(outcome, chain_frames(params, outcome), params.ctx.q)


def heine_frames(params: MultipleHeineParams) -> list[StandardizationFrame]:
    return [
        StandardizationFrame.from_moments(heine_deformed_moments(params.component(j)))
        for j in range(len(params.lambdas))
    ]


def multiple_heine_sw_log_approx(outcome: Sequence[int], params: MultipleHeineParams, *, literal: bool = False) -> float:
    q = params.ctx.q
    frames = heine_frames(params)
    if len(outcome) != len(frames):
        raise QDomainError("outcome length must match the number of lambdas")
    return math.fsum(_log_factor(x, f, q, shift=not literal) for x, f in zip(outcome, frames))


def multiple_heine_sw_approx(outcome: Sequence[int], params: MultipleHeineParams, *, literal: bool = False) -> float:
    """Approximation to the multiple Heine pmf for large lambdas.

    Frames use mean lam_j and variance lam_j^2 q^{-1}(1-q) + lam_j. The log^2
    argument carries the +q^{-1} shift; ``literal=True`` drops it.
    """
    return math.exp(multiple_heine_sw_log_approx(outcome, params, literal=literal))
