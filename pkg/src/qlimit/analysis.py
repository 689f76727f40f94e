"""Convergence experiments: exact-vs-approximate error sweeps, the discrete
q-multinomial -> multiple Heine limit, q-Stirling ratio studies and Monte
Carlo validation of the sampler.

All quantitative thresholds applied to these reports are engineering gates;
the underlying limit statements carry no rates.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._backend import kernels
from .dist import (
    MultipleHeineParams,
    QBinomialParams,
    QMultinomialParams,
    heine_logpmf,
    log_limit_ratio,
    marginal_moments,
    qbinomial_pmf,
    qmultinomial_logpmf_grid,
    sample,
    simplex_points,
    simplex_size,
)
from .errors import EnumerationSizeError, OutOfSupportError, QDomainError
from .qcalc import QContext, check_q, q_factorial_log, q_stirling_log
from .swapprox import StandardizationFrame, qbinomial_sw_approx

ENUMERATION_CAP = 10**7
GATE_NOTE = "error thresholds are engineering gates; no convergence rate is claimed"


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a sweep over n.

    Either ``alphas`` (theta_j = q^{-alpha_j n}) or fixed ``thetas`` select the
    odds parameters; ``k`` is the number of coordinates.
    """

    q: float
    n_values: tuple[int, ...]
    alphas: tuple[float, ...] = ()
    thetas: tuple[float, ...] | None = None
    central_fraction: float = 0.1
    seed: int = 0
    x_max: int = 8

    def __post_init__(self):
        check_q(self.q)
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.thetas is not None:
            object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if not self.n_values:
            raise QDomainError("n_values must not be empty")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])) or self.n_values[0] < 0:
            raise QDomainError(f"n_values must be nonnegative and strictly increasing, got {self.n_values}")
        if any(not 0 < a < 1 for a in self.alphas):
            raise QDomainError(f"alphas must lie in (0, 1), got {self.alphas}")
        if self.thetas is None and not self.alphas:
            raise QDomainError("either alphas or thetas must be given")
        if not 0 < self.central_fraction <= 1:
            raise QDomainError(f"central_fraction must lie in (0, 1], got {self.central_fraction!r}")
        if self.x_max < 0:
            raise QDomainError("x_max must be nonnegative")

    @property
    def k(self) -> int:
        return len(self.thetas) if self.thetas is not None else len(self.alphas)

    def params_at(self, n: int) -> QMultinomialParams:
        if self.thetas is not None:
            return QMultinomialParams(n, self.thetas, QContext(self.q))
        return QMultinomialParams.from_alphas(n, self.alphas, QContext(self.q))


@dataclass(frozen=True)
class ErrorRecord:
    n: int
    grid_size: int
    enumerated: int
    sup_abs_error: float
    sup_rel_error: float
    mean_rel_error: float
    undefined: int = 0


@dataclass
class ErrorReport:
    kind: str
    config: dict
    records: list[ErrorRecord] = field(default_factory=list)
    note: str = GATE_NOTE

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "records": [asdict(r) for r in self.records],
            "note": self.note,
        }


def _config_dict(config: SweepConfig) -> dict:
    d = asdict(config)
    d["k"] = config.k
    return d


def is_monotone_decreasing(values: Sequence[float], allowed_breaks: int = 1) -> bool:
    """True when at most ``allowed_breaks`` adjacent pairs fail to decrease."""
    breaks = sum(1 for a, b in zip(values, values[1:]) if not b < a)
    return breaks <= allowed_breaks


def _check_enumeration(n: int, k: int) -> int:
    size = simplex_size(n, k)
    if size > ENUMERATION_CAP:
        cap_n = 0
        while simplex_size(cap_n + 1, k) <= ENUMERATION_CAP:
            cap_n += 1
        raise EnumerationSizeError(
            f"simplex for n={n}, k={k} has {size} points (cap {ENUMERATION_CAP}); "
            f"use n <= {cap_n} at this k"
        )
    return size


def _error_record(n, exact, approx, enumerated) -> ErrorRecord:
    defined = np.isfinite(approx)
    undefined = int((~defined).sum())
    if not defined.any():
        return ErrorRecord(n, len(exact), enumerated, math.inf, math.inf, math.inf, undefined)
    abs_err = np.abs(approx[defined] - exact[defined])
    rel_err = abs_err / exact[defined]
    sup_rel = math.inf if undefined else float(rel_err.max())
    return ErrorRecord(
        n=n,
        grid_size=len(exact),
        enumerated=enumerated,
        sup_abs_error=float(abs_err.max()),
        sup_rel_error=sup_rel,
        mean_rel_error=float(rel_err.mean()),
        undefined=undefined,
    )


def central_region(params: QMultinomialParams, central_fraction: float):
    """Outcomes whose exact pmf is at least ``central_fraction`` times the mode.

    Returns ``(points, log_pmf, enumerated)``.
    """
    enumerated = _check_enumeration(params.n, params.k)
    pts = simplex_points(params.n, params.k)
    logp = qmultinomial_logpmf_grid(params, pts)
    keep = logp >= logp.max() + math.log(central_fraction)
    return pts[keep], logp[keep], enumerated


def limit_errors_at(params: QMultinomialParams, central_fraction: float) -> ErrorRecord:
    pts, logp, enumerated = central_region(params, central_fraction)
    log_thetas = np.log(np.asarray(params.thetas, dtype=float))
    means, sds = kernels.qmultinomial_frames_batch(pts, params.n, log_thetas, params.ctx.q)
    log_approx = kernels.sw_log_approx_batch(pts, means, sds, params.ctx.q)
    return _error_record(params.n, np.exp(logp), np.exp(log_approx), enumerated)


def run_limit_sweep(config: SweepConfig) -> ErrorReport:
    """Central-region error of the deformed Stieltjes-Wigert approximation
    against the exact q-multinomial pmf, for each n in the config."""
    report = ErrorReport("limit", _config_dict(config))
    for n in config.n_values:
        report.records.append(limit_errors_at(config.params_at(n), config.central_fraction))
    return report


def run_univariate_sweep(config: SweepConfig) -> ErrorReport:
    """k = 1 sweep through the scalar q-binomial path (no batch kernels)."""
    if config.k != 1:
        raise QDomainError("univariate sweep needs exactly one alpha or theta")
    report = ErrorReport("univariate", _config_dict(config))
    for n in config.n_values:
        p = config.params_at(n)
        bp = QBinomialParams(n, p.thetas[0], p.ctx)
        pmf = np.array([qbinomial_pmf(bp, x) for x in range(n + 1)])
        xs = np.flatnonzero(pmf >= pmf.max() * config.central_fraction)
        m = marginal_moments(bp)
        frame = StandardizationFrame(m.mean, m.sd)
        approx = []
        for x in xs:
            try:
                approx.append(qbinomial_sw_approx(int(x), frame, config.q))
            except OutOfSupportError:
                approx.append(math.nan)
        report.records.append(_error_record(n, pmf[xs], np.array(approx), n + 1))
    return report


def run_discrete_limit(config: SweepConfig) -> ErrorReport:
    """Pointwise gap between the q-multinomial at fixed thetas and its
    multiple Heine limit (lambda_j = theta_j / (1 - q)) on the box
    0 <= x_j <= x_max. Outcomes outside the simplex count as exact pmf 0."""
    if config.thetas is None:
        raise QDomainError("discrete limit needs fixed thetas")
    ctx = QContext(config.q)
    heine = MultipleHeineParams.from_thetas(config.thetas, ctx)
    box = np.array(list(itertools.product(range(config.x_max + 1), repeat=config.k)), dtype=np.int64)
    heine_logs = [
        np.array([heine_logpmf(heine.component(j), x) for x in range(config.x_max + 1)])
        for j in range(config.k)
    ]
    limit = np.exp(sum(heine_logs[j][box[:, j]] for j in range(config.k)))
    report = ErrorReport("discrete", _config_dict(config))
    for n in config.n_values:
        params = config.params_at(n)
        # |f_n - f_inf| = f_inf |expm1(log(f_n / f_inf))|, exact pmf 0 off the simplex
        rel = np.ones(len(box))
        for i, xs in enumerate(box):
            if xs.sum() <= n:
                rel[i] = abs(math.expm1(log_limit_ratio(params, xs)))
        gap = limit * rel
        report.records.append(
            ErrorRecord(
                n=n,
                grid_size=len(box),
                enumerated=len(box),
                sup_abs_error=float(gap.max()),
                sup_rel_error=float(rel.max()),
                mean_rel_error=float(rel.mean()),
            )
        )
    return report


@dataclass(frozen=True)
class StirlingRow:
    n: int
    q: float
    ratio: float
    abs_deviation: float
    scaled_deviation: float


def run_stirling_study(n_values: Sequence[int], q_values: Sequence[float]) -> list[StirlingRow]:
    """ratio = [n]_q! / (q-Stirling approximation), with |ratio - 1| and
    n |ratio - 1|, for every (q, n) pair."""
    rows = []
    for q in q_values:
        ctx = QContext(q)
        for n in n_values:
            ratio = math.exp(q_factorial_log(n, ctx) - q_stirling_log(n, ctx))
            dev = abs(ratio - 1.0)
            rows.append(StirlingRow(int(n), ctx.q, ratio, dev, n * dev))
    return rows


@dataclass(frozen=True)
class CellCheck:
    outcome: tuple[int, ...]
    exact: float
    empirical: float
    z: float
    flagged: bool


@dataclass
class MCReport:
    config: dict
    cells: list[CellCheck]
    threshold: float = 4.0

    @property
    def flagged(self) -> list[CellCheck]:
        return [c for c in self.cells if c.flagged]

    @property
    def max_abs_z(self) -> float:
        return max(abs(c.z) for c in self.cells)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "threshold": self.threshold,
            "max_abs_z": self.max_abs_z,
            "n_flagged": len(self.flagged),
            "cells": [asdict(c) for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def run_mc_validation(params: QMultinomialParams, count: int, seed: int, threshold: float = 4.0) -> MCReport:
    """Per-cell z-scores of sampled frequencies against the exact pmf."""
    draws = sample(params, count, seed)
    pts = simplex_points(params.n, params.k)
    exact = np.exp(qmultinomial_logpmf_grid(params, pts))
    # mixed-radix index over the (n+1)^k box, then read off simplex cells
    radix = (params.n + 1) ** np.arange(params.k)
    counts = np.bincount(draws @ radix, minlength=(params.n + 1) ** params.k)
    empirical = counts[pts @ radix] / count
    cells = []
    for xs, p, f in zip(pts, exact, empirical):
        se = math.sqrt(p * (1.0 - p) / count)
        z = (f - p) / se if se > 0 else (0.0 if f == p else math.inf)
        cells.append(CellCheck(tuple(int(v) for v in xs), float(p), float(f), float(z), bool(abs(z) > threshold)))
    config = {"n": params.n, "thetas": list(params.thetas), "q": params.ctx.q, "count": count, "seed": seed}
    return MCReport(config, cells, threshold)
