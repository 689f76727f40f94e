import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlimit.dist import (
    HeineParams,
    MultipleHeineParams,
    QBinomialParams,
    QMultinomialParams,
    conditional_moments,
    heine_deformed_moments,
    heine_pmf,
    heine_support_cutoff,
    log_limit_ratio,
    marginal_moments,
    multiple_heine_pmf,
    qbinomial_pmf,
    qbinomial_pmf_all,
    qmultinomial_logpmf_grid,
    qmultinomial_pmf,
    qtrinomial_pmf,
    sample,
    simplex_points,
    simplex_size,
)
from qlimit.errors import QDomainError

GRID_Q = (0.3, 0.6, 0.9)
GRID_THETA = (0.3, 0.9, 2.0)


def deformed(x, q):
    return (q ** -x - 1) / (q ** -1 - 1)


def brute_qbinomial(n, theta, q, x):
    """Direct linear-domain pmf: Gaussian binomial by q-Pascal recurrence."""
    c = [[0.0] * (n + 1) for _ in range(n + 1)]
    for m in range(n + 1):
        c[m][0] = 1.0
        for y in range(1, m + 1):
            c[m][y] = c[m - 1][y - 1] + q ** y * c[m - 1][y]
    denom = 1.0
    for i in range(1, n + 1):
        denom *= 1 + theta * q ** (i - 1)
    return c[n][x] * q ** (x * (x - 1) // 2) * theta ** x / denom


def chain_product(params, xs):
    out, s = 1.0, 0
    for x, theta in zip(xs, params.thetas):
        out *= qbinomial_pmf(QBinomialParams(params.n - s, theta, params.ctx), x)
        s += x
    return out


# ---------------------------------------------------------------- q-binomial

def test_qbinomial_examples():
    assert qbinomial_pmf(QBinomialParams(0, 1.3, 0.5), 0) == 1.0
    assert qbinomial_pmf(QBinomialParams(1, 1.0, 0.5), 1) == pytest.approx(0.5, rel=1e-15)
    p = QBinomialParams(12, 0.7, 0.6)
    assert math.fsum(qbinomial_pmf(p, x) for x in range(13)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(QDomainError):
        qbinomial_pmf(p, 13)


@pytest.mark.parametrize("n, theta, q", [(7, 0.4, 0.3), (10, 2.0, 0.8), (5, 1.0, 0.5)])
def test_qbinomial_matches_brute_force(n, theta, q):
    for x in range(n + 1):
        assert qbinomial_pmf(QBinomialParams(n, theta, q), x) == pytest.approx(
            brute_qbinomial(n, theta, q, x), rel=1e-12
        )


def test_params_validation():
    with pytest.raises(QDomainError):
        QBinomialParams(3, 0.0, 0.5)
    with pytest.raises(QDomainError):
        QBinomialParams(-1, 1.0, 0.5)
    with pytest.raises(QDomainError):
        QMultinomialParams(3, (), 0.5)
    with pytest.raises(QDomainError):
        HeineParams(-1.0, 0.5)
    with pytest.raises(QDomainError):
        QMultinomialParams(3, (1.0,), 1.0)


# ------------------------------------------------------------------- Heine

def test_heine_examples():
    q, lam = 0.5, 1.0
    e_q = 1.0
    for i in range(200):
        e_q /= 1 + lam * (1 - q) * q ** i
    assert heine_pmf(HeineParams(lam, q), 0) == pytest.approx(e_q, rel=1e-14)
    assert heine_pmf(HeineParams(lam, q), 1) == pytest.approx(e_q, rel=1e-14)


def test_heine_is_discrete_limit_of_qbinomial():
    lam, q = 2.0, 0.5
    bp = QBinomialParams(200, lam * (1 - q), q)
    for x in range(11):
        assert qbinomial_pmf(bp, x) == pytest.approx(heine_pmf(HeineParams(lam, q), x), abs=1e-8)


@pytest.mark.parametrize("lam", [0.1, 1.5, 20.0, 300.0])
@pytest.mark.parametrize("q", GRID_Q)
def test_heine_normalization(lam, q):
    params = HeineParams(lam, q)
    x_max, bound = heine_support_cutoff(params)
    assert bound < 1e-12
    total = math.fsum(heine_pmf(params, x) for x in range(x_max + 1))
    assert total == pytest.approx(1.0, abs=1e-9)


# ------------------------------------------------------------ q-multinomial

def test_qmultinomial_all_failures():
    n, thetas, q = 3, (0.4, 1.7), 0.5
    expected = 1.0
    for theta in thetas:
        for i in range(1, n + 1):
            expected /= 1 + theta * q ** (i - 1)
    assert qmultinomial_pmf(QMultinomialParams(n, thetas, q), (0, 0)) == pytest.approx(expected, rel=1e-14)


def test_qmultinomial_k1_reduces_to_qbinomial():
    for x in range(9):
        assert qmultinomial_pmf(QMultinomialParams(8, (0.7,), 0.6), (x,)) == pytest.approx(
            qbinomial_pmf(QBinomialParams(8, 0.7, 0.6), x), rel=1e-14
        )


def test_qmultinomial_chain_factorization_example():
    params = QMultinomialParams(7, (0.5, 0.8), 0.6)
    for x1 in range(8):
        for x2 in range(8 - x1):
            assert qmultinomial_pmf(params, (x1, x2)) == pytest.approx(chain_product(params, (x1, x2)), abs=1e-13)


def test_qtrinomial_matches_printed_formula():
    n, t1, t2, q = 6, 0.5, 1.4, 0.7
    c = lambda m, x: brute_qbinomial(m, 1.0, q, x) * math.prod(1 + q ** (i - 1) for i in range(1, m + 1)) / q ** (x * (x - 1) // 2)
    for x1 in range(n + 1):
        for x2 in range(n - x1 + 1):
            coeff = c(n, x1) * c(n - x1, x2)
            num = t1 ** x1 * t2 ** x2 * q ** (x1 * (x1 - 1) // 2 + x2 * (x2 - 1) // 2)
            den = math.prod(1 + t1 * q ** (i - 1) for i in range(1, n + 1))
            den *= math.prod(1 + t2 * q ** (i - 1) for i in range(1, n - x1 + 1))
            assert qtrinomial_pmf(n, t1, t2, x1, x2, q) == pytest.approx(coeff * num / den, rel=1e-12)


def test_qmultinomial_domain():
    params = QMultinomialParams(3, (0.5, 0.8), 0.6)
    with pytest.raises(QDomainError):
        qmultinomial_pmf(params, (2, 2))
    with pytest.raises(QDomainError):
        qmultinomial_pmf(params, (1,))


def test_grid_matches_scalar_path():
    params = QMultinomialParams(9, (0.3, 2.0, 0.9), 0.6)
    pts = simplex_points(9, 3)
    assert len(pts) == simplex_size(9, 3)
    grid = qmultinomial_logpmf_grid(params, pts)
    scalar = [math.log(qmultinomial_pmf(params, tuple(p))) for p in pts]
    np.testing.assert_allclose(grid, scalar, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("q", GRID_Q)
def test_qmultinomial_normalization(k, q):
    for thetas in itertools.product(GRID_THETA, repeat=k):
        for n in (0, 1, 6, 15):
            params = QMultinomialParams(n, thetas, q)
            total = math.fsum(np.exp(qmultinomial_logpmf_grid(params, simplex_points(n, k))))
            assert total == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("k", [2, 3])
def test_chain_factorization_invariant(k):
    for n in (0, 3, 12):
        for q in GRID_Q:
            params = QMultinomialParams(n, GRID_THETA[:k], q)
            for xs in simplex_points(n, k):
                assert qmultinomial_pmf(params, tuple(xs)) == pytest.approx(chain_product(params, xs), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(0, 12),
    thetas=st.lists(st.floats(0.05, 20.0), min_size=1, max_size=3),
    q=st.floats(0.05, 0.95),
)
def test_normalization_property(n, thetas, q):
    params = QMultinomialParams(n, thetas, q)
    total = math.fsum(np.exp(qmultinomial_logpmf_grid(params, simplex_points(n, len(thetas)))))
    assert total == pytest.approx(1.0, abs=1e-11)


# ----------------------------------------------------------- multiple Heine

def test_multiple_heine_examples():
    params = MultipleHeineParams((1.0, 2.5), 0.5)
    zero = heine_pmf(HeineParams(1.0, 0.5), 0) * heine_pmf(HeineParams(2.5, 0.5), 0)
    assert multiple_heine_pmf(params, (0, 0)) == pytest.approx(zero, rel=1e-14)
    for xs in itertools.product(range(6), repeat=2):
        expected = heine_pmf(HeineParams(1.0, 0.5), xs[0]) * heine_pmf(HeineParams(2.5, 0.5), xs[1])
        assert multiple_heine_pmf(params, xs) == pytest.approx(expected, rel=1e-14)


def test_multiple_heine_is_limit_of_qmultinomial():
    q, lambdas = 0.5, (1.0, 2.0)
    thetas = tuple(l * (1 - q) for l in lambdas)
    qm = QMultinomialParams(150, thetas, q)
    mh = MultipleHeineParams(lambdas, q)
    for xs in itertools.product(range(9), repeat=2):
        assert qmultinomial_pmf(qm, xs) == pytest.approx(multiple_heine_pmf(mh, xs), abs=1e-7)


def test_multiple_heine_normalization():
    params = MultipleHeineParams((0.4, 3.0, 12.0), 0.6)
    cut = [heine_support_cutoff(params.component(j)) for j in range(3)]
    marginals = [math.fsum(heine_pmf(params.component(j), x) for x in range(c[0] + 1)) for j, c in enumerate(cut)]
    box = itertools.product(*(range(c[0] + 1) for c in cut))
    total = math.fsum(multiple_heine_pmf(params, xs) for xs in box)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert total == pytest.approx(math.prod(marginals), rel=1e-12)


def test_log_limit_ratio_matches_direct_difference():
    q, thetas = 0.5, (0.5, 1.0)
    mh = MultipleHeineParams.from_thetas(thetas, q)
    qm = QMultinomialParams(25, thetas, q)
    for xs in itertools.product(range(9), repeat=2):
        direct = qmultinomial_pmf(qm, xs) - multiple_heine_pmf(mh, xs)
        stable = multiple_heine_pmf(mh, xs) * math.expm1(log_limit_ratio(qm, xs))
        assert stable == pytest.approx(direct, abs=1e-15)


def test_discrete_limit_gap_decreases():
    q, thetas = 0.5, (0.5, 1.0)
    mh = MultipleHeineParams.from_thetas(thetas, q)
    gaps = []
    for n in (25, 50, 100, 150):
        qm = QMultinomialParams(n, thetas, q)
        gaps.append(
            max(
                multiple_heine_pmf(mh, xs) * abs(math.expm1(log_limit_ratio(qm, xs)))
                for xs in itertools.product(range(9), repeat=2)
            )
        )
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[3] < 1e-6


# ----------------------------------------------------------------- moments

def summed_moments(pmf, xs, q):
    y = [deformed(x, q) for x in xs]
    mean = math.fsum(p * v for p, v in zip(pmf, y))
    var = math.fsum(p * (v - mean) ** 2 for p, v in zip(pmf, y))
    return mean, var


def test_marginal_moment_examples():
    m = marginal_moments(QMultinomialParams(0, (0.5,), 0.5))
    assert (m.mean, m.variance) == (0.0, 0.0)
    assert marginal_moments(QBinomialParams(1, 1.0, 0.5)).mean == pytest.approx(0.5, rel=1e-15)
    p = QBinomialParams(15, 0.8, 0.6)
    mean, var = summed_moments(qbinomial_pmf_all(p), range(16), 0.6)
    m = marginal_moments(p)
    assert m.mean == pytest.approx(mean, abs=1e-10)
    assert m.variance == pytest.approx(var, rel=1e-9)


def test_conditional_moment_examples():
    params = QMultinomialParams(6, (0.5, 0.8, 1.2), 0.6)
    m = conditional_moments(params, 3, (4, 2))
    assert (m.mean, m.variance) == (0.0, 0.0)
    assert conditional_moments(params, 2, (0,)) == marginal_moments(QBinomialParams(6, 0.8, 0.6))
    params = QMultinomialParams(12, (0.5, 0.7), 0.6)
    cond = QBinomialParams(8, 0.7, 0.6)
    mean, _ = summed_moments(qbinomial_pmf_all(cond), range(9), 0.6)
    assert conditional_moments(params, 2, (4,)).mean == pytest.approx(mean, abs=1e-10)
    with pytest.raises(QDomainError):
        conditional_moments(params, 2, (13,))


@pytest.mark.parametrize("q", GRID_Q)
@pytest.mark.parametrize("theta", GRID_THETA)
def test_moments_match_summation_grid(q, theta):
    for m in range(1, 16):
        p = QBinomialParams(m, theta, q)
        mean, var = summed_moments(qbinomial_pmf_all(p), range(m + 1), q)
        pair = marginal_moments(p)
        assert pair.mean == pytest.approx(mean, rel=1e-9)
        assert pair.variance == pytest.approx(var, rel=1e-9)


def test_heine_moment_examples():
    tiny = heine_deformed_moments(HeineParams(1e-12, 0.5))
    assert tiny.mean < 1e-11 and tiny.variance < 1e-11
    literal = heine_deformed_moments(HeineParams(2.0, 0.5), literal=True)
    assert (literal.mean, literal.variance) == (2.0, 4.0)
    corrected = heine_deformed_moments(HeineParams(2.0, 0.5))
    assert (corrected.mean, corrected.variance) == (2.0, 6.0)


@pytest.mark.parametrize("lam, q", [(1.5, 0.5), (0.3, 0.3), (7.0, 0.9), (40.0, 0.6)])
def test_heine_moments_match_summation(lam, q):
    params = HeineParams(lam, q)
    x_max, _ = heine_support_cutoff(params)
    pmf = [heine_pmf(params, x) for x in range(x_max + 1)]
    mean, var = summed_moments(pmf, range(x_max + 1), q)
    m = heine_deformed_moments(params)
    assert m.mean == pytest.approx(lam, rel=1e-8)
    assert mean == pytest.approx(lam, rel=1e-8)
    assert m.variance == pytest.approx(var, rel=1e-8)
    # the printed variance lam q^{-1}(1-q) + lam does not match
    assert heine_deformed_moments(params, literal=True).variance != pytest.approx(var, rel=1e-3)


# ---------------------------------------------------------------- sampling

def test_sample_zero_trials():
    draws = sample(QMultinomialParams(0, (0.5, 0.8), 0.6), 50, seed=3)
    assert draws.shape == (50, 2) and not draws.any()


def test_sample_deterministic():
    params = QMultinomialParams(6, (0.5, 0.8), 0.6)
    np.testing.assert_array_equal(sample(params, 500, 11), sample(params, 500, 11))
    assert not np.array_equal(sample(params, 500, 11), sample(params, 500, 12))


def test_sample_frequencies_match_pmf():
    params = QMultinomialParams(6, (0.5, 0.8), 0.6)
    count = 10**5
    for seed in (2024, 2025):
        draws = sample(params, count, seed)
        ok = True
        for xs in simplex_points(6, 2):
            p = qmultinomial_pmf(params, tuple(xs))
            freq = np.mean(np.all(draws == xs, axis=1))
            ok &= abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / count)
        if ok:
            break
    assert ok


def test_sample_support():
    params = QMultinomialParams(5, (3.0, 0.2, 1.0), 0.4)
    draws = sample(params, 2000, 5)
    assert draws.min() >= 0 and draws.sum(axis=1).max() <= 5
