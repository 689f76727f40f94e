"""Pure-Python reference kernels.

Mirrors ``_kernels.pyx`` function for function; selected automatically when
the compiled extension is unavailable or ``QLIMIT_PURE_PYTHON`` is set.
"""
import math

import numpy as np

from .errors import ConvergenceError, QDomainError

BACKEND = "python"


def softplus(t):
    """log(1 + e^t) without overflow."""
    if t > 0.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


def log_qfactorials(nmax, q):
    """Table of log [m]_q! for m = 0..nmax."""
    out = np.zeros(nmax + 1)
    log1mq = math.log1p(-q)
    acc = 0.0
    qk = 1.0
    for m in range(1, nmax + 1):
        qk *= q
        acc += math.log1p(-qk) - log1mq
        out[m] = acc
    return out


def log_qpochhammer(a, q, n, tail_tol, max_terms):
    """log prod_{i=1}^{n} (1 - a q^{i-1}); n < 0 means the infinite product.

    Returns ``(log_value, terms_used, tail_bound)``.
    """
    if a == 0.0:
        return 0.0, 0, 0.0
    log_q = math.log(q)
    log_abs_a = math.log(abs(a))
    limit = n if n >= 0 else max_terms
    acc = 0.0
    i = 0
    while i < limit:
        t = log_abs_a + i * log_q
        if n < 0 and t < math.log(tail_tol):
            tail = math.exp(t) / (1.0 - q)
            return acc, i, tail
        if a < 0.0:
            acc += softplus(t)
        else:
            f = math.exp(t)
            if f >= 1.0:
                raise QDomainError(
                    f"nonpositive factor 1 - a*q^{i} = {1.0 - f!r} in q-Pochhammer product"
                )
            acc += math.log1p(-f)
        i += 1
    if n < 0:
        raise ConvergenceError(
            f"infinite q-Pochhammer product with a={a!r}, q={q!r} not converged "
            f"after {max_terms} terms"
        )
    return acc, n, 0.0


def log_geom_denominators(log_theta, q, mmax):
    """Table of log prod_{i=1}^{m} (1 + theta q^{i-1}) for m = 0..mmax."""
    out = np.zeros(mmax + 1)
    log_q = math.log(q)
    acc = 0.0
    for m in range(1, mmax + 1):
        acc += softplus(log_theta + (m - 1) * log_q)
        out[m] = acc
    return out


def qmultinomial_logpmf_batch(outcomes, n, log_thetas, log_q, lfact, denoms):
    """Joint log pmf of the q-multinomial at each row of ``outcomes``.

    ``lfact`` is ``log_qfactorials(n, q)`` and ``denoms[j]`` is
    ``log_geom_denominators(log_thetas[j], q, n)``.
    """
    outcomes = np.asarray(outcomes, dtype=np.int64)
    m_rows, k = outcomes.shape
    out = np.empty(m_rows)
    for r in range(m_rows):
        s = 0
        acc = lfact[n]
        for j in range(k):
            x = int(outcomes[r, j])
            if x < 0:
                raise QDomainError(f"negative count {x} in outcome row {r}")
            if s + x > n:
                raise QDomainError(f"outcome row {r} sums to more than n={n}")
            acc -= lfact[x]
            acc += x * log_thetas[j] + 0.5 * x * (x - 1) * log_q - denoms[j][n - s]
            s += x
        acc -= lfact[n - s]
        out[r] = acc
    return out


def _frame(m, log_theta, q, log_q):
    # moments of [X]_{1/q} for X ~ qBinomial(m, theta)
    if m == 0:
        return 0.0, 0.0
    qm = (1.0 - q ** m) / (1.0 - q)
    d1 = math.exp(log_theta - softplus(log_theta + (m - 1) * log_q))
    e2 = math.exp(-softplus(log_theta + (m - 2) * log_q))
    mean = qm * d1
    var = (1.0 - q) / q * qm * qm * d1 * d1 * e2 + qm * d1 * e2
    return mean, var


def qmultinomial_frames_batch(outcomes, n, log_thetas, q):
    """Marginal/conditional means and standard deviations of each deformed
    coordinate, conditioned on the preceding counts of the same row."""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    m_rows, k = outcomes.shape
    means = np.empty((m_rows, k))
    sds = np.empty((m_rows, k))
    log_q = math.log(q)
    for r in range(m_rows):
        s = 0
        for j in range(k):
            mean, var = _frame(n - s, log_thetas[j], q, log_q)
            means[r, j] = mean
            sds[r, j] = math.sqrt(var)
            s += int(outcomes[r, j])
    return means, sds


def sw_log_approx_batch(outcomes, means, sds, q):
    """Log of the product-form deformed standardized Stieltjes-Wigert
    approximation; NaN where any shifted argument is nonpositive or sd is 0."""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    m_rows, k = outcomes.shape
    out = np.empty(m_rows)
    log_q = math.log(q)
    scale = q ** -1.5 * math.sqrt(1.0 - q)
    inv_q = 1.0 / q
    log_pref = (
        -0.875 * log_q
        - 0.5 * math.log(2.0 * math.pi)
        + 0.5 * (math.log(-log_q) - math.log(inv_q - 1.0))
    )
    for r in range(m_rows):
        acc = 0.0
        for j in range(k):
            x = int(outcomes[r, j])
            sd = sds[r, j]
            if not sd > 0.0:
                acc = math.nan
                break
            deformed = (q ** -x - 1.0) / (inv_q - 1.0)
            u = scale * (deformed - means[r, j]) / sd + inv_q
            if not u > 0.0:
                acc = math.nan
                break
            lu = math.log(u)
            acc += log_pref - math.log(sd) - 0.5 * lu - x * log_q + lu * lu / (2.0 * log_q)
        out[r] = acc
    return out
