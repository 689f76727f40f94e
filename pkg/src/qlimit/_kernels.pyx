# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, pow, M_PI, NAN

from .errors import ConvergenceError, QDomainError

cnp.import_array()

BACKEND = "cython"


cdef inline double _softplus(double t) nogil:
    if t > 0.0:
        return t + log1p(exp(-t))
    return log1p(exp(t))


def softplus(double t):
    """log(1 + e^t) without overflow."""
    return _softplus(t)


def log_qfactorials(Py_ssize_t nmax, double q):
    """Table of log [m]_q! for m = 0..nmax."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(nmax + 1)
    cdef double[::1] o = out
    cdef double log1mq = log1p(-q)
    cdef double acc = 0.0, qk = 1.0
    cdef Py_ssize_t m
    for m in range(1, nmax + 1):
        qk *= q
        acc += log1p(-qk) - log1mq
        o[m] = acc
    return out


def log_qpochhammer(double a, double q, Py_ssize_t n, double tail_tol, Py_ssize_t max_terms):
    """log prod_{i=1}^{n} (1 - a q^{i-1}); n < 0 means the infinite product.

    Returns ``(log_value, terms_used, tail_bound)``.
    """
    if a == 0.0:
        return 0.0, 0, 0.0
    cdef double log_q = log(q)
    cdef double log_abs_a = log(a if a > 0.0 else -a)
    cdef double log_tol = log(tail_tol)
    cdef Py_ssize_t limit = n if n >= 0 else max_terms
    cdef double acc = 0.0, t, f
    cdef Py_ssize_t i = 0
    while i < limit:
        t = log_abs_a + i * log_q
        if n < 0 and t < log_tol:
            return acc, i, exp(t) / (1.0 - q)
        if a < 0.0:
            acc += _softplus(t)
        else:
            f = exp(t)
            if f >= 1.0:
                raise QDomainError(
                    f"nonpositive factor 1 - a*q^{i} = {1.0 - f!r} in q-Pochhammer product"
                )
            acc += log1p(-f)
        i += 1
    if n < 0:
        raise ConvergenceError(
            f"infinite q-Pochhammer product with a={a!r}, q={q!r} not converged "
            f"after {max_terms} terms"
        )
    return acc, n, 0.0


def log_geom_denominators(double log_theta, double q, Py_ssize_t mmax):
    """Table of log prod_{i=1}^{m} (1 + theta q^{i-1}) for m = 0..mmax."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(mmax + 1)
    cdef double[::1] o = out
    cdef double log_q = log(q)
    cdef double acc = 0.0
    cdef Py_ssize_t m
    for m in range(1, mmax + 1):
        acc += _softplus(log_theta + (m - 1) * log_q)
        o[m] = acc
    return out


def qmultinomial_logpmf_batch(outcomes, Py_ssize_t n, log_thetas, double log_q, lfact, denoms):
    """Joint log pmf of the q-multinomial at each row of ``outcomes``."""
    cdef const cnp.int64_t[:, ::1] xs = np.ascontiguousarray(outcomes, dtype=np.int64)
    cdef const double[::1] lt = np.ascontiguousarray(log_thetas, dtype=np.float64)
    cdef const double[::1] lf = np.ascontiguousarray(lfact, dtype=np.float64)
    cdef const double[:, ::1] den = np.ascontiguousarray(denoms, dtype=np.float64)
    cdef Py_ssize_t m_rows = xs.shape[0], k = xs.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m_rows)
    cdef double[::1] o = out
    cdef Py_ssize_t r, j, s
    cdef cnp.int64_t x
    cdef double acc
    for r in range(m_rows):
        s = 0
        acc = lf[n]
        for j in range(k):
            x = xs[r, j]
            if x < 0:
                raise QDomainError(f"negative count {x} in outcome row {r}")
            if s + x > n:
                raise QDomainError(f"outcome row {r} sums to more than n={n}")
            acc -= lf[x]
            acc += x * lt[j] + 0.5 * x * (x - 1) * log_q - den[j, n - s]
            s += x
        acc -= lf[n - s]
        o[r] = acc
    return out


def qmultinomial_frames_batch(outcomes, Py_ssize_t n, log_thetas, double q):
    """Marginal/conditional means and standard deviations of each deformed
    coordinate, conditioned on the preceding counts of the same row."""
    cdef const cnp.int64_t[:, ::1] xs = np.ascontiguousarray(outcomes, dtype=np.int64)
    cdef const double[::1] lt = np.ascontiguousarray(log_thetas, dtype=np.float64)
    cdef Py_ssize_t m_rows = xs.shape[0], k = xs.shape[1]
    means_arr = np.empty((m_rows, k))
    sds_arr = np.empty((m_rows, k))
    cdef double[:, ::1] means = means_arr
    cdef double[:, ::1] sds = sds_arr
    cdef double log_q = log(q)
    cdef Py_ssize_t r, j, s, m
    cdef double qm, d1, e2, var
    for r in range(m_rows):
        s = 0
        for j in range(k):
            m = n - s
            if m == 0:
                means[r, j] = 0.0
                sds[r, j] = 0.0
            else:
                qm = (1.0 - pow(q, <double>m)) / (1.0 - q)
                d1 = exp(lt[j] - _softplus(lt[j] + (m - 1) * log_q))
                e2 = exp(-_softplus(lt[j] + (m - 2) * log_q))
                var = (1.0 - q) / q * qm * qm * d1 * d1 * e2 + qm * d1 * e2
                means[r, j] = qm * d1
                sds[r, j] = sqrt(var)
            s += xs[r, j]
    return means_arr, sds_arr


def sw_log_approx_batch(outcomes, means, sds, double q):
    """Log of the product-form deformed standardized Stieltjes-Wigert
    approximation; NaN where any shifted argument is nonpositive or sd is 0."""
    cdef const cnp.int64_t[:, ::1] xs = np.ascontiguousarray(outcomes, dtype=np.int64)
    cdef const double[:, ::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, ::1] sd = np.ascontiguousarray(sds, dtype=np.float64)
    cdef Py_ssize_t m_rows = xs.shape[0], k = xs.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m_rows)
    cdef double[::1] o = out
    cdef double log_q = log(q)
    cdef double scale = pow(q, -1.5) * sqrt(1.0 - q)
    cdef double inv_q = 1.0 / q
    cdef double log_pref = (-0.875 * log_q - 0.5 * log(2.0 * M_PI)
                            + 0.5 * (log(-log_q) - log(inv_q - 1.0)))
    cdef Py_ssize_t r, j
    cdef cnp.int64_t x
    cdef double acc, deformed, u, lu
    for r in range(m_rows):
        acc = 0.0
        for j in range(k):
            x = xs[r, j]
            if not sd[r, j] > 0.0:
                acc = NAN
                break
            deformed = (pow(q, -<double>x) - 1.0) / (inv_q - 1.0)
            u = scale * (deformed - mu[r, j]) / sd[r, j] + inv_q
            if not u > 0.0:
                acc = NAN
                break
            lu = log(u)
            acc += log_pref - log(sd[r, j]) - 0.5 * lu - x * log_q + lu * lu / (2.0 * log_q)
        o[r] = acc
    return out
