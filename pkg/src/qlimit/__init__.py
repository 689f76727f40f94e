"""Exact q-multinomial and multiple Heine distributions and their deformed
Stieltjes-Wigert local limit approximations."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .dist import (
    HeineParams,
    MomentPair,
    MultipleHeineParams,
    QBinomialParams,
    QMultinomialParams,
    conditional_moments,
    heine_deformed_moments,
    heine_pmf,
    marginal_moments,
    multiple_heine_pmf,
    qbinomial_pmf,
    qmultinomial_pmf,
    qtrinomial_pmf,
    sample,
)
from .errors import (
    ConvergenceError,
    EnumerationSizeError,
    OutOfSupportError,
    QDomainError,
    QLimitError,
)
from .qcalc import (
    QContext,
    q_binomial_coeff_log,
    q_exponential,
    q_factorial_log,
    q_multinomial_coeff_log,
    q_number,
    q_pochhammer_log,
    q_stirling_log,
)
from .swapprox import (
    StandardizationFrame,
    multiple_heine_sw_approx,
    qbinomial_sw_approx,
    qmultinomial_sw_approx,
    qtrinomial_sw_approx,
    sw_density,
)
