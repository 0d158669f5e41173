"""Scalar special functions with explicit domain checks.

Thin wrappers over :mod:`scipy.special`; the wrappers exist to reject
arguments outside the positive half-line instead of returning ``nan``/``inf``.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError


def _positive(x, name):
    if not np.all(np.asarray(x) > 0):
        raise DomainError(f"{name} requires a positive argument, got {x}")


def ln_gamma(x):
    _positive(x, "ln_gamma")
    return special.gammaln(x)


def digamma(x):
    _positive(x, "digamma")
    return special.psi(x)


def trigamma(x):
    _positive(x, "trigamma")
    return special.polygamma(1, x)


def ln_multivariate_gamma(p, looks):
    """``log Gamma_p(L) = p(p-1)/2 log(pi) + sum_{i<p} log Gamma(L - i)``."""
    if p < 1 or int(p) != p:
        raise DomainError(f"dimension must be a positive integer, got {p}")
    if not looks > p - 1:
        raise DomainError(f"multivariate gamma needs L > p - 1, got L={looks}, p={p}")
    i = np.arange(p)
    return 0.5 * p * (p - 1) * math.log(math.pi) + float(np.sum(special.gammaln(looks - i)))


def chi_square_sf(s, k):
    """Upper tail ``Pr(chi2_k > s)`` via the regularized incomplete gamma."""
    if not np.all(np.asarray(s) >= 0):
        raise DomainError(f"chi-square statistic must be nonnegative, got {s}")
    if k < 1:
        raise DomainError(f"degrees of freedom must be positive, got {k}")
    return special.gammaincc(k / 2.0, np.asarray(s, dtype=float) / 2.0)


def chi_square_cdf(s, k):
    if not np.all(np.asarray(s) >= 0):
        raise DomainError(f"chi-square statistic must be nonnegative, got {s}")
    return special.gammainc(k / 2.0, np.asarray(s, dtype=float) / 2.0)
