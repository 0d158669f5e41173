"""Maximum-likelihood estimation of ``(L, Sigma)`` and information matrices.

The ML estimate of ``Sigma`` is the sample mean.  The number of looks solves

    p log L + mean(log|Z_k|) - log|mean(Z_k)| - sum_{i<p} digamma(L - i) = 0,

which is strictly decreasing in ``L``; we find its root with Newton-Raphson
safeguarded by bisection.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import hermitian as herm
from .errors import DomainError, NoRootInBracket, NumericalFailure
from .specfun import digamma, trigamma
from .wishart import WishartParams, as_sample

LOOKS_UPPER = 1e5
LOOKS_LOWER_OFFSET = 1e-4
SCORE_TOL = 1e-10
STEP_RTOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class MLFit:
    params: WishartParams
    iterations: int
    score_residual: float
    crlb_looks_variance: float


@dataclass(frozen=True)
class FisherInfo:
    looks_block: float
    sigma_block: np.ndarray
    cross_block: np.ndarray


def estimate_sigma(sample):
    z = as_sample(sample)
    return herm.hermitian(z.mean(axis=0))


def looks_score(looks, p, mean_log_det, log_det_sigma_hat):
    if not looks > p - 1:
        raise DomainError(f"looks score needs L > p - 1, got L={looks}, p={p}")
    i = np.arange(p)
    return (
        p * math.log(looks)
        + mean_log_det
        - log_det_sigma_hat
        - float(np.sum(digamma(looks - i)))
    )


def looks_score_derivative(looks, p):
    """``p / L - sum_{i<p} trigamma(L - i)``; negative for every ``L > p - 1``."""
    i = np.arange(p)
    return p / looks - float(np.sum(trigamma(looks - i)))


def _initial_looks(p, gap, lo, hi):
    # For large L the score behaves like p^2 / (2L) - gap.
    if gap <= 0:
        return lo
    return min(max(p * p / (2.0 * gap), lo), hi)


def estimate_looks(sample, sigma_hat=None, return_info=False):
    """Root of :func:`looks_score` on ``[p - 1 + 1e-4, 1e5]``.

    With ``return_info=True`` returns ``(L_hat, iterations, score_residual)``.
    """
    z = as_sample(sample)
    p = z.shape[-1]
    if sigma_hat is None:
        sigma_hat = estimate_sigma(z)
    mean_log_det = float(np.mean(herm.log_det(z)))
    log_det_hat = herm.log_det(sigma_hat)

    def score(L):
        return looks_score(L, p, mean_log_det, log_det_hat)

    lo, hi = p - 1 + LOOKS_LOWER_OFFSET, LOOKS_UPPER
    s_lo, s_hi = score(lo), score(hi)
    if not (s_lo > 0 > s_hi):
        if abs(s_hi) < SCORE_TOL:
            return (hi, 0, s_hi) if return_info else hi
        raise NoRootInBracket(
            f"looks score has constant sign on [{lo}, {hi}] "
            f"(score(lo)={s_lo:.3g}, score(hi)={s_hi:.3g}); degenerate sample?"
        )

    L = _initial_looks(p, log_det_hat - mean_log_det, lo, hi)
    for it in range(1, MAX_ITER + 1):
        s = score(L)
        if abs(s) < SCORE_TOL:
            break
        if s > 0:
            lo = L
        else:
            hi = L
        step = s / looks_score_derivative(L, p)
        new = L - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - L) < STEP_RTOL * L:
            L = new
            s = score(L)
            break
        L = new
    else:
        raise NumericalFailure(f"Newton-Raphson did not converge in {MAX_ITER} iterations")
    return (L, it, s) if return_info else L


def fit(sample, fixed_looks=None):
    """ML fit of a sample; ``fixed_looks`` skips the estimation of ``L``.

    ``crlb_looks_variance`` is the bound for ``L_hat`` from this sample, i.e.
    the single-observation bound divided by the sample size.
    """
    z = as_sample(sample)
    sigma_hat = estimate_sigma(z)
    if fixed_looks is None:
        looks, iterations, residual = estimate_looks(z, sigma_hat, return_info=True)
    else:
        looks, iterations, residual = float(fixed_looks), 0, 0.0
    params = WishartParams(looks, sigma_hat)
    return MLFit(params, iterations, residual, cramer_rao(params)[0] / len(z))


def fisher_info(params):
    """Block-diagonal Fisher information of ``gamma = [L, vec(Sigma)]``.

    The looks block sums trigamma over ``i = 0 .. p-1``, which is what direct
    differentiation of the score gives.  ``vec`` stacks columns; the Sigma
    block is the covariance ``E[u u^H]`` of ``u = vec(dl/dSigma)``, which is
    ``L conj(Sigma^-1) kron Sigma^-1`` and reduces to
    ``L Sigma^-1 kron Sigma^-1`` for real ``Sigma``.
    """
    p, L = params.dim, params.looks
    sigma_inv = np.asarray(herm.inverse(params.sigma))
    looks_block = -looks_score_derivative(L, p)
    sigma_block = L * np.kron(sigma_inv.conj(), sigma_inv)
    return FisherInfo(looks_block, sigma_block, np.zeros(p * p))


def cramer_rao(params):
    """Inverse Fisher information: ``(looks_variance, (conj(Sigma) kron Sigma) / L)``."""
    info = fisher_info(params)
    sigma = np.asarray(params.sigma)
    return 1.0 / info.looks_block, np.kron(sigma.conj(), sigma) / params.looks
