"""Reference implementations that share no code with the package."""

import mpmath
import numpy as np


def cofactor_det(m):
    """Determinant by Laplace expansion along the first row."""
    m = [list(r) for r in m]
    if len(m) == 1:
        return m[0][0]
    total = 0
    for j in range(len(m)):
        minor = [r[:j] + r[j + 1:] for r in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_det(minor)
    return total


def wishart_log_density(looks, sigma, z):
    """Direct transcription of the scaled Wishart density in mpmath."""
    p = len(sigma)
    L = mpmath.mpf(looks)
    det_s = mpmath.re(cofactor_det([[mpmath.mpc(v) for v in r] for r in sigma]))
    det_z = mpmath.re(cofactor_det([[mpmath.mpc(v) for v in r] for r in z]))
    s_inv = mpmath.inverse(mpmath.matrix([[mpmath.mpc(v) for v in r] for r in sigma]))
    zm = mpmath.matrix([[mpmath.mpc(v) for v in r] for r in z])
    tr = mpmath.re(sum((s_inv * zm)[i, i] for i in range(p)))
    log_gp = p * (p - 1) / 2 * mpmath.log(mpmath.pi) + sum(mpmath.loggamma(L - i) for i in range(p))
    return p * L * mpmath.log(L) + (L - p) * mpmath.log(det_z) - L * mpmath.log(det_s) - log_gp - L * tr


def profile_loglik_looks(zs):
    """Profile log-likelihood in L with Sigma at the sample mean, in mpmath.

    Terms that do not depend on L are dropped.
    """
    zs = np.asarray(zs)
    n, p, _ = zs.shape
    mean_log_det = mpmath.fsum(mpmath.log(float(np.real(np.linalg.det(z)))) for z in zs) / n
    log_det_mean = mpmath.log(float(np.real(np.linalg.det(zs.mean(axis=0)))))

    def ell(L):
        # tr(Sigma_hat^-1 Z_k) averages to p exactly.
        log_gp = sum(mpmath.loggamma(L - i) for i in range(p))
        return p * L * mpmath.log(L) + L * mean_log_det - L * log_det_mean - log_gp - L * p

    return ell


def golden_section_max(f, a, b, tol=1e-11):
    # Near the maximum f is flat to second order, so locating it to tol needs
    # roughly 2 * log10(1 / tol) digits in f.
    with mpmath.workdps(40):
        return _golden(f, a, b, tol)


def _golden(f, a, b, tol):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    g = (mpmath.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * (1 + abs(a)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2
