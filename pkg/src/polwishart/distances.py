"""Closed-form stochastic distances between two scaled Wishart laws.

Every closed form except Kullback-Leibler reduces to the power integral

    log int f_X^a f_Y^b dZ,   a + b = 1,

which for Wishart densities is

    a c(X) + b c(Y) + log Gamma_p(E) - E log|a L_X Sigma_X^{-1} + b L_Y Sigma_Y^{-1}|

with ``c(.) = pL log L - L log|Sigma| - log Gamma_p(L)`` and ``E = a L_X + b L_Y``.
It converges only when ``E > p - 1`` and the matrix is positive definite;
with ``b < 0`` (chi-square) that is a real restriction.  All Gamma products
stay in log space.

``hphi_divergence_p1_oracle`` evaluates the defining (h, phi) integral by
quadrature for ``p = 1`` and is used to check the closed forms.
"""

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate

from . import hermitian as herm
from .errors import (
    ChiSquareDiverges,
    DimensionMismatch,
    DomainError,
    NotPositiveDefinite,
    QuadratureFailure,
    ValidationError,
)
from .specfun import digamma, ln_multivariate_gamma
from .wishart import gamma_marginal_log_density

KINDS = ("chi2", "kl", "renyi", "bhattacharyya", "hellinger")
DEFAULT_BETA = 0.9

_ALIASES = {
    "chi2": "chi2",
    "chisquare": "chi2",
    "chi-square": "chi2",
    "kl": "kl",
    "kullbackleibler": "kl",
    "kullback-leibler": "kl",
    "renyi": "renyi",
    "bhattacharyya": "bhattacharyya",
    "b": "bhattacharyya",
    "hellinger": "hellinger",
    "h": "hellinger",
}


@dataclass(frozen=True)
class DistanceMeasure:
    kind: str
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValidationError(f"unknown distance measure {self.kind!r}", key="measure")
        object.__setattr__(self, "kind", kind)
        if kind == "renyi" and not 0.0 < self.beta < 1.0:
            raise DomainError(f"Renyi order must lie in (0, 1), got {self.beta}")

    @classmethod
    def parse(cls, text):
        """Parse ``kl``, ``chi2``, ``renyi``, ``renyi=<beta>``, ``bhattacharyya`` or ``hellinger``."""
        name, sep, arg = str(text).strip().partition("=")
        if sep:
            if _ALIASES.get(name.lower()) != "renyi":
                raise ValidationError(f"only renyi takes a parameter, got {text!r}", key="measure")
            try:
                beta = float(arg)
            except ValueError:
                raise ValidationError(f"bad Renyi order in {text!r}", key="measure") from None
            return cls("renyi", beta)
        return cls(name)

    @property
    def label(self):
        return f"renyi={self.beta:g}" if self.kind == "renyi" else self.kind

    def __str__(self):
        return self.label


ALL_MEASURES = tuple(DistanceMeasure(k) for k in KINDS)


@dataclass(frozen=True)
class HPhiSpec:
    h: Callable[[float], float]
    phi: Callable[[float], float]
    h_prime_at_zero: float
    phi_second_at_one: float


def _log(x):
    return mpmath.log(x) if isinstance(x, mpmath.mpf) else np.log(x)


def _sqrt(x):
    return mpmath.sqrt(x) if isinstance(x, mpmath.mpf) else np.sqrt(x)


def _coerce(measure):
    return measure if isinstance(measure, DistanceMeasure) else DistanceMeasure.parse(measure)


def table_hphi(measure):
    """The ``(h, phi)`` pair generating a distance, with ``h'(0)`` and ``phi''(1)``."""
    m = _coerce(measure)
    if m.kind == "chi2":
        return HPhiSpec(lambda y: y / 4, lambda x: (x - 1) ** 2 * (x + 1) / x, 0.25, 4.0)
    if m.kind == "kl":
        return HPhiSpec(lambda y: y / 2, lambda x: (x - 1) * _log(x), 0.5, 2.0)
    if m.kind == "renyi":
        b = m.beta
        return HPhiSpec(
            lambda y: np.log((b - 1) * y + 1) / (b - 1),
            lambda x: (x ** (1 - b) + x**b - b * (x - 1) - 2) / (2 * (b - 1)),
            1.0,
            b,
        )
    if m.kind == "bhattacharyya":
        return HPhiSpec(lambda y: -np.log1p(-y), lambda x: -_sqrt(x) + (x + 1) / 2, 1.0, 0.25)
    return HPhiSpec(lambda y: y / 2, lambda x: (_sqrt(x) - 1) ** 2, 0.5, 0.5)


def _log_norm(p, looks, log_det_sigma):
    return p * looks * math.log(looks) - looks * log_det_sigma - ln_multivariate_gamma(p, looks)


def log_power_integral(a, b, weight):
    """``log int f_a^w f_b^(1-w) dZ`` for Wishart parameter sets ``a`` and ``b``.

    Raises :class:`NotPositiveDefinite` or :class:`DomainError` when the
    integral diverges.
    """
    p = a.dim
    w, v = weight, 1.0 - weight
    e = w * a.looks + v * b.looks
    if not e > p - 1:
        raise DomainError(f"power integral diverges: combined looks {e} <= p - 1")
    combo = w * a.looks * herm.inverse(a.sigma) + v * b.looks * herm.inverse(b.sigma)
    return (
        w * _log_norm(p, a.looks, herm.log_det(a.sigma))
        + v * _log_norm(p, b.looks, herm.log_det(b.sigma))
        + ln_multivariate_gamma(p, e)
        - e * herm.log_det(herm.hermitian(combo, rtol=1e-6))
    )


def _kl(a, b):
    p = a.dim
    i = np.arange(p)
    la, lb = a.looks, b.looks
    bracket = (
        herm.log_det(a.sigma)
        - herm.log_det(b.sigma)
        + float(np.sum(digamma(la - i) - digamma(lb - i)))
        - p * (math.log(la) - math.log(lb))
    )
    traces = lb * herm.trace_of_product(herm.inverse(b.sigma), a.sigma) + la * herm.trace_of_product(
        herm.inverse(a.sigma), b.sigma
    )
    return (la - lb) / 2 * bracket - p * (la + lb) / 2 + traces / 2


def _chi2_term(i, j):
    # int f_j^2 / f_i, finite only when 2 L_j - L_i > p - 1 and
    # 2 L_j Sigma_j^{-1} - L_i Sigma_i^{-1} is positive definite.
    try:
        return log_power_integral(j, i, 2.0)
    except (DomainError, NotPositiveDefinite) as exc:
        raise ChiSquareDiverges(
            "chi-square distance is infinite for these parameters "
            "(2 L_j - L_i <= p - 1 or 2 L_j Sigma_j^-1 - L_i Sigma_i^-1 not positive definite)"
        ) from exc


def _chi2(a, b):
    return (math.expm1(_chi2_term(a, b)) + math.expm1(_chi2_term(b, a))) / 4


def _renyi(a, b, beta):
    l1 = log_power_integral(a, b, beta)
    l2 = log_power_integral(b, a, beta)
    hi, lo = max(l1, l2), min(l1, l2)
    # log((e^l1 + e^l2) / 2) without losing small differences
    return (hi + math.log1p(math.expm1(lo - hi) / 2)) / (beta - 1)


def _bhattacharyya(a, b):
    # Average of both orientations so the value is exactly symmetric.
    return -(log_power_integral(a, b, 0.5) + log_power_integral(b, a, 0.5)) / 2


def distance(measure, a, b):
    """Symmetric distance between ``W(a)`` and ``W(b)`` (``WishartParams``).

    ``measure`` is a :class:`DistanceMeasure` or a string accepted by
    :meth:`DistanceMeasure.parse`.
    """
    m = _coerce(measure)
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension {a.dim} != {b.dim}")
    if m.kind == "kl":
        d = _kl(a, b)
    elif m.kind == "chi2":
        d = _chi2(a, b)
    elif m.kind == "renyi":
        d = _renyi(a, b, m.beta)
    elif m.kind == "bhattacharyya":
        d = _bhattacharyya(a, b)
    else:
        d = -math.expm1(-_bhattacharyya(a, b))
    # Rounding can leave tiny negative values at coincident parameters.
    return max(d, 0.0)


def _log_pdf_p1(params):
    if params.dim != 1:
        raise DimensionMismatch("the quadrature oracle is defined for p = 1 only")
    s2 = float(np.real(params.sigma[0, 0]))
    L = params.looks
    return lambda z: gamma_marginal_log_density(s2, L, z)


def hphi_divergence_p1_oracle(spec, a, b, symmetrize=False, rtol=1e-9):
    """``h(int phi(f_a / f_b) f_b dz)`` on ``(0, inf)`` by adaptive quadrature.

    Integrand points where the density ratio is indeterminate count as zero.
    With ``symmetrize=True`` the two orientations are averaged.
    """
    if isinstance(spec, (DistanceMeasure, str)):
        spec = table_hphi(spec)
    if symmetrize:
        return (
            hphi_divergence_p1_oracle(spec, a, b, rtol=rtol)
            + hphi_divergence_p1_oracle(spec, b, a, rtol=rtol)
        ) / 2
    la, lfb_ = _log_pdf_p1(a), _log_pdf_p1(b)

    def integrand(z):
        if z <= 0:
            return 0.0
        lfa, lfb = float(la(z)), float(lfb_(z))
        if lfa == -np.inf and lfb == -np.inf:
            return 0.0
        with np.errstate(all="ignore"):
            val = float(spec.phi(np.exp(lfa - lfb)) * np.exp(lfb))
        if math.isfinite(val) and val != 0.0:
            return val
        # Over/underflow in double precision: redo the product in extended range.
        val = spec.phi(mpmath.exp(lfa - lfb)) * mpmath.exp(lfb)
        return float(val)

    # Split at a few multiples of each mean so quad sees the mass.
    means = sorted({float(np.real(a.sigma[0, 0])), float(np.real(b.sigma[0, 0]))})
    cuts = sorted({c * m for m in means for c in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)})
    edges = [0.0] + cuts
    pieces = list(zip(edges[:-1], edges[1:])) + [(edges[-1], np.inf)]
    results = [
        integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol, limit=500, full_output=1)
        for lo, hi in pieces
    ]
    total = math.fsum(r[0] for r in results)
    for (lo, hi), r in zip(pieces, results):
        if len(r) < 4:
            continue
        # Roundoff warnings on negligible pieces are harmless; divergence is not.
        if "divergent" in r[3] or not r[1] <= rtol * abs(total):
            raise QuadratureFailure(f"quadrature on [{lo}, {hi}] failed: {r[3]}")
    with np.errstate(all="ignore"):
        result = float(spec.h(total))
    if not math.isfinite(result):
        raise QuadratureFailure(f"h is undefined at integral value {total}")
    return max(result, 0.0)
