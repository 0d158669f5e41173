"""The scaled multilook complex Wishart law ``W(L, Sigma)``.

Samples are complex arrays of shape ``(n, p, p)``.  The law satisfies
``E(Z) = Sigma`` and its density is

    f(Z) = L^{pL} |Z|^{L-p} / (|Sigma|^L Gamma_p(L)) exp(-L tr(Sigma^{-1} Z)).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import hermitian as herm
from .errors import DimensionMismatch, DomainError, EmptySample, ValidationError
from .specfun import ln_gamma, ln_multivariate_gamma

# Guard for densities with L in (p - 1, p).
LOOKS_GUARD = 1e-6

# Covariance of a forested region; the default simulation matrix.
FOREST_B = herm.hermitian(
    np.array(
        [
            [360932, 11050 + 3759j, 63896 + 1581j],
            [11050 - 3759j, 98960, 6593 + 6868j],
            [63896 - 1581j, 6593 - 6868j, 208843],
        ]
    )
)


@dataclass(frozen=True)
class WishartParams:
    """Number of looks ``L`` and covariance ``Sigma`` of a scaled Wishart law."""

    looks: float
    sigma: np.ndarray = field(repr=False)

    def __post_init__(self):
        sigma = herm.hermitian(self.sigma)
        if sigma.ndim != 2:
            raise ValidationError("sigma must be a single p x p matrix")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "looks", float(self.looks))
        p = sigma.shape[0]
        if not math.isfinite(self.looks) or self.looks < p - 1 + LOOKS_GUARD:
            raise DomainError(f"looks must exceed p - 1 = {p - 1}, got {self.looks}")
        herm.cholesky(sigma)

    @property
    def dim(self):
        return self.sigma.shape[0]

    def scaled(self, factor):
        return WishartParams(self.looks, factor * np.asarray(self.sigma))


@dataclass(frozen=True)
class ContaminationSpec:
    epsilon: float
    scale: float = 1000.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


def as_sample(items, dim=None):
    """Validate a collection of Hermitian matrices as an ``(n, p, p)`` array."""
    z = herm.hermitian(items)
    if z.ndim == 2:
        z = z[None]
        z.setflags(write=False)
    if z.ndim != 3:
        raise ValidationError(f"a sample must be an (n, p, p) array, got shape {z.shape}")
    if z.shape[0] == 0:
        raise EmptySample("sample is empty")
    if dim is not None and z.shape[-1] != dim:
        raise DimensionMismatch(f"sample dimension {z.shape[-1]} != {dim}")
    return z


def log_density(params, z):
    """Log-density at ``z`` (a matrix or a stack of matrices)."""
    z = np.asarray(z, dtype=complex)
    p = params.dim
    if z.shape[-1] != p or z.shape[-2] != p:
        raise DimensionMismatch(f"observation shape {z.shape} incompatible with p={p}")
    L = params.looks
    sigma_inv = herm.inverse(params.sigma)
    return (
        p * L * math.log(L)
        + (L - p) * herm.log_det(z)
        - L * herm.log_det(params.sigma)
        - ln_multivariate_gamma(p, L)
        - L * herm.trace_of_product(sigma_inv, z)
    )


def gamma_marginal_log_density(sigma_ii, looks, z):
    """Log-density of a diagonal entry ``Z_ii``: gamma with shape ``L``, mean ``sigma_ii``."""
    z = np.asarray(z, dtype=float)
    if not (sigma_ii > 0 and looks > 0 and np.all(z > 0)):
        raise DomainError("gamma marginal needs positive sigma_ii, looks and z")
    return (
        (looks - 1) * np.log(z)
        - looks * math.log(sigma_ii / looks)
        - ln_gamma(looks)
        - z * looks / sigma_ii
    )


def _integer_looks(params):
    L = params.looks
    if L != int(L) or L < params.dim:
        raise DomainError(f"sampling needs an integer number of looks >= p, got {L}")
    return int(L)


def _normals(seed, n, looks, p):
    # Unit-variance circular complex Gaussians: E|g|^2 = 1.
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, looks, p, 2))
    return (g[..., 0] + 1j * g[..., 1]) / math.sqrt(2.0)


def _outer_average(factor, g):
    s = g @ factor.T
    return np.einsum("nli,nlj->nij", s, s.conj()) / g.shape[1]


def sample(params, n, seed):
    """Draw ``n`` matrices, each the mean of ``L`` outer products ``s s^H``.

    ``s = F g`` with ``F`` the Cholesky factor of ``Sigma`` and ``g`` a standard
    circular complex Gaussian vector.  Output is a deterministic function of
    ``(params, n, seed)``.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    looks = _integer_looks(params)
    g = _normals(seed, n, looks, params.dim)
    z = _outer_average(herm.cholesky(params.sigma), g)
    z.setflags(write=False)
    return z


def sample_contaminated(params, spec, n, seed):
    """Each draw comes from ``W(L, scale * Sigma)`` with probability ``epsilon``.

    The Gaussian draws are shared with :func:`sample` for the same seed, so
    ``epsilon = 0`` reproduces ``sample(params, n, seed)`` exactly and
    ``epsilon = 1`` reproduces ``sample(params.scaled(scale), n, seed)``.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    looks = _integer_looks(params)
    g = _normals(seed, n, looks, params.dim)
    mix_rng = np.random.default_rng([seed, 1])
    outlier = mix_rng.random(n) < spec.epsilon
    z = _outer_average(herm.cholesky(params.sigma), g)
    if outlier.any():
        heavy = _outer_average(herm.cholesky(params.scaled(spec.scale).sigma), g)
        z = np.where(outlier[:, None, None], heavy, z)
    z.setflags(write=False)
    return z
