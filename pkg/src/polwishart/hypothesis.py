"""Homogeneity tests built on stochastic distances between ML fits.

Under ``H0: theta_1 = theta_2`` the statistic

    S = 2 N_X N_Y / (N_X + N_Y) * d(theta_1_hat, theta_2_hat) / (h'(0) phi''(1))

is asymptotically chi-square with ``M`` degrees of freedom, ``M`` being the
number of free real parameters.
"""

from dataclasses import dataclass, field

from .distances import DistanceMeasure, _coerce, distance, table_hphi
from .errors import DimensionMismatch, DomainError
from .estimation import fit
from .specfun import chi_square_sf
from .wishart import as_sample

DEFAULT_ALPHAS = (0.01, 0.05)


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    dof: int
    p_value: float
    reject_at: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class


def scaling_constant(measure):
    """``h'(0) * phi''(1)`` for the measure's generating pair."""
    spec = table_hphi(measure)
    return spec.h_prime_at_zero * spec.phi_second_at_one


def test_statistic(measure, fit_a, fit_b, n_a, n_b):
    if n_a < 1 or n_b < 1:
        raise DomainError(f"sample sizes must be positive, got {n_a} and {n_b}")
    m = _coerce(measure)
    weight = 2.0 * n_a * n_b / (n_a + n_b)
    return weight * distance(m, fit_a, fit_b) / scaling_constant(m)


test_statistic.__test__ = False


def degrees_of_freedom(p, looks_estimated=True):
    """``p^2`` real parameters in a Hermitian ``Sigma``, plus one for ``L``."""
    if p < 1:
        raise DomainError(f"dimension must be positive, got {p}")
    return p * p + (1 if looks_estimated else 0)


def outcome(statistic, dof, alpha_levels=DEFAULT_ALPHAS):
    p_value = float(chi_square_sf(statistic, dof))
    return TestOutcome(statistic, dof, p_value, {a: p_value <= a for a in alpha_levels})


def run_test(measure, sample_a, sample_b, alpha_levels=DEFAULT_ALPHAS, fixed_looks=None, dof=None):
    """Fit both samples, form the statistic and decide at every level in ``alpha_levels``.

    ``fixed_looks`` treats ``L`` as known for both samples; ``dof`` overrides
    the default degrees of freedom.
    """
    za, zb = as_sample(sample_a), as_sample(sample_b)
    if za.shape[-1] != zb.shape[-1]:
        raise DimensionMismatch(f"dimension {za.shape[-1]} != {zb.shape[-1]}")
    fa = fit(za, fixed_looks=fixed_looks).params
    fb = fit(zb, fixed_looks=fixed_looks).params
    s = test_statistic(measure, fa, fb, len(za), len(zb))
    if dof is None:
        dof = degrees_of_freedom(za.shape[-1], looks_estimated=fixed_looks is None)
    return outcome(s, dof, alpha_levels)


__all__ = [
    "DistanceMeasure",
    "TestOutcome",
    "degrees_of_freedom",
    "outcome",
    "run_test",
    "scaling_constant",
    "test_statistic",
]
