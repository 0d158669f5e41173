"""Monte Carlo harnesses: empirical test size, robustness to contamination,
sensitivity sweeps and the disjoint-block procedure for observed samples.

Every replica draws its samples from a seed derived from
``(base_seed, measure index, cell index, replica index)``, so each cell is
reproducible on its own and results do not depend on the worker count.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hermitian as herm
from .distances import ALL_MEASURES, DistanceMeasure, _coerce, distance
from .errors import ChiSquareDiverges, InsufficientData, NotPositiveDefinite, ValidationError
from .estimation import fit
from .hypothesis import DEFAULT_ALPHAS, degrees_of_freedom, outcome, scaling_constant
from .wishart import FOREST_B, ContaminationSpec, WishartParams, sample, sample_contaminated

KL = DistanceMeasure("kl")


@dataclass
class SizeExperimentConfig:
    looks: list
    sigma: np.ndarray = field(repr=False)
    sample_size_pairs: list
    alpha_levels: tuple = DEFAULT_ALPHAS
    replicas: int = 1000
    measures: tuple = ALL_MEASURES
    base_seed: int = 0
    estimate_looks: bool = True
    dof: int = None
    contamination: ContaminationSpec = None

    def __post_init__(self):
        self.sigma = herm.hermitian(self.sigma)
        herm.cholesky(self.sigma)
        self.looks = [int(v) if float(v).is_integer() else float(v) for v in self.looks]
        self.sample_size_pairs = [(int(a), int(b)) for a, b in self.sample_size_pairs]
        self.alpha_levels = tuple(float(a) for a in self.alpha_levels)
        self.measures = tuple(_coerce(m) for m in self.measures)
        if not self.looks:
            raise ValidationError("at least one value of looks is required", key="looks")
        if not self.sample_size_pairs:
            raise ValidationError("at least one sample size pair is required", key="pairs")
        if self.replicas < 1:
            raise ValidationError(f"replicas must be >= 1, got {self.replicas}", key="replicas")
        if any(n < 1 for pair in self.sample_size_pairs for n in pair):
            raise ValidationError("sample sizes must be >= 1", key="pairs")
        if any(not 0 < a < 1 for a in self.alpha_levels):
            raise ValidationError("alpha levels must lie in (0, 1)", key="alpha")
        if not self.measures:
            raise ValidationError("at least one measure is required", key="measures")

    @property
    def p(self):
        return self.sigma.shape[0]

    def cells(self):
        """``(cell_index, looks, n_x, n_y)`` in table order: pairs vary fastest."""
        out = []
        for L in self.looks:
            for nx, ny in self.sample_size_pairs:
                out.append((len(out), L, nx, ny))
        return out


@dataclass
class SizeResultRow:
    measure: str
    n_x: int
    n_y: int
    looks: float
    empirical_size: dict
    mean_distance: float
    cv: float
    wall_time_ms: float
    mean_statistic: float
    diverged: int


@dataclass
class RobustnessResultRow:
    n_x: int
    n_y: int
    looks: float
    empirical_size: dict
    mean_distance: float
    cv: float
    mse_looks_x: float
    mse_looks_y: float
    r1: float
    rmse_sigma_x: float
    rmse_sigma_y: float
    r2: float
    mean_statistic: float


def replica_seeds(base_seed, measure_index, cell_index, replica):
    """Two independent 64-bit seeds (X sample, Y sample) for one replica."""
    ss = np.random.SeedSequence([base_seed, measure_index, cell_index, replica])
    a, b = ss.generate_state(2, np.uint64)
    return int(a), int(b)


def default_workers():
    env = os.environ.get("POLWISHART_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _cv_percent(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    mean = values.mean()
    return float(values.std(ddof=1) / mean * 100) if mean > 0 else 0.0


# A replica task is a plain tuple so it pickles cheaply for the worker pool:
# (kind, measure, looks, sigma, n_x, n_y, seed_x, seed_y, estimate_looks, dof,
#  contamination)


def _one_replica(task):
    kind, measure, L, sigma, nx, ny, sx, sy, estimate, dof, contamination = task
    params = WishartParams(L, sigma)
    if contamination is None:
        zx = sample(params, nx, sx)
    else:
        zx = sample_contaminated(params, contamination, nx, sx)
    zy = sample(params, ny, sy)
    fixed = None if estimate else L
    t0 = time.perf_counter()
    fx = fit(zx, fixed_looks=fixed).params
    fy = fit(zy, fixed_looks=fixed).params
    try:
        d = distance(measure, fx, fy)
        s = 2.0 * nx * ny / (nx + ny) * d / scaling_constant(measure)
    except ChiSquareDiverges:
        d = s = math.inf
    p_value = outcome(s, dof).p_value
    elapsed = time.perf_counter() - t0
    extra = None
    if kind == "robustness":
        extra = (
            fx.looks,
            fy.looks,
            np.real(np.diagonal(fx.sigma)).copy(),
            np.real(np.diagonal(fy.sigma)).copy(),
        )
    return d, s, p_value, elapsed, extra


def _map(tasks, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(tasks) < 2:
        return [_one_replica(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() returns results in task order regardless of scheduling.
        return list(pool.map(_one_replica, tasks, chunksize=chunk))


def _tasks(kind, config, measure, measure_index, cell, contamination=None):
    cell_index, L, nx, ny = cell
    dof = config.dof or degrees_of_freedom(config.p, config.estimate_looks)
    out = []
    for k in range(config.replicas):
        sx, sy = replica_seeds(config.base_seed, measure_index, cell_index, k)
        out.append(
            (kind, measure, L, np.asarray(config.sigma), nx, ny, sx, sy,
             config.estimate_looks, dof, contamination)
        )
    return out


def _summaries(results, alphas):
    d = np.array([r[0] for r in results])
    s = np.array([r[1] for r in results])
    pv = np.array([r[2] for r in results])
    finite = np.isfinite(d)
    sizes = {a: float(np.mean(pv <= a)) for a in alphas}
    mean_d = float(d[finite].mean()) if finite.any() else math.nan
    mean_s = float(s[finite].mean()) if finite.any() else math.nan
    return sizes, mean_d, _cv_percent(d[finite]), mean_s, int((~finite).sum())


def null_statistics(config, measure_index=0, cell_index=0, workers=1):
    """Test statistics of every replica in one (measure, cell) of ``config``."""
    measure = config.measures[measure_index]
    cell = config.cells()[cell_index]
    results = _map(_tasks("size", config, measure, measure_index, cell), workers)
    return np.array([r[1] for r in results])


def empirical_size(config, workers=1, select=None):
    """Empirical size ``C / T`` of every measure in every (looks, N_X, N_Y) cell.

    ``select(measure_label, looks, n_x, n_y)`` restricts the run to some
    cells; skipped cells keep their indices, so selected rows are identical
    to the corresponding rows of the full run.

    Replicas whose chi-square distance diverges count as rejections (the
    statistic is infinite) and are also reported in ``diverged``; ``d_bar``
    and CV are taken over finite distances only.
    """
    rows = []
    for mi, measure in enumerate(config.measures):
        for cell in config.cells():
            if select is not None and not select(measure.label, *cell[1:]):
                continue
            results = _map(_tasks("size", config, measure, mi, cell), workers)
            sizes, mean_d, cv, mean_s, diverged = _summaries(results, config.alpha_levels)
            _, L, nx, ny = cell
            wall = float(np.mean([r[3] for r in results]) * 1e3)
            rows.append(
                SizeResultRow(measure.label, nx, ny, L, sizes, mean_d, cv, wall, mean_s, diverged)
            )
    return rows


def robustness_study(config, contamination=None, measure=KL, workers=1, select=None):
    """Size of the test with a contaminated X sample against a clean Y sample.

    Also reports ``MSE(L_hat) = mean (L_hat - L)^2`` and the relative error
    ``rMSE(Sigma_hat) = mean sum_h (Sigma_hat_hh - Sigma_hh)^2 / Sigma_hh``
    for both samples, with ratios ``r1`` (looks) and ``r2`` (covariance).
    """
    contamination = contamination or config.contamination or ContaminationSpec(1e-5, 1000.0)
    measure = _coerce(measure)
    true_diag = np.real(np.diagonal(config.sigma))
    rows = []
    for cell in config.cells():
        if select is not None and not select(measure.label, *cell[1:]):
            continue
        tasks = _tasks("robustness", config, measure, 0, cell, contamination)
        results = _map(tasks, workers)
        sizes, mean_d, cv, mean_s, _ = _summaries(results, config.alpha_levels)
        _, L, nx, ny = cell
        lx = np.array([r[4][0] for r in results])
        ly = np.array([r[4][1] for r in results])
        dx = np.array([r[4][2] for r in results])
        dy = np.array([r[4][3] for r in results])
        mse_x = float(np.mean((lx - L) ** 2))
        mse_y = float(np.mean((ly - L) ** 2))
        rmse_x = float(np.mean(np.sum((dx - true_diag) ** 2 / true_diag, axis=1)))
        rmse_y = float(np.mean(np.sum((dy - true_diag) ** 2 / true_diag, axis=1)))
        rows.append(
            RobustnessResultRow(
                nx, ny, L, sizes, mean_d, cv,
                mse_x, mse_y, mse_x / mse_y if mse_y > 0 else math.nan,
                rmse_x, rmse_y, rmse_x / rmse_y if rmse_y > 0 else math.nan,
                mean_s,
            )
        )
    return rows


@dataclass
class SweepPoint:
    value: float
    measure: str
    distance: float
    status: str = "ok"


def perturb_sigma(sigma, i, j, value):
    """Copy of ``sigma`` with entry ``(i, j)`` replaced by ``value``.

    Off-diagonal entries keep their imaginary part; only the real part is set,
    and the mirrored entry is updated to stay Hermitian.
    """
    m = np.array(sigma, dtype=complex)
    if i == j:
        m[i, i] = value
    else:
        m[i, j] = value + 1j * m[i, j].imag
        m[j, i] = np.conj(m[i, j])
    return m


def sensitivity_sweep(fixed, vary, grid, measures):
    """Distance from ``fixed`` to a one-parameter family of perturbed laws.

    ``vary`` is ``"looks"`` or ``("sigma", i, j)``.  Grid points where the
    perturbed law is invalid (non positive definite covariance, looks out of
    range) or a distance diverges are flagged and the sweep continues.
    """
    if len(grid) == 0:
        raise ValidationError("sensitivity grid is empty", key="grid")
    measures = [_coerce(m) for m in measures]
    points = []
    for x in grid:
        try:
            if vary == "looks":
                other = WishartParams(x, fixed.sigma)
            else:
                _, i, j = vary
                other = WishartParams(fixed.looks, perturb_sigma(fixed.sigma, i, j, x))
        except NotPositiveDefinite:
            points.extend(SweepPoint(x, m.label, math.nan, "not_positive_definite") for m in measures)
            continue
        except ValidationError as exc:
            points.extend(SweepPoint(x, m.label, math.nan, f"invalid: {exc}") for m in measures)
            continue
        except Exception as exc:  # DomainError from looks outside (p - 1, inf)
            points.extend(SweepPoint(x, m.label, math.nan, exc.__class__.__name__) for m in measures)
            continue
        for m in measures:
            try:
                points.append(SweepPoint(x, m.label, distance(m, fixed, other)))
            except ChiSquareDiverges:
                points.append(SweepPoint(x, m.label, math.inf, "diverges"))
    return points


def block_pairs(total, n_x, n_y, remaining="block"):
    """Disjoint-block pairing of ``total`` observations.

    (b1) split ``[0, total)`` into ``total // n_x`` consecutive X-blocks;
    (b2) for each X-block split the remaining observations, in index order,
    into disjoint Y-blocks of size ``n_y``; (b3) pair each X-block with each
    of its Y-blocks.

    ``remaining="block"`` takes the complement of the current X-block;
    ``remaining="all"`` takes only observations outside every X-block.
    Blocks are returned as integer index arrays.  An empty list means no pair
    could be formed.
    """
    if n_x < 1 or n_y < 1:
        raise ValidationError("block sizes must be positive", key="nx/ny")
    if total < n_x:
        raise InsufficientData(f"{total} observations cannot hold an X-block of size {n_x}")
    if remaining not in ("block", "all"):
        raise ValidationError(f"remaining must be 'block' or 'all', got {remaining!r}")
    n_blocks = total // n_x
    idx = np.arange(total)
    pairs = []
    for k in range(n_blocks):
        x = idx[k * n_x:(k + 1) * n_x]
        if remaining == "block":
            rest = np.concatenate([idx[: k * n_x], idx[(k + 1) * n_x:]])
        else:
            rest = idx[n_blocks * n_x:]
        for j in range(len(rest) // n_y):
            pairs.append((x, rest[j * n_y:(j + 1) * n_y]))
    return pairs


def segments(index):
    """Compact ``start:stop`` text for an index array, ``;``-separated."""
    index = np.asarray(index)
    if index.size == 0:
        return ""
    breaks = np.flatnonzero(np.diff(index) != 1)
    starts = np.concatenate([[index[0]], index[breaks + 1]])
    stops = np.concatenate([index[breaks] + 1, [index[-1] + 1]])
    return ";".join(f"{a}:{b}" for a, b in zip(starts, stops))


@dataclass
class BlockTestRow:
    x_block: str
    y_block: str
    statistic: float
    dof: int
    p_value: float
    reject_at: dict


def block_study(zs, n_x, n_y, measure=KL, alpha_levels=DEFAULT_ALPHAS, remaining="block",
                fixed_looks=None, dof=None):
    """Run the homogeneity test on every block pair of one observed sample.

    Returns ``(rows, sizes)``; ``sizes`` maps each level to the rejection
    rate, and is empty when the pairing is empty.
    """
    measure = _coerce(measure)
    zs = np.asarray(zs)
    pairs = block_pairs(len(zs), n_x, n_y, remaining)
    if dof is None:
        dof = degrees_of_freedom(zs.shape[-1], fixed_looks is None)
    fits = {}

    def fit_of(index):
        key = segments(index)
        if key not in fits:
            fits[key] = fit(zs[index], fixed_looks=fixed_looks).params
        return fits[key]

    rows = []
    for x, y in pairs:
        try:
            s = (2.0 * n_x * n_y / (n_x + n_y)) * distance(measure, fit_of(x), fit_of(y)) / scaling_constant(measure)
        except ChiSquareDiverges:
            s = math.inf
        res = outcome(s, dof, alpha_levels)
        rows.append(BlockTestRow(segments(x), segments(y), s, dof, res.p_value, res.reject_at))
    sizes = {a: float(np.mean([r.reject_at[a] for r in rows])) for a in alpha_levels} if rows else {}
    return rows, sizes


def forest_config(**overrides):
    """Size-study factor grid on the forest covariance ``B``: L in {4, 8, 16}, six sample-size pairs, T = 5500."""
    cfg = dict(
        looks=[4, 8, 16],
        sigma=FOREST_B,
        sample_size_pairs=[(49, 49), (49, 121), (49, 400), (121, 121), (121, 400), (400, 400)],
        alpha_levels=(0.01, 0.05),
        replicas=5500,
    )
    cfg.update(overrides)
    return SizeExperimentConfig(**cfg)
