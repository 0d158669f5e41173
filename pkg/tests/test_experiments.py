import math

import numpy as np
import pytest

from polwishart.distances import DistanceMeasure
from polwishart.errors import InsufficientData, ValidationError
from polwishart.experiments import (
    SizeExperimentConfig,
    block_pairs,
    block_study,
    empirical_size,
    null_statistics,
    forest_config,
    perturb_sigma,
    replica_seeds,
    robustness_study,
    segments,
    sensitivity_sweep,
)
from polwishart.wishart import ContaminationSpec, WishartParams, sample


def small_config(forest_b, **kw):
    cfg = dict(looks=[4], sigma=forest_b, sample_size_pairs=[(30, 40)], replicas=20,
               measures=["kl", "chi2"], base_seed=3)
    cfg.update(kw)
    return SizeExperimentConfig(**cfg)


def test_config_validation(forest_b):
    with pytest.raises(ValidationError) as err:
        small_config(forest_b, replicas=0)
    assert err.value.key == "replicas"
    with pytest.raises(ValidationError) as err:
        small_config(forest_b, alpha_levels=(1.5,))
    assert err.value.key == "alpha"
    with pytest.raises(ValidationError):
        small_config(forest_b, sample_size_pairs=[])


def test_forest_config_grid():
    cfg = forest_config()
    assert cfg.looks == [4, 8, 16] and cfg.replicas == 5500
    assert len(cfg.cells()) == 18
    assert cfg.cells()[11] == (11, 8, 400, 400)


def test_seeds_are_distinct_and_stable():
    seeds = {replica_seeds(0, m, c, k) for m in range(2) for c in range(3) for k in range(50)}
    assert len(seeds) == 300
    assert replica_seeds(5, 1, 2, 3) == replica_seeds(5, 1, 2, 3)


def test_size_rows_and_worker_independence(forest_b):
    cfg = small_config(forest_b)
    one = empirical_size(cfg, workers=1)
    two = empirical_size(cfg, workers=2)
    assert [r.measure for r in one] == ["kl", "chi2"]
    for a, b in zip(one, two):
        assert a.empirical_size == b.empirical_size
        assert a.mean_distance == b.mean_distance and a.cv == b.cv
    kl = one[0]
    assert (kl.n_x, kl.n_y, kl.looks) == (30, 40, 4)
    assert set(kl.empirical_size) == {0.01, 0.05}
    assert kl.empirical_size[0.01] <= kl.empirical_size[0.05]


def test_select_reproduces_full_run_rows(forest_b):
    cfg = small_config(forest_b, sample_size_pairs=[(30, 40), (20, 20)])
    full = empirical_size(cfg)
    part = empirical_size(cfg, select=lambda m, L, nx, ny: m == "chi2" and nx == 20)
    assert len(part) == 1
    assert part[0].empirical_size == full[3].empirical_size
    assert part[0].mean_statistic == full[3].mean_statistic


def test_fixed_looks_run(forest_b):
    rows = empirical_size(small_config(forest_b, estimate_looks=False, measures=["kl"]))
    assert 0 <= rows[0].empirical_size[0.05] <= 1


def test_robustness_rows(forest_b):
    cfg = small_config(forest_b, measures=["kl"])
    rows = robustness_study(cfg, ContaminationSpec(0.2, 1000.0))
    r = rows[0]
    # heavy contamination of X blows up both its errors and the test size
    assert r.mse_looks_x > r.mse_looks_y and r.r1 > 1 and r.r2 > 10
    assert r.empirical_size[0.05] > 0.5


def test_perturb_sigma(forest_b):
    m = perturb_sigma(forest_b, 0, 1, 5.0)
    assert m[0, 1] == 5.0 + 3759j and m[1, 0] == 5.0 - 3759j
    assert perturb_sigma(forest_b, 2, 2, 7.0)[2, 2] == 7.0


def test_sensitivity_flags_invalid_points():
    fixed = WishartParams(4, np.eye(2))
    pts = sensitivity_sweep(fixed, ("sigma", 0, 1), [0.0, 0.5, 1.5], ["kl", "hellinger"])
    assert [p.status for p in pts[:2]] == ["ok", "ok"]
    assert pts[0].distance == 0.0
    assert all(p.status == "not_positive_definite" and math.isnan(p.distance) for p in pts[4:])
    pts = sensitivity_sweep(fixed, "looks", [0.5, 4, 6], ["chi2"])
    assert pts[0].status != "ok" and pts[1].distance == 0.0
    assert pts[2].status == "ok"
    assert sensitivity_sweep(fixed, "looks", [1.2], ["chi2"])[0].status == "diverges"
    with pytest.raises(ValidationError):
        sensitivity_sweep(fixed, "looks", [], ["kl"])


def test_block_pairs_counts():
    assert len(block_pairs(100, 50, 50)) == 2
    assert len(block_pairs(147, 49, 49)) == 6
    assert block_pairs(90, 49, 49) == []
    assert len(block_pairs(160, 50, 50, remaining="all")) == 0
    assert len(block_pairs(170, 50, 20, remaining="all")) == 3
    with pytest.raises(InsufficientData):
        block_pairs(10, 49, 49)
    for x, y in block_pairs(147, 49, 49):
        assert not set(x) & set(y)


def test_segments():
    assert segments(np.arange(0, 5)) == "0:5"
    assert segments(np.r_[0:3, 7:9]) == "0:3;7:9"
    assert segments([]) == ""


def test_block_study(forest_b):
    z = sample(WishartParams(8, forest_b), 147, seed=6)
    rows, sizes = block_study(z, 49, 49, DistanceMeasure("kl"))
    assert len(rows) == 6 and set(sizes) == {0.01, 0.05}
    assert rows[0].x_block == "0:49" and rows[0].y_block == "49:98"
    rows, sizes = block_study(z[:90], 49, 49)
    assert rows == [] and sizes == {}


def test_null_statistics_match_size_rows(forest_b):
    cfg = small_config(forest_b)
    s = null_statistics(cfg, measure_index=0, cell_index=0)
    row = empirical_size(cfg, select=lambda m, *_: m == "kl")[0]
    assert len(s) == 20 and np.mean(s) == pytest.approx(row.mean_statistic)
