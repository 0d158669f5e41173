import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from polwishart import dataio
from polwishart.errors import ParseError, ValidationError
from polwishart.experiments import SizeResultRow
from polwishart.wishart import FOREST_B, WishartParams, as_sample, sample

from conftest import random_hpd

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_roundtrip_is_bitwise(tmp_path, forest_b):
    z = sample(WishartParams(8, forest_b), 100, seed=1)
    path = tmp_path / "new" / "s.txt"
    path.parent.mkdir()
    dataio.write_sample(z, path)
    assert np.array_equal(dataio.read_sample(path), z)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(p=st.integers(1, 3), n=st.integers(1, 50), seed=st.integers(0, 2**32 - 1))
def test_roundtrip_property(tmp_path, p, n, seed):
    rng = np.random.default_rng(seed)
    z = np.stack([random_hpd(rng, p, scale=rng.choice([1e-6, 1.0, 1e6])) for _ in range(n)])
    path = tmp_path / f"s{p}_{n}_{seed}.txt"
    dataio.write_sample(z, path)
    np.testing.assert_array_equal(dataio.read_sample(path), as_sample(z))


def test_overwrite_needs_flag(tmp_path, forest_b):
    path = tmp_path / "s.txt"
    dataio.write_sample(forest_b, path)
    with pytest.raises(FileExistsError):
        dataio.write_sample(forest_b, path)
    dataio.write_sample(2 * forest_b, path, overwrite=True)
    assert dataio.read_sample(path)[0][0, 0] == 2 * 360932


def test_forest_b_file():
    z = dataio.read_sample(CONFIG_DIR / "forest_b.txt")
    assert z.shape == (1, 3, 3)
    assert z[0][0, 1] == 11050 + 3759j
    np.testing.assert_array_equal(z[0], FOREST_B)


def write_text(tmp_path, text):
    path = tmp_path / "x.txt"
    path.write_text(text)
    return path


def test_read_errors(tmp_path):
    with pytest.raises(ValidationError):  # (0,1) != conj((1,0)) at 1e-3 relative
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=2 n=1\n1 0 1 1 1.001 -1 2 0\n"))
    with pytest.raises(ValidationError):  # wrong count
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=1 n=2\n1 0\n"))
    with pytest.raises(ValidationError):
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=1 n=1\nnan 0\n"))
    with pytest.raises(ValidationError):
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=1 n=1\ninf 0\n"))
    with pytest.raises(ParseError):
        dataio.read_sample(write_text(tmp_path, "wishart sample p=1 n=1\n1 0\n"))
    with pytest.raises(ParseError):
        dataio.read_sample(write_text(tmp_path, "wishart-sample v2 p=1 n=1\n1 0\n"))
    with pytest.raises(ParseError):
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=1 n=1\n1 zero\n"))
    with pytest.raises(ParseError):
        dataio.read_sample(write_text(tmp_path, "wishart-sample v1 p=2 n=1\n1 0 0 0\n"))
    with pytest.raises(ParseError):
        dataio.read_sample(tmp_path / "missing.txt")


def config_file(tmp_path, obj):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(obj))
    return path


def test_minimal_config_defaults(tmp_path):
    cfg = dataio.read_config_dict(CONFIG_DIR / "minimal.json")
    assert cfg["replicas"] == 1000 and cfg["alpha"] == [0.01, 0.05]
    assert cfg["measures"] == ["chi2", "kl", "renyi=0.9", "bhattacharyya", "hellinger"]
    exp = dataio.read_config(CONFIG_DIR / "minimal.json")
    assert exp.measures[2].beta == 0.9 and exp.looks == [8]


def test_forest_config_file():
    exp = dataio.read_config(CONFIG_DIR / "forest_size.json")
    assert exp.looks == [4, 8, 16] and exp.replicas == 5500
    assert exp.sample_size_pairs == [(49, 49), (49, 121), (49, 400), (121, 121), (121, 400), (400, 400)]
    assert exp.alpha_levels == (0.01, 0.05)


def test_config_errors_name_the_key(tmp_path):
    base = {"sigma": "B", "looks": [8], "pairs": [[400, 400]]}
    cases = [
        ({"replicas": 0}, "replicas"),
        ({"colour": 1}, "colour"),
        ({"measures": ["euclid"]}, "measures"),
        ({"pairs": [[1, 2, 3]]}, "pairs"),
        ({"sigma": [[[1, 0], [2, 0]], [[3, 0], [4, 0]]]}, "sigma"),
        ({"contamination": {"eps": 1}}, "contamination"),
    ]
    for extra, key in cases:
        with pytest.raises(ValidationError) as err:
            dataio.read_config(config_file(tmp_path, {**base, **extra}))
        assert err.value.key == key
        assert key in str(err.value)
    with pytest.raises(ValidationError) as err:
        dataio.read_config(config_file(tmp_path, {"sigma": "B", "looks": [8]}))
    assert err.value.key == "pairs"
    (tmp_path / "bad.json").write_text("{looks: 8")
    with pytest.raises(ParseError):
        dataio.read_config(tmp_path / "bad.json")


def test_config_resolution_is_idempotent(tmp_path):
    first = dataio.read_config_dict(CONFIG_DIR / "forest_robustness.json")
    dataio.write_config(first, tmp_path / "a.json")
    second = dataio.read_config_dict(tmp_path / "a.json")
    dataio.write_config(second, tmp_path / "b.json")
    third = dataio.read_config_dict(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()
    for cfg in (second, third):
        np.testing.assert_array_equal(cfg["_sigma_matrix"], first["_sigma_matrix"])
        for k in dataio.CONFIG_KEYS - {"sigma"}:
            assert cfg[k] == first[k]


def test_inline_sigma(tmp_path):
    cfg = dataio.read_config(config_file(tmp_path, {
        "sigma": [[[2, 0], [0.5, 0.5]], [[0.5, -0.5], [1, 0]]], "looks": [4], "pairs": [[10, 10]],
    }))
    assert cfg.sigma[0, 1] == 0.5 + 0.5j


def test_csv_output(tmp_path):
    row = SizeResultRow("kl", 400, 400, 8, {0.01: 0.01, 0.05: 0.054}, 0.0125, 44.5, 3.2, 10.01, 0)
    header, body = dataio.size_table([row], (0.01, 0.05), timing=False)
    dataio.write_csv(tmp_path / "o.csv", header, body)
    raw = (tmp_path / "o.csv").read_bytes()
    assert raw.startswith(b"measure,n_x,n_y,looks,size_0.01,size_0.05,")
    assert b"\r\n" in raw
    rec = dataio.read_csv(tmp_path / "o.csv")[0]
    assert rec["size_0.05"] == "0.054" and rec["wall_time_ms"] == ""
