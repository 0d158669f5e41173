"""Sample files, experiment configuration files and CSV results.

Sample file format (text, one matrix per line)::

    wishart-sample v1 p=<p> n=<count>
    re im re im ...        # p*p entries, row-major, 17 significant digits

Blank lines and lines starting with ``#`` after the header are ignored.

Configuration files are JSON objects; see ``CONFIG_KEYS`` for the accepted
keys.  ``sigma`` is either a path to a sample file holding one matrix
(relative paths resolve against the config file), the literal ``"B"`` for the
built-in forest covariance, or an inline ``p x p`` list of ``[re, im]`` pairs.
"""

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .distances import ALL_MEASURES, DistanceMeasure
from .errors import ParseError, ValidationError
from .experiments import SizeExperimentConfig
from .hermitian import hermitian
from .wishart import FOREST_B, ContaminationSpec, as_sample

FORMAT_VERSION = 1
_HEADER = re.compile(r"^wishart-sample v(\d+) p=(\d+) n=(\d+)\s*$")

CONFIG_KEYS = {
    "looks", "sigma", "pairs", "alpha", "replicas", "measures", "seed",
    "estimate_looks", "dof", "contamination",
}
CONFIG_DEFAULTS = {
    "alpha": [0.01, 0.05],
    "replicas": 1000,
    "measures": [m.label for m in ALL_MEASURES],
    "seed": 0,
    "estimate_looks": True,
    "dof": None,
    "contamination": None,
}


def write_sample(zs, path, overwrite=False):
    """Write a sample so that :func:`read_sample` returns it bit for bit."""
    z = as_sample(zs)
    path = Path(path)
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass overwrite=True to replace it")
    n, p, _ = z.shape
    lines = [f"wishart-sample v{FORMAT_VERSION} p={p} n={n}"]
    for m in z:
        parts = []
        for v in m.ravel():
            parts.append(f"{v.real:.17g} {v.imag:.17g}")
        lines.append(" ".join(parts))
    path.write_text("\n".join(lines) + "\n")


def read_sample(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    match = _HEADER.match(lines[0].strip())
    if not match:
        raise ParseError(f"{path}: bad header {lines[0]!r}")
    version, p, n = (int(g) for g in match.groups())
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format version {version}")
    rows = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("#")]
    if len(rows) != n:
        raise ValidationError(f"{path}: header says n={n} but {len(rows)} matrices found", key="n")
    data = np.empty((n, p, p), dtype=complex)
    for k, row in enumerate(rows):
        fields = row.split()
        if len(fields) != 2 * p * p:
            raise ParseError(f"{path}: matrix {k} has {len(fields)} numbers, expected {2 * p * p}")
        try:
            vals = np.array([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"{path}: matrix {k}: {exc}") from exc
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"{path}: matrix {k} has non-finite entries")
        data[k] = (vals[0::2] + 1j * vals[1::2]).reshape(p, p)
    try:
        return as_sample(data, dim=p)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _matrix_to_json(m):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


def _sigma_from(value, base):
    if isinstance(value, str):
        if value == "B":
            return FOREST_B
        z = read_sample((base / value) if not Path(value).is_absolute() else value)
        if len(z) != 1:
            raise ValidationError(f"sigma file {value} must hold exactly one matrix", key="sigma")
        return z[0]
    try:
        arr = np.array(value, dtype=float)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise ValueError("expected p x p x 2 nested list")
        return hermitian(arr[..., 0] + 1j * arr[..., 1])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"sigma: {exc}", key="sigma") from exc


def resolve_config(raw, base="."):
    """Validate a config mapping and fill defaults; returns a plain dict."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise ValidationError(f"unknown config key {unknown[0]!r}", key=unknown[0])
    for key in ("looks", "sigma", "pairs"):
        if key not in raw:
            raise ValidationError(f"missing required key {key!r}", key=key)
    cfg = dict(CONFIG_DEFAULTS)
    cfg.update(raw)
    if not isinstance(cfg["replicas"], int) or isinstance(cfg["replicas"], bool) or cfg["replicas"] < 1:
        raise ValidationError(f"replicas must be a positive integer, got {cfg['replicas']!r}", key="replicas")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ValidationError("seed must be a nonnegative integer", key="seed")
    for key in ("looks", "pairs", "alpha", "measures"):
        if not isinstance(cfg[key], list) or not cfg[key]:
            raise ValidationError(f"{key} must be a nonempty list", key=key)
    if any(not isinstance(pair, list) or len(pair) != 2 for pair in cfg["pairs"]):
        raise ValidationError("pairs must be a list of [N_X, N_Y]", key="pairs")
    try:
        cfg["measures"] = [DistanceMeasure.parse(m).label for m in cfg["measures"]]
    except Exception as exc:
        raise ValidationError(f"measures: {exc}", key="measures") from exc
    if cfg["contamination"] is not None:
        c = cfg["contamination"]
        if not isinstance(c, dict) or set(c) - {"epsilon", "scale"} or "epsilon" not in c:
            raise ValidationError("contamination must be {epsilon, scale}", key="contamination")
        cfg["contamination"] = {"epsilon": float(c["epsilon"]), "scale": float(c.get("scale", 1000.0))}
    if not isinstance(cfg["estimate_looks"], bool):
        raise ValidationError("estimate_looks must be true or false", key="estimate_looks")
    if cfg["dof"] is not None and (not isinstance(cfg["dof"], int) or cfg["dof"] < 1):
        raise ValidationError("dof must be a positive integer", key="dof")
    cfg["_sigma_matrix"] = _sigma_from(cfg["sigma"], Path(base))
    return cfg


def read_config_dict(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return resolve_config(raw, path.parent)


def to_experiment_config(cfg):
    contamination = cfg["contamination"]
    try:
        return SizeExperimentConfig(
            looks=cfg["looks"],
            sigma=cfg["_sigma_matrix"],
            sample_size_pairs=cfg["pairs"],
            alpha_levels=cfg["alpha"],
            replicas=cfg["replicas"],
            measures=cfg["measures"],
            base_seed=cfg["seed"],
            estimate_looks=cfg["estimate_looks"],
            dof=cfg["dof"],
            contamination=None if contamination is None else ContaminationSpec(**contamination),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc


def read_config(path):
    """Read a JSON config file into a validated :class:`SizeExperimentConfig`."""
    return to_experiment_config(read_config_dict(path))


def write_config(cfg, path):
    """Write a resolved config dict (as returned by :func:`read_config_dict`).

    ``sigma`` is written inline (unless it is ``"B"``) so the file does not
    depend on where it is stored.
    """
    out = {k: v for k, v in cfg.items() if not k.startswith("_")}
    if out["sigma"] != "B":
        out["sigma"] = _matrix_to_json(cfg["_sigma_matrix"])
    Path(path).write_text(json.dumps(out, indent=2) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


SIZE_FIELDS = ["measure", "n_x", "n_y", "looks"]
ROBUSTNESS_FIELDS = [
    "n_x", "n_y", "looks",
]


def _size_columns(alphas):
    return [f"size_{a:g}" for a in alphas]


def write_csv(path_or_file, header, rows):
    """RFC 4180 CSV with ``\\r\\n`` line endings and a header row."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def size_table(rows, alphas, timing=True):
    header = (
        SIZE_FIELDS + _size_columns(alphas)
        + ["mean_distance", "cv", "wall_time_ms", "mean_statistic", "diverged"]
    )
    body = [
        [r.measure, r.n_x, r.n_y, r.looks]
        + [r.empirical_size[a] for a in alphas]
        + [r.mean_distance, r.cv, r.wall_time_ms if timing else None, r.mean_statistic, r.diverged]
        for r in rows
    ]
    return header, body


def robustness_table(rows, alphas):
    header = (
        ROBUSTNESS_FIELDS + _size_columns(alphas)
        + ["mean_distance", "cv", "mse_looks_x", "mse_looks_y", "r1",
           "rmse_sigma_x", "rmse_sigma_y", "r2", "mean_statistic"]
    )
    body = [
        [r.n_x, r.n_y, r.looks]
        + [r.empirical_size[a] for a in alphas]
        + [r.mean_distance, r.cv, r.mse_looks_x, r.mse_looks_y, r.r1,
           r.rmse_sigma_x, r.rmse_sigma_y, r.r2, r.mean_statistic]
        for r in rows
    ]
    return header, body


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
