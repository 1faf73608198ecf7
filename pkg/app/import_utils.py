"""Read and write datasets (long-format CSV), models and scenarios (JSON)."""
import json
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from app.config import SCORE_BOUNDS
from app.errors import (
    DatasetParseError,
    IncompletePanelError,
    ScenarioError,
    SchemaError,
)
from app.log import LOG
from app.models import SCHEMA_VERSION, FittedModel, LongitudinalDataset, TimeGrid
from app.simulate import GroupSpec, ScenarioSpec
from app.storage import atomic_write, write_frame
from app.utils import format_real

DATASET_COLUMNS = ["id", "time", "score"]

_MODEL_FIELDS = [
    "schema_version",
    "grid",
    "K",
    "degree",
    "mixing_proportions",
    "coefficients",
    "sigma",
    "log_likelihood",
    "n_individuals",
    "converged",
    "iterations",
    "seed",
]


def _id_sort_key(id_: str):
    # numeric ids in numeric order, then the others alphabetically
    return (0, int(id_), "") if id_.isdigit() else (1, 0, id_)


def _parse_real(value: str) -> float:
    """correctly rounded parse, NaN for anything that is not a number"""
    try:
        return float(value)
    except ValueError:
        return float("nan")


def load_dataset(path: str, bounds: Optional[Tuple[float, float]] = None) -> LongitudinalDataset:
    """Load a long-format `id,time,score` CSV.

    The grid is the sorted set of distinct times and every id needs one row
    per grid time. Row order does not matter: ids are sorted (numerically
    when they are all digits).
    """
    bounds = tuple(bounds) if bounds is not None else SCORE_BOUNDS

    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as e:
        raise DatasetParseError(f"cannot parse {path}: {e}")
    except pd.errors.EmptyDataError:
        raise DatasetParseError(f"{path} is empty")

    df.columns = [c.strip() for c in df.columns]
    if list(df.columns) != DATASET_COLUMNS:
        raise DatasetParseError(f"expect header {','.join(DATASET_COLUMNS)}, got {list(df.columns)}")
    if df.empty:
        raise DatasetParseError(f"{path} has no data row")

    df["id"] = df["id"].str.strip()
    for col in ("time", "score"):
        parsed = df[col].str.strip().map(_parse_real)
        bad = ~np.isfinite(parsed.to_numpy(dtype=float))
        if bad.any():
            row = df[bad].iloc[0]
            raise DatasetParseError(f"invalid {col} {row[col]!r} for individual {row['id']}")
        df[col] = parsed.astype(float)

    duplicated = df.duplicated(subset=["id", "time"])
    if duplicated.any():
        row = df[duplicated].iloc[0]
        raise DatasetParseError(f"duplicate row for individual {row['id']} at time {row['time']}")

    times = sorted(df["time"].unique().tolist())
    ids = sorted(df["id"].unique().tolist(), key=_id_sort_key)
    panel = df.pivot(index="id", columns="time", values="score").reindex(index=ids, columns=times)

    missing = panel.isna().any(axis=1)
    if missing.any():
        raise IncompletePanelError(missing[missing].index[0])

    try:
        grid = TimeGrid(tuple(times))
    except ValueError as e:
        raise DatasetParseError(str(e))

    dataset = LongitudinalDataset(
        grid=grid, ids=tuple(ids), scores=panel.to_numpy(dtype=float), bounds=bounds
    )
    LOG.d("load %s: N=%s, grid %s", path, dataset.n_individuals, grid.times)
    return dataset


def dataset_frame(data: LongitudinalDataset) -> pd.DataFrame:
    n_times = data.grid.n_points
    return pd.DataFrame(
        {
            "id": np.repeat(np.array(data.ids, dtype=object), n_times),
            "time": np.tile(data.grid.as_array(), data.n_individuals),
            "score": data.scores.reshape(-1),
        },
        columns=DATASET_COLUMNS,
    )


def save_dataset(data: LongitudinalDataset, path: str):
    write_frame(path, dataset_frame(data))


def save_labels(labels: Dict[str, str], path: str):
    write_frame(path, pd.DataFrame({"id": list(labels), "label": list(labels.values())}))


def _model_document(model: FittedModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "grid": [format_real(t) for t in model.grid.times],
        "K": model.K,
        "degree": model.degree,
        "mixing_proportions": [format_real(p) for p in model.mixing_proportions],
        "coefficients": [[format_real(c) for c in beta] for beta in model.coefficients],
        "sigma": format_real(model.sigma),
        "log_likelihood": format_real(model.log_likelihood),
        "n_individuals": model.n_individuals,
        "converged": model.converged,
        "iterations": model.iterations,
        "seed": model.seed,
        "scale": "raw time (weeks), raw scores",
    }


def save_model(model: FittedModel, path: str):
    """JSON model file, reals written as 17-significant-digit decimal strings"""
    with atomic_write(path) as f:
        json.dump(_model_document(model), f, indent=2)
        f.write("\n")


def _real(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise SchemaError(f"malformed field {name}: {value!r}")
    try:
        return float(value)
    except ValueError:
        raise SchemaError(f"malformed field {name}: {value!r}")


def _int(value, name) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"malformed field {name}: {value!r}")
    return value


def model_from_document(doc: dict) -> FittedModel:
    if not isinstance(doc, dict):
        raise SchemaError("model file must hold a JSON object")

    missing = [f for f in _MODEL_FIELDS if f not in doc]
    if missing:
        raise SchemaError(f"model file misses field(s) {', '.join(missing)}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"schema version {doc['schema_version']!r} is not supported, expect {SCHEMA_VERSION}"
        )

    try:
        K = _int(doc["K"], "K")
        degree = _int(doc["degree"], "degree")
        pi = [_real(p, "mixing_proportions") for p in doc["mixing_proportions"]]
        beta = [[_real(c, "coefficients") for c in row] for row in doc["coefficients"]]
        if len(pi) != K or len(beta) != K:
            raise SchemaError(f"expect {K} groups, got {len(pi)} proportions and {len(beta)} curves")
        if not isinstance(doc["converged"], bool):
            raise SchemaError(f"malformed field converged: {doc['converged']!r}")

        seed = doc["seed"]
        return FittedModel(
            grid=TimeGrid(tuple(_real(t, "grid") for t in doc["grid"])),
            degree=degree,
            mixing_proportions=np.array(pi),
            coefficients=np.array(beta),
            sigma=_real(doc["sigma"], "sigma"),
            log_likelihood=_real(doc["log_likelihood"], "log_likelihood"),
            n_individuals=_int(doc["n_individuals"], "n_individuals"),
            converged=doc["converged"],
            iterations=_int(doc["iterations"], "iterations"),
            seed=None if seed is None else _int(seed, "seed"),
        )
    except TypeError as e:
        raise SchemaError(f"malformed model file: {e}")
    except ValueError as e:
        # FittedModel / TimeGrid invariants
        raise SchemaError(str(e))


def load_model(path: str) -> FittedModel:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path} is not valid JSON: {e}")

    model = model_from_document(doc)
    LOG.d("load model %s: K=%s degree=%s", path, model.K, model.degree)
    return model


def scenario_from_document(doc: dict) -> ScenarioSpec:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file must hold a JSON object")

    try:
        groups = tuple(
            GroupSpec(
                label=str(g["label"]),
                proportion=float(g["proportion"]),
                mean_curve=tuple(float(c) for c in g["mean_curve"]),
                noise_sd=float(g["noise_sd"]),
            )
            for g in doc["groups"]
        )
        kwargs = {}
        if "bounds" in doc:
            kwargs["bounds"] = tuple(float(b) for b in doc["bounds"])
        if "seed" in doc:
            kwargs["seed"] = doc["seed"]
        if "round_to_integer" in doc:
            kwargs["round_to_integer"] = bool(doc["round_to_integer"])

        return ScenarioSpec(
            grid=TimeGrid(tuple(float(t) for t in doc["grid"])),
            n_individuals=doc["n_individuals"],
            groups=groups,
            **kwargs,
        )
    except KeyError as e:
        raise ScenarioError(f"scenario misses field {e}")
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"malformed scenario: {e}")


def load_scenario(path: str) -> ScenarioSpec:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{path} is not valid JSON: {e}")
    return scenario_from_document(doc)


def scenario_document(spec: ScenarioSpec) -> dict:
    return {
        "grid": list(spec.grid.times),
        "n_individuals": spec.n_individuals,
        "groups": [
            {
                "label": g.label,
                "proportion": g.proportion,
                "mean_curve": list(g.mean_curve),
                "noise_sd": g.noise_sd,
            }
            for g in spec.groups
        ],
        "bounds": list(spec.bounds),
        "seed": spec.seed,
        "round_to_integer": spec.round_to_integer,
    }


def save_scenario(spec: ScenarioSpec, path: str):
    with atomic_write(path) as f:
        json.dump(scenario_document(spec), f, indent=2)
        f.write("\n")
