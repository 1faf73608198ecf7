"""Report bundle: fit-indices table plus plot data for trajectories and ABTs.

Reports are plain UTF-8 CSV files meant for any plotting tool. Every file is
written atomically and the same inputs always give byte-identical CSVs.
"""
import json
import math
import os
import platform
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import arrow
import numpy as np
import pandas as pd
import scipy

import app
from app.abt import assigned_group_abts, pairwise_distributions
from app.config import (
    ABT_SEGMENTS,
    CURVE_SAMPLES,
    DEFAULT_SEED,
    FIT_N_STARTS,
    OUT_DIR,
    SCAN_MAX_GROUPS,
    SCAN_MIN_GROUPS,
)
from app.errors import ConfigError
from app.gbtm import FitConfig, group_curves
from app.import_utils import load_dataset, load_scenario, save_dataset, save_labels, save_model
from app.log import LOG, get_run_id
from app.models import FittedModel, LongitudinalDataset, PosteriorMatrix
from app.selection import ScanResult, fit_index_table, scan_models
from app.simulate import generate_dataset
from app.storage import write_frame, write_text
from app.utils import GENERATOR_ALGORITHM, format_real, format_sig

STATUS_OK = "ok"
STATUS_WARNING = "warning"


@dataclass
class RunConfig:
    subcommand: str
    # None: the scenario file seed for simulation, DEFAULT_SEED for fitting
    seed: Optional[int] = None
    out_dir: str = OUT_DIR
    segments: int = ABT_SEGMENTS
    degree: int = 3
    min_groups: int = SCAN_MIN_GROUPS
    max_groups: int = SCAN_MAX_GROUPS
    starts: int = FIT_N_STARTS
    spec: Optional[str] = None
    data: Optional[str] = None
    inputs: Dict[str, str] = field(default_factory=dict)

    def validate(self):
        if self.segments < 1:
            raise ConfigError(f"--segments must be >= 1, got {self.segments}")
        if not 0 <= self.degree <= 3:
            raise ConfigError(f"--degree must be within 0..3, got {self.degree}")
        if self.min_groups < 1:
            raise ConfigError(f"--min-groups must be >= 1, got {self.min_groups}")
        if self.max_groups < self.min_groups:
            raise ConfigError("--max-groups must be >= --min-groups")
        if self.starts < 1:
            raise ConfigError(f"--starts must be >= 1, got {self.starts}")
        if self.seed is not None and not 0 <= self.seed <= 2 ** 64 - 1:
            raise ConfigError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.subcommand == "pipeline" and (self.spec is None) == (self.data is None):
            raise ConfigError("pipeline needs exactly one of --spec or --data")

    def fit_config(self) -> FitConfig:
        return FitConfig(n_starts=self.starts, seed=self.fit_seed)

    @property
    def fit_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed


@dataclass
class ReportBundle:
    out_dir: str
    files: List[str] = field(default_factory=list)
    status: str = STATUS_OK
    message: str = ""


def _pair_name(pair: Tuple[int, int]) -> str:
    return f"{pair[0] + 1}-{pair[1] + 1}"


def _cell(value, formatter) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if np.isnan(value):
        return ""
    return formatter(value)


def fit_index_frame(scan: ScanResult, formatter=format_sig) -> pd.DataFrame:
    table = fit_index_table(scan)
    columns = list(table[0]) if table else ["K", "smallest_group_pct", "bic", "sabic", "appa_model"]
    return pd.DataFrame([[_cell(row[c], formatter) for c in columns] for row in table], columns=columns)


def curve_frame(model: FittedModel, n_samples: int = CURVE_SAMPLES) -> pd.DataFrame:
    """every group sampled at n_samples evenly spaced times across the grid span"""
    t0, t1 = model.grid.span
    times = np.linspace(t0, t1, n_samples)
    values = group_curves(model, times)
    return pd.DataFrame(
        {
            "group": np.repeat(np.arange(1, model.K + 1), n_samples),
            "t": np.tile(times, model.K),
            "value": values.reshape(-1),
        }
    )


def abt_frames(model: FittedModel, n_segments: int = ABT_SEGMENTS) -> Dict[str, pd.DataFrame]:
    dist = pairwise_distributions(model, n_segments)
    intervals = model.grid.intervals()

    summary = pd.DataFrame(
        [
            {
                "pair": _pair_name(p),
                "group_a": p[0] + 1,
                "group_b": p[1] + 1,
                "mean": s.mean,
                "sd": s.sd,
                "min": s.min,
                "max": s.max,
                "total": math.fsum(dist.values[p]),
            }
            for p, s in dist.summaries.items()
        ]
    )
    per_interval = pd.DataFrame(
        [
            {
                "pair": _pair_name(p),
                "group_a": p[0] + 1,
                "group_b": p[1] + 1,
                "interval": i + 1,
                "interval_start": intervals[i][0],
                "interval_end": intervals[i][1],
                "area": area,
            }
            for p in dist.pairs
            for i, area in enumerate(dist.values[p])
        ]
    )
    edges = dist.bin_edges
    histogram = pd.DataFrame(
        [
            {
                "pair": _pair_name(p),
                "bin": b + 1,
                "bin_start": edges[b],
                "bin_end": edges[b + 1],
                "count": count,
            }
            for p in dist.pairs
            for b, count in enumerate(dist.counts[p])
        ]
    )
    return {"abt_pairs": summary, "abt_intervals": per_interval, "abt_hist": histogram}


def assigned_abt_frame(
    data: LongitudinalDataset,
    model: FittedModel,
    post: PosteriorMatrix,
    n_segments: int = ABT_SEGMENTS,
) -> pd.DataFrame:
    results = assigned_group_abts(data, model, post, n_segments)
    rows = []
    for res in results:
        row = {"id": res.curve_a.key, "group": res.curve_b.key + 1, "total": res.total}
        for i, area in enumerate(res.interval_areas):
            row[f"area_{i + 1}"] = area
        rows.append(row)
    return pd.DataFrame(rows)


def cmd_report(
    data: LongitudinalDataset,
    scan: ScanResult,
    out_dir: str,
    n_segments: int = ABT_SEGMENTS,
    n_samples: int = CURVE_SAMPLES,
) -> ReportBundle:
    """Write the fit-indices table and, per candidate model, curves and ABT tables"""
    bundle = ReportBundle(out_dir=out_dir)

    def _write(name, df, float_format="%.17g"):
        path = os.path.join(out_dir, name)
        write_frame(path, df, float_format=float_format)
        bundle.files.append(path)

    _write("fit_indices.csv", fit_index_frame(scan, format_sig))
    _write("fit_indices_raw.csv", fit_index_frame(scan, format_real))

    if not scan.candidate_set:
        bundle.status = STATUS_WARNING
        bundle.message = "no candidate model: every fitted K failed or violated the size rule"
        LOG.w(bundle.message)
        return bundle

    for K in scan.candidate_set:
        model, post = scan.fits[K]
        _write(f"curves_K{K}.csv", curve_frame(model, n_samples))
        if K >= 2:
            for name, df in abt_frames(model, n_segments).items():
                _write(f"{name}_K{K}.csv", df)
        _write(f"assigned_abt_K{K}.csv", assigned_abt_frame(data, model, post, n_segments))

    LOG.i("report: %s files in %s", len(bundle.files), out_dir)
    return bundle


def versions() -> Dict[str, str]:
    return {
        "trajectory_area": app.__version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_run_metadata(
    run: RunConfig, started_at: arrow.Arrow, extra: Optional[dict] = None
) -> str:
    path = os.path.join(run.out_dir, "run_metadata.json")
    doc = {
        "run_id": get_run_id(),
        "subcommand": run.subcommand,
        "config": asdict(run),
        "seed": run.seed,
        "fit_seed": run.fit_seed,
        "generator": GENERATOR_ALGORITHM,
        "bic_sample_size": "individuals",
        "scale": "raw time (weeks), raw scores",
        "versions": versions(),
        "started_at": started_at.isoformat(),
        "finished_at": arrow.utcnow().isoformat(),
    }
    doc.update(extra or {})
    write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def cmd_pipeline(run: RunConfig) -> ReportBundle:
    """simulate (with --spec) -> scan -> candidate models -> ABT distributions -> report"""
    run.validate()
    started_at = arrow.utcnow()

    # every input is read and validated before the first file is written
    labels = None
    if run.spec:
        spec = load_scenario(run.spec)
        if run.seed is not None:
            LOG.d("override scenario seed %s with %s", spec.seed, run.seed)
            spec = replace(spec, seed=run.seed)
        data, labels = generate_dataset(spec)
    else:
        data = load_dataset(run.data)

    scan = scan_models(
        data,
        run.degree,
        run.fit_config(),
        k_min=run.min_groups,
        k_max=run.max_groups,
    )

    if labels is not None:
        save_dataset(data, os.path.join(run.out_dir, "data.csv"))
        save_labels(labels, os.path.join(run.out_dir, "labels.csv"))
    for K in scan.candidate_set:
        save_model(scan.fits[K][0], os.path.join(run.out_dir, f"model_K{K}.json"))

    bundle = cmd_report(data, scan, run.out_dir, run.segments)
    write_run_metadata(
        run,
        started_at,
        {
            "n_individuals": data.n_individuals,
            "grid": list(data.grid.times),
            "candidate_set": list(scan.candidate_set),
            "recommended_by_bic": scan.recommended_by_bic,
            "report_status": bundle.status,
            "report_message": bundle.message,
        },
    )
    return bundle
