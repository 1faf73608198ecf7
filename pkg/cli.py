"""
Command line entry point: simulate, fit, scan, abt, dist, report, pipeline.

Exit codes: 0 success, 1 unexpected error, 2 invalid configuration or input, 3 degenerate fit
(or too few individuals), 4 I/O failure.
"""
import argparse
import os
import sys
from dataclasses import replace

import arrow
import pandas as pd
import sentry_sdk

import app
from app.abt import (
    CurveRef,
    group_pair_abt,
    individual_to_group_abt,
    interval_abt,
    pairwise_distributions,
)
from app.config import (
    ABT_SEGMENTS,
    FIT_N_STARTS,
    OUT_DIR,
    SCAN_MAX_GROUPS,
    SCAN_MIN_GROUPS,
    SENTRY_DSN,
)
from app.errors import (
    ConfigError,
    FitError,
    GridMismatchError,
    InputError,
    InvalidDegreeError,
    InvalidGroupError,
    UnknownIndividualError,
)
from app.gbtm import fit_em
from app.import_utils import (
    load_dataset,
    load_model,
    load_scenario,
    save_dataset,
    save_labels,
    save_model,
)
from app.log import LOG, set_run_id
from app.report import RunConfig, cmd_pipeline, cmd_report, fit_index_frame, write_run_metadata
from app.selection import scan_models
from app.simulate import default_scenario, generate_dataset
from app.storage import write_frame
from app.utils import format_real, random_string

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_FIT = 3
EXIT_IO = 4


def _out_path(args, path: str) -> str:
    """relative output paths live under --out-dir"""
    if os.path.isabs(path):
        return path
    return os.path.join(args.out_dir, path)


def _run_config(args, **kwargs) -> RunConfig:
    run = RunConfig(
        subcommand=args.command,
        seed=args.seed,
        out_dir=args.out_dir,
        segments=args.segments,
        inputs={k: str(v) for k, v in sorted(vars(args).items()) if v is not None and k != "func"},
        **kwargs,
    )
    run.validate()
    return run


def _parse_group(value: str, name: str) -> int:
    """1-based group number from the command line -> 0-based index"""
    try:
        g = int(value)
    except ValueError:
        raise ConfigError(f"{name} must be a group number, got {value!r}")
    if g < 1:
        raise ConfigError(f"{name} must be >= 1, got {g}")
    return g - 1


def run_simulate(args):
    run = _run_config(args)
    spec = load_scenario(args.spec) if args.spec else default_scenario()
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)

    started_at = arrow.utcnow()
    data, labels = generate_dataset(spec)
    save_dataset(data, _out_path(args, args.out))
    save_labels(labels, _out_path(args, args.labels))
    write_run_metadata(run, started_at, {"scenario_seed": spec.seed, "n_individuals": data.n_individuals})


def run_fit(args):
    run = _run_config(args, degree=args.degree, starts=args.starts)
    if args.groups < 1:
        raise ConfigError(f"--groups must be >= 1, got {args.groups}")

    started_at = arrow.utcnow()
    data = load_dataset(args.data)
    model, _ = fit_em(data, args.groups, args.degree, run.fit_config())
    save_model(model, _out_path(args, args.out))
    write_run_metadata(
        run,
        started_at,
        {"log_likelihood": format_real(model.log_likelihood), "converged": model.converged},
    )


def run_scan(args):
    run = _run_config(
        args,
        degree=args.degree,
        starts=args.starts,
        min_groups=args.min_groups,
        max_groups=args.max_groups,
    )
    started_at = arrow.utcnow()
    data = load_dataset(args.data)
    scan = scan_models(
        data, args.degree, run.fit_config(), k_min=args.min_groups, k_max=args.max_groups
    )
    write_frame(_out_path(args, args.out), fit_index_frame(scan, format_real))
    write_run_metadata(
        run,
        started_at,
        {
            "candidate_set": list(scan.candidate_set),
            "recommended_by_bic": scan.recommended_by_bic,
        },
    )


def _abt_table(result) -> pd.DataFrame:
    rows = [
        [format_real(t0), format_real(t1), format_real(area)]
        for (t0, t1), area in zip(result.grid.intervals(), result.interval_areas)
    ]
    rows.append(["total", "", format_real(result.total)])
    return pd.DataFrame(rows, columns=["interval_start", "interval_end", "area"])


def _interval_table(model, g_a: int, g_b: int, interval: int, n_segments: int) -> pd.DataFrame:
    """one row for the 1-based grid interval"""
    intervals = model.grid.intervals()
    if not 1 <= interval <= len(intervals):
        raise ConfigError(f"--interval must be within 1..{len(intervals)}, got {interval}")
    t0, t1 = intervals[interval - 1]
    area = interval_abt(model, g_a, g_b, interval - 1, n_segments)
    return pd.DataFrame(
        [[format_real(t0), format_real(t1), format_real(area)]],
        columns=["interval_start", "interval_end", "area"],
    )


def run_abt(args):
    run = _run_config(args)
    started_at = arrow.utcnow()
    model = load_model(args.model)

    if args.pair:
        if args.individual or args.group:
            raise ConfigError("--pair cannot be combined with --individual/--group")
        parts = args.pair.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--pair expects A,B, got {args.pair!r}")
        g_a, g_b = _parse_group(parts[0], "--pair"), _parse_group(parts[1], "--pair")
        curves = (CurveRef("group", g_a), CurveRef("group", g_b))
        if args.interval is not None:
            table = _interval_table(model, g_a, g_b, args.interval, args.segments)
        else:
            table = _abt_table(group_pair_abt(model, g_a, g_b, args.segments))
    elif args.interval is not None:
        raise ConfigError("--interval needs --pair")
    elif args.individual and args.group and args.data:
        data = load_dataset(args.data)
        result = individual_to_group_abt(
            data, args.individual, model, _parse_group(args.group, "--group"), args.segments
        )
        curves = (result.curve_a, result.curve_b)
        table = _abt_table(result)
    else:
        raise ConfigError("abt needs --pair A,B or --data, --individual and --group")

    write_frame(_out_path(args, args.out), table)
    write_run_metadata(
        run,
        started_at,
        {"curve_a": curves[0].label, "curve_b": curves[1].label},
    )


def run_dist(args):
    run = _run_config(args)
    started_at = arrow.utcnow()
    model = load_model(args.model)
    if model.K < 2:
        raise ConfigError(f"dist needs a model with at least 2 groups, got K={model.K}")
    dist = pairwise_distributions(model, args.segments)

    names = {p: f"{p[0] + 1}-{p[1] + 1}" for p in dist.pairs}
    if args.summary:
        rows = [
            [names[p]] + [format_real(v) for v in (s.mean, s.sd, s.min, s.max)]
            for p, s in dist.summaries.items()
        ]
        df = pd.DataFrame(rows, columns=["pair", "mean", "sd", "min", "max"])
    else:
        rows = [
            [names[p], str(i + 1), format_real(area)]
            for p in dist.pairs
            for i, area in enumerate(dist.values[p])
        ]
        df = pd.DataFrame(rows, columns=["pair", "interval", "area"])

    write_frame(_out_path(args, args.out), df)
    write_run_metadata(run, started_at)


def run_report(args):
    run = _run_config(
        args,
        degree=args.degree,
        starts=args.starts,
        min_groups=args.min_groups,
        max_groups=args.max_groups,
        data=args.data,
    )
    started_at = arrow.utcnow()
    data = load_dataset(args.data)
    scan = scan_models(
        data, args.degree, run.fit_config(), k_min=args.min_groups, k_max=args.max_groups
    )
    for K in scan.candidate_set:
        save_model(scan.fits[K][0], os.path.join(args.out_dir, f"model_K{K}.json"))
    bundle = cmd_report(data, scan, args.out_dir, args.segments)
    write_run_metadata(run, started_at, {"report_status": bundle.status})


def run_pipeline(args):
    run = _run_config(
        args,
        degree=args.degree,
        min_groups=args.min_groups,
        max_groups=args.max_groups,
        starts=args.starts,
        spec=args.spec,
        data=args.data,
    )
    cmd_pipeline(run)


def _scan_flags(parser):
    parser.add_argument("--degree", type=int, default=3, help="polynomial degree, 0..3")
    parser.add_argument("--starts", type=int, default=FIT_N_STARTS, help="EM starts per K")
    parser.add_argument("--min-groups", type=int, default=SCAN_MIN_GROUPS)
    parser.add_argument("--max-groups", type=int, default=SCAN_MAX_GROUPS)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out-dir", default=OUT_DIR, help="directory receiving every output")
    common.add_argument(
        "--segments", type=int, default=ABT_SEGMENTS, help="trapezoid segments per interval"
    )

    parser = argparse.ArgumentParser(
        prog="trajectory-area", description="Group-based trajectory models and ABTs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--spec", help="scenario JSON file, default scenario if omitted")
    p.add_argument("--out", default="data.csv")
    p.add_argument("--labels", default="labels.csv")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit one K-group model")
    p.add_argument("--data", required=True)
    p.add_argument("--groups", type=int, required=True)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--starts", type=int, default=FIT_N_STARTS)
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=run_fit)

    p = sub.add_parser("scan", parents=[common], help="fit K ascending with the size rule")
    p.add_argument("--data", required=True)
    _scan_flags(p)
    p.add_argument("--out", default="scan.csv")
    p.set_defaults(func=run_scan)

    p = sub.add_parser("abt", parents=[common], help="areas between two trajectories")
    p.add_argument("--model", required=True)
    p.add_argument("--pair", help="two group numbers, e.g. 5,1")
    p.add_argument("--interval", type=int, help="only grid interval I (1-based), with --pair")
    p.add_argument("--data")
    p.add_argument("--individual")
    p.add_argument("--group")
    p.add_argument("--out", default="abt.csv")
    p.set_defaults(func=run_abt)

    p = sub.add_parser("dist", parents=[common], help="interval areas of all group pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--summary", action="store_true", help="one row per pair: mean, sd, min, max")
    p.add_argument("--out", default="dist.csv")
    p.set_defaults(func=run_dist)

    p = sub.add_parser("report", parents=[common], help="scan a dataset and write the report")
    p.add_argument("--data", required=True)
    _scan_flags(p)
    p.set_defaults(func=run_report)

    p = sub.add_parser("pipeline", parents=[common], help="simulate/load, scan, report")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec")
    source.add_argument("--data")
    _scan_flags(p)
    p.set_defaults(func=run_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if SENTRY_DSN:
        LOG.d("enable sentry")
        sentry_sdk.init(dsn=SENTRY_DSN, release=app.__version__)

    set_run_id(random_string(8))
    LOG.d("Start %s", args.command)

    try:
        args.func(args)
    except (
        InputError,
        GridMismatchError,
        InvalidDegreeError,
        InvalidGroupError,
        UnknownIndividualError,
    ) as e:
        LOG.error("invalid input: %s", e)
        return EXIT_CONFIG
    except FitError as e:
        LOG.error("fit failed: %s", e)
        return EXIT_FIT
    except OSError as e:
        LOG.error("I/O error: %s", e)
        return EXIT_IO
    except Exception as e:
        LOG.exception("unexpected error in %s", args.command)
        if SENTRY_DSN:
            sentry_sdk.capture_exception(e)
        return EXIT_UNEXPECTED

    LOG.d("Finish %s", args.command)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
