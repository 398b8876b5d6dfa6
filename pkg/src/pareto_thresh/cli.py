"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data error (unreadable or
unsupported image), 4 acceptance failure (``oracle-check``).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import fixtures
from .errors import ConfigInvalid, CorruptImage, TooManyThresholds, UnsupportedFormat
from .histio import (
    CHANNELS,
    RgbImage,
    channel_histograms,
    histogram_3d,
    load_rgb_image,
    save_png,
    write_histogram_3d_csv,
)
from .objectives import ObjectiveKind, VectorObjective, as_thresholds, raw_components, to_minimization
from .optimizers import ALGORITHMS, RESERVED_ALGORITHMS, SwarmConfig, run_batch, run_single
from .oracle import MAX_FRONT_T, coverage_trials, exhaustive_pareto_front
from .pareto import Solution, write_archive_csv
from .schemas import archive_header, validate_benchmark, validate_csv
from .segment import apply_thresholds, class_mask, output_stem, quantize, write_segment_histogram_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_ACCEPTANCE = 4

THREADS_ENV = "PARETO_THRESH_THREADS"
DEFAULT_T_SWEEP = (4, 8, 12)
FIXTURE_PREFIX = "fixture:"


class UsageError(Exception):
    pass


def _csv_list(value: str) -> List[str]:
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def resolve_image(spec: str) -> RgbImage:
    """Load an image path, or build a bundled fixture named ``fixture:<name>``."""
    if spec.startswith(FIXTURE_PREFIX):
        name = spec[len(FIXTURE_PREFIX):]
        if name not in fixtures.FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; available: {', '.join(fixtures.FIXTURES)}")
        return fixtures.FIXTURES[name]()
    return load_rgb_image(spec)


def image_stem(spec: str) -> str:
    if spec.startswith(FIXTURE_PREFIX):
        return spec[len(FIXTURE_PREFIX):]
    return Path(spec).stem


def image_label(spec: str) -> str:
    return spec if spec.startswith(FIXTURE_PREFIX) else Path(spec).name


def resolve_threads(value: Optional[int]) -> int:
    if value is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            value = 1
    if value < 1:
        raise UsageError("--threads must be at least 1")
    return value


def check_algorithms(names: Sequence[str]) -> List[str]:
    out = []
    for name in names:
        name = name.lower()
        if name in RESERVED_ALGORITHMS:
            raise UsageError(
                f"NotImplemented: algorithm {name!r} is not implemented; supported: {', '.join(ALGORITHMS)}"
            )
        if name not in ALGORITHMS:
            raise UsageError(
                f"NotImplemented: unknown algorithm {name!r}; supported: {', '.join(ALGORITHMS)}"
            )
        out.append(name)
    return out


def check_objectives(names: Sequence[str]) -> List[str]:
    try:
        return [ObjectiveKind.parse(n).value for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _swarm_config(args, T: int, algorithm: str, objective: str, repeats: int = 1) -> SwarmConfig:
    cfg = SwarmConfig(
        dims=T,
        algorithm=algorithm,
        objective_kind=objective,
        population=args.pop,
        iterations=args.iters,
        repeats=repeats,
        seed=args.seed,
        archive_capacity=args.archive_cap,
    )
    try:
        return cfg.validate()
    except ConfigInvalid as exc:
        raise UsageError(str(exc)) from None


def pick_solution(members: Sequence[Solution]) -> Solution:
    """Archive member with the smallest mean objective; ties go to the smaller thresholds."""
    return min(members, key=lambda s: (float(np.mean(s.objective)), tuple(s.thresholds)))


def _score_summary(image: RgbImage, t) -> Dict[str, object]:
    table = VectorObjective(channel_histograms(image), ObjectiveKind.J3).table
    otsu, kapur = table.scores(t)
    summary: Dict[str, object] = {
        "thresholds": list(t),
        "otsu": [float(v) for v in otsu],
        "kapur": [float(v) for v in kapur],
    }
    for kind in ObjectiveKind:
        summary[kind.value] = [float(v) for v in to_minimization(raw_components(kind, otsu, kapur))]
    return summary


# -- commands ---------------------------------------------------------------


def cmd_segment(args) -> int:
    image = resolve_image(args.image)
    if args.thresholds is not None:
        try:
            t = as_thresholds(sorted(args.thresholds))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        algorithm, objective = "manual", "na"
    else:
        if args.T is None:
            raise UsageError("segment needs --thresholds or --T to search for them")
        algorithm = check_algorithms([args.alg])[0]
        objective = check_objectives([args.objective])[0]
        cfg = _swarm_config(args, args.T, algorithm, objective)
        report = run_single(VectorObjective(channel_histograms(image), objective), cfg)
        t = pick_solution(report.archive.members).thresholds

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = output_stem(image_stem(args.image), t, algorithm, objective)
    quant_path = out_dir / f"{stem}_quant.png"
    save_png(quantize(image, t).pixels, quant_path)
    labels_path = out_dir / f"{stem}_labels.csv"
    n_rows = write_segment_histogram_csv(image, t, labels_path)
    validate_csv(labels_path, ["channel", "intensity", "class", "count"], rows=n_rows)
    written = [quant_path, labels_path]
    if args.mask is not None:
        labels = apply_thresholds(image, t)
        if not 0 <= args.mask < labels.n_classes:
            raise UsageError(f"--mask {args.mask} outside [0, {labels.n_classes - 1}]")
        for c in CHANNELS:
            path = out_dir / f"{stem}_mask_c{c}_k{args.mask}.png"
            save_png(class_mask(labels, c, args.mask), path)
            written.append(path)

    summary = _score_summary(image, t)
    print(json.dumps(summary, sort_keys=True))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_front(args) -> int:
    image = resolve_image(args.image)
    if args.T is None:
        raise UsageError("front needs --T")
    algorithm = check_algorithms([args.alg])[0]
    objective = check_objectives([args.objective])[0]
    cfg = _swarm_config(args, args.T, algorithm, objective)
    hists = channel_histograms(image)
    report = run_single(VectorObjective(hists, objective), cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{image_stem(args.image)}_T{args.T}_{algorithm}_{objective.upper()}"
    path = out_dir / f"{stem}_front.csv"
    rows = write_archive_csv(report.archive.members, path, source="archive")
    dim = ObjectiveKind.parse(objective).dim
    validate_csv(path, archive_header(args.T, dim, dim), rows=len(report.archive))
    print(f"archive size {rows}, mmwr {report.mmwr!r}, wrote {path}")
    if args.oracle:
        try:
            exact = exhaustive_pareto_front(hists, args.T, objective)
        except TooManyThresholds as exc:
            raise UsageError(str(exc)) from None
        oracle_path = out_dir / f"{stem}_oracle.csv"
        n = write_archive_csv(exact, oracle_path, source="oracle")
        validate_csv(oracle_path, archive_header(args.T, dim, dim), rows=n)
        print(f"exact front size {n}, wrote {oracle_path}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    images = args.image_list or ([args.image] if args.image else [])
    if not images:
        raise UsageError("benchmark needs at least one --image")
    algorithms = check_algorithms(args.alg_list)
    objectives = check_objectives(args.objective_list)
    T_values = args.T_list or list(DEFAULT_T_SWEEP)
    threads = resolve_threads(args.threads)

    batches = []
    table_rows = []
    for spec in images:
        image = resolve_image(spec)
        hists = channel_histograms(image)
        for T in T_values:
            for algorithm in algorithms:
                for objective in objectives:
                    cfg = _swarm_config(args, T, algorithm, objective, repeats=args.repeats)
                    batch = run_batch(VectorObjective(hists, objective), cfg, threads=threads)
                    doc = batch.to_dict(image_label(spec))
                    batches.append(doc)
                    table_rows.append(_table_row(doc))
                    print(
                        f"{doc['image']} T={T} {algorithm} {objective}: "
                        f"mean_mmwr={doc['mean_mmwr']!r} mean_wall_clock_s={doc['mean_wall_clock_s']}",
                        file=sys.stderr,
                    )

    document = {"batches": batches}
    validate_benchmark(document)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "benchmark.json"
    json_path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    csv_path = out_dir / "benchmark_table.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        writer.writerows(table_rows)
    validate_csv(csv_path, TABLE_HEADER, rows=len(table_rows))
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return EXIT_OK


TABLE_HEADER = [
    "image", "T", "algorithm", "objective", "repeats",
    "mean_mwr", "mean_raw_mwr", "mean_mmwr", "mean_wall_clock_s",
]


def _fmt_vector(values) -> str:
    return "[" + " ".join(f"{v:.6g}" for v in values) + "]"


def _table_row(doc) -> list:
    return [
        doc["image"], doc["T"], doc["algorithm"], doc["objective"], len(doc["per_run"]),
        _fmt_vector(doc["mean_mwr"]), _fmt_vector(doc["mean_raw_mwr"]),
        repr(doc["mean_mmwr"]), doc["mean_wall_clock_s"],
    ]


def cmd_oracle_check(args) -> int:
    if args.T > MAX_FRONT_T:
        raise UsageError(f"TooManyThresholds: oracle-check supports T <= {MAX_FRONT_T}, got {args.T}")
    if args.T < 1:
        raise UsageError("oracle-check needs --T of 1 or 2")
    image = resolve_image(args.image)
    hists = channel_histograms(image)
    algorithms = check_algorithms(args.alg_list)
    objectives = check_objectives(args.objective_list)
    required = math.ceil(args.repeats * args.min_pass_fraction - 1e-12)
    seeds = [args.seed + k for k in range(args.repeats)]

    ok = True
    for objective in objectives:
        exact = exhaustive_pareto_front(hists, args.T, objective)
        for algorithm in algorithms:
            trials = coverage_trials(
                hists, args.T, algorithm, objective, seeds,
                population=args.pop, iterations=args.iters,
                archive_capacity=args.archive_cap, exact=exact,
            )
            passing = sum(tr.coverage >= args.min_coverage for tr in trials)
            coverages = [tr.coverage for tr in trials]
            verdict = "PASS" if passing >= required else "FAIL"
            ok &= verdict == "PASS"
            print(
                f"{verdict} {algorithm} {objective} T={args.T} front={len(exact)} "
                f"coverage min={min(coverages):.4f} mean={np.mean(coverages):.4f} "
                f"runs>={args.min_coverage}: {passing}/{len(trials)} (need {required})"
            )
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_hist3d(args) -> int:
    image = resolve_image(args.image)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{image_stem(args.image)}_hist3d.csv"
    hist = histogram_3d(image)
    write_histogram_3d_csv(hist, path)
    validate_csv(path, ["r", "g", "b", "count"], rows=len(hist))
    print(f"{len(hist)} distinct colours, wrote {path}")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, image in fixtures.all_fixtures().items():
        path = out_dir / f"{name}.png"
        save_png(image.pixels, path)
        print(f"wrote {path}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_image(p: argparse.ArgumentParser) -> None:
    p.add_argument("image", nargs="?", default=None, help="image path or fixture:<name>")
    p.add_argument("--image", dest="image_flag", default=None, help="alternative to the positional image")


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--T", type=int, default=None, help="number of thresholds to search for")
    p.add_argument("--alg", default="mssa", help="mopso or mssa")
    p.add_argument("--objective", default="j4", help="j1, j2, j3 or j4")
    _add_swarm(p)


def _add_swarm(p: argparse.ArgumentParser, repeats: bool = False) -> None:
    p.add_argument("--pop", type=int, default=30)
    p.add_argument("--iters", type=int, default=500)
    if repeats:
        p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--archive-cap", type=int, default=100)
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback: ${THREADS_ENV})")
    p.add_argument("--out-dir", default=".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-thresh",
        description="Shared-threshold colour image segmentation with multi-objective swarms.",
    )
    parser.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment an image with given or searched thresholds")
    _add_image(p)
    p.add_argument("--thresholds", type=_int_list, default=None, help="comma-separated, e.g. 13,78,200")
    p.add_argument("--mask", type=int, default=None, help="also write a mask per channel for this class")
    _add_search(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("front", help="run one optimization and dump its Pareto archive")
    _add_image(p)
    p.add_argument("--oracle", action="store_true", help="also dump the exhaustive front (T <= 2)")
    _add_search(p)
    p.set_defaults(func=cmd_front)

    p = sub.add_parser("benchmark", help="repeated-run sweep over images, T, algorithms, objectives")
    p.add_argument("image", nargs="?", default=None)
    p.add_argument("--image", dest="image_list", action="append", default=None)
    p.add_argument("--T", dest="T_list", type=_int_list, default=None, help="default 4,8,12")
    p.add_argument("--alg", dest="alg_list", type=_csv_list, default=list(ALGORITHMS))
    p.add_argument("--objective", dest="objective_list", type=_csv_list, default=[k.value for k in ObjectiveKind])
    _add_swarm(p, repeats=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("oracle-check", help="compare swarm archives against the exhaustive front")
    _add_image(p)
    p.add_argument("--T", type=int, default=1)
    p.add_argument("--alg", dest="alg_list", type=_csv_list, default=list(ALGORITHMS))
    p.add_argument("--objective", dest="objective_list", type=_csv_list, default=[k.value for k in ObjectiveKind])
    p.add_argument("--min-coverage", type=float, default=0.95)
    p.add_argument("--min-pass-fraction", type=float, default=28 / 30)
    _add_swarm(p, repeats=True)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("hist3d", help="export the sparse 3D colour histogram as CSV")
    _add_image(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_hist3d)

    p = sub.add_parser("fixtures", help="write the bundled synthetic images as PNG")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_fixtures)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        config = json.loads(Path(known.config).read_text())
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(config, dict):
        parser.error("config file must hold a JSON object")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    aliases = {"alg": "alg_list", "objective": "objective_list", "T": "T_list", "image": "image_list"}
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        for subparser in action.choices.values():
            dests = {a.dest for a in subparser._actions}  # noqa: SLF001
            defaults = {}
            for key, value in config.items():
                if key in dests:
                    defaults[key] = value
                if aliases.get(key) in dests:
                    defaults[aliases[key]] = value if isinstance(value, list) else [value]
            if "image" in config and "image_flag" in dests:
                defaults["image_flag"] = config["image"]
            subparser.set_defaults(**defaults)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    if getattr(args, "image_flag", None) and not args.image:
        args.image = args.image_flag
    try:
        if args.command in ("segment", "front", "oracle-check", "hist3d") and not args.image:
            raise UsageError(f"{args.command} needs an image")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, UnsupportedFormat, CorruptImage) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
