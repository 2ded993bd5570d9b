"""Benchmark harness: ingest a matrix, run the clustering algorithms over
seeds, and emit Table-style comparison reports as table, CSV, or JSON."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .datamodel import AlgoParams, DataMatrix
from .enhanced_init import init_centroids
from .ingest import EmptyDataError, ParseError, load_matrix, write_table
from .isodata_agmfi import run_agmfi, run_eagmfi
from .kmeans import random_init, run_kmeans
from .quality import QualityReport, quality_report
from .synth import BlobSpec, generate_blobs

ALGORITHMS = ("kmeans", "kmeans-enhanced", "agmfi", "eagmfi")
DETERMINISTIC = {"kmeans-enhanced", "eagmfi"}

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

DELIMITER_MAP = {"tab": "\t", "comma": ",", "auto": None}


@dataclass(frozen=True)
class RunSpec:
    input_path: str
    delimiter: str | None          # parse delimiter, None = auto
    normalize: bool
    algorithms: tuple[str, ...]
    params: AlgoParams
    seeds: tuple[int, ...]
    fmt: str                       # table | csv | json
    output: str | None
    no_timing: bool


@dataclass(frozen=True)
class AlgoRow:
    algorithm: str
    final_k: int
    final_k_disagree: bool
    sil_best: float | None
    sil_mean: float | None
    sil_std: float | None
    sil_x100: float | None
    sse_best: float
    runtime_ms: float


@dataclass
class ComparisonReport:
    dataset: str
    initial_k: int
    rows: list[AlgoRow] = field(default_factory=list)


def _round6(x: float) -> float:
    """Canonicalize to the 6-decimal precision every output format prints."""
    return float(f"{x:.6f}")


def _run_one(data: DataMatrix, algorithm: str, seed: int,
             params: AlgoParams) -> QualityReport:
    start = time.perf_counter()
    if algorithm == "kmeans":
        clustering = run_kmeans(data, random_init(data, params.k_init, seed), params)
    elif algorithm == "kmeans-enhanced":
        seeds = init_centroids(data, params.k_init)
        clustering = run_kmeans(data, seeds.centroids, params, pruned=True)
    elif algorithm == "agmfi":
        clustering, _ = run_agmfi(data, random_init(data, params.k_init, seed), params)
    elif algorithm == "eagmfi":
        clustering, _ = run_eagmfi(data, params)
    else:
        raise ValueError(f"unknown algorithm: {algorithm}")
    elapsed = time.perf_counter() - start
    return quality_report(data, clustering, elapsed)


def _aggregate(algorithm: str, reports: list[QualityReport],
               notice) -> AlgoRow:
    ks = [r.final_k for r in reports]
    modal_k = max(set(ks), key=lambda k: (ks.count(k), -k))   # ties -> smallest k
    disagree = len(set(ks)) > 1
    if disagree:
        notice(f"final_k disagrees across seeds for '{algorithm}': {sorted(set(ks))}")

    sils = [r.silhouette_mean for r in reports if r.silhouette_mean is not None]
    if sils:
        best = _round6(max(sils))
        mean = _round6(float(np.mean(sils)))
        std = _round6(float(np.std(sils)))
        x100 = _round6(100.0 * float(np.mean(sils)))
    else:
        best = mean = std = x100 = None
    return AlgoRow(
        algorithm=algorithm,
        final_k=modal_k,
        final_k_disagree=disagree,
        sil_best=best,
        sil_mean=mean,
        sil_std=std,
        sil_x100=x100,
        sse_best=_round6(min(r.sse for r in reports)),
        runtime_ms=_round6(sum(r.elapsed for r in reports) * 1000.0),
    )


def _worker_count(n_jobs: int) -> int:
    raw = os.environ.get("ISOCLUST_THREADS", "0")
    try:
        setting = int(raw)
    except ValueError:
        raise ValueError(f"ISOCLUST_THREADS must be an integer, got {raw!r}")
    if setting < 0:
        raise ValueError("ISOCLUST_THREADS must be >= 0")
    if setting == 0:
        setting = os.cpu_count() or 1
    return max(1, min(setting, n_jobs))


def execute(data: DataMatrix, spec: RunSpec, dataset: str, notice) -> ComparisonReport:
    """Run every (algorithm, seed) job, optionally in a thread pool, and
    assemble rows in fixed algorithm order regardless of completion order."""
    jobs: list[tuple[str, int]] = []
    for algorithm in spec.algorithms:
        if algorithm in DETERMINISTIC:
            if len(set(spec.seeds)) > 1:
                notice(f"--seeds ignored for deterministic algorithm '{algorithm}'")
            jobs.append((algorithm, 0))
        else:
            if not spec.seeds:
                raise ValueError(f"algorithm '{algorithm}' needs at least one seed")
            jobs.extend((algorithm, seed) for seed in spec.seeds)

    workers = _worker_count(len(jobs))
    if workers == 1:
        results = [_run_one(data, alg, seed, spec.params) for alg, seed in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, data, alg, seed, spec.params)
                       for alg, seed in jobs]
            results = [f.result() for f in futures]

    report = ComparisonReport(dataset=dataset, initial_k=spec.params.k_init)
    for algorithm in spec.algorithms:
        reports = [r for (alg, _), r in zip(jobs, results) if alg == algorithm]
        report.rows.append(_aggregate(algorithm, reports, notice))
    return report


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_table(report: ComparisonReport, no_timing: bool) -> str:
    cols = ["algorithm", "final_k", "sil_best", "sil_mean", "sil_std",
            "sil_x100", "sse_best"]
    if not no_timing:
        cols.append("runtime_ms")
    lines = [f"dataset: {report.dataset}", f"initial_k: {report.initial_k}"]
    grid = [cols]
    for row in report.rows:
        k_text = f"{row.final_k}*" if row.final_k_disagree else str(row.final_k)
        cells = [row.algorithm, k_text, _fmt(row.sil_best), _fmt(row.sil_mean),
                 _fmt(row.sil_std), _fmt(row.sil_x100), _fmt(row.sse_best)]
        if not no_timing:
            cells.append(_fmt(row.runtime_ms))
        grid.append(cells)
    widths = [max(len(r[i]) for r in grid) for i in range(len(cols))]
    for r in grid:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _csv_columns(no_timing: bool) -> list[str]:
    cols = ["dataset", "algorithm", "initial_k", "final_k",
            "silhouette_mean", "silhouette_x100", "sse", "runtime_ms"]
    return cols[:-1] if no_timing else cols


def _row_record(report: ComparisonReport, row: AlgoRow, no_timing: bool) -> dict:
    record = {
        "dataset": report.dataset,
        "algorithm": row.algorithm,
        "initial_k": report.initial_k,
        "final_k": row.final_k,
        "silhouette_mean": row.sil_mean,
        "silhouette_x100": row.sil_x100,
        "sse": row.sse_best,
        "runtime_ms": row.runtime_ms,
    }
    if no_timing:
        del record["runtime_ms"]
    return record


def render_csv(report: ComparisonReport, no_timing: bool) -> str:
    cols = _csv_columns(no_timing)
    lines = [",".join(cols)]
    for row in report.rows:
        record = _row_record(report, row, no_timing)
        lines.append(",".join(_fmt(record[c]) for c in cols))
    return "\n".join(lines) + "\n"


def csv_from_json(text: str, no_timing: bool = False) -> str:
    """Rebuild the CSV from a JSON report; lossless for finite values."""
    doc = json.loads(text)
    cols = _csv_columns(no_timing)
    lines = [",".join(cols)]
    for record in doc["rows"]:
        lines.append(",".join(_fmt(record[c]) for c in cols))
    return "\n".join(lines) + "\n"


def render_json(report: ComparisonReport, no_timing: bool) -> str:
    doc = {
        "dataset": report.dataset,
        "initial_k": report.initial_k,
        "rows": [_row_record(report, row, no_timing) for row in report.rows],
    }
    return json.dumps(doc, indent=2) + "\n"


RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _notice(message: str) -> None:
    print(f"notice: {message}", file=sys.stderr)


# ---------------------------------------------------------------- argument handling

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoclust",
        description="Cluster expression matrices with K-Means / split-merge "
                    "algorithms and report silhouette quality.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--input", help="delimited matrix file")
        p.add_argument("--delimiter", help="tab, comma, or auto (default auto)")
        p.add_argument("--normalize", action="store_true", default=None,
                       help="z-score each row after dropping missing rows")
        p.add_argument("--k", type=int, help="initial cluster count")
        p.add_argument("--min-cluster-size", type=int, dest="min_cluster_size")
        p.add_argument("--max-outer-iter", type=int, dest="max_outer_iter")
        p.add_argument("--split-multiplier", type=float, dest="split_multiplier")
        p.add_argument("--split-offset", type=float, dest="split_offset")
        p.add_argument("--tol", type=float)
        p.add_argument("--seeds", help="comma-separated integer seeds")
        p.add_argument("--format", dest="fmt", help="table, csv, or json")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--no-timing", action="store_true", default=None,
                       dest="no_timing", help="omit the runtime column")
        p.add_argument("--config", help="key=value config file (flags win)")

    run = sub.add_parser("run", help="run one algorithm")
    add_common(run)
    run.add_argument("--algo", help=f"one of: {', '.join(ALGORITHMS)}")

    compare = sub.add_parser("compare", help="run all four algorithms")
    add_common(compare)

    synth = sub.add_parser("synth", help="write a synthetic blob dataset")
    synth.add_argument("--centers", required=True,
                       help="semicolon-separated points, comma-separated "
                            "coordinates, e.g. '0,0;10,0;20,0'")
    synth.add_argument("--points-per-center", type=int, default=30,
                       dest="points_per_center")
    synth.add_argument("--sigma", type=float, default=1.0)
    synth.add_argument("--seed", type=int, default=1)
    synth.add_argument("--output", required=True)
    synth.add_argument("--labels-output", dest="labels_output",
                       help="ground-truth label file (default: OUTPUT.labels)")
    return parser


def _load_config(path: str) -> dict[str, str]:
    config: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        config[key.strip().replace("-", "_")] = value.strip()
    return config


_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def _config_bool(value: str) -> bool:
    word = value.lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ValueError(f"--seeds must be comma-separated integers, got {text!r}")


def _resolve(args: argparse.Namespace) -> RunSpec:
    """flags > config file > defaults."""
    config = _load_config(args.config) if args.config else {}

    def pick(name: str, default, convert):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in config:
            return convert(config[name])
        return default

    input_path = pick("input", None, str)
    if not input_path:
        raise ValueError("--input is required")
    k = pick("k", None, int)
    if k is None:
        raise ValueError("--k is required")

    params = AlgoParams(
        k_init=k,
        min_cluster_size=pick("min_cluster_size", 2, int),
        max_outer_iterations=pick("max_outer_iter", 20, int),
        split_multiplier=pick("split_multiplier", 1.0, float),
        split_offset_fraction=pick("split_offset", 0.5, float),
        convergence_tol=pick("tol", 1e-6, float),
    )
    delimiter_word = pick("delimiter", "auto", str)
    if delimiter_word not in DELIMITER_MAP:
        raise ValueError(f"--delimiter must be tab, comma, or auto, got {delimiter_word!r}")

    if getattr(args, "command") == "run":
        algorithm = pick("algo", None, str)
        if algorithm is None:
            raise ValueError("--algo is required")
        if algorithm not in ALGORITHMS:
            raise ValueError(f"--algo must be one of {', '.join(ALGORITHMS)}")
        algorithms: tuple[str, ...] = (algorithm,)
    else:
        algorithms = ALGORITHMS

    seeds_raw = pick("seeds", None, str)
    seeds = (1, 2, 3, 4, 5) if seeds_raw is None else _parse_seeds(seeds_raw)

    fmt = pick("fmt", "table", str)
    if fmt not in RENDERERS:
        raise ValueError(f"--format must be table, csv, or json, got {fmt!r}")

    return RunSpec(
        input_path=input_path,
        delimiter=DELIMITER_MAP[delimiter_word],
        normalize=pick("normalize", False, _config_bool),
        algorithms=algorithms,
        params=params,
        seeds=seeds,
        fmt=fmt,
        output=pick("output", None, str),
        no_timing=pick("no_timing", False, _config_bool),
    )


def _cmd_run_or_compare(args: argparse.Namespace) -> int:
    spec = _resolve(args)
    data, dropped = load_matrix(spec.input_path, delimiter=spec.delimiter,
                                normalize=spec.normalize)
    if dropped:
        _notice(f"dropped {dropped} rows with missing values")
    if spec.params.k_init > data.n_rows:
        raise ValueError(
            f"k={spec.params.k_init} exceeds the {data.n_rows} usable rows")

    dataset = Path(spec.input_path).stem
    report = execute(data, spec, dataset, _notice)
    _emit(RENDERERS[spec.fmt](report, spec.no_timing), spec.output)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    try:
        centers = tuple(
            tuple(float(v) for v in point.split(","))
            for point in args.centers.split(";") if point.strip() != ""
        )
    except ValueError:
        raise ValueError(f"--centers must look like '0,0;10,0', got {args.centers!r}")
    spec = BlobSpec(centers=centers, points_per_center=args.points_per_center,
                    sigma=args.sigma, seed=args.seed)
    data, labels = generate_blobs(spec)
    Path(args.output).write_text(write_table(data), encoding="utf-8")
    labels_path = args.labels_output or args.output + ".labels"
    lines = [f"{rid}\t{lab}" for rid, lab in zip(data.row_ids, labels)]
    Path(labels_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_run_or_compare(args)
    except (ParseError, EmptyDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
