"""Command-line entry point: rank, scan, pipeline, compare, sweep.

Every artifact separates a deterministic ``payload`` (stable byte-for-byte
given the same seed and inputs) from a ``volatile`` block (timings). Exit
codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click

from .dataset import DEFAULT_MISSING_LABEL, DiscretizationSpec, load_csv
from .errors import DataError, SafsError
from .evaluation import overlap_matrix, sweep_k
from .ranking import (METHOD_MI, METHOD_SAFS, FeatureRanking,
                      mutual_information_rank, safs_rank, top_k)
from .report import build_report, empirical_p_value, report_text
from .scanner import OVER, ScanConfig, scan

SCHEMA = "safs/1"

_METHODS = {"safs": METHOD_SAFS, "mi": METHOD_MI}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


@dataclass
class PipelineConfig:
    """Resolved settings for one CLI invocation."""

    input_path: str
    outcome_col: str
    bins: int = 5
    missing_category: str = DEFAULT_MISSING_LABEL
    method: str = "safs"
    top_k: int | None = None
    restarts: int = 10
    direction: str = OVER
    seed: int = 0
    permutations: int = 100
    threads: int = 1
    out: str | None = None
    fmt: str = "json"


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _document(kind: str, payload: dict, volatile: dict) -> dict:
    return {"schema": SCHEMA, "kind": kind, "payload": payload, "volatile": volatile}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _load_dataset(cfg: PipelineConfig):
    spec = DiscretizationSpec(bins=cfg.bins, missing_label=cfg.missing_category)
    return load_csv(cfg.input_path, cfg.outcome_col, spec)


def _rank(cfg: PipelineConfig, dataset) -> tuple[FeatureRanking, float]:
    ranker = safs_rank if _METHODS[cfg.method] == METHOD_SAFS else mutual_information_rank
    t0 = time.perf_counter()
    ranking = ranker(dataset)
    return ranking, time.perf_counter() - t0


def _ranking_payload(dataset, ranking: FeatureRanking, selected: list[int] | None) -> dict:
    payload = {
        "kind": "ranking",
        "method": ranking.method,
        "outcome": dataset.outcome_name,
        "entries": [
            {"feature": dataset.schemas[f].name, "score": score, "rank": i + 1}
            for i, (f, score) in enumerate(ranking.entries)
        ],
    }
    if selected is not None:
        payload["top_k"] = [dataset.schemas[f].name for f in selected]
    return payload


def _ranking_text(payload: dict) -> str:
    width = max(len(e["feature"]) for e in payload["entries"])
    lines = [f"{e['feature']:<{width}}  {e['score']:.6f}" for e in payload["entries"]]
    return "\n".join(lines) + "\n"


def cmd_rank(cfg: PipelineConfig) -> dict:
    dataset = _load_dataset(cfg)
    ranking, elapsed = _rank(cfg, dataset)
    selected = top_k(ranking, cfg.top_k) if cfg.top_k is not None else None
    payload = _ranking_payload(dataset, ranking, selected)
    doc = _document("ranking", payload, {"elapsed_ms": elapsed * 1000})
    text = _ranking_text(payload) if cfg.fmt == "text" else canonical_json(doc)
    _emit(text, cfg.out)
    return doc


def _scan_payload(cfg: PipelineConfig, dataset, ranking, features, result) -> dict:
    return {
        "kind": "scan",
        "method": ranking.method,
        "top_k": len(features),
        "direction": cfg.direction,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "descriptor": result.descriptor.to_labels(dataset),
        "score": result.score,
        "q_hat": result.q_hat if result.q_hat != float("inf") else "inf",
        "subset_size": result.subset_size,
        "subset_fraction": result.subset_size / dataset.n_records,
    }


def cmd_scan(cfg: PipelineConfig) -> dict:
    dataset = _load_dataset(cfg)
    ranking, rank_elapsed = _rank(cfg, dataset)
    k = cfg.top_k if cfg.top_k is not None else dataset.n_features
    features = top_k(ranking, k)
    config = ScanConfig(direction=cfg.direction, restarts=cfg.restarts, seed=cfg.seed)
    result = scan(dataset, features, config)
    payload = _scan_payload(cfg, dataset, ranking, features, result)
    volatile = {"rank_ms": rank_elapsed * 1000, "scan_ms": result.elapsed * 1000}
    doc = _document("scan", payload, volatile)
    if cfg.fmt == "text":
        text = report_text(build_report(dataset, result), dataset) + "\n"
    else:
        text = canonical_json(doc)
    _emit(text, cfg.out)
    return doc


def cmd_pipeline(cfg: PipelineConfig) -> dict:
    dataset = _load_dataset(cfg)
    ranking, rank_elapsed = _rank(cfg, dataset)
    k = cfg.top_k if cfg.top_k is not None else dataset.n_features
    features = top_k(ranking, k)
    config = ScanConfig(direction=cfg.direction, restarts=cfg.restarts, seed=cfg.seed)
    result = scan(dataset, features, config)
    p_value = empirical_p_value(dataset, features, config, result.score,
                                cfg.permutations, cfg.threads)
    report = build_report(dataset, result, p_value)
    payload = _scan_payload(cfg, dataset, ranking, features, result)
    payload.update({
        "kind": "pipeline",
        "n_features": report.n_features,
        "n_values": report.n_values,
        "subset_pct": report.subset_pct,
        "odds_ratio": report.odds_ratio,
        "ci": [report.ci_low, report.ci_high],
        "p_value": report.p_value,
        "permutations": cfg.permutations,
        "no_divergence": report.no_divergence,
    })
    volatile = {"rank_ms": rank_elapsed * 1000, "scan_ms": result.elapsed * 1000}
    doc = _document("pipeline", payload, volatile)
    text = report_text(report, dataset) + "\n" if cfg.fmt == "text" else canonical_json(doc)
    _emit(text, cfg.out)
    return doc


def _load_ranking_file(path: str) -> tuple[str, list[str]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read ranking file {path}: {exc}") from exc
    if doc.get("schema") != SCHEMA or doc.get("kind") != "ranking":
        raise DataError(f"{path} is not a {SCHEMA} ranking artifact")
    entries = doc["payload"]["entries"]
    return doc["payload"]["method"], [e["feature"] for e in entries]


def cmd_compare(paths: list[str], p: float, out: str | None, fmt: str) -> dict:
    rankings = {}
    for path in paths:
        method, features = _load_ranking_file(path)
        name = method if method not in rankings else f"{method}:{path}"
        rankings[name] = features
    matrix = overlap_matrix(rankings, p)
    payload = {
        "kind": "rbo-matrix",
        "p": p,
        "methods": list(matrix.methods),
        "matrix": [[round(v, 12) for v in row] for row in matrix.matrix.tolist()],
    }
    doc = _document("rbo-matrix", payload, {})
    if fmt == "text":
        width = max(len(m) for m in matrix.methods)
        lines = [f"{m:<{width}}  " + "  ".join(f"{v:.4f}" for v in row)
                 for m, row in zip(matrix.methods, matrix.matrix)]
        text = "\n".join(lines) + "\n"
    else:
        text = canonical_json(doc)
    _emit(text, out)
    return doc


def cmd_sweep(cfg: PipelineConfig, k_values: list[int]) -> list[dict]:
    dataset = _load_dataset(cfg)
    ranking, _ = _rank(cfg, dataset)
    config = ScanConfig(direction=cfg.direction, restarts=cfg.restarts, seed=cfg.seed)
    entries = sweep_k(dataset, ranking, k_values, config, cfg.permutations)
    docs = []
    for entry in entries:
        payload = {
            "kind": "sweep-entry",
            "method": ranking.method,
            "k": entry.k,
            "descriptor": entry.result.descriptor.to_labels(dataset),
            "score": entry.result.score,
            "subset_size": entry.report.subset_size,
            "subset_pct": entry.report.subset_pct,
            "n_features": entry.report.n_features,
            "n_values": entry.report.n_values,
            "odds_ratio": entry.report.odds_ratio,
            "ci": [entry.report.ci_low, entry.report.ci_high],
            "p_value": entry.report.p_value,
            "jaccard_vs_full": entry.jaccard_vs_full,
        }
        volatile = {"scan_seconds": entry.timing.seconds}
        docs.append(_document("sweep-entry", payload, volatile))
    text = "".join(json.dumps(d, sort_keys=True, ensure_ascii=False) + "\n" for d in docs)
    _emit(text, cfg.out)
    return docs


def _common_options(fn):
    opts = [
        click.option("--input", "input_path", required=True,
                     type=click.Path(), help="Input CSV file."),
        click.option("--outcome-col", required=True, help="Binary outcome column."),
        click.option("--bins", default=5, show_default=True, type=int,
                     help="Quantile bins for numeric columns."),
        click.option("--missing-category", default=DEFAULT_MISSING_LABEL,
                     help="Label for the missing-value category."),
        click.option("--method", default="safs", show_default=True,
                     type=click.Choice(sorted(_METHODS))),
        click.option("--out", default=None, type=click.Path(),
                     help="Output path (stdout if omitted)."),
        click.option("--format", "fmt", default="json", show_default=True,
                     type=click.Choice(["json", "text"])),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _scan_options(fn):
    opts = [
        click.option("--restarts", default=10, show_default=True, type=int),
        click.option("--direction", default="over", show_default=True,
                     type=click.Choice(["over", "under"])),
        click.option("--seed", default=0, show_default=True, type=int),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def cli():
    """Rank tabular features by sparsity of association and discover the most
    divergent subgroup."""


@cli.command("rank")
@_common_options
@click.option("--top-k", default=None, type=int, help="Also list the top-K features.")
def rank_command(**kw):
    """Rank features and write the ranking artifact."""
    cmd_rank(PipelineConfig(**kw))


@cli.command("scan")
@_common_options
@_scan_options
@click.option("--top-k", default=None, type=int,
              help="Scan only the top-K ranked features (default: all).")
def scan_command(**kw):
    """Rank, select top-K features, and scan for the most divergent subgroup."""
    cmd_scan(PipelineConfig(**kw))


@cli.command("pipeline")
@_common_options
@_scan_options
@click.option("--top-k", default=None, type=int,
              help="Scan only the top-K ranked features (default: all).")
@click.option("--permutations", default=100, show_default=True, type=int)
@click.option("--threads", default=1, show_default=True, type=int)
def pipeline_command(**kw):
    """Full run: rank, scan, permutation test, subgroup report."""
    cmd_pipeline(PipelineConfig(**kw))


@cli.command("compare")
@click.option("--rankings", "paths", multiple=True, required=True,
              type=click.Path(), help="Ranking artifacts to compare (repeatable).")
@click.option("-p", "--persistence", default=0.9, show_default=True, type=float)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="json", show_default=True,
              type=click.Choice(["json", "text"]))
def compare_command(paths, persistence, out, fmt):
    """Pairwise rank-biased overlap of saved rankings."""
    if len(paths) < 2:
        raise click.UsageError("need at least two --rankings files")
    cmd_compare(list(paths), persistence, out, fmt)


@cli.command("sweep")
@_common_options
@_scan_options
@click.option("--k", "k_spec", required=True,
              help="Comma-separated ascending K values, e.g. 5,10,15.")
@click.option("--permutations", default=0, show_default=True, type=int,
              help="Permutation replicates per K (0 skips the p-value).")
def sweep_command(k_spec, **kw):
    """Scan each top-K prefix and emit one JSON line per K."""
    try:
        k_values = [int(v) for v in k_spec.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"cannot parse --k value {k_spec!r}") from None
    cmd_sweep(PipelineConfig(**kw), k_values)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="SAFS")
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return EXIT_OK if exc.exit_code == 0 else EXIT_USAGE
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.Abort:
        print("aborted", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SafsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort diagnostic
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
