"""End-to-end benchmark orchestration: ingest, subset, preprocess, resample,
tune, fit, score, evaluate, and render comparison reports.

Per-cell randomness derives from the master seed hashed with the (dataset,
sampler, model) names, so adding or removing a model never shifts any other
cell.  Outputs are byte-deterministic for a fixed config; wall times live in
a separate timings file because they are not.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .compare import (
    ComparisonReport,
    SamplerComparison,
    aggregate_report,
    compare_samplers,
    render_report_csv,
    render_report_markdown,
    render_sampler_comparison_csv,
)
from .config import DatasetConfig, ModelEntry, RunConfig, SamplerEntry, TuningConfig
from .data import load_csv, stratified_split, stratified_subset
from .metrics import METRIC_NAMES, MetricSet, evaluate_cell
from .models import BASE_FAMILIES, ENSEMBLE_FAMILIES, ModelSpec, fit
from .preprocess import apply_preprocessor, fit_preprocessor
from .resample import ResampledSet, SamplerConfig, apply_sampler
from .tune import TuningGrid, cv_grid_search, default_grid


def seed_from(master: int, *parts: str) -> int:
    digest = hashlib.sha256(":".join([str(master), *parts]).encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


@dataclass(frozen=True)
class EvaluationRecord:
    dataset: str
    sampler: str
    model: str
    hyperparameters: dict
    metrics: MetricSet
    threshold: float
    wall_time: float


@dataclass(frozen=True)
class CellError:
    dataset: str
    sampler: str
    model: str
    reason: str


@dataclass
class PreparedDataset:
    name: str
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    provenance_note: str


@dataclass
class BenchmarkResult:
    records: list[EvaluationRecord]
    errors: list[CellError]
    reports: dict[str, ComparisonReport]
    sampler_comparison: SamplerComparison | None
    provenance: str


def prepare_dataset(ds: DatasetConfig) -> PreparedDataset:
    schema = ds.resolve_schema()
    data = load_csv(ds.path, schema)
    data.require_both_classes()
    note = io.StringIO()
    note.write(f"dataset {ds.name}: {data.n_rows} rows, classes {data.class_counts()}\n")
    if ds.subset_fraction < 1.0:
        data = stratified_subset(data, ds.subset_fraction, seed=seed_from(ds.seed, "subset"))
        note.write(
            f"  subset fraction {ds.subset_fraction}: {data.n_rows} rows, "
            f"classes {data.class_counts()}\n"
        )
    split = stratified_split(data, ds.train_fraction, seed=seed_from(ds.seed, "split"))
    train, test = data.take(split.train), data.take(split.test)
    note.write(
        f"  split {ds.train_fraction}: train {train.class_counts()}, test {test.class_counts()}\n"
    )
    plan, X_train = fit_preprocessor(train)
    X_test = apply_preprocessor(plan, test)
    note.write("  " + plan.report().replace("\n", "\n  ").rstrip() + "\n")
    return PreparedDataset(
        name=ds.name,
        X_train=X_train,
        y_train=np.asarray(train.target),
        X_test=X_test,
        y_test=np.asarray(test.target),
        provenance_note=note.getvalue(),
    )


def _sampler_config(entry: SamplerEntry, seed: int) -> SamplerConfig:
    return SamplerConfig(
        kind=entry.kind,
        seed=seed,
        smote_over_pct=entry.smote_over_pct,
        smote_under_pct=entry.smote_under_pct,
        smote_k=entry.smote_k,
        bsmote_m=entry.bsmote_m,
        rose_shrink=entry.rose_shrink,
        down_cap=entry.down_cap,
    )


def run_cell_group(
    prepared: PreparedDataset,
    sampler: SamplerEntry,
    models: list[ModelEntry],
    tuning: TuningConfig,
    master_seed: int,
    skip_on_error: bool,
) -> tuple[list[EvaluationRecord], list[CellError]]:
    """All models for one (dataset, sampler) pair.

    Base families are tuned and fitted first; heterogeneous ensembles then
    combine exactly those tuned members, fitted under the same sampler.
    """
    records: list[EvaluationRecord] = []
    errors: list[CellError] = []
    sampler_seed = seed_from(master_seed, "sampler", prepared.name, sampler.kind)
    resampled = apply_sampler(prepared.X_train, prepared.y_train, _sampler_config(sampler, sampler_seed))
    train_good_rate = float((resampled.target == 0).mean())
    d = prepared.X_train.shape[1]

    base_entries = [m for m in models if m.family in BASE_FAMILIES]
    ensemble_entries = [m for m in models if m.family in ENSEMBLE_FAMILIES]
    tuned_specs: list[ModelSpec] = []
    fitted_bases = []
    tuned_cv_scores: list[float] = []

    def evaluate(family: str, run) -> None:
        start = time.perf_counter()
        try:
            spec, model = run()
        except Exception as exc:  # noqa: BLE001 - cell failures are data
            if not skip_on_error:
                raise
            errors.append(CellError(prepared.name, sampler.kind, family, str(exc)))
            return
        scores = model.score(prepared.X_test)
        metric_set, tau = evaluate_cell(scores, prepared.y_test, train_good_rate)
        records.append(
            EvaluationRecord(
                dataset=prepared.name,
                sampler=sampler.kind,
                model=family,
                hyperparameters=spec.hyperparameters,
                metrics=metric_set,
                threshold=tau.tau,
                wall_time=time.perf_counter() - start,
            )
        )

    for entry in base_entries:
        cell_seed = seed_from(master_seed, "cell", prepared.name, sampler.kind, entry.family)

        def run_base(entry=entry, cell_seed=cell_seed):
            grid = (
                TuningGrid(entry.family, entry.grid, tuning.fold_count, tuning.selection_metric)
                if entry.grid is not None
                else default_grid(entry.family, d)
            )
            grid = TuningGrid(grid.family, grid.candidates, tuning.fold_count, tuning.selection_metric)
            best, table = cv_grid_search(grid, resampled, seed=cell_seed)
            model = fit(best, resampled, seed=cell_seed)
            tuned_specs.append(best)
            fitted_bases.append(model)
            tuned_cv_scores.append(max(r.mean_metric for r in table))
            return best, model

        evaluate(entry.family, run_base)

    # the weighted average reuses the members' tuning CV accuracy
    cv_weights = tuned_cv_scores if tuning.selection_metric == "accuracy" else None
    for entry in ensemble_entries:
        cell_seed = seed_from(master_seed, "cell", prepared.name, sampler.kind, entry.family)

        def run_ensemble(entry=entry, cell_seed=cell_seed):
            if len(tuned_specs) < 2:
                raise ValueError(
                    f"{entry.family} needs at least two successfully fitted base models"
                )
            spec = ModelSpec(entry.family, {"members": list(tuned_specs)})
            model = fit(
                spec, resampled, seed=cell_seed,
                fitted_members=list(fitted_bases),
                member_weights=cv_weights if entry.family == "avg_weighted" else None,
            )
            return spec, model

        evaluate(entry.family, run_ensemble)

    return records, errors


def _group_worker(args) -> tuple[list[EvaluationRecord], list[CellError]]:
    return run_cell_group(*args)


def run_benchmark(config: RunConfig) -> BenchmarkResult:
    problems = config.validate_files()
    if problems:
        raise ValueError("invalid configuration: " + "; ".join(problems))

    prepared = [prepare_dataset(ds) for ds in config.datasets]
    jobs = [
        (prep, sampler, config.models, config.tuning, config.seed, config.skip_on_error)
        for prep in prepared
        for sampler in config.samplers
    ]
    if config.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            outcomes = list(pool.map(_group_worker, jobs))
    else:
        outcomes = [_group_worker(job) for job in jobs]

    records = [r for recs, _ in outcomes for r in recs]
    errors = [e for _, errs in outcomes for e in errs]
    # deterministic order: config order of (dataset, sampler, model)
    order = {
        (ds.name, s.kind, m.family): i
        for i, (ds, s, m) in enumerate(
            (ds, s, m) for ds in config.datasets for s in config.samplers for m in config.models
        )
    }
    records.sort(key=lambda r: order[(r.dataset, r.sampler, r.model)])

    reports, sampler_cmp = build_reports(
        records,
        datasets=[ds.name for ds in config.datasets],
        samplers=[s.kind for s in config.samplers],
        models=[m.family for m in config.models],
        metrics=config.metrics,
        strict=not config.skip_on_error,
    )
    provenance = render_provenance(config, prepared, errors)
    return BenchmarkResult(records, errors, reports, sampler_cmp, provenance)


def build_reports(
    records: list[EvaluationRecord],
    datasets: list[str],
    samplers: list[str],
    models: list[str],
    metrics: list[str],
    strict: bool = True,
) -> tuple[dict[str, ComparisonReport], SamplerComparison | None]:
    """Scenario tables plus the cross-sampler aggregation.

    With ``strict`` a missing grid cell is an error naming the cell; without
    it, models missing any value inside a scenario are dropped from that
    scenario's table (they stay in the sampler aggregation, which tolerates
    gaps).
    """
    by_key = {(r.dataset, r.sampler, r.model): r for r in records}
    missing = [
        f"{d}/{s}/{m}"
        for d in datasets
        for s in samplers
        for m in models
        if (d, s, m) not in by_key
    ]
    if missing and strict:
        raise ValueError("incomplete grid, missing cells: " + ", ".join(missing))

    reports: dict[str, ComparisonReport] = {}
    for s in samplers:
        keep = [
            m for m in models if all((d, s, m) in by_key for d in datasets)
        ]
        if len(keep) < 1:
            continue
        values = {
            metric: np.array(
                [[getattr(by_key[(d, s, m)].metrics, metric) for d in datasets] for m in keep]
            )
            for metric in metrics
        }
        reports[s] = aggregate_report(values, keep, datasets)

    sampler_cmp = None
    if len(samplers) >= 2:
        tensor = np.full((len(samplers), len(models), len(datasets), len(metrics)), np.nan)
        for si, s in enumerate(samplers):
            for mi, m in enumerate(models):
                for di, d in enumerate(datasets):
                    rec = by_key.get((d, s, m))
                    if rec is None:
                        continue
                    for ki, metric in enumerate(metrics):
                        tensor[si, mi, di, ki] = getattr(rec.metrics, metric)
        sampler_cmp = compare_samplers(tensor, samplers, models, metrics)
    return reports, sampler_cmp


# ---------------------------------------------------------------------------
# records and report files


RECORD_COLUMNS = ["dataset", "sampler", "model", "hyperparameters", "threshold", *METRIC_NAMES]


def records_to_csv(records: list[EvaluationRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.dataset,
                r.sampler,
                r.model,
                json.dumps(r.hyperparameters, sort_keys=True, default=_spec_json),
                repr(float(r.threshold)),
            ]
            + [repr(float(getattr(r.metrics, m))) for m in METRIC_NAMES]
        )
    return out.getvalue()


def _spec_json(obj):
    if isinstance(obj, ModelSpec):
        return {"family": obj.family, "hyperparameters": obj.hyperparameters}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def timings_to_csv(records: list[EvaluationRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["dataset", "sampler", "model", "wall_time_seconds"])
    for r in records:
        writer.writerow([r.dataset, r.sampler, r.model, f"{r.wall_time:.3f}"])
    return out.getvalue()


def records_from_csv(text: str) -> list[EvaluationRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not set(RECORD_COLUMNS).issubset(reader.fieldnames):
        raise ValueError(f"records file needs columns {RECORD_COLUMNS}")
    records = []
    for row in reader:
        records.append(
            EvaluationRecord(
                dataset=row["dataset"],
                sampler=row["sampler"],
                model=row["model"],
                hyperparameters=json.loads(row["hyperparameters"]),
                metrics=MetricSet(**{m: float(row[m]) for m in METRIC_NAMES}),
                threshold=float(row["threshold"]),
                wall_time=0.0,
            )
        )
    return records


def render_provenance(
    config: RunConfig, prepared: list[PreparedDataset], errors: list[CellError]
) -> str:
    out = io.StringIO()
    out.write(f"creditbench {__version__}\n")
    canonical = json.dumps(config.model_dump(by_alias=True), sort_keys=True)
    out.write(f"config sha256: {hashlib.sha256(canonical.encode()).hexdigest()}\n")
    out.write("config:\n")
    out.write(json.dumps(config.model_dump(by_alias=True), indent=2, sort_keys=True) + "\n")
    for prep in prepared:
        out.write(prep.provenance_note)
    if errors:
        out.write("cell errors (excluded from ranking):\n")
        for e in errors:
            out.write(f"  {e.dataset}/{e.sampler}/{e.model}: {e.reason}\n")
    return out.getvalue()


def write_outputs(result: BenchmarkResult, output_dir: str | Path) -> list[Path]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        path = output_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    emit("records.csv", records_to_csv(result.records))
    emit("timings.csv", timings_to_csv(result.records))
    for sampler, report in result.reports.items():
        emit(f"report_{sampler}.md", render_report_markdown(report, f"Scenario: {sampler}"))
        emit(f"report_{sampler}.csv", render_report_csv(report))
    if result.sampler_comparison is not None:
        emit("sampler_comparison.csv", render_sampler_comparison_csv(result.sampler_comparison))
    emit("provenance.txt", result.provenance)
    return written
