"""Tabular dataset representation: CSV ingestion against a declared schema,
stratified subsetting and stratified train/test splitting.

The target is stored as a default indicator (1 = default, 0 = good); the
"positive" class used for scoring elsewhere is the good one.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path

import numpy as np

DEFAULT_MISSING_TOKENS = ("NA", "")


@dataclass(frozen=True)
class ColumnSchema:
    """One column declaration: identifier, kind, and recognised missing tokens.

    For the target column, ``good_label`` and ``default_label`` declare the
    two admissible raw values; anything else is a contract violation.
    """

    name: str
    kind: str  # numeric | categorical | target
    missing_tokens: tuple[str, ...] = DEFAULT_MISSING_TOKENS
    good_label: str | None = None
    default_label: str | None = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical", "target"):
            raise ValueError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "target" and (self.good_label is None or self.default_label is None):
            raise ValueError(f"target column {self.name!r} must declare good and default labels")


def validate_schema(schema: list[ColumnSchema] | tuple[ColumnSchema, ...]) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ValueError("schema column names must be unique")
    targets = [c for c in schema if c.kind == "target"]
    if len(targets) != 1:
        raise ValueError(f"schema must declare exactly one target column, found {len(targets)}")


@dataclass(frozen=True)
class TabularDataset:
    """Immutable column store; operations return new instances."""

    schema: tuple[ColumnSchema, ...]
    columns: dict[str, np.ndarray] = field(repr=False)  # numeric: float64, categorical: object
    target: np.ndarray = field(repr=False)              # int8 default indicator

    def __post_init__(self):
        validate_schema(self.schema)
        n = self.n_rows
        if n < 1:
            raise ValueError("dataset must contain at least one row")
        for c in self.predictor_schema:
            if len(self.columns[c.name]) != n:
                raise ValueError(f"column {c.name!r} length mismatch")
        if not np.isin(self.target, (0, 1)).all():
            raise ValueError("target must contain only 0/1")

    @property
    def n_rows(self) -> int:
        return len(self.target)

    @property
    def predictor_schema(self) -> tuple[ColumnSchema, ...]:
        return tuple(c for c in self.schema if c.kind != "target")

    @property
    def predictor_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.predictor_schema)

    @property
    def target_schema(self) -> ColumnSchema:
        return next(c for c in self.schema if c.kind == "target")

    def class_counts(self) -> tuple[int, int]:
        """(good, default) counts."""
        d = int(self.target.sum())
        return self.n_rows - d, d

    def default_rate(self) -> float:
        return float(self.target.mean())

    def require_both_classes(self) -> None:
        good, bad = self.class_counts()
        if good == 0 or bad == 0:
            raise ValueError("dataset is degenerate: a class is absent")

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.columns[name]
        if col.dtype == object:
            return np.array([v is None for v in col])
        return np.isnan(col)

    def n_missing(self) -> int:
        return int(sum(self.missing_mask(n).sum() for n in self.predictor_names))

    def take(self, indices: np.ndarray) -> "TabularDataset":
        indices = np.asarray(indices)
        return TabularDataset(
            schema=self.schema,
            columns={n: self.columns[n][indices] for n in self.predictor_names},
            target=self.target[indices],
        )


def load_csv(path: str | Path, schema: list[ColumnSchema]) -> TabularDataset:
    """Parse an RFC-4180 style file with a header row against the schema."""
    validate_schema(schema)
    by_name = {c.name: c for c in schema}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        unknown = [h for h in header if h not in by_name]
        if unknown:
            raise ValueError(f"{path}: unknown column(s) {unknown}")
        missing_cols = [n for n in by_name if n not in header]
        if missing_cols:
            raise ValueError(f"{path}: column(s) declared but absent: {missing_cols}")
        raw_rows = list(reader)
    if not raw_rows:
        raise ValueError(f"{path}: no data rows")

    cells: dict[str, list] = {name: [] for name in header}
    target_vals: list[int] = []
    for i, row in enumerate(raw_rows):
        rowno = i + 2  # header is line 1
        if len(row) != len(header):
            raise ValueError(f"{path}: row {rowno}: expected {len(header)} fields, got {len(row)}")
        for name, value in zip(header, row):
            col = by_name[name]
            if col.kind == "target":
                if value == col.default_label:
                    target_vals.append(1)
                elif value == col.good_label:
                    target_vals.append(0)
                else:
                    raise ValueError(
                        f"{path}: row {rowno}: target value {value!r} outside declared labels"
                    )
            elif col.kind == "numeric":
                if value in col.missing_tokens:
                    cells[name].append(np.nan)
                else:
                    try:
                        cells[name].append(float(value))
                    except ValueError:
                        raise ValueError(
                            f"{path}: row {rowno}: cannot parse {value!r} as numeric "
                            f"for column {name!r}"
                        ) from None
            else:
                cells[name].append(None if value in col.missing_tokens else value)

    columns: dict[str, np.ndarray] = {}
    for col in schema:
        if col.kind == "target":
            continue
        if col.kind == "numeric":
            columns[col.name] = np.array(cells[col.name], dtype=float)
        else:
            columns[col.name] = np.array(cells[col.name], dtype=object)
    return TabularDataset(
        schema=tuple(schema), columns=columns, target=np.array(target_vals, dtype=np.int8)
    )


def save_csv(data: TabularDataset, path: str | Path) -> None:
    """Serialize so that a reload is value-identical (floats via repr)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        names = [c.name for c in data.schema]
        writer.writerow(names)
        tgt = data.target_schema
        for i in range(data.n_rows):
            row = []
            for col in data.schema:
                if col.kind == "target":
                    row.append(tgt.default_label if data.target[i] == 1 else tgt.good_label)
                    continue
                v = data.columns[col.name][i]
                if col.kind == "numeric":
                    row.append(col.missing_tokens[0] if np.isnan(v) else repr(float(v)))
                else:
                    row.append(col.missing_tokens[0] if v is None else v)
            writer.writerow(row)


def _per_class_count(n_class: int, fraction: float) -> int:
    # ceiling keeps small classes represented and matches the published
    # subset/split sizes of the reference corpora
    return min(n_class, ceil(fraction * n_class))


def stratified_subset(data: TabularDataset, fraction: float, seed: int) -> TabularDataset:
    """Random subset preserving the class mix; per-class ceiling rounding."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if fraction == 1.0:
        return data
    data.require_both_classes()
    rng = np.random.default_rng(seed)
    keep: list[np.ndarray] = []
    for label in (0, 1):
        idx = np.flatnonzero(data.target == label)
        count = _per_class_count(idx.size, fraction)
        if count == 0:
            raise ValueError(f"fraction {fraction} empties class {label}")
        keep.append(rng.choice(idx, size=count, replace=False))
    return data.take(np.sort(np.concatenate(keep)))


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        train_set = set(self.train.tolist())
        if train_set & set(self.test.tolist()):
            raise ValueError("train and test indices overlap")


def stratified_split(data: TabularDataset, train_fraction: float, seed: int) -> SplitIndices:
    """Partition row indices into train/test preserving the default rate."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    good, bad = data.class_counts()
    if good < 2 or bad < 2:
        raise ValueError("each class needs at least 2 members to split")
    rng = np.random.default_rng(seed)
    train_parts: list[np.ndarray] = []
    test_parts: list[np.ndarray] = []
    for label in (0, 1):
        idx = np.flatnonzero(data.target == label)
        count = _per_class_count(idx.size, train_fraction)
        if count == idx.size:  # keep at least one row of each class in test
            count = idx.size - 1
        perm = rng.permutation(idx)
        train_parts.append(perm[:count])
        test_parts.append(perm[count:])
    return SplitIndices(
        train=np.sort(np.concatenate(train_parts)),
        test=np.sort(np.concatenate(test_parts)),
        seed=seed,
    )
