"""Run configuration: a single JSON document validated with pydantic.

Seeds are explicit everywhere; nothing falls back to wall-clock state.
Reference column schemas for the four bundled credit datasets are exposed
by name so configs can say ``"schema": "german_credit"``.
"""
from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

from .data import ColumnSchema
from .metrics import METRIC_NAMES
from .models import FAMILIES
from .resample import SAMPLER_KINDS

TRAIN_FRACTION = 0.75


def _gc_schema() -> list[ColumnSchema]:
    cat = [
        ("checking_status", 4), ("credit_history", 5), ("purpose", 10),
        ("savings_status", 5), ("employment", 5), ("personal_status", 4),
        ("other_parties", 3), ("property_magnitude", 4), ("other_payment_plans", 3),
        ("housing", 3), ("job", 4), ("own_telephone", 2), ("foreign_worker", 2),
    ]
    num = ["duration", "credit_amount", "installment_commitment", "residence_since",
           "age", "existing_credits", "num_dependents"]
    cols = [ColumnSchema(name, "categorical") for name, _ in cat]
    cols += [ColumnSchema(name, "numeric") for name in num]
    cols.append(ColumnSchema("class", "target", good_label="good", default_label="bad"))
    return cols


def _ac_schema() -> list[ColumnSchema]:
    kinds = ["categorical", "numeric", "numeric", "categorical", "categorical",
             "categorical", "numeric", "categorical", "categorical", "numeric",
             "categorical", "categorical", "numeric", "numeric"]
    cols = [ColumnSchema(f"A{i + 1}", kind) for i, kind in enumerate(kinds)]
    cols.append(ColumnSchema("class", "target", good_label="0", default_label="1"))
    return cols


def _tc_schema() -> list[ColumnSchema]:
    names = (
        ["limit_bal", "sex", "education", "marriage", "age"]
        + [f"pay_{i}" for i in (0, 2, 3, 4, 5, 6)]
        + [f"bill_amt{i}" for i in range(1, 7)]
        + [f"pay_amt{i}" for i in range(1, 7)]
    )
    cols = [ColumnSchema(n, "numeric") for n in names]
    cols.append(ColumnSchema("default_payment", "target", good_label="0", default_label="1"))
    return cols


def _gmsc_schema() -> list[ColumnSchema]:
    names = [
        "revolving_utilization", "age", "late_30_59", "debt_ratio", "monthly_income",
        "open_credit_lines", "late_90", "real_estate_loans", "late_60_89", "dependents",
    ]
    cols = [ColumnSchema(n, "numeric") for n in names]
    cols.append(ColumnSchema("serious_dlqin_2yrs", "target", good_label="0", default_label="1"))
    return cols


REFERENCE_SCHEMAS: dict[str, list[ColumnSchema]] = {
    "german_credit": _gc_schema(),
    "australian_credit": _ac_schema(),
    "taiwan_credit": _tc_schema(),
    "gmsc": _gmsc_schema(),
}


class DatasetConfig(BaseModel):
    name: str
    path: str
    schema_ref: str | None = Field(default=None, alias="schema")
    columns: list[dict] | None = None  # inline schema, overrides schema_ref
    subset_fraction: float = 1.0
    train_fraction: float = TRAIN_FRACTION
    seed: int

    model_config = {"populate_by_name": True}

    @field_validator("subset_fraction")
    @classmethod
    def _subset_range(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("subset_fraction must lie in (0, 1]")
        return v

    @field_validator("train_fraction")
    @classmethod
    def _train_range(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        return v

    def resolve_schema(self) -> list[ColumnSchema]:
        if self.columns is not None:
            return [ColumnSchema(**c) for c in (
                {**c, "missing_tokens": tuple(c["missing_tokens"])} if "missing_tokens" in c else c
                for c in self.columns
            )]
        if self.schema_ref is None:
            raise ValueError(f"dataset {self.name!r}: either schema or columns is required")
        if self.schema_ref not in REFERENCE_SCHEMAS:
            raise ValueError(
                f"dataset {self.name!r}: unknown schema {self.schema_ref!r}; "
                f"known: {sorted(REFERENCE_SCHEMAS)}"
            )
        return REFERENCE_SCHEMAS[self.schema_ref]


class SamplerEntry(BaseModel):
    kind: str
    smote_over_pct: int = 200
    smote_under_pct: int = 200
    smote_k: int = 5
    bsmote_m: int = 10
    rose_shrink: float = 1.0
    down_cap: int | None = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {v!r}")
        return v


class ModelEntry(BaseModel):
    family: str
    grid: dict[str, list] | None = None  # overrides the default tuning grid

    @field_validator("family")
    @classmethod
    def _known_family(cls, v):
        if v not in FAMILIES:
            raise ValueError(f"unknown model family {v!r}")
        return v


class TuningConfig(BaseModel):
    fold_count: int = 10
    selection_metric: str = "accuracy"

    @field_validator("selection_metric")
    @classmethod
    def _known_metric(cls, v):
        if v not in ("accuracy", "kappa"):
            raise ValueError("selection_metric must be 'accuracy' or 'kappa'")
        return v


class RunConfig(BaseModel):
    seed: int
    output_dir: str
    datasets: list[DatasetConfig]
    samplers: list[SamplerEntry]
    models: list[ModelEntry]
    metrics: list[str] = Field(default_factory=lambda: list(METRIC_NAMES))
    tuning: TuningConfig = Field(default_factory=TuningConfig)
    parallelism: int = 1
    skip_on_error: bool = False

    @field_validator("metrics")
    @classmethod
    def _known_metrics(cls, v):
        unknown = set(v) - set(METRIC_NAMES)
        if unknown:
            raise ValueError(f"unknown metric(s) {sorted(unknown)}")
        if not v:
            raise ValueError("at least one metric is required")
        return v

    @field_validator("parallelism")
    @classmethod
    def _pos_parallelism(cls, v):
        if v < 1:
            raise ValueError("parallelism must be >= 1")
        return v

    def validate_files(self) -> list[str]:
        """Errors for referenced files that do not exist; empty means valid."""
        problems = []
        for ds in self.datasets:
            if not Path(ds.path).exists():
                problems.append(f"dataset {ds.name!r}: file not found: {ds.path}")
            try:
                ds.resolve_schema()
            except ValueError as exc:
                problems.append(str(exc))
        names = [ds.name for ds in self.datasets]
        if len(set(names)) != len(names):
            problems.append("dataset names must be unique")
        kinds = [s.kind for s in self.samplers]
        if len(set(kinds)) != len(kinds):
            problems.append("sampler kinds must be unique within a run")
        fams = [m.family for m in self.models]
        if len(set(fams)) != len(fams):
            problems.append("model families must be unique within a run")
        if not self.datasets:
            problems.append("at least one dataset is required")
        if not self.samplers:
            problems.append("at least one sampler is required")
        if not self.models:
            problems.append("at least one model is required")
        return problems


def load_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from None
    return RunConfig.model_validate(raw)
