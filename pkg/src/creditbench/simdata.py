"""Simulated stand-ins for the four reference credit datasets.

Generators mirror the published column structure, size and default rate of
each corpus (German/Australian/Taiwanese credit, GMSC) and plant a latent
risk signal calibrated so tuned classifiers reach the discrimination levels
reported for the real data.  Real files, where available, drop in through
the same schemas.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import REFERENCE_SCHEMAS
from .data import ColumnSchema, TabularDataset, save_csv

SIM_SIZES = {  # rows, defaults
    "GC": (1000, 300),
    "AC": (690, 383),
    "TC": (30000, 6636),
    "GMSC": (150000, 10026),
}


def _standardize(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / (sd if sd > 0 else 1.0)


def _category(rng, n, labels, probs, weight):
    """Sampled labels plus a linear risk effect decreasing along the label list."""
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    idx = rng.choice(len(labels), size=n, p=probs)
    effects = weight * np.linspace(1.0, -1.0, len(labels))
    values = np.array([labels[i] for i in idx], dtype=object)
    return values, effects[idx]


def _labels_from_risk(rng, latent: np.ndarray, n_defaults: int, scale: float) -> np.ndarray:
    """Exactly n_defaults labels, riskiest-by-noisy-margin rows defaulting."""
    p = 1.0 / (1.0 + np.exp(-scale * _standardize(latent)))
    margin = p - rng.random(latent.size)
    order = np.argsort(-margin, kind="stable")
    y = np.zeros(latent.size, dtype=np.int8)
    y[order[:n_defaults]] = 1
    return y


def _finish(name: str, columns: dict[str, np.ndarray], latent, rng, scale) -> TabularDataset:
    n, n_def = SIM_SIZES[name]
    schema = REFERENCE_SCHEMAS[_schema_key(name)]
    target = _labels_from_risk(rng, latent, n_def, scale)
    return TabularDataset(schema=tuple(schema), columns=columns, target=target)


def _schema_key(name: str) -> str:
    return {"GC": "german_credit", "AC": "australian_credit",
            "TC": "taiwan_credit", "GMSC": "gmsc"}[name]


def simulate_gc(seed: int) -> TabularDataset:
    n, _ = SIM_SIZES["GC"]
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    latent = np.zeros(n)

    cat_plan = [
        ("checking_status", ["lt_0", "0_to_200", "ge_200", "no_account"], [0.27, 0.27, 0.06, 0.40], 1.0),
        ("credit_history", ["critical", "delayed", "existing_paid", "all_paid", "no_credits"],
         [0.29, 0.09, 0.53, 0.05, 0.04], -0.5),
        ("purpose", [f"p{i}" for i in range(10)], [0.23, 0.10, 0.18, 0.28, 0.05, 0.02, 0.05, 0.01, 0.05, 0.03], 0.2),
        ("savings_status", ["lt_100", "100_to_500", "500_to_1000", "ge_1000", "unknown"],
         [0.60, 0.10, 0.06, 0.05, 0.19], 0.45),
        ("employment", ["unemployed", "lt_1y", "1_to_4y", "4_to_7y", "ge_7y"],
         [0.06, 0.17, 0.34, 0.17, 0.26], 0.3),
        ("personal_status", ["s1", "s2", "s3", "s4"], [0.05, 0.31, 0.55, 0.09], 0.15),
        ("other_parties", ["none", "co_applicant", "guarantor"], [0.91, 0.04, 0.05], -0.1),
        ("property_magnitude", ["real_estate", "life_insurance", "car", "unknown"],
         [0.28, 0.23, 0.33, 0.16], -0.25),
        ("other_payment_plans", ["bank", "stores", "none"], [0.14, 0.05, 0.81], 0.2),
        ("housing", ["rent", "own", "free"], [0.18, 0.71, 0.11], 0.2),
        ("job", ["unskilled_nonres", "unskilled", "skilled", "management"],
         [0.02, 0.20, 0.63, 0.15], 0.1),
        ("own_telephone", ["none", "yes"], [0.60, 0.40], 0.06),
        ("foreign_worker", ["yes", "no"], [0.96, 0.04], 0.1),
    ]
    for name, labels, probs, weight in cat_plan:
        cols[name], eff = _category(rng, n, labels, probs, weight)
        latent += eff

    duration = np.round(np.clip(rng.gamma(3.0, 7.0, n), 4, 72))
    amount = np.round(np.clip(np.exp(rng.normal(7.8, 0.9, n)), 250, 18500))
    installment = rng.integers(1, 5, n).astype(float)
    residence = rng.integers(1, 5, n).astype(float)
    age = np.round(np.clip(rng.gamma(9.0, 4.0, n) + 18, 19, 75))
    credits = np.clip(rng.poisson(0.4, n) + 1, 1, 4).astype(float)
    dependents = np.clip(rng.poisson(0.2, n) + 1, 1, 2).astype(float)
    for name, arr in [("duration", duration), ("credit_amount", amount),
                      ("installment_commitment", installment), ("residence_since", residence),
                      ("age", age), ("existing_credits", credits), ("num_dependents", dependents)]:
        cols[name] = arr
    latent += (0.55 * _standardize(duration) + 0.35 * _standardize(np.log(amount))
               + 0.15 * _standardize(installment) - 0.30 * _standardize(age)
               + 0.10 * _standardize(credits) + 0.05 * _standardize(dependents)
               + 0.20 * _standardize(duration) * _standardize(np.log(amount)))
    return _finish("GC", cols, latent, rng, scale=1.5)


def simulate_ac(seed: int) -> TabularDataset:
    n, _ = SIM_SIZES["AC"]
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    latent = np.zeros(n)
    cat_plan = [
        ("A1", ["a", "b"], [0.68, 0.32], 0.1),
        ("A4", ["u", "y", "l"], [0.76, 0.23, 0.01], 0.3),
        ("A5", [f"g{i}" for i in range(14)],
         [0.10, 0.05, 0.20, 0.08, 0.04, 0.07, 0.09, 0.03, 0.06, 0.05, 0.08, 0.05, 0.06, 0.04], 0.5),
        ("A6", [f"h{i}" for i in range(9)], [0.30, 0.12, 0.10, 0.08, 0.15, 0.09, 0.06, 0.06, 0.04], 0.4),
        ("A8", ["t", "f"], [0.52, 0.48], 2.2),
        ("A9", ["t", "f"], [0.46, 0.54], 1.0),
        ("A11", ["t", "f"], [0.47, 0.53], 0.4),
        ("A12", ["g", "s", "p"], [0.90, 0.08, 0.02], 0.1),
    ]
    for name, labels, probs, weight in cat_plan:
        cols[name], eff = _category(rng, n, labels, probs, weight)
        latent += eff
    a2 = np.round(np.clip(rng.gamma(6.0, 5.3, n) + 14, 14, 80), 2)
    a3 = np.round(rng.gamma(1.6, 3.0, n), 3)
    a7 = np.round(rng.gamma(1.2, 2.0, n), 3)
    a10 = np.floor(rng.gamma(0.8, 3.0, n))
    a13 = np.round(np.clip(rng.normal(180, 170, n), 0, 2000))
    a14 = np.floor(np.exp(rng.normal(5.0, 2.2, n)))
    for name, arr in [("A2", a2), ("A3", a3), ("A7", a7), ("A10", a10), ("A13", a13), ("A14", a14)]:
        cols[name] = arr
    latent += (0.1 * _standardize(a2) + 0.15 * _standardize(a3) + 0.5 * _standardize(a7)
               + 0.9 * _standardize(np.log1p(a10)) - 0.15 * _standardize(a13)
               - 0.25 * _standardize(np.log1p(a14)))
    return _finish("AC", cols, latent, rng, scale=2.4)


def simulate_tc(seed: int) -> TabularDataset:
    n, _ = SIM_SIZES["TC"]
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    limit = np.round(np.clip(np.exp(rng.normal(11.7, 0.8, n)), 10_000, 1_000_000), -3)
    cols["limit_bal"] = limit
    cols["sex"] = rng.choice([1, 2], n, p=[0.40, 0.60]).astype(float)
    cols["education"] = rng.choice([0, 1, 2, 3, 4, 5, 6], n,
                                   p=[0.001, 0.35, 0.47, 0.16, 0.004, 0.009, 0.006]).astype(float)
    cols["marriage"] = rng.choice([0, 1, 2, 3], n, p=[0.002, 0.45, 0.53, 0.018]).astype(float)
    cols["age"] = np.round(np.clip(rng.gamma(8.0, 1.9, n) + 20, 21, 79))
    behind = np.clip(rng.normal(-0.3, 1.0, n), -2, 8)
    pays = {}
    for i, tag in enumerate((0, 2, 3, 4, 5, 6)):
        drift = np.clip(behind + rng.normal(0, 0.55, n) - 0.02 * i, -2, 8)
        pays[tag] = np.round(drift)
        cols[f"pay_{tag}"] = pays[tag]
    bill_base = np.exp(rng.normal(9.5, 1.7, n))
    for i in range(1, 7):
        wander = np.clip(rng.normal(1.0, 0.18, n), 0.4, 1.8)
        cols[f"bill_amt{i}"] = np.round(np.clip(bill_base * wander - 3000, -150_000, 950_000))
    pay_base = np.exp(rng.normal(7.4, 1.3, n))
    for i in range(1, 7):
        cols[f"pay_amt{i}"] = np.round(pay_base * np.clip(rng.normal(1.0, 0.4, n), 0.0, 3.0))
    latent = (1.15 * _standardize(pays[0]) + 0.45 * _standardize(pays[2])
              + 0.25 * _standardize(pays[3]) - 0.45 * _standardize(np.log(limit))
              - 0.25 * _standardize(np.log1p(np.maximum(pay_base, 0.0)))
              + 0.12 * _standardize(cols["education"]) - 0.08 * _standardize(cols["age"]))
    return _finish("TC", cols, latent, rng, scale=0.95)


def simulate_gmsc(seed: int) -> TabularDataset:
    n, _ = SIM_SIZES["GMSC"]
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    util = np.round(np.minimum(rng.gamma(0.6, 0.55, n), 1.4) + np.where(rng.random(n) < 0.003, rng.gamma(2.0, 800.0, n), 0.0), 6)
    age = np.round(np.clip(rng.normal(52, 14.8, n), 21, 105))
    late30 = np.minimum(rng.poisson(0.35, n), 13).astype(float)
    late60 = np.minimum(rng.poisson(0.09, n), 11).astype(float)
    late90 = np.minimum(rng.poisson(0.12, n), 15).astype(float)
    blowup = rng.random(n) < 0.0037
    for arr in (late30, late60, late90):
        arr[blowup] = 98.0
    debt_ratio = np.round(np.where(rng.random(n) < 0.765, rng.gamma(1.1, 0.45, n),
                                   rng.gamma(1.5, 900.0, n)), 6)
    income = np.round(np.exp(rng.normal(8.55, 0.8, n)))
    open_lines = np.minimum(rng.poisson(8.4, n), 58).astype(float)
    real_estate = np.minimum(rng.poisson(1.0, n), 32).astype(float)
    dependents = np.minimum(rng.poisson(0.76, n), 12).astype(float)

    latent = (1.05 * _standardize(np.minimum(util, 1.5)) + 0.9 * _standardize(np.minimum(late90, 4))
              + 0.55 * _standardize(np.minimum(late30, 4)) + 0.45 * _standardize(np.minimum(late60, 4))
              - 0.45 * _standardize(age) - 0.20 * _standardize(np.log1p(income))
              + 0.10 * _standardize(np.minimum(debt_ratio, 3.0)))

    # plant missingness like the real file: income ~20%, dependents ~2.6%
    income_missing = rng.random(n) < 0.198
    dep_missing = rng.random(n) < 0.026
    income = income.astype(float)
    income[income_missing] = np.nan
    dependents[dep_missing] = np.nan

    for name, arr in [("revolving_utilization", util), ("age", age), ("late_30_59", late30),
                      ("debt_ratio", debt_ratio), ("monthly_income", income),
                      ("open_credit_lines", open_lines), ("late_90", late90),
                      ("real_estate_loans", real_estate), ("late_60_89", late60),
                      ("dependents", dependents)]:
        cols[name] = arr
    return _finish("GMSC", cols, latent, rng, scale=1.25)


_GENERATORS = {"GC": simulate_gc, "AC": simulate_ac, "TC": simulate_tc, "GMSC": simulate_gmsc}


def simulate_dataset(name: str, seed: int) -> TabularDataset:
    if name not in _GENERATORS:
        raise ValueError(f"unknown reference dataset {name!r}; known: {sorted(_GENERATORS)}")
    return _GENERATORS[name](seed)


def write_reference_quartet(directory: str | Path, seed: int = 20240801) -> dict[str, Path]:
    """Write all four simulated CSVs; returns name -> path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for i, name in enumerate(("GC", "AC", "TC", "GMSC")):
        data = simulate_dataset(name, seed + i)
        path = directory / f"{name.lower()}.csv"
        save_csv(data, path)
        paths[name] = path
    return paths
