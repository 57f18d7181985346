"""Rank aggregation across datasets, the Friedman omnibus test and the
Nemenyi post-hoc comparison against the best-ranked classifier.

All ranking uses rank 1 = best with ties averaged.  The Friedman statistic
is the tie-corrected chi-square form; its p-value comes from a chi-square
with k-1 degrees of freedom.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, rankdata

from .metrics import LOWER_IS_BETTER, METRIC_NAMES

ALPHA = 0.05

# 0.95 quantile of the studentized range distribution at infinite degrees of
# freedom, divided by sqrt(2); cross-checked against scipy.stats.studentized_range.
Q_ALPHA_05 = {
    2: 1.9600, 3: 2.3437, 4: 2.5690, 5: 2.7278, 6: 2.8497, 7: 2.9483,
    8: 3.0309, 9: 3.1017, 10: 3.1637, 11: 3.2187, 12: 3.2680, 13: 3.3127,
    14: 3.3536, 15: 3.3912, 16: 3.4260, 17: 3.4584, 18: 3.4887, 19: 3.5171,
    20: 3.5438, 21: 3.5690, 22: 3.5929, 23: 3.6156, 24: 3.6373, 25: 3.6579,
    26: 3.6776, 27: 3.6964, 28: 3.7145, 29: 3.7319, 30: 3.7486,
}


def rank_within_dataset(values: np.ndarray, orientation: str = "higher_better") -> np.ndarray:
    """Rank one dataset column of k classifier values, 1 = best, ties averaged."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite to rank")
    if orientation == "higher_better":
        return rankdata(-values, method="average")
    if orientation == "lower_better":
        return rankdata(values, method="average")
    raise ValueError(f"unknown orientation {orientation!r}")


@dataclass(frozen=True)
class RankTable:
    """k classifiers evaluated on N datasets for one metric."""

    classifiers: tuple[str, ...]
    datasets: tuple[str, ...]
    values: np.ndarray  # k x N
    ranks: np.ndarray   # k x N, tie-averaged per column
    orientation: str

    @staticmethod
    def from_values(classifiers, datasets, values, orientation="higher_better") -> "RankTable":
        values = np.asarray(values, dtype=float)
        k, n = values.shape
        if k != len(classifiers) or n != len(datasets):
            raise ValueError("value matrix shape does not match classifier/dataset names")
        ranks = np.column_stack(
            [rank_within_dataset(values[:, j], orientation) for j in range(n)]
        )
        return RankTable(tuple(classifiers), tuple(datasets), values, ranks, orientation)

    @property
    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=1)


def friedman_test(ranks: np.ndarray) -> tuple[float, float]:
    """Tie-corrected Friedman chi-square and its p-value.

    ``ranks`` is k x N (classifiers x datasets) of per-dataset tie-averaged
    ranks.  Identical rank rows yield (0.0, 1.0).
    """
    ranks = np.asarray(ranks, dtype=float)
    k, n = ranks.shape
    if k < 2 or n < 2:
        raise ValueError("the Friedman test needs at least 2 classifiers and 2 datasets")
    row_sums = ranks.sum(axis=1)
    s = np.sum((row_sums - n * (k + 1) / 2.0) ** 2)
    ties = 0.0
    for j in range(n):
        _, counts = np.unique(ranks[:, j], return_counts=True)
        counts = counts.astype(float)
        ties += np.sum(counts**3 - counts)
    denom = n * k * (k + 1) - ties / (k - 1)
    if denom <= 0 or s == 0.0:
        return 0.0, 1.0
    stat = 12.0 * s / denom
    p = float(chi2.sf(stat, k - 1))
    return float(stat), p


@dataclass(frozen=True)
class NemenyiResult:
    critical_difference: float
    average_ranks: np.ndarray
    best_index: int
    worse_than_best: np.ndarray  # bool per classifier


def nemenyi_test(ranks: np.ndarray, alpha: float = ALPHA) -> NemenyiResult:
    """Flag classifiers whose average rank trails the best one by more than CD.

    CD = q_alpha * sqrt(k (k+1) / (6 N)).  Only alpha = 0.05 is tabulated.
    """
    if alpha != ALPHA:
        raise ValueError("only alpha = 0.05 is supported by the embedded table")
    ranks = np.asarray(ranks, dtype=float)
    k, n = ranks.shape
    if k not in Q_ALPHA_05:
        raise ValueError(f"no studentized-range quantile tabulated for k = {k}")
    cd = Q_ALPHA_05[k] * math.sqrt(k * (k + 1) / (6.0 * n))
    avg = ranks.mean(axis=1)
    best = int(np.argmin(avg))
    worse = (avg - avg[best]) > cd
    return NemenyiResult(float(cd), avg, best, worse)


@dataclass
class MetricComparison:
    table: RankTable
    friedman_stat: float
    friedman_p: float
    rejected: bool
    nemenyi: NemenyiResult | None


@dataclass
class ComparisonReport:
    """Per-metric ranks plus the overall average rank, one benchmark scenario."""

    classifiers: tuple[str, ...]
    datasets: tuple[str, ...]
    metrics: tuple[str, ...]
    per_metric: dict[str, MetricComparison]
    avg_rank: np.ndarray          # k, mean of per-metric average ranks
    overall_rank: np.ndarray      # k, 1 = best AvgR, ties broken by name

    def best_per_metric(self, metric: str) -> int:
        return int(np.argmin(self.per_metric[metric].table.average_ranks))


def aggregate_report(
    values_by_metric: dict[str, np.ndarray],
    classifiers: list[str],
    datasets: list[str],
) -> ComparisonReport:
    """Build the scenario report from complete k x N value matrices per metric."""
    metrics = tuple(values_by_metric)
    per_metric: dict[str, MetricComparison] = {}
    for m, values in values_by_metric.items():
        values = np.asarray(values, dtype=float)
        if values.shape != (len(classifiers), len(datasets)):
            raise ValueError(f"metric {m}: value matrix must be k x N")
        if np.isnan(values).any():
            bad = np.argwhere(np.isnan(values))[0]
            raise ValueError(
                f"metric {m}: missing value for classifier "
                f"{classifiers[bad[0]]!r} on dataset {datasets[bad[1]]!r}"
            )
        orientation = "lower_better" if m in LOWER_IS_BETTER else "higher_better"
        table = RankTable.from_values(classifiers, datasets, values, orientation)
        if len(classifiers) >= 2 and len(datasets) >= 2:
            stat, p = friedman_test(table.ranks)
        else:
            stat, p = float("nan"), float("nan")
        rejected = bool(p < ALPHA) if not math.isnan(p) else False
        nem = nemenyi_test(table.ranks) if rejected else None
        per_metric[m] = MetricComparison(table, stat, p, rejected, nem)

    avg_rank = np.mean([per_metric[m].table.average_ranks for m in metrics], axis=0)
    # overall rank: AvgR ascending, exact ties broken by classifier name
    order = sorted(range(len(classifiers)), key=lambda i: (avg_rank[i], classifiers[i]))
    overall = np.empty(len(classifiers))
    for pos, idx in enumerate(order, start=1):
        overall[idx] = pos
    return ComparisonReport(
        tuple(classifiers), tuple(datasets), metrics, per_metric, avg_rank, overall
    )


@dataclass
class SamplerComparison:
    """Average rank of each sampling scenario, per classifier and overall."""

    samplers: tuple[str, ...]
    classifiers: tuple[str, ...]
    per_classifier: np.ndarray  # k x S scenario average ranks
    avg_rank: np.ndarray        # S, mean over classifiers
    overall_rank: np.ndarray    # S, tie-averaged ranks of avg_rank


def compare_samplers(
    values: np.ndarray,
    samplers: list[str],
    classifiers: list[str],
    metric_names: list[str] | None = None,
) -> SamplerComparison:
    """Rank sampling scenarios within every (classifier, dataset, metric) cell.

    ``values`` has shape (S, k, N, M).  A NaN cell drops that scenario from
    the cell's ranking and from the affected averages.
    """
    values = np.asarray(values, dtype=float)
    s, k, n, m = values.shape
    if s != len(samplers) or k != len(classifiers):
        raise ValueError("tensor shape does not match sampler/classifier names")
    metric_names = list(metric_names or METRIC_NAMES[:m])
    rank_sum = np.zeros((k, s))
    rank_cnt = np.zeros((k, s))
    for ci in range(k):
        for dj in range(n):
            for mi, metric in enumerate(metric_names):
                cell = values[:, ci, dj, mi]
                mask = np.isfinite(cell)
                if mask.sum() < 2:
                    continue
                oriented = cell[mask] if metric in LOWER_IS_BETTER else -cell[mask]
                r = rankdata(oriented, method="average")
                rank_sum[ci, mask] += r
                rank_cnt[ci, mask] += 1
    if (rank_cnt == 0).any():
        raise ValueError("a classifier has no rankable cells for some scenario")
    per_classifier = rank_sum / rank_cnt
    avg = per_classifier.mean(axis=0)
    overall = rankdata(avg, method="average")
    return SamplerComparison(tuple(samplers), tuple(classifiers), per_classifier, avg, overall)


# ---------------------------------------------------------------------------
# rendering


def _fmt(x: float, nd: int = 1) -> str:
    return f"{x:.{nd}f}"


def render_report_markdown(report: ComparisonReport, title: str) -> str:
    """Aligned-text table: per-metric rank columns, AvgR, Rank, Friedman row.

    The per-metric best classifier is shown in bold; a trailing ``(-)`` marks
    one ranked significantly worse than the best at the 5 percent level.
    """
    metrics = report.metrics
    out = io.StringIO()
    out.write(f"# {title}\n\n")
    header = ["classifier"] + [m for m in metrics] + ["AvgR", "Rank"]
    rows: list[list[str]] = []
    for i, name in enumerate(report.classifiers):
        row = [name]
        for m in metrics:
            cmp_m = report.per_metric[m]
            cell = _fmt(cmp_m.table.average_ranks[i])
            if i == report.best_per_metric(m):
                cell = f"**{cell}**"
            elif cmp_m.nemenyi is not None and cmp_m.nemenyi.worse_than_best[i]:
                cell = f"{cell} (-)"
            row.append(cell)
        row.append(_fmt(report.avg_rank[i]))
        row.append(str(int(report.overall_rank[i])))
        rows.append(row)
    fried = ["Friedman chi2"]
    pvals = ["(p-value)"]
    for m in metrics:
        cmp_m = report.per_metric[m]
        stat = _fmt(cmp_m.friedman_stat, 3) if not math.isnan(cmp_m.friedman_stat) else "n/a"
        if cmp_m.rejected:
            stat += " (*)"
        fried.append(stat)
        pvals.append(_fmt(cmp_m.friedman_p, 3) if not math.isnan(cmp_m.friedman_p) else "n/a")
    fried += ["", ""]
    pvals += ["", ""]

    widths = [max(len(r[c]) for r in [header] + rows + [fried, pvals]) for c in range(len(header))]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |\n"

    out.write(line(header))
    out.write("|" + "|".join("-" * (w + 2) for w in widths) + "|\n")
    for row in rows:
        out.write(line(row))
    out.write(line(fried))
    out.write(line(pvals))
    out.write(
        "\nBold: best classifier per metric. (-): significantly worse than the "
        "best at the 5% level (Nemenyi). (*): Friedman test rejects equal "
        "performance at the 5% level.\n"
    )
    return out.getvalue()


def render_report_csv(report: ComparisonReport) -> str:
    metrics = report.metrics
    out = io.StringIO()
    cols = ["classifier"]
    for m in metrics:
        cols += [m, f"{m}_flag"]
    cols += ["avg_rank", "overall_rank"]
    out.write(",".join(cols) + "\n")
    for i, name in enumerate(report.classifiers):
        cells = [name]
        for m in metrics:
            cmp_m = report.per_metric[m]
            flag = ""
            if i == report.best_per_metric(m):
                flag = "best"
            elif cmp_m.nemenyi is not None and cmp_m.nemenyi.worse_than_best[i]:
                flag = "worse"
            cells += [f"{cmp_m.table.average_ranks[i]:.6g}", flag]
        cells += [f"{report.avg_rank[i]:.6g}", str(int(report.overall_rank[i]))]
        out.write(",".join(cells) + "\n")
    stat_cells = ["friedman_chi2"]
    p_cells = ["friedman_p"]
    for m in metrics:
        cmp_m = report.per_metric[m]
        stat_cells += [f"{cmp_m.friedman_stat:.6g}", "rejected" if cmp_m.rejected else ""]
        p_cells += [f"{cmp_m.friedman_p:.6g}", ""]
    out.write(",".join(stat_cells + ["", ""]) + "\n")
    out.write(",".join(p_cells + ["", ""]) + "\n")
    return out.getvalue()


def render_sampler_comparison_csv(cmp: SamplerComparison) -> str:
    out = io.StringIO()
    out.write("classifier," + ",".join(cmp.samplers) + "\n")
    for i, name in enumerate(cmp.classifiers):
        out.write(name + "," + ",".join(f"{v:.6g}" for v in cmp.per_classifier[i]) + "\n")
    out.write("AvgR," + ",".join(f"{v:.6g}" for v in cmp.avg_rank) + "\n")
    out.write("Rank," + ",".join(f"{v:.6g}" for v in cmp.overall_rank) + "\n")
    return out.getvalue()
