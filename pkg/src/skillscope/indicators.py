"""The five shortage indicators and the assembled shortage report.

Per occupation/category group: yearly posting counts and year-on-year
growth, yearly median salary, yearly mean education and experience years,
and forecast predictability (median SMAPE from the sliding-window
backtest). Each indicator is compared against the whole-market baseline;
the shortage-consistent direction is "above baseline" for everything
except experience, where low demands signal shortage.

No scalar shortage score is computed; the report keeps the per-indicator
flags side by side.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import JobAd, normalize_skill
from .errors import DataError
from .timeseries import BacktestReport, DecompositionModel

INDICATOR_NAMES = ("growth", "salary", "education", "experience", "predictability")


def yearly_counts(ads: Sequence[JobAd]) -> dict[int, int]:
    counts: dict[int, int] = {}
    for ad in ads:
        counts[ad.posted_date.year] = counts.get(ad.posted_date.year, 0) + 1
    return dict(sorted(counts.items()))


def posting_growth(counts_by_year: dict[int, int]) -> tuple[dict[int, float], Optional[float]]:
    """Year-on-year growth per year (count_y / count_{y-1} - 1) and its mean.

    Growth is defined only where the previous calendar year has a positive
    count; undefined years are excluded from the mean."""
    years = sorted(counts_by_year)
    if len(years) < 2:
        raise DataError("posting growth needs at least two years of counts")
    growth: dict[int, float] = {}
    for prev, year in zip(years, years[1:]):
        if year - prev == 1 and counts_by_year[prev] > 0:
            growth[year] = counts_by_year[year] / counts_by_year[prev] - 1.0
    mean = sum(growth.values()) / len(growth) if growth else None
    return growth, mean


def _ads_in_year(ads: Sequence[JobAd], year: int):
    return [ad for ad in ads if ad.posted_date.year == year]


def median_salary(ads: Sequence[JobAd], year: int) -> Optional[float]:
    """Median of salary midpoints over the year's salaried ads; absent when
    none carry a salary."""
    mids = [ad.salary_midpoint() for ad in _ads_in_year(ads, year)]
    mids = [m for m in mids if m is not None]
    return statistics.median(mids) if mids else None


def mean_education(ads: Sequence[JobAd], year: int) -> Optional[float]:
    vals = [ad.education_years for ad in _ads_in_year(ads, year)
            if ad.education_years is not None]
    return sum(vals) / len(vals) if vals else None


def mean_experience(ads: Sequence[JobAd], year: int) -> Optional[float]:
    vals = [ad.experience_years for ad in _ads_in_year(ads, year)
            if ad.experience_years is not None]
    return sum(vals) / len(vals) if vals else None


def cagr(first_year_count: int, last_year_count: int, years: int) -> float:
    """Compound annual growth rate as a percentage."""
    if first_year_count <= 0:
        raise DataError("CAGR undefined: zero count in the first year")
    if years < 1:
        raise DataError("CAGR undefined: span must be at least one year")
    return ((last_year_count / first_year_count) ** (1.0 / years) - 1.0) * 100.0


@dataclass
class SkillDemandStats:
    """Per-skill yearly ad counts and growth since first appearance."""

    counts: dict[str, dict[int, int]]
    cagr_pct: dict[str, Optional[float]]   # None where undefined (no full-year span)

    def to_csv(self, path) -> None:
        years = sorted({y for per in self.counts.values() for y in per})
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["skill"] + [str(y) for y in years] + ["cagr_pct"])
            for skill in sorted(self.counts):
                row = [skill] + [self.counts[skill].get(y, 0) for y in years]
                c = self.cagr_pct[skill]
                row.append("" if c is None else repr(c))
                writer.writerow(row)


def skill_demand_stats(ads: Sequence[JobAd], skills: Sequence[str]) -> SkillDemandStats:
    """Yearly demand counts for each target skill and its CAGR from the
    first year it appears to the last corpus year."""
    keys = [normalize_skill(s) for s in skills]
    key_set = set(keys)
    counts: dict[str, dict[int, int]] = {k: {} for k in keys}
    last_year = None
    for ad in ads:
        year = ad.posted_date.year
        last_year = year if last_year is None else max(last_year, year)
        for s in ad.skills:
            if s in key_set:
                per = counts[s]
                per[year] = per.get(year, 0) + 1
    cagr_pct: dict[str, Optional[float]] = {}
    for k in keys:
        per = counts[k]
        if not per or last_year is None:
            cagr_pct[k] = None
            continue
        first = min(per)
        span = last_year - first
        if span < 1 or per[first] <= 0:
            cagr_pct[k] = None
        else:
            cagr_pct[k] = cagr(per[first], per.get(last_year, 0), span)
    return SkillDemandStats(counts=counts, cagr_pct=cagr_pct)


@dataclass
class ShortageIndicators:
    """All five indicator series for one group of ads."""

    label: str
    counts_by_year: dict[int, int]
    growth_by_year: dict[int, float]
    mean_growth: Optional[float]
    salary_by_year: dict[int, Optional[float]]
    education_by_year: dict[int, Optional[float]]
    experience_by_year: dict[int, Optional[float]]
    median_smape: Optional[float] = None

    def _defined_mean(self, per_year: dict[int, Optional[float]]) -> Optional[float]:
        vals = [v for v in per_year.values() if v is not None]
        return sum(vals) / len(vals) if vals else None

    @property
    def mean_salary_level(self) -> Optional[float]:
        return self._defined_mean(self.salary_by_year)

    @property
    def mean_education_level(self) -> Optional[float]:
        return self._defined_mean(self.education_by_year)

    @property
    def mean_experience_level(self) -> Optional[float]:
        return self._defined_mean(self.experience_by_year)


def compute_indicators(
    label: str,
    ads: Sequence[JobAd],
    backtest: Optional[BacktestReport] = None,
) -> ShortageIndicators:
    counts = yearly_counts(ads)
    if len(counts) >= 2:
        growth, mean_growth = posting_growth(counts)
    else:
        growth, mean_growth = {}, None
    years = sorted(counts)
    return ShortageIndicators(
        label=label,
        counts_by_year=counts,
        growth_by_year=growth,
        mean_growth=mean_growth,
        salary_by_year={y: median_salary(ads, y) for y in years},
        education_by_year={y: mean_education(ads, y) for y in years},
        experience_by_year={y: mean_experience(ads, y) for y in years},
        median_smape=backtest.median if backtest is not None else None,
    )


@dataclass
class ShortageReport:
    baseline: ShortageIndicators
    groups: list[ShortageIndicators]
    flags: dict[str, dict[str, bool]]
    partial_years: list[int] = field(default_factory=list)
    backtests: dict[str, BacktestReport] = field(default_factory=dict)
    trend_models: dict[str, DecompositionModel] = field(default_factory=dict)

    def flag_count(self, label: str) -> int:
        return sum(self.flags[label].values())


def _flag(group_value, baseline_value, higher_is_shortage: bool) -> bool:
    if group_value is None or baseline_value is None:
        return False
    if higher_is_shortage:
        return group_value > baseline_value
    return group_value < baseline_value


def assemble_report(
    groups: dict[str, Sequence[JobAd]],
    market_ads: Sequence[JobAd],
    backtests: Optional[dict[str, BacktestReport]] = None,
    market_backtest: Optional[BacktestReport] = None,
    trend_models: Optional[dict[str, DecompositionModel]] = None,
    corpus_start=None,
    corpus_end=None,
) -> ShortageReport:
    """Score every group against the whole-market baseline on all five
    indicators. Experience flags in the low direction; everything else
    flags when strictly above baseline."""
    if not market_ads:
        raise DataError("missing market baseline: no ads")
    backtests = backtests or {}
    baseline = compute_indicators("market", market_ads, market_backtest)
    if market_backtest is None and backtests:
        raise DataError("missing market baseline backtest")

    report_groups: list[ShortageIndicators] = []
    flags: dict[str, dict[str, bool]] = {}
    for label in sorted(groups):
        ind = compute_indicators(label, groups[label], backtests.get(label))
        report_groups.append(ind)
        flags[label] = {
            "growth": _flag(ind.mean_growth, baseline.mean_growth, True),
            "salary": _flag(ind.mean_salary_level, baseline.mean_salary_level, True),
            "education": _flag(ind.mean_education_level,
                               baseline.mean_education_level, True),
            "experience": _flag(ind.mean_experience_level,
                                baseline.mean_experience_level, False),
            "predictability": _flag(ind.median_smape, baseline.median_smape, True),
        }

    partial = []
    if corpus_start is not None and (corpus_start.month, corpus_start.day) != (1, 1):
        partial.append(corpus_start.year)
    if corpus_end is not None and (corpus_end.month, corpus_end.day) != (12, 31):
        partial.append(corpus_end.year)

    return ShortageReport(
        baseline=baseline,
        groups=report_groups,
        flags=flags,
        partial_years=sorted(set(partial)),
        backtests=backtests,
        trend_models=trend_models or {},
    )


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def _write_indicator_csv(path: Path, name: str, baseline, groups, getter) -> None:
    years = sorted(baseline.counts_by_year)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [str(y) for y in years])
        for ind in [baseline] + groups:
            writer.writerow([ind.label] + [_fmt(getter(ind, y)) for y in years])


def write_report(report: ShortageReport, out_dir) -> None:
    """Emit the report directory: one CSV per indicator, report.json,
    boxplot.csv, and trend_lines.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base, groups = report.baseline, report.groups

    _write_indicator_csv(out_dir / "posting_counts.csv", "counts", base, groups,
                         lambda ind, y: ind.counts_by_year.get(y))
    _write_indicator_csv(out_dir / "posting_growth.csv", "growth", base, groups,
                         lambda ind, y: ind.growth_by_year.get(y))
    _write_indicator_csv(out_dir / "median_salary.csv", "salary", base, groups,
                         lambda ind, y: ind.salary_by_year.get(y))
    _write_indicator_csv(out_dir / "education_years.csv", "education", base, groups,
                         lambda ind, y: ind.education_by_year.get(y))
    _write_indicator_csv(out_dir / "experience_years.csv", "experience", base, groups,
                         lambda ind, y: ind.experience_by_year.get(y))

    with (out_dir / "boxplot.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "smape"])
        for label in sorted(report.backtests):
            for row in report.backtests[label].boxplot_rows():
                writer.writerow([row[0], repr(row[1])])

    with (out_dir / "trend_lines.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "date", "trend"])
        for label in sorted(report.trend_models):
            model = report.trend_models[label]
            t = np.arange(model.train_len)
            g = model.trend(t)
            for off, value in zip(t, g):
                date = model.start + dt.timedelta(days=int(off))
                writer.writerow([label, date.isoformat(), repr(float(value))])

    payload = {
        "baseline": _indicators_dict(base),
        "groups": [_indicators_dict(g) for g in groups],
        "flags": {
            label: {
                **{k: bool(v) for k, v in per.items()},
                "shortage_consistent": f"{sum(per.values())}/5",
            }
            for label, per in sorted(report.flags.items())
        },
        "partial_years": report.partial_years,
    }
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


def _indicators_dict(ind: ShortageIndicators) -> dict:
    return {
        "label": ind.label,
        "counts_by_year": {str(y): c for y, c in ind.counts_by_year.items()},
        "growth_by_year": {str(y): g for y, g in ind.growth_by_year.items()},
        "mean_growth": ind.mean_growth,
        "salary_by_year": {str(y): s for y, s in ind.salary_by_year.items()},
        "education_by_year": {str(y): e for y, e in ind.education_by_year.items()},
        "experience_by_year": {str(y): e for y, e in ind.experience_by_year.items()},
        "median_smape": ind.median_smape,
    }
