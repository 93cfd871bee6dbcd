"""Job-ad corpus loading, validation, and sparse incidence indexing.

A corpus is a list of immutable :class:`JobAd` records plus a
:class:`SkillVocabulary` mapping normalized skill names to dense indices.
:func:`build_index` turns them into the job x skill incidence structure the
downstream relevance and complementarity computations consume.

Each input record is treated as a distinct advertisement; no deduplication
of re-posted ads is attempted.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataError

_WS_RUN = re.compile(r"\s+")


def normalize_skill(raw: str) -> str:
    """Canonical identity form: trimmed, inner whitespace collapsed, lowercased.

    Idempotent: ``normalize_skill(normalize_skill(x)) == normalize_skill(x)``.
    """
    return _WS_RUN.sub(" ", raw.strip()).lower()


def display_form(raw: str) -> str:
    """Whitespace-cleaned form preserving the original casing."""
    return _WS_RUN.sub(" ", raw.strip())


@dataclass(frozen=True)
class JobAd:
    """One advertisement. ``skills`` holds normalized names, deduplicated,
    in first-occurrence order."""

    id: str
    posted_date: dt.date
    occupation: str
    skills: tuple[str, ...]
    salary_min: Optional[float] = None
    salary_max: Optional[float] = None
    education_years: Optional[float] = None
    experience_years: Optional[float] = None

    def salary_midpoint(self) -> Optional[float]:
        if self.salary_min is not None and self.salary_max is not None:
            return (self.salary_min + self.salary_max) / 2.0
        if self.salary_min is not None:
            return float(self.salary_min)
        if self.salary_max is not None:
            return float(self.salary_max)
        return None


class SkillVocabulary:
    """Ordered skill vocabulary with contiguous indices from 0.

    Display casing is the first occurrence's casing; identity is the
    normalized (lowercased) form.
    """

    def __init__(self) -> None:
        self._index: dict[str, int] = {}
        self._names: list[str] = []
        self._displays: list[str] = []

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return normalize_skill(name) in self._index

    @property
    def names(self) -> list[str]:
        """Normalized names in index order."""
        return list(self._names)

    @property
    def displays(self) -> list[str]:
        """Canonical display casings in index order."""
        return list(self._displays)

    def add(self, raw: str) -> int:
        key = normalize_skill(raw)
        if not key:
            raise DataError("cannot add empty skill name")
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._names)
            self._index[key] = idx
            self._names.append(key)
            self._displays.append(display_form(raw))
        return idx

    def index_of(self, name: str) -> int:
        key = normalize_skill(name)
        if key not in self._index:
            raise DataError(f"unknown skill: {name!r}")
        return self._index[key]

    def display(self, idx: int) -> str:
        return self._displays[idx]

    @classmethod
    def from_ads(cls, ads: Iterable[JobAd]) -> "SkillVocabulary":
        vocab = cls()
        for ad in ads:
            for s in ad.skills:
                vocab.add(s)
        return vocab


@dataclass(frozen=True)
class IngestConfig:
    date_min: Optional[dt.date] = None
    date_max: Optional[dt.date] = None
    reject_threshold: float = 0.05


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    reasons: Counter = field(default_factory=Counter)

    def to_json(self) -> str:
        payload = {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reasons": dict(sorted(self.reasons.items())),
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _parse_optional_float(value, field_name: str) -> Optional[float]:
    if value is None or value == "":
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValueError(f"bad number in {field_name}")


def _record_to_ad(rec: dict, config: IngestConfig) -> JobAd:
    """Validate one raw record; raises ValueError with a short reason."""
    for key in ("id", "date", "occupation", "skills"):
        if key not in rec or rec[key] in (None, ""):
            raise ValueError(f"missing {key}")
    try:
        posted = dt.date.fromisoformat(str(rec["date"]))
    except ValueError:
        raise ValueError("bad date")
    if config.date_min is not None and posted < config.date_min:
        raise ValueError("date out of range")
    if config.date_max is not None and posted > config.date_max:
        raise ValueError("date out of range")

    raw_skills = rec["skills"]
    if isinstance(raw_skills, str):
        raw_skills = [s for s in raw_skills.split(";")]
    skills: list[str] = []
    seen: set[str] = set()
    for raw in raw_skills:
        key = normalize_skill(str(raw))
        if key and key not in seen:
            seen.add(key)
            skills.append(key)
    if not skills:
        raise ValueError("empty skills")

    salary_min = _parse_optional_float(rec.get("salary_min"), "salary_min")
    salary_max = _parse_optional_float(rec.get("salary_max"), "salary_max")
    if salary_min is not None and salary_max is not None and salary_min > salary_max:
        raise ValueError("salary_min > salary_max")
    education = _parse_optional_float(rec.get("education_years"), "education_years")
    if education is not None and education < 0:
        raise ValueError("negative education_years")
    experience = _parse_optional_float(rec.get("experience_years"), "experience_years")
    if experience is not None and experience < 0:
        raise ValueError("negative experience_years")

    return JobAd(
        id=str(rec["id"]),
        posted_date=posted,
        occupation=str(rec["occupation"]).strip(),
        skills=tuple(skills),
        salary_min=salary_min,
        salary_max=salary_max,
        education_years=education,
        experience_years=experience,
    )


def _iter_records(path: Path, fmt: str):
    if fmt == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    yield {"__parse_error__": "bad json"}
    elif fmt == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                yield dict(row)
    else:
        raise DataError(f"unknown input format: {fmt!r}")


def ingest(
    path,
    fmt: str = "jsonl",
    config: IngestConfig = IngestConfig(),
) -> tuple[list[JobAd], SkillVocabulary, IngestReport]:
    """Load a corpus file, validate every record, and build the vocabulary.

    Malformed records are rejected with a per-record reason and never abort
    the run unless the rejected fraction exceeds ``config.reject_threshold``.
    Deterministic: the returned ad order is file order.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"cannot read input file: {path}")

    ads: list[JobAd] = []
    report = IngestReport()
    for rec in _iter_records(path, fmt):
        if "__parse_error__" in rec:
            report.rejected += 1
            report.reasons[rec["__parse_error__"]] += 1
            continue
        try:
            ads.append(_record_to_ad(rec, config))
            report.accepted += 1
        except ValueError as exc:
            report.rejected += 1
            report.reasons[str(exc)] += 1

    total = report.accepted + report.rejected
    if total > 0 and report.rejected / total > config.reject_threshold:
        raise DataError(
            f"rejected {report.rejected}/{total} records "
            f"(threshold {config.reject_threshold:.0%}); reasons: "
            + ", ".join(f"{r}={n}" for r, n in sorted(report.reasons.items()))
        )
    vocab = SkillVocabulary.from_ads(ads)
    return ads, vocab, report


class IncidenceIndex:
    """Sparse binary job x skill incidence with cached marginals.

    ``job_skills[i]`` holds the sorted skill indices of job ``i``; the
    per-skill and per-job counts and the grand total are precomputed.
    """

    def __init__(self, ads: Sequence[JobAd], vocab: SkillVocabulary):
        if len(ads) == 0:
            raise DataError("empty corpus: cannot build incidence index")
        self.vocab = vocab
        self.job_ids: list[str] = [ad.id for ad in ads]
        self.job_skills: list[np.ndarray] = []
        skill_counts = np.zeros(len(vocab), dtype=np.int64)
        for ad in ads:
            idxs = np.array(sorted(vocab.index_of(s) for s in ad.skills), dtype=np.int64)
            self.job_skills.append(idxs)
            skill_counts[idxs] += 1
        self.skill_job_counts = skill_counts
        self.job_skill_counts = np.array([len(r) for r in self.job_skills], dtype=np.int64)
        self.grand_total = int(self.job_skill_counts.sum())
        if self.grand_total != int(self.skill_job_counts.sum()):
            raise DataError("incidence marginals disagree")

    @property
    def n_jobs(self) -> int:
        return len(self.job_ids)

    @property
    def n_skills(self) -> int:
        return len(self.vocab)


def build_index(ads: Sequence[JobAd], vocab: SkillVocabulary) -> IncidenceIndex:
    """Build the incidence structure; fatal if an ad names a skill missing
    from ``vocab`` (the vocabulary must come from the same corpus)."""
    return IncidenceIndex(ads, vocab)


def write_jsonl(ads: Iterable[JobAd], path) -> None:
    """Serialize ads in the canonical JSONL interchange format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for ad in ads:
            rec = {
                "id": ad.id,
                "date": ad.posted_date.isoformat(),
                "occupation": ad.occupation,
                "skills": list(ad.skills),
            }
            if ad.salary_min is not None:
                rec["salary_min"] = ad.salary_min
            if ad.salary_max is not None:
                rec["salary_max"] = ad.salary_max
            if ad.education_years is not None:
                rec["education_years"] = ad.education_years
            if ad.experience_years is not None:
                rec["experience_years"] = ad.experience_years
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
