"""Per-occupation skill intensity against a target skill set.

Intensity is the share of an occupation's skill slots (one slot per
distinct skill per ad) that belong to the target set. Occupations above a
strict threshold are selected and labelled via a user-supplied
occupation -> category CSV mapping.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import JobAd, normalize_skill
from .errors import DataError
from .similarity import SkillSetResult

UNCATEGORIZED = "uncategorized"


@dataclass
class OccupationProfile:
    occupation: str
    ads: int
    total_slots: int
    target_slots: int
    eta: float
    category: Optional[str] = None
    low_support: bool = False


@dataclass
class SelectionResult:
    profiles: list[OccupationProfile]
    threshold: float
    total_occupations: int
    total_ads: int


def _target_keys(skill_set) -> set[str]:
    if isinstance(skill_set, SkillSetResult):
        return skill_set.skill_keys()
    return {normalize_skill(s) for s in skill_set}


def compute_intensity(ads: Sequence[JobAd], skill_set) -> list[OccupationProfile]:
    """One profile per distinct occupation, sorted by intensity descending
    then name ascending. ``skill_set`` is a SkillSetResult or any iterable
    of skill names."""
    if not ads:
        raise DataError("empty corpus: cannot compute skill intensity")
    targets = _target_keys(skill_set)
    if not targets:
        raise DataError("empty target skill set")

    stats: dict[str, list[int]] = {}  # occupation -> [ads, total, target]
    for ad in ads:
        rec = stats.setdefault(ad.occupation, [0, 0, 0])
        rec[0] += 1
        rec[1] += len(ad.skills)
        rec[2] += sum(1 for s in ad.skills if s in targets)

    profiles = [
        OccupationProfile(
            occupation=occ,
            ads=n_ads,
            total_slots=total,
            target_slots=target,
            eta=target / total,
        )
        for occ, (n_ads, total, target) in stats.items()
    ]
    profiles.sort(key=lambda p: (-p.eta, p.occupation))
    return profiles


def load_category_map(path) -> dict[str, str]:
    """Two-column CSV ``occupation,category``; a header row is optional."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"cannot read category map: {path}")
    mapping: dict[str, str] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataError(f"malformed category map at line {lineno}: "
                                f"expected 2 columns, got {len(row)}")
            occ, cat = row[0].strip(), row[1].strip()
            if lineno == 1 and occ.lower() == "occupation":
                continue
            if not occ or not cat:
                raise DataError(f"malformed category map at line {lineno}: empty field")
            mapping[occ] = cat
    return mapping


def default_category_map_path() -> Path:
    """Shipped four-category occupation grouping."""
    return Path(__file__).parent / "data" / "dsa_occupation_categories.csv"


def select_occupations(
    profiles: Iterable[OccupationProfile],
    threshold: float = 0.15,
    category_map: Optional[dict[str, str]] = None,
    low_support_floor: int = 10,
) -> SelectionResult:
    """Keep profiles with intensity strictly above ``threshold``; attach
    category labels; flag (but keep) occupations with few ads."""
    if not 0 < threshold < 1:
        raise DataError("threshold must be in (0, 1)")
    selected = []
    for p in profiles:
        if p.eta > threshold:
            p.category = (category_map or {}).get(p.occupation, UNCATEGORIZED)
            p.low_support = p.ads < low_support_floor
            selected.append(p)
    return SelectionResult(
        profiles=selected,
        threshold=threshold,
        total_occupations=len(selected),
        total_ads=sum(p.ads for p in selected),
    )


def write_selection_csv(result: SelectionResult, path) -> None:
    """Table layout: category, occupation, ads, eta, plus a TOTALS row."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "occupation", "ads", "eta", "low_support"])
        for p in result.profiles:
            writer.writerow([
                p.category or UNCATEGORIZED,
                p.occupation,
                p.ads,
                repr(p.eta),
                int(p.low_support),
            ])
        writer.writerow([
            "TOTALS",
            f"{result.total_occupations} occupations",
            result.total_ads,
            "",
            "",
        ])
