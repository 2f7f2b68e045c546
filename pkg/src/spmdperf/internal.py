"""Internal (intra-process) bottlenecks from the code region normalized metric.

CRNM of a region in one process is its share of the program wall time
multiplied by its cycles per instruction.  Region averages are graded into
five severity categories; High and VeryHigh regions are critical (CCRs) and
the tree walk below picks out their cores (CCCRs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import SeverityCategory, severity_classify
from .profile import MetricKind, Profile, metric_table

_CRITICAL = (SeverityCategory.HIGH, SeverityCategory.VERY_HIGH)


@dataclass(frozen=True)
class CrnmRecord:
    region: int
    per_process: tuple[float, ...]

    @property
    def average(self) -> float:
        return float(np.mean(self.per_process))


@dataclass(frozen=True)
class InternalResult:
    records: tuple[CrnmRecord, ...]
    categories: dict[int, SeverityCategory]
    ccrs: frozenset[int]
    cccrs: frozenset[int]
    degenerate: bool = False

    def by_category(self) -> dict[SeverityCategory, list[int]]:
        """Regions per category, highest average CRNM first."""
        avg = {rec.region: rec.average for rec in self.records}
        out: dict[SeverityCategory, list[int]] = {c: [] for c in SeverityCategory}
        for region, cat in self.categories.items():
            out[cat].append(region)
        for regions in out.values():
            regions.sort(key=lambda r: (-avg[r], r))
        return out


def compute_crnm(profile: Profile) -> list[CrnmRecord]:
    table = metric_table(profile, MetricKind.CRNM)
    return [CrnmRecord(t + 1, tuple(float(v) for v in table[:, t])) for t in range(profile.region_count)]


def find_internal(profile: Profile) -> InternalResult:
    records = compute_crnm(profile)
    averages = [rec.average for rec in records]
    cats = severity_classify(averages)
    categories = {rec.region: cat for rec, cat in zip(records, cats)}
    # a region that takes no time at all cannot be a bottleneck
    ccrs = frozenset(r for r, c in categories.items() if c in _CRITICAL and averages[r - 1] > 0)

    tree = profile.tree
    cccrs = set()
    for r in ccrs:
        kids = tree.children(r)
        if not kids:
            cccrs.add(r)
        elif all(categories[k] < categories[r] for k in kids):
            cccrs.add(r)
    degenerate = len(set(cats)) == 1 and len(records) > 1
    return InternalResult(tuple(records), categories, ccrs, frozenset(cccrs), degenerate)
