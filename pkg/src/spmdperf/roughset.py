"""Decision tables, discernibility matrices and core extraction.

The five root-cause attributes are, in order: L1 cache miss rate, L2 cache
miss rate, disk I/O quantity, network I/O quantity and executed
instruction count (``a1`` .. ``a5``).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .clustering import (
    DEFAULT_COUNT_THRESHOLD,
    DEFAULT_THRESHOLD_FRACTION,
    SeverityCategory,
    density_cluster,
    severity_classify,
)
from .internal import InternalResult
from .profile import MetricKind, Profile, metric_table

ATTRIBUTE_NAMES = ("a1", "a2", "a3", "a4", "a5")
ATTRIBUTE_KINDS = (
    MetricKind.L1_MISS_RATE,
    MetricKind.L2_MISS_RATE,
    MetricKind.DISK_IO,
    MetricKind.NET_IO,
    MetricKind.INSTRUCTIONS,
)
CAUSE_NAMES = {
    "a1": "L1 cache miss rate",
    "a2": "L2 cache miss rate",
    "a3": "disk I/O quantity",
    "a4": "network I/O quantity",
    "a5": "executing instruction number",
}

ZERO = 0
CONFLICT = -1


class CoreError(ValueError):
    """The matrix has no attribute-set cell to extract a core from."""


class InconsistentTableError(CoreError):
    """Every decision-differing pair has identical attributes."""


@dataclass(frozen=True)
class DecisionTable:
    attribute_names: tuple[str, ...]
    entry_ids: tuple[int, ...]
    values: tuple[tuple[Hashable, ...], ...]
    decisions: tuple[Hashable, ...]
    kind: str = "generic"  # "external" (entries are ranks), "internal" (entries are regions)

    def __post_init__(self) -> None:
        if not (len(self.entry_ids) == len(self.values) == len(self.decisions)):
            raise ValueError("entry ids, attribute rows and decisions must align")
        arity = len(self.attribute_names)
        for eid, row in zip(self.entry_ids, self.values):
            if len(row) != arity:
                raise ValueError(f"entry {eid}: expected {arity} attribute values")

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Sequence],
        attribute_names: Sequence[str] | None = None,
        kind: str = "generic",
    ) -> "DecisionTable":
        """Rows of ``(entry_id, *attribute_values, decision)``."""
        rows = [tuple(r) for r in rows]
        arity = len(rows[0]) - 2
        names = tuple(attribute_names) if attribute_names else tuple(f"a{i + 1}" for i in range(arity))
        return cls(
            names,
            tuple(r[0] for r in rows),
            tuple(tuple(r[1:-1]) for r in rows),
            tuple(r[-1] for r in rows),
            kind,
        )

    def __len__(self) -> int:
        return len(self.entry_ids)

    def column(self, attr: int) -> tuple[Hashable, ...]:
        return tuple(row[attr] for row in self.values)

    def render(self) -> str:
        header = ["ID", *self.attribute_names, "D"]
        body = [[str(e), *(str(v) for v in row), str(d)] for e, row, d in zip(self.entry_ids, self.values, self.decisions)]
        return _grid([header, *body])


Cell = object  # ZERO, CONFLICT, or frozenset of attribute indices


@dataclass(frozen=True)
class DiscernibilityMatrix:
    attribute_names: tuple[str, ...]
    entry_ids: tuple[int, ...]
    upper: tuple[tuple[Cell, ...], ...]  # upper[i][j - i - 1] is cell (i, j), i < j

    def cell(self, i: int, j: int) -> Cell:
        if i == j:
            return ZERO
        if i > j:
            i, j = j, i
        return self.upper[i][j - i - 1]

    @property
    def size(self) -> int:
        return len(self.entry_ids)

    def attr_sets(self) -> list[frozenset[int]]:
        return [c for row in self.upper for c in row if isinstance(c, frozenset)]

    @property
    def conflict_count(self) -> int:
        return sum(1 for row in self.upper for c in row if isinstance(c, int) and c == CONFLICT)

    def cell_text(self, i: int, j: int) -> str:
        c = self.cell(i, j)
        if isinstance(c, frozenset):
            return "".join(self.attribute_names[a] for a in sorted(c))
        return str(c)

    def render(self) -> str:
        n = self.size
        rows = [["", *(str(e) for e in self.entry_ids)]]
        for i in range(n):
            rows.append([str(self.entry_ids[i])] + ["" if j < i else self.cell_text(i, j) for j in range(n)])
        return _grid(rows)


def _grid(rows: list[list[str]]) -> str:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip() for r in rows)


def build_discernibility(table: DecisionTable) -> DiscernibilityMatrix:
    n = len(table)
    if n < 2:
        raise ValueError("a discernibility matrix needs at least two entries")
    upper = []
    for i in range(n):
        row: list[Cell] = []
        for j in range(i + 1, n):
            if table.decisions[i] == table.decisions[j]:
                row.append(ZERO)
                continue
            diff = frozenset(a for a, (x, y) in enumerate(zip(table.values[i], table.values[j])) if x != y)
            row.append(diff if diff else CONFLICT)
        upper.append(tuple(row))
    return DiscernibilityMatrix(table.attribute_names, table.entry_ids, tuple(upper))


@dataclass(frozen=True)
class CoreResult:
    cores: tuple[frozenset[int], ...]
    required: frozenset[int]
    clauses: tuple[frozenset[int], ...]
    conflicts: int = 0
    attribute_names: tuple[str, ...] = ATTRIBUTE_NAMES

    def names(self, core: frozenset[int]) -> list[str]:
        return [self.attribute_names[a] for a in sorted(core)]

    def render(self) -> str:
        return " or ".join("{" + ", ".join(self.names(c)) + "}" for c in self.cores)


def _minimal_clauses(cells: Iterable[frozenset[int]], required: frozenset[int]) -> list[frozenset[int]]:
    pending = sorted({c for c in cells if not (c & required)}, key=lambda c: (len(c), sorted(c)))
    kept: list[frozenset[int]] = []
    for c in pending:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


def extract_core(matrix: DiscernibilityMatrix) -> CoreResult:
    """Core attribute sets of a discernibility matrix.

    Singleton cells are required outright.  Every other cell that misses
    the required set becomes a clause (supersets of kept clauses are
    absorbed).  Expanding the conjunction into disjunctive form, the
    smallest minors win; ties go to the minors contained in the most
    expansion terms, and any remaining tie returns every winner.
    """
    cells = matrix.attr_sets()
    if not cells:
        if matrix.conflict_count:
            raise InconsistentTableError("only conflicting entries: decisions are not explained by the attributes")
        raise CoreError("no decision-differing entries: nothing to discern")
    required = frozenset(next(iter(c)) for c in cells if len(c) == 1)
    clauses = _minimal_clauses(cells, required)

    # expansion with multiplicities: minor -> number of expansion terms producing it
    terms: Counter[frozenset[int]] = Counter({required: 1})
    for clause in clauses:
        nxt: Counter[frozenset[int]] = Counter()
        for minor, mult in terms.items():
            for a in sorted(clause):
                nxt[minor | {a}] += mult
        terms = nxt

    smallest = min(len(m) for m in terms)
    candidates = [m for m in terms if len(m) == smallest]
    occurs = {c: sum(mult for m, mult in terms.items() if c <= m) for c in candidates}
    best = max(occurs.values())
    winners = sorted((c for c in candidates if occurs[c] == best), key=lambda c: sorted(c))
    return CoreResult(tuple(winners), required, tuple(clauses), matrix.conflict_count, matrix.attribute_names)


# --- table builders ------------------------------------------------------------


def _cluster_labels(vectors: np.ndarray, threshold_fraction: float, count_threshold: int) -> list[int]:
    if not np.any(vectors):
        return [0] * vectors.shape[0]
    return density_cluster(vectors, threshold_fraction, count_threshold).labels()


def external_decision_table(
    profile: Profile,
    cccrs: Iterable[int],
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
    count_threshold: int = DEFAULT_COUNT_THRESHOLD,
) -> DecisionTable:
    """One entry per process rank, over the CCCR regions only.

    Each attribute column holds the canonical cluster index of the process
    when its attribute values over the CCCRs are density-clustered; the
    decision is the cluster index from the CPU times over the same regions.
    An attribute that is zero everywhere forms a single cluster.
    """
    cols = sorted(set(cccrs))
    if not cols:
        raise ValueError("external decision table needs at least one CCCR")
    if profile.process_count < 2:
        raise ValueError("external decision table needs at least two processes")
    idx = [r - 1 for r in cols]
    columns = []
    for kind in ATTRIBUTE_KINDS:
        columns.append(_cluster_labels(metric_table(profile, kind)[:, idx], threshold_fraction, count_threshold))
    decisions = _cluster_labels(metric_table(profile, MetricKind.CPU_TIME)[:, idx], threshold_fraction, count_threshold)
    values = tuple(tuple(col[i] for col in columns) for i in range(profile.process_count))
    return DecisionTable(ATTRIBUTE_NAMES, tuple(range(profile.process_count)), values, tuple(decisions), "external")


def internal_decision_table(
    profile: Profile,
    internal: InternalResult,
    decision: str = "ccr",
) -> DecisionTable:
    """One entry per region.

    An attribute is 1 when the region's process-averaged value lands in the
    High or VeryHigh category and is non-zero.  The decision marks the
    region's bottleneck status: membership in the critical set (``"ccr"``,
    the default) or in the core set (``"cccr"``).
    """
    if decision not in ("ccr", "cccr"):
        raise ValueError("decision must be 'ccr' or 'cccr'")
    n = profile.region_count
    columns = []
    for kind in ATTRIBUTE_KINDS:
        avg = metric_table(profile, kind).mean(axis=0)
        cats = severity_classify(avg)
        columns.append([1 if (c > SeverityCategory.MEDIUM and avg[t] > 0) else 0 for t, c in enumerate(cats)])
    marked = internal.ccrs if decision == "ccr" else internal.cccrs
    values = tuple(tuple(col[t] for col in columns) for t in range(n))
    decisions = tuple(1 if t + 1 in marked else 0 for t in range(n))
    return DecisionTable(ATTRIBUTE_NAMES, tuple(range(1, n + 1)), values, decisions, "internal")


@dataclass(frozen=True)
class RootCause:
    entry: int
    attributes: tuple[str, ...]

    def causes(self) -> list[str]:
        return [CAUSE_NAMES.get(a, a) for a in self.attributes]


def _majority(values: Sequence[Hashable]) -> Hashable:
    counts = Counter(values)
    best = max(counts.values())
    # ties: the label seen first in entry order
    return next(v for v in values if counts[v] == best)


def root_cause_report(table: DecisionTable, core: CoreResult | frozenset[int], which: int = 0) -> list[RootCause]:
    """Per positive-decision entry, the core attributes that are abnormal.

    Internal tables: positive entries have decision 1 and an attribute is
    abnormal when its value is 1.  External tables: positive entries lie
    outside the majority decision cluster, and an attribute is abnormal
    when it differs from the majority cluster's usual value.
    """
    if isinstance(core, CoreResult):
        core = core.cores[which]
    attrs = sorted(core)
    out = []
    if table.kind == "external":
        major = _majority(table.decisions)
        rows = [i for i, d in enumerate(table.decisions) if d == major]
        typical = [_majority([table.values[i][a] for i in rows]) for a in range(len(table.attribute_names))]
        for i, d in enumerate(table.decisions):
            if d == major:
                continue
            hit = tuple(table.attribute_names[a] for a in attrs if table.values[i][a] != typical[a])
            out.append(RootCause(table.entry_ids[i], hit))
    else:
        for i, d in enumerate(table.decisions):
            if d != 1:
                continue
            hit = tuple(table.attribute_names[a] for a in attrs if table.values[i][a] == 1)
            out.append(RootCause(table.entry_ids[i], hit))
    return out


WEATHER_TABLE = DecisionTable.from_rows(
    [
        (0, "sunny", "hot", "high", "False", "N"),
        (1, "sunny", "hot", "high", "True", "N"),
        (2, "overcast", "hot", "high", "False", "P"),
        (3, "sunny", "cool", "low", "False", "P"),
    ],
    ("a1", "a2", "a3", "a4"),
)
"""The four-entry weather decision table used as the worked example."""
