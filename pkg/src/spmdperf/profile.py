"""Code-region tree, per-process region metrics, and profile ingestion.

A profile is a dense ``(process, region, field)`` table of raw measurements
plus the nested code-region tree those regions form.  Region ids are always
dense ``1..n`` once a profile has been ingested; the ids found in the source
document are kept in :attr:`CodeRegionTree.source_ids`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields
from typing import Any, Iterator, Sequence

import numpy as np

FORMAT_VERSION = 1

METRIC_FIELDS: tuple[str, ...] = (
    "wall_time",
    "cpu_time",
    "cycles",
    "instructions",
    "l1_miss",
    "l1_access",
    "l2_miss",
    "l2_access",
    "disk_io_bytes",
    "net_io_bytes",
)
TIME_FIELDS = ("wall_time", "cpu_time")
COUNT_FIELDS = tuple(f for f in METRIC_FIELDS if f not in TIME_FIELDS)
FIELD_INDEX = {name: i for i, name in enumerate(METRIC_FIELDS)}

_COUNT_TOL = 1e-6
_CPU_WALL_RTOL = 1e-9


class ProfileError(ValueError):
    """Base class for profile ingestion failures."""


class ProfileParseError(ProfileError):
    """The document is not well-formed or has the wrong shape."""


class ProfileValidationError(ProfileError):
    """The document parses but violates a profile invariant."""


class MetricKind(enum.Enum):
    CPU_TIME = "CpuTime"
    WALL_TIME = "WallTime"
    L1_MISS_RATE = "L1MissRate"
    L2_MISS_RATE = "L2MissRate"
    DISK_IO = "DiskIo"
    NET_IO = "NetIo"
    INSTRUCTIONS = "Instructions"
    CPI = "Cpi"
    CRNM = "Crnm"

    @property
    def is_derived(self) -> bool:
        return self in _DERIVED


_DERIVED = frozenset({MetricKind.L1_MISS_RATE, MetricKind.L2_MISS_RATE, MetricKind.CPI, MetricKind.CRNM})

_RAW_FIELD = {
    MetricKind.CPU_TIME: "cpu_time",
    MetricKind.WALL_TIME: "wall_time",
    MetricKind.DISK_IO: "disk_io_bytes",
    MetricKind.NET_IO: "net_io_bytes",
    MetricKind.INSTRUCTIONS: "instructions",
}


@dataclass(frozen=True)
class RegionMetrics:
    """Raw measurements of one code region in one process."""

    wall_time: float = 0.0
    cpu_time: float = 0.0
    cycles: float = 0.0
    instructions: float = 0.0
    l1_miss: float = 0.0
    l1_access: float = 0.0
    l2_miss: float = 0.0
    l2_access: float = 0.0
    disk_io_bytes: float = 0.0
    net_io_bytes: float = 0.0

    @classmethod
    def from_array(cls, row: Sequence[float]) -> "RegionMetrics":
        return cls(*(float(v) for v in row))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in METRIC_FIELDS], dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def derived_metric(metrics: RegionMetrics, kind: MetricKind) -> float:
    """Value of a derived metric for one region cell.

    Miss rates use ``miss / (miss + access)``.  Every ratio is 0 when its
    denominator is 0.  CRNM needs the program wall time and is only
    available through :func:`metric_table`.
    """
    if kind is MetricKind.L1_MISS_RATE:
        return _ratio(metrics.l1_miss, metrics.l1_miss + metrics.l1_access)
    if kind is MetricKind.L2_MISS_RATE:
        return _ratio(metrics.l2_miss, metrics.l2_miss + metrics.l2_access)
    if kind is MetricKind.CPI:
        return _ratio(metrics.cycles, metrics.instructions)
    if kind is MetricKind.CRNM:
        raise ValueError("CRNM depends on the program wall time; use metric_table(profile, MetricKind.CRNM)")
    raise ValueError(f"{kind.value} is not a derived metric")


@dataclass(frozen=True)
class CodeRegionNode:
    id: int
    name: str
    depth: int
    parent: int | None
    children: tuple[int, ...] = ()


@dataclass(frozen=True)
class CodeRegionTree:
    """Nested code regions below a synthetic whole-program root.

    The root has depth 0 and is not a code region; regions whose parent is
    ``None`` sit at depth 1.
    """

    nodes: tuple[CodeRegionNode, ...]
    source_ids: tuple[int, ...] = ()

    @property
    def region_count(self) -> int:
        return len(self.nodes)

    def node(self, region: int) -> CodeRegionNode:
        if not 1 <= region <= len(self.nodes):
            raise KeyError(f"unknown region {region}")
        return self.nodes[region - 1]

    def __iter__(self) -> Iterator[CodeRegionNode]:
        return iter(self.nodes)

    def depth(self, region: int) -> int:
        return self.node(region).depth

    def children(self, region: int) -> tuple[int, ...]:
        return self.node(region).children

    def parent(self, region: int) -> int | None:
        return self.node(region).parent

    def is_leaf(self, region: int) -> bool:
        return not self.node(region).children

    def top_level(self) -> tuple[int, ...]:
        return tuple(n.id for n in self.nodes if n.parent is None)

    def ancestors(self, region: int) -> tuple[int, ...]:
        out = []
        p = self.parent(region)
        while p is not None:
            out.append(p)
            p = self.parent(p)
        return tuple(out)

    def descendants(self, region: int) -> tuple[int, ...]:
        out: list[int] = []
        stack = list(reversed(self.children(region)))
        while stack:
            r = stack.pop()
            out.append(r)
            stack.extend(reversed(self.children(r)))
        return tuple(out)

    def name(self, region: int) -> str:
        return self.node(region).name

    @classmethod
    def from_parents(
        cls,
        parents: Sequence[int | None],
        names: Sequence[str] | None = None,
        source_ids: Sequence[int] | None = None,
    ) -> "CodeRegionTree":
        """Build a tree from dense parent links; ``parents[i]`` is the parent of region ``i + 1``."""
        n = len(parents)
        names = list(names) if names is not None else [f"region {i + 1}" for i in range(n)]
        children: list[list[int]] = [[] for _ in range(n)]
        for i, p in enumerate(parents):
            if p is None:
                continue
            if not 1 <= p <= n or p == i + 1:
                raise ProfileValidationError(f"region {i + 1}: invalid parent {p}")
            children[p - 1].append(i + 1)
        depths: list[int | None] = [None] * n
        for start in range(1, n + 1):
            chain = []
            r: int | None = start
            while r is not None and depths[r - 1] is None:
                if r in chain:
                    raise ProfileValidationError(f"region {start}: cycle in parent links")
                chain.append(r)
                r = parents[r - 1]
            base = 0 if r is None else depths[r - 1]
            for offset, c in enumerate(reversed(chain), start=1):
                depths[c - 1] = base + offset
        nodes = tuple(
            CodeRegionNode(i + 1, names[i], depths[i], parents[i], tuple(children[i]))  # type: ignore[arg-type]
            for i in range(n)
        )
        return cls(nodes, tuple(source_ids) if source_ids is not None else tuple(range(1, n + 1)))

    def check(self) -> None:
        """Full tree walk verifying the depth and single-parent invariants."""
        seen: dict[int, int] = {}
        for node in self.nodes:
            for c in node.children:
                if c in seen:
                    raise ProfileValidationError(f"region {c} listed under both {seen[c]} and {node.id}")
                seen[c] = node.id
                if self.node(c).parent != node.id:
                    raise ProfileValidationError(f"region {c}: parent link disagrees with children list")
                if self.depth(c) != node.depth + 1:
                    raise ProfileValidationError(f"region {c}: depth {self.depth(c)} under depth {node.depth}")
            if node.parent is None and node.depth != 1:
                raise ProfileValidationError(f"region {node.id}: top-level region must have depth 1")


@dataclass(frozen=True, eq=False)
class Profile:
    """Per-process, per-region measurements of one SPMD run.

    ``metrics`` has shape ``(m, n, len(METRIC_FIELDS))``; the cell for
    process ``i`` and region ``t`` lives at ``metrics[i, t - 1]``.
    """

    tree: CodeRegionTree
    metrics: np.ndarray
    program_wall_time: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        metrics = np.array(self.metrics, dtype=float)
        pwt = np.array(self.program_wall_time, dtype=float)
        if metrics.ndim != 3 or metrics.shape[2] != len(METRIC_FIELDS):
            raise ProfileValidationError(f"metrics must have shape (m, n, {len(METRIC_FIELDS)})")
        if metrics.shape[1] != self.tree.region_count:
            raise ProfileValidationError(
                f"metrics cover {metrics.shape[1]} regions, tree has {self.tree.region_count}"
            )
        if pwt.shape != (metrics.shape[0],):
            raise ProfileValidationError("program_wall_time needs one entry per process")
        metrics.setflags(write=False)
        pwt.setflags(write=False)
        object.__setattr__(self, "metrics", metrics)
        object.__setattr__(self, "program_wall_time", pwt)

    @property
    def process_count(self) -> int:
        return self.metrics.shape[0]

    @property
    def region_count(self) -> int:
        return self.metrics.shape[1]

    def cell(self, process: int, region: int) -> RegionMetrics:
        return RegionMetrics.from_array(self.metrics[process, region - 1])

    def field_table(self, name: str) -> np.ndarray:
        """``(m, n)`` view of one raw field."""
        return self.metrics[:, :, FIELD_INDEX[name]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return (
            self.tree == other.tree
            and np.array_equal(self.metrics, other.metrics)
            and np.array_equal(self.program_wall_time, other.program_wall_time)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class PerfVector:
    """One process's values of a metric over all regions (index ``t - 1`` is region ``t``)."""

    owner: int
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


def metric_table(profile: Profile, kind: MetricKind) -> np.ndarray:
    """``(m, n)`` table of ``kind`` for every process and region."""
    if kind in _RAW_FIELD:
        return np.array(profile.field_table(_RAW_FIELD[kind]))
    f = profile.field_table
    if kind is MetricKind.L1_MISS_RATE:
        return _safe_div(f("l1_miss"), f("l1_miss") + f("l1_access"))
    if kind is MetricKind.L2_MISS_RATE:
        return _safe_div(f("l2_miss"), f("l2_miss") + f("l2_access"))
    cpi = _safe_div(f("cycles"), f("instructions"))
    if kind is MetricKind.CPI:
        return cpi
    if kind is MetricKind.CRNM:
        pwt = profile.program_wall_time
        if np.any(pwt <= 0):
            bad = int(np.flatnonzero(pwt <= 0)[0])
            raise ProfileValidationError(f"process {bad}: program wall time must be positive")
        return f("wall_time") / pwt[:, None] * cpi
    raise ValueError(f"unsupported metric kind {kind!r}")


def perf_vector(profile: Profile, process: int, kind: MetricKind) -> PerfVector:
    if not 0 <= process < profile.process_count:
        raise IndexError(f"unknown process rank {process} (profile has {profile.process_count})")
    return PerfVector(process, metric_table(profile, kind)[process])


def perf_vectors(profile: Profile, kind: MetricKind) -> list[PerfVector]:
    table = metric_table(profile, kind)
    return [PerfVector(i, table[i]) for i in range(profile.process_count)]


# --- ingestion ---------------------------------------------------------------


def _require(doc: dict, key: str, where: str = "document") -> Any:
    if key not in doc:
        raise ProfileParseError(f"{where}: missing field '{key}'")
    return doc[key]


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileParseError(f"{where}: expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ProfileParseError(f"{where}: non-finite number")
    return x


def _integer(value: Any, where: str) -> int:
    x = _number(value, where)
    if x != int(x):
        raise ProfileParseError(f"{where}: expected an integer, got {value!r}")
    return int(x)


def profile_from_dict(doc: Any) -> Profile:
    """Validate a decoded profile document and build a :class:`Profile`."""
    if not isinstance(doc, dict):
        raise ProfileParseError("document: top level must be an object")
    version = _integer(_require(doc, "version"), "version")
    if version != FORMAT_VERSION:
        raise ProfileParseError(f"version: unsupported version {version}")

    regions = _require(doc, "regions")
    if not isinstance(regions, list) or not regions:
        raise ProfileParseError("regions: expected a non-empty array")
    raw: dict[int, tuple[str, int | None, int | None]] = {}
    for i, reg in enumerate(regions):
        where = f"regions[{i}]"
        if not isinstance(reg, dict):
            raise ProfileParseError(f"{where}: expected an object")
        rid = _integer(_require(reg, "id", where), f"{where}.id")
        if rid <= 0:
            raise ProfileValidationError(f"region {rid}: ids must be positive")
        if rid in raw:
            raise ProfileValidationError(f"region {rid}: duplicate id")
        name = _require(reg, "name", where)
        if not isinstance(name, str):
            raise ProfileParseError(f"{where}.name: expected a string")
        parent = _require(reg, "parent", where)
        parent = None if parent is None else _integer(parent, f"{where}.parent")
        depth = reg.get("depth")
        depth = None if depth is None else _integer(depth, f"{where}.depth")
        raw[rid] = (name, parent, depth)

    source_ids = sorted(raw)
    dense = {sid: i + 1 for i, sid in enumerate(source_ids)}
    parents: list[int | None] = []
    for sid in source_ids:
        p = raw[sid][1]
        if p is not None and p not in dense:
            raise ProfileValidationError(f"region {sid}: orphan, parent {p} does not exist")
        parents.append(None if p is None else dense[p])
    try:
        tree = CodeRegionTree.from_parents(parents, [raw[s][0] for s in source_ids], source_ids)
    except ProfileValidationError as exc:
        raise ProfileValidationError(_source_names(str(exc), source_ids)) from None
    for sid in source_ids:
        declared = raw[sid][2]
        if declared is not None and declared != tree.depth(dense[sid]):
            p = raw[sid][1]
            pd = 0 if p is None else tree.depth(dense[p])
            raise ProfileValidationError(
                f"region {sid}: declared depth {declared} but parent depth is {pd}"
            )
    tree.check()

    m = _integer(_require(doc, "processes"), "processes")
    if m < 1:
        raise ProfileValidationError("processes: need at least one process")
    n = len(source_ids)

    pwt_raw = _require(doc, "program_wall_time")
    if not isinstance(pwt_raw, list) or len(pwt_raw) != m:
        raise ProfileValidationError(f"program_wall_time: expected {m} numbers")
    pwt = np.array([_number(v, f"program_wall_time[{i}]") for i, v in enumerate(pwt_raw)])
    if np.any(pwt < 0):
        raise ProfileValidationError("program_wall_time: negative value")

    rows = _require(doc, "metrics")
    if not isinstance(rows, list) or len(rows) != m:
        raise ProfileValidationError(f"metrics: expected {m} per-process arrays")
    table = np.zeros((m, n, len(METRIC_FIELDS)))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ProfileValidationError(f"metrics[{i}]: expected {n} region cells, missing metric cell")
        for t, cell in enumerate(row):
            where = f"metrics[{i}][{t}] (region {source_ids[t]})"
            if not isinstance(cell, dict):
                raise ProfileParseError(f"{where}: expected an object")
            for k, name in enumerate(METRIC_FIELDS):
                if name not in cell:
                    raise ProfileValidationError(f"{where}: missing metric '{name}'")
                x = _number(cell[name], f"{where}.{name}")
                if x < 0:
                    raise ProfileValidationError(f"{where}.{name}: negative value")
                if name in COUNT_FIELDS and abs(x - round(x)) > _COUNT_TOL:
                    raise ProfileValidationError(f"{where}.{name}: count is not integral")
                table[i, t, k] = x
            wall, cpu = table[i, t, 0], table[i, t, 1]
            if cpu > wall * (1 + _CPU_WALL_RTOL) + 0.0:
                raise ProfileValidationError(f"{where}: cpu_time {cpu} exceeds wall_time {wall}")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ProfileParseError("meta: expected an object")
    return Profile(tree, table, pwt, dict(meta))


def _source_names(msg: str, source_ids: Sequence[int]) -> str:
    # rewrite "region <dense>" prefixes back to source ids
    if msg.startswith("region "):
        head, _, rest = msg.partition(":")
        try:
            dense = int(head.split()[1])
            return f"region {source_ids[dense - 1]}:{rest}"
        except (ValueError, IndexError):
            pass
    return msg


def ingest_profile(document: bytes | str) -> Profile:
    """Parse and validate a profile document (JSON text or bytes)."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProfileParseError(f"document is not UTF-8: {exc}") from None
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ProfileParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return profile_from_dict(doc)


def load_profile(path) -> Profile:
    with open(path, "rb") as fh:
        return ingest_profile(fh.read())


# --- emission ----------------------------------------------------------------


def _num(x: float, integral: bool) -> str:
    if integral:
        return str(int(round(x)))
    return json.dumps(float(x))


def emit_profile(profile: Profile) -> bytes:
    """Serialize a profile in the canonical document layout.

    Output is deterministic: one region per line, one process row of cells
    per block, counts written as integers and times with shortest
    round-trip float formatting.
    """
    tree = profile.tree
    lines = ["{", f'  "version": {FORMAT_VERSION},', '  "regions": [']
    sid = tree.source_ids or tuple(range(1, tree.region_count + 1))
    for k, node in enumerate(tree.nodes):
        parent = "null" if node.parent is None else str(sid[node.parent - 1])
        sep = "," if k < tree.region_count - 1 else ""
        lines.append(f'    {{"id": {sid[k]}, "name": {json.dumps(node.name)}, "parent": {parent}}}{sep}')
    lines.append("  ],")
    lines.append(f'  "processes": {profile.process_count},')
    pwt = ", ".join(_num(v, False) for v in profile.program_wall_time)
    lines.append(f'  "program_wall_time": [{pwt}],')
    lines.append('  "metrics": [')
    m, n = profile.process_count, profile.region_count
    for i in range(m):
        lines.append("    [")
        for t in range(n):
            cell = profile.metrics[i, t]
            body = ", ".join(
                f'"{name}": {_num(cell[k], name in COUNT_FIELDS)}' for k, name in enumerate(METRIC_FIELDS)
            )
            lines.append(f"      {{{body}}}" + ("," if t < n - 1 else ""))
        lines.append("    ]" + ("," if i < m - 1 else ""))
    lines.append("  ]")
    if profile.meta:
        lines[-1] += ","
        lines.append(f'  "meta": {json.dumps(profile.meta, sort_keys=True)}')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
