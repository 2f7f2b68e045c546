"""External (inter-process) bottleneck detection and top-down CCR search.

Detection clusters the per-process CPU-time vectors; more than one cluster
means processes behave dissimilarly.  The search then zeroes and restores
region components to find the regions whose CPU time drives that
dissimilarity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .clustering import (
    DEFAULT_COUNT_THRESHOLD,
    DEFAULT_THRESHOLD_FRACTION,
    ClusteringOutcome,
    density_cluster,
    dissimilarity_severity,
    zero_length_ranks,
)
from .profile import MetricKind, Profile, metric_table


class NotApplicableError(ValueError):
    """External analysis needs at least two processes."""


@dataclass(frozen=True)
class CompositeRegion:
    """Two or more top-level regions analysed as one (their CPU times summed)."""

    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.members)) < 2:
            raise ValueError("a composite region needs at least two distinct members")
        object.__setattr__(self, "members", tuple(sorted(set(self.members))))

    @property
    def label(self) -> str:
        return "+".join(str(r) for r in self.members)


Node = Union[int, CompositeRegion]


def node_label(node: Node) -> str:
    return node.label if isinstance(node, CompositeRegion) else str(node)


def node_regions(node: Node) -> tuple[int, ...]:
    return node.members if isinstance(node, CompositeRegion) else (node,)


@dataclass(frozen=True)
class ExternalDetection:
    outcome: ClusteringOutcome
    severity: float
    zero_length: tuple[int, ...] = ()

    @property
    def bottlenecks_exist(self) -> bool:
        return self.outcome.cluster_count > 1


@dataclass(frozen=True)
class CcrEntry:
    node: Node
    level: int
    is_cccr: bool
    parent: int | None  # index into CcrTree.entries


@dataclass(frozen=True)
class CcrTree:
    entries: tuple[CcrEntry, ...] = ()
    reference: ClusteringOutcome | None = None
    composite_size: int | None = None
    exhausted: bool = False
    overlapping: tuple[int, ...] = field(default=())

    @property
    def cccrs(self) -> tuple[Node, ...]:
        return tuple(e.node for e in self.entries if e.is_cccr)

    @property
    def ccrs(self) -> tuple[Node, ...]:
        return tuple(e.node for e in self.entries)

    def level(self, level: int) -> tuple[Node, ...]:
        return tuple(e.node for e in self.entries if e.level == level)

    def cccr_regions(self) -> tuple[int, ...]:
        out: list[int] = []
        for node in self.cccrs:
            for r in node_regions(node):
                if r not in out:
                    out.append(r)
        return tuple(sorted(out))

    def chains(self) -> list[list[CcrEntry]]:
        """Root-to-CCCR paths through the entries."""
        paths = []
        for e in self.entries:
            if not e.is_cccr:
                continue
            path = [e]
            while path[-1].parent is not None:
                path.append(self.entries[path[-1].parent])
            paths.append(list(reversed(path)))
        return paths


def cpu_vectors(profile: Profile) -> np.ndarray:
    return metric_table(profile, MetricKind.CPU_TIME)


def detect_external(
    profile: Profile,
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
    count_threshold: int = DEFAULT_COUNT_THRESHOLD,
) -> ExternalDetection:
    if profile.process_count < 2:
        raise NotApplicableError("external analysis needs at least two processes")
    vecs = cpu_vectors(profile)
    outcome = density_cluster(vecs, threshold_fraction, count_threshold)
    return ExternalDetection(outcome, dissimilarity_severity(vecs), tuple(zero_length_ranks(vecs)))


def clustering_changed(reference: ClusteringOutcome, candidate: ClusteringOutcome) -> bool:
    if reference.size != candidate.size:
        raise ValueError("outcomes cover different process counts")
    return not reference.same_partition(candidate)


class _Layout:
    """Columns of a working vector set: one per top-level node plus every nested region."""

    def __init__(self, profile: Profile, top: list[Node]):
        self.tree = profile.tree
        self.top = top
        cpu = cpu_vectors(profile)
        self.columns: dict[Node, int] = {}
        cols = []
        for node in top:
            self.columns[node] = len(cols)
            cols.append(cpu[:, [r - 1 for r in node_regions(node)]].sum(axis=1))
        for r in range(1, profile.region_count + 1):
            if self.tree.depth(r) > 1:
                self.columns[r] = len(cols)
                cols.append(cpu[:, r - 1])
        self.full = np.column_stack(cols)
        self.full.setflags(write=False)

    def children(self, node: Node) -> tuple[int, ...]:
        if isinstance(node, CompositeRegion):
            return tuple(c for r in node.members for c in self.tree.children(r))
        return self.tree.children(node)

    def step1(self) -> np.ndarray:
        work = np.zeros_like(self.full)
        for node in self.top:
            work[:, self.columns[node]] = self.full[:, self.columns[node]]
        return work


def _search_layout(profile: Profile, top: list[Node], cluster) -> tuple[ClusteringOutcome, list[CcrEntry]]:
    lay = _Layout(profile, top)
    base = lay.step1()
    reference = cluster(base)

    # Step 2: zero each top-level node in turn
    level1 = []
    for node in top:
        col = lay.columns[node]
        if not np.any(base[:, col] > 0):
            continue
        work = base.copy()
        work[:, col] = 0.0
        if clustering_changed(reference, cluster(work)):
            level1.append(node)

    entries: list[CcrEntry] = []

    def descend(node: Node, level: int, parent_idx: int | None, ancestors: tuple[Node, ...]) -> None:
        idx = len(entries)
        entries.append(CcrEntry(node, level, False, parent_idx))
        kids = lay.children(node)
        found = []
        if kids:
            # Step 3: restart from full vectors, clear the CCR chain and all its children
            cleared = lay.full.copy()
            for a in ancestors + (node,):
                cleared[:, lay.columns[a]] = 0.0
            for k in kids:
                cleared[:, lay.columns[k]] = 0.0
            for k in kids:
                work = cleared.copy()
                work[:, lay.columns[k]] = lay.full[:, lay.columns[k]]
                if not clustering_changed(reference, cluster(work)):
                    found.append(k)
        if not found:
            entries[idx] = CcrEntry(node, level, True, parent_idx)
            return
        for k in found:
            descend(k, level + 1, idx, ancestors + (node,))

    for node in level1:
        descend(node, 1, None, ())
    return reference, entries


def search_external(
    profile: Profile,
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
    count_threshold: int = DEFAULT_COUNT_THRESHOLD,
) -> CcrTree:
    """Locate critical code regions (CCRs) and their cores (CCCRs).

    Top-level regions whose removal changes the reference clustering are
    1-CCRs.  Below a CCR, a child is a CCR of the next level when its CPU
    time alone (the CCR chain and its siblings cleared) reproduces the
    reference clustering.  A CCR with no CCR children is a CCCR.  When no
    top-level region qualifies, composites of ``s = 2 .. r - 1`` top-level
    regions are tried, one composite at a time, stopping at the first ``s``
    that yields any CCCR.
    """
    if profile.process_count < 2:
        raise NotApplicableError("external analysis needs at least two processes")

    def cluster(vecs: np.ndarray) -> ClusteringOutcome:
        return density_cluster(vecs, threshold_fraction, count_threshold)

    top = list(profile.tree.top_level())
    reference, entries = _search_layout(profile, top, cluster)
    if entries:
        return CcrTree(tuple(entries), reference)

    r = len(top)
    for s in range(2, r):
        found: list[CcrEntry] = []
        for combo in itertools.combinations(top, s):
            comp = CompositeRegion(combo)
            layout_top: list[Node] = [comp] + [t for t in top if t not in combo]
            _, sub = _search_layout(profile, layout_top, cluster)
            # plain top-level regions were already swept; keep the composite's subtree only
            keep: dict[int, int] = {}
            for i, e in enumerate(sub):
                if e.parent is None and e.node != comp:
                    continue
                if e.parent is not None and e.parent not in keep:
                    continue
                keep[i] = len(found)
                parent = None if e.parent is None else keep[e.parent]
                found.append(CcrEntry(e.node, e.level, e.is_cccr, parent))
        if any(e.is_cccr for e in found):
            return CcrTree(tuple(found), reference, composite_size=s, overlapping=_overlaps(found))
    return CcrTree((), reference, exhausted=True)


def _overlaps(entries: list[CcrEntry]) -> tuple[int, ...]:
    """Regions reported in more than one CCCR (directly or inside a composite)."""
    seen: dict[int, int] = {}
    for e in entries:
        if e.is_cccr:
            for r in node_regions(e.node):
                seen[r] = seen.get(r, 0) + 1
    return tuple(sorted(r for r, c in seen.items() if c > 1))
