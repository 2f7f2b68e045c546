"""Density clustering of performance vectors, 1-D k-means, and severity scoring."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .profile import PerfVector

DEFAULT_THRESHOLD_FRACTION = 0.10
DEFAULT_COUNT_THRESHOLD = 2
SEVERITY_K = 5


class SeverityUndefinedError(ValueError):
    """Every vector has zero length, so the dissimilarity severity has no scale."""


class SeverityCategory(enum.IntEnum):
    VERY_LOW = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3
    VERY_HIGH = 4

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", " ")


def as_matrix(vectors) -> np.ndarray:
    """Stack vectors (``PerfVector`` or array-likes) into an ``(m, n)`` float array."""
    if isinstance(vectors, np.ndarray):
        mat = np.asarray(vectors, dtype=float)
        if mat.ndim != 2:
            raise ValueError("expected a 2-D array of vectors")
        return mat
    rows = [np.asarray(v.values if isinstance(v, PerfVector) else v, dtype=float) for v in vectors]
    if not rows:
        return np.zeros((0, 0))
    n = len(rows[0])
    for r in rows:
        if r.ndim != 1 or len(r) != n:
            raise ValueError("vector length mismatch")
    return np.vstack(rows)


def _values(v) -> np.ndarray:
    return np.asarray(v.values if isinstance(v, PerfVector) else v, dtype=float)


def euclidean_distance(a, b) -> float:
    x, y = _values(a), _values(b)
    if x.shape != y.shape:
        raise ValueError(f"vector length mismatch: {len(x)} vs {len(y)}")
    return math.sqrt(float(np.sum((x - y) ** 2)))


def vector_length(a) -> float:
    x = _values(a)
    return math.sqrt(float(np.sum(x * x)))


def distance_matrix(mat: np.ndarray) -> np.ndarray:
    diff = mat[:, None, :] - mat[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


@dataclass(frozen=True)
class ClusteringOutcome:
    """A partition of process ranks in canonical form.

    Clusters are ordered by their smallest member and members are sorted.
    Isolated points appear as singleton clusters and are also listed in
    ``isolated``.
    """

    clusters: tuple[tuple[int, ...], ...]
    isolated: tuple[int, ...] = ()

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], isolated: Iterable[int] = ()) -> "ClusteringOutcome":
        canon = sorted((tuple(sorted(c)) for c in clusters if c), key=lambda c: c[0])
        return cls(tuple(canon), tuple(sorted(isolated)))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "ClusteringOutcome":
        groups: dict[int, list[int]] = {}
        for rank, lab in enumerate(labels):
            groups.setdefault(lab, []).append(rank)
        return cls.from_clusters(groups.values())

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.clusters)

    def labels(self) -> list[int]:
        """Canonical cluster index of every rank."""
        out = [0] * self.size
        for idx, members in enumerate(self.clusters):
            for r in members:
                out[r] = idx
        return out

    def same_partition(self, other: "ClusteringOutcome") -> bool:
        return self.clusters == other.clusters


def density_cluster(
    vectors,
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
    count_threshold: int = DEFAULT_COUNT_THRESHOLD,
) -> ClusteringOutcome:
    """Threshold-density clustering of performance vectors.

    Seeds are tried in ascending rank among unassigned points.  A seed ``p``
    counts every point ``q`` (itself included) with
    ``dist(p, q) < threshold_fraction * len(p)``; when that count exceeds
    ``count_threshold`` the seed claims all such points that are still
    unassigned.  Claimed points are never re-seeded or moved.  Points left
    over are isolated singletons.
    """
    mat = as_matrix(vectors)
    m = mat.shape[0]
    if m == 0:
        raise ValueError("need at least one vector")
    dist = distance_matrix(mat)
    lengths = np.sqrt(np.sum(mat * mat, axis=1))
    assigned = np.zeros(m, dtype=bool)
    clusters: list[list[int]] = []
    for p in range(m):
        if assigned[p]:
            continue
        near = dist[p] < threshold_fraction * lengths[p]
        if int(near.sum()) > count_threshold:
            members = np.flatnonzero(near & ~assigned)
            assigned[members] = True
            clusters.append(members.tolist())
    isolated = np.flatnonzero(~assigned).tolist()
    return ClusteringOutcome.from_clusters(clusters + [[r] for r in isolated], isolated)


def dissimilarity_severity(vectors) -> float:
    """Largest pairwise distance over the smallest non-zero vector length."""
    mat = as_matrix(vectors)
    if mat.shape[0] < 2:
        raise ValueError("severity needs at least two vectors")
    lengths = np.sqrt(np.sum(mat * mat, axis=1))
    nonzero = lengths[lengths > 0]
    if nonzero.size == 0:
        raise SeverityUndefinedError("all performance vectors have zero length")
    return float(distance_matrix(mat).max() / nonzero.min())


def zero_length_ranks(vectors) -> list[int]:
    mat = as_matrix(vectors)
    return np.flatnonzero(np.sum(mat * mat, axis=1) == 0).tolist()


def _quantile_seeds(values: np.ndarray, k: int) -> list[float]:
    s = np.sort(values)
    n = len(s)
    seeds: list[float] = []
    for j in range(k):
        idx = min(n - 1, int(math.floor((j + 0.5) * n / k)))
        v = float(s[idx])
        if not seeds or v != seeds[-1]:
            seeds.append(v)
    return seeds


def _kmeans_1d(values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Returns (labels, centroids) with labels ranked by ascending centroid."""
    centroids = np.array(_quantile_seeds(values, k))
    kk = len(centroids)

    # Lloyd passes: nearest centroid, ties toward the lower index
    labels = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
    for _ in range(1000):
        for c in range(kk):
            members = values[labels == c]
            if members.size:
                centroids[c] = members.mean()
        new = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new

    # single-point transfers that lower the within-cluster sum of squares
    counts = np.bincount(labels, minlength=kk).astype(float)
    sums = np.bincount(labels, weights=values, minlength=kk)
    scale = float(np.sum((values - values.mean()) ** 2)) + 1.0
    moved = True
    passes = 0
    while moved and passes < 1000:
        moved = False
        passes += 1
        for i, x in enumerate(values):
            a = labels[i]
            if counts[a] < 2:
                continue
            ca = sums[a] / counts[a]
            removal = counts[a] / (counts[a] - 1) * (x - ca) ** 2
            best, best_gain = a, 0.0
            for b in range(kk):
                if b == a or counts[b] == 0:
                    continue
                cb = sums[b] / counts[b]
                gain = removal - counts[b] / (counts[b] + 1) * (x - cb) ** 2
                if gain > best_gain + 1e-12 * scale:
                    best, best_gain = b, gain
            if best != a:
                counts[a] -= 1
                sums[a] -= x
                counts[best] += 1
                sums[best] += x
                labels[i] = best
                moved = True

    populated = [c for c in range(kk) if counts[c] > 0]
    cents = {c: sums[c] / counts[c] for c in populated}
    order = sorted(populated, key=lambda c: (cents[c], c))
    rank = {c: r for r, c in enumerate(order)}
    ranked = np.array([rank[c] for c in labels], dtype=int)
    return ranked, np.array([cents[c] for c in order])


def kmeans_scalar(values: Sequence[float], k: int = SEVERITY_K) -> list[int]:
    """Cluster scalars into at most ``k`` groups.

    Seeds are the sorted values at quantile positions ``(j + 0.5) / k``
    (duplicates dropped).  Lloyd iterations run until no assignment
    changes, then single-value transfers are applied while any of them
    lowers the total within-cluster sum of squares.  Returned indices rank
    clusters by ascending centroid, ``0 .. populated - 1``.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("k-means needs at least one value")
    if k < 1:
        raise ValueError("k must be positive")
    labels, _ = _kmeans_1d(arr, k)
    return labels.tolist()


def severity_classify(values: Sequence[float]) -> list[SeverityCategory]:
    """Map values to five severity categories via k-means with k=5.

    Clusters are ranked by centroid.  With fewer than five populated
    clusters the lower ones take VeryLow, Low, ... in order and the cluster
    holding the maximum is always VeryHigh.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("severity classification needs at least one value")
    labels, centroids = _kmeans_1d(arr, SEVERITY_K)
    top = len(centroids) - 1
    cats = []
    for lab in labels:
        cats.append(SeverityCategory.VERY_HIGH if lab == top else SeverityCategory(int(lab)))
    return cats
