from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from spmdperf.clustering import (
    ClusteringOutcome,
    SeverityCategory,
    SeverityUndefinedError,
    density_cluster,
    dissimilarity_severity,
    euclidean_distance,
    kmeans_scalar,
    severity_classify,
    vector_length,
)
from spmdperf.synth import SplitMix64

VH = SeverityCategory.VERY_HIGH


@pytest.mark.parametrize(
    "a, b, expected",
    [((0, 0, 0), (0, 0, 0), 0.0), ((3, 4), (0, 0), 5.0)],
)
def test_distance(a, b, expected):
    assert euclidean_distance(a, b) == expected


def test_distance_unit_diagonal():
    assert abs(euclidean_distance((1, 0), (0, 1)) - 1.41421356) < 1e-8
    assert abs(euclidean_distance((1, 0), (0, 1)) - math.sqrt(2)) < 1e-12


def test_distance_length_mismatch():
    with pytest.raises(ValueError):
        euclidean_distance((1, 2), (1, 2, 3))


def test_length():
    assert vector_length((0, 0)) == 0.0
    assert vector_length((3, 4)) == 5.0


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20))
def test_length_is_distance_to_origin(v):
    assert vector_length(v) == pytest.approx(euclidean_distance(v, [0.0] * len(v)), rel=1e-12, abs=0)


def test_identical_vectors_one_cluster():
    out = density_cluster([[5.0, 7.0, 1.0]] * 8)
    assert out.clusters == (tuple(range(8)),)
    assert out.isolated == ()


def test_far_apart_vectors_all_isolated():
    out = density_cluster([[1, 0, 0], [0, 100, 0], [0, 0, 10000]])
    assert out.clusters == ((0,), (1,), (2,))
    assert out.isolated == (0, 1, 2)


def test_two_groups_by_construction():
    rng = SplitMix64(7)
    vecs = [[100 + rng.uniform() for _ in range(6)] for _ in range(5)]
    vecs += [[200 + rng.uniform() for _ in range(6)] for _ in range(3)]
    out = density_cluster(vecs)
    assert out.clusters == ((0, 1, 2, 3, 4), (5, 6, 7))


def test_claimed_points_are_frozen():
    # rank 0 claims 1 and 2; rank 3 is near 2 but 2 is already taken
    vecs = [[100.0], [101.0], [105.0], [113.0], [114.0], [115.0]]
    got = density_cluster(vecs, 0.1, 2)
    assert got.clusters == tuple(tuple(g) for g in oracles.density_partition(vecs, 0.1, 2))
    assert got.clusters[0] == (0, 1, 2)


def test_outcome_labels_round_trip():
    out = ClusteringOutcome.from_labels([2, 0, 2, 1])
    assert out.clusters == ((0, 2), (1,), (3,))
    assert out.labels() == [0, 1, 0, 2]


@st.composite
def vector_sets(draw, max_m=16, max_n=20):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    centres = draw(st.lists(st.lists(st.floats(0, 100), min_size=n, max_size=n), min_size=1, max_size=4))
    out = []
    for _ in range(m):
        c = draw(st.sampled_from(centres))
        out.append([x + draw(st.floats(0, 5)) for x in c])
    return out


@settings(max_examples=300, deadline=None)
@given(vecs=vector_sets(), frac=st.sampled_from((0.05, 0.1, 0.2, 0.5)), count=st.integers(1, 4))
def test_density_matches_oracle_and_partitions(vecs, frac, count):
    out = density_cluster(vecs, frac, count)
    members = sorted(r for c in out.clusters for r in c)
    assert members == list(range(len(vecs)))
    assert [list(c) for c in out.clusters] == oracles.density_partition(vecs, frac, count)
    for r in out.isolated:
        assert (r,) in out.clusters


@settings(max_examples=200, deadline=None)
@given(vecs=vector_sets(), power=st.integers(-8, 8))
def test_density_scale_invariant(vecs, power):
    # powers of two scale exactly in binary floating point
    c = 2.0**power
    a = density_cluster(vecs)
    b = density_cluster([[x * c for x in v] for v in vecs])
    assert a.clusters == b.clusters


def test_severity_examples():
    assert dissimilarity_severity([[1, 2], [1, 2]]) == 0.0
    assert dissimilarity_severity([[3, 4], [6, 8]]) == 1.0


def test_severity_all_zero():
    with pytest.raises(SeverityUndefinedError):
        dissimilarity_severity([[0, 0], [0, 0]])


def test_severity_skips_zero_lengths():
    assert dissimilarity_severity([[0, 0], [3, 4], [6, 8]]) == 10.0 / 5.0


@settings(max_examples=100, deadline=None)
@given(vecs=vector_sets(max_m=10, max_n=8))
def test_severity_matches_oracle(vecs):
    assume(len(vecs) >= 2 and any(any(v) for v in vecs))
    assert dissimilarity_severity(vecs) == pytest.approx(oracles.severity(vecs), rel=1e-9)


def test_kmeans_all_equal():
    assert kmeans_scalar([2.5] * 7) == [0] * 7


def test_kmeans_two_groups_brute_force():
    vals = [0, 0.01, 0.5, 0.51, 10]
    low, high = oracles.best_two_partition(vals)
    labels = kmeans_scalar(vals, k=2)
    assert sorted(v for v, lab in zip(vals, labels) if lab == 0) == low
    assert sorted(v for v, lab in zip(vals, labels) if lab == 1) == high == [10]


def test_kmeans_outliers_on_top():
    rng = SplitMix64(3)
    vals = [0.01 + 0.02 * rng.uniform() for _ in range(12)] + [0.35, 0.6]
    labels = kmeans_scalar(vals)
    top = max(labels)
    assert labels[13] == top
    assert labels[12] >= top - 1
    assert all(lab < labels[12] for lab in labels[:12])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1000, allow_subnormal=False), min_size=1, max_size=30), st.integers(1, 6))
def test_kmeans_local_optimum_and_ranking(vals, k):
    labels = kmeans_scalar(vals, k)
    used = sorted(set(labels))
    assert used == list(range(len(used))) and len(used) <= k
    means = [np.mean([v for v, lab in zip(vals, labels) if lab == c]) for c in used]
    assert means == sorted(means)
    assert oracles.improving_transfer(vals, labels) is None


def test_severity_single_and_equal_values():
    assert severity_classify([3.0]) == [VH]
    assert severity_classify([1.0, 1.0, 1.0]) == [VH] * 3


def test_severity_brute_force_example():
    cats = severity_classify([1, 1, 1, 1, 100])
    assert cats[4] is VH
    assert len(set(cats[:4])) == 1 and cats[0] < VH
    low, high = oracles.best_two_partition([1, 1, 1, 1, 100])
    assert high == [100]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 10, allow_subnormal=False), min_size=1, max_size=20))
def test_severity_max_is_very_high_and_monotone(vals):
    cats = severity_classify(vals)
    assert cats[int(np.argmax(vals))] is VH
    order = np.argsort(vals, kind="stable")
    ranked = [cats[i] for i in order]
    assert ranked == sorted(ranked)
