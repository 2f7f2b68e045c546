"""Automatic bottleneck analysis for SPMD parallel programs.

Per-process, per-code-region profiles go in; out come the processes that
behave dissimilarly, the code regions responsible (external bottlenecks),
the regions that are expensive inside every process (internal
bottlenecks), and the hardware-level attributes that explain both.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .clustering import (
    ClusteringOutcome,
    SeverityCategory,
    density_cluster,
    dissimilarity_severity,
    euclidean_distance,
    kmeans_scalar,
    severity_classify,
    vector_length,
)
from .external import CcrTree, CompositeRegion, detect_external, search_external
from .internal import InternalResult, compute_crnm, find_internal
from .pipeline import AnalysisConfig, analyze, render_report, render_tables
from .profile import (
    CodeRegionTree,
    MetricKind,
    PerfVector,
    Profile,
    ProfileError,
    ProfileParseError,
    ProfileValidationError,
    RegionMetrics,
    emit_profile,
    ingest_profile,
    load_profile,
    metric_table,
    perf_vector,
    perf_vectors,
)
from .roughset import (
    CoreResult,
    DecisionTable,
    DiscernibilityMatrix,
    build_discernibility,
    external_decision_table,
    extract_core,
    internal_decision_table,
    root_cause_report,
)
from .synth import Injection, InjectionKind, SynthSpec, emit_fixture, generate
