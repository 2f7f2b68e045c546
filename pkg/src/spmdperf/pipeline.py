"""End-to-end analysis: detection, CCR search, root causes, and the text report.

:func:`analyze` returns a plain result document (JSON-compatible dicts and
lists).  :func:`render_report` works from that document alone, so a saved
result re-renders to the identical report text.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .clustering import (
    DEFAULT_COUNT_THRESHOLD,
    DEFAULT_THRESHOLD_FRACTION,
    SeverityCategory,
    SeverityUndefinedError,
)
from .external import CompositeRegion, detect_external, node_label, search_external
from .internal import find_internal
from .profile import Profile
from .roughset import (
    CAUSE_NAMES,
    CoreError,
    DecisionTable,
    build_discernibility,
    extract_core,
    external_decision_table,
    internal_decision_table,
    root_cause_report,
)

RESULT_FORMAT = "spmdperf-result"
RESULT_VERSION = 1


@dataclass(frozen=True)
class AnalysisConfig:
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION
    count_threshold: int = DEFAULT_COUNT_THRESHOLD

    def __post_init__(self) -> None:
        if not 0 < self.threshold_fraction < 1:
            raise ValueError("threshold fraction must lie strictly between 0 and 1")
        if self.count_threshold < 1:
            raise ValueError("count threshold must be at least 1")


def _node_doc(node) -> Any:
    return list(node.members) if isinstance(node, CompositeRegion) else node


def _core_doc(table: DecisionTable) -> dict:
    """Core and root causes for a decision table, or the reason there are none."""
    if len(table) < 2:
        return {"cores": [], "conflicts": 0, "error": "a single entry: nothing to discern", "root_causes": []}
    matrix = build_discernibility(table)
    try:
        core = extract_core(matrix)
    except CoreError as exc:
        return {"cores": [], "conflicts": matrix.conflict_count, "error": str(exc), "root_causes": []}
    causes = root_cause_report(table, core)
    return {
        "cores": [core.names(c) for c in core.cores],
        "conflicts": core.conflicts,
        "error": None,
        "root_causes": [{"entry": rc.entry, "attributes": list(rc.attributes)} for rc in causes],
    }


def _external(profile: Profile, cfg: AnalysisConfig) -> dict:
    doc: dict[str, Any] = {"notice": None}
    if profile.process_count < 2:
        doc["notice"] = "external analysis skipped: the profile has a single process"
        return doc
    try:
        det = detect_external(profile, cfg.threshold_fraction, cfg.count_threshold)
        severity = det.severity
    except SeverityUndefinedError:
        det = None
        severity = None
    if det is None:
        doc["notice"] = "external analysis skipped: every process has zero CPU time"
        return doc
    doc["clusters"] = [list(c) for c in det.outcome.clusters]
    doc["isolated"] = list(det.outcome.isolated)
    doc["severity"] = severity
    doc["zero_length"] = list(det.zero_length)
    if not det.bottlenecks_exist:
        return doc

    tree = search_external(profile, cfg.threshold_fraction, cfg.count_threshold)
    doc["search"] = {
        "entries": [
            {"node": _node_doc(e.node), "level": e.level, "cccr": e.is_cccr, "parent": e.parent}
            for e in tree.entries
        ],
        "composite_size": tree.composite_size,
        "exhausted": tree.exhausted,
        "overlapping": list(tree.overlapping),
    }
    regions = tree.cccr_regions()
    if regions:
        table = external_decision_table(profile, regions, cfg.threshold_fraction, cfg.count_threshold)
        doc["roughset"] = _core_doc(table)
    return doc


def _internal(profile: Profile) -> dict:
    res = find_internal(profile)
    by_cat = res.by_category()
    doc: dict[str, Any] = {
        "categories": {c.label: by_cat[c] for c in sorted(SeverityCategory, reverse=True)},
        "crnm": [{"region": rec.region, "average": rec.average} for rec in res.records],
        "ccrs": sorted(res.ccrs),
        "cccrs": sorted(res.cccrs),
        "degenerate": res.degenerate,
    }
    if res.ccrs:
        doc["roughset"] = _core_doc(internal_decision_table(profile, res))
    return doc


def analyze(profile: Profile, config: AnalysisConfig | None = None) -> dict:
    cfg = config or AnalysisConfig()
    return {
        "format": RESULT_FORMAT,
        "version": RESULT_VERSION,
        "config": {"threshold_fraction": cfg.threshold_fraction, "count_threshold": cfg.count_threshold},
        "processes": profile.process_count,
        "regions": profile.region_count,
        "external": _external(profile, cfg),
        "internal": _internal(profile),
    }


# --- rendering -------------------------------------------------------------------


def _region_label(node) -> str:
    if isinstance(node, list):
        return node_label(CompositeRegion(tuple(node)))
    return str(node)


def _render_causes(lines: list[str], rs: dict, entry_word: str, order: list[int] | None = None) -> None:
    if rs["error"]:
        lines.append(f"core: none ({rs['error']})")
        return
    lines.append("core: " + " or ".join("{" + ", ".join(c) + "}" for c in rs["cores"]))
    if rs["conflicts"]:
        lines.append(f"inconsistent entry pairs: {rs['conflicts']}")
    causes = rs["root_causes"]
    if order is not None:
        rank = {r: i for i, r in enumerate(order)}
        causes = sorted(causes, key=lambda rc: rank.get(rc["entry"], len(rank)))
    for rc in causes:
        text = ", ".join(CAUSE_NAMES.get(a, a) for a in rc["attributes"]) or "(none)"
        lines.append(f"{entry_word} {rc['entry']}: {text}")


def _render_external(doc: dict) -> list[str]:
    lines = ["Performance similarity"]
    if doc.get("notice"):
        lines.append(doc["notice"])
        return lines
    clusters = doc["clusters"]
    k = len(clusters)
    lines.append("there is 1 kind of processes" if k == 1 else f"there are {k} kinds of processes")
    for i, members in enumerate(clusters):
        lines.append(f"kind {i}: " + " ".join(str(r) for r in members))
    if k == 1:
        return lines
    lines.append(f"dissimilarity severity, S: {doc['severity']:.6f}")
    if doc["zero_length"]:
        lines.append("zero-length vectors excluded from S: " + " ".join(str(r) for r in doc["zero_length"]))

    search = doc["search"]
    entries = search["entries"]
    cccrs = [e for e in entries if e["cccr"]]
    if not cccrs:
        lines.append("CCCR: none (composite search exhausted)" if search["exhausted"] else "CCCR: none")
        return lines
    lines.append("CCCR: " + ", ".join(f"region {_region_label(e['node'])}" for e in cccrs))
    if search["composite_size"]:
        lines.append(f"composite regions of {search['composite_size']} top-level regions")
    if search["overlapping"]:
        lines.append("regions in more than one CCCR: " + " ".join(str(r) for r in search["overlapping"]))
    lines.append("CCR tree:")
    for e in cccrs:
        path = [e]
        while path[-1]["parent"] is not None:
            path.append(entries[path[-1]["parent"]])
        parts = []
        for p in reversed(path):
            tag = f"{p['level']}-CCR & CCCR" if p["cccr"] else f"{p['level']}-CCR"
            parts.append(f"region {_region_label(p['node'])} ({tag})")
        lines.append(" ---> ".join(parts))
    if "roughset" in doc:
        lines.append("")
        lines.append("External root causes")
        _render_causes(lines, doc["roughset"], "process")
    return lines


def _render_internal(doc: dict) -> list[str]:
    lines = ["Code region severity"]
    if doc["degenerate"]:
        lines.append("all regions share one severity level")
    for label, regions in doc["categories"].items():
        lines.append(f"{label}: " + (", ".join(str(r) for r in regions) if regions else "-"))
    lines.append("average CRNM:")
    for rec in doc["crnm"]:
        lines.append(f"region {rec['region']}: {rec['average']:.4f}")
    if not doc["cccrs"]:
        lines.append("CCCR: none")
        return lines
    lines.append("CCCR: " + ", ".join(f"region {r}" for r in doc["cccrs"]))
    if "roughset" in doc:
        lines.append("")
        lines.append("Internal root causes")
        avg = {rec["region"]: rec["average"] for rec in doc["crnm"]}
        order = sorted(avg, key=lambda r: (-avg[r], r))
        _render_causes(lines, doc["roughset"], "region", order)
    return lines


def render_report(doc: dict) -> str:
    if doc.get("format") != RESULT_FORMAT or doc.get("version") != RESULT_VERSION:
        raise ValueError("not a result document of a supported version")
    lines = _render_external(doc["external"]) + [""] + _render_internal(doc["internal"])
    return "\n".join(lines) + "\n"


def render_tables(profile: Profile, config: AnalysisConfig | None = None) -> str:
    """Both decision tables and their discernibility matrices."""
    cfg = config or AnalysisConfig()
    out = []
    if profile.process_count >= 2:
        try:
            det = detect_external(profile, cfg.threshold_fraction, cfg.count_threshold)
        except SeverityUndefinedError:
            det = None
        regions: tuple[int, ...] = ()
        if det is not None and det.bottlenecks_exist:
            regions = search_external(profile, cfg.threshold_fraction, cfg.count_threshold).cccr_regions()
        if regions:
            table = external_decision_table(profile, regions, cfg.threshold_fraction, cfg.count_threshold)
            out += _table_block("External decision table", table, "regions " + ", ".join(map(str, regions)))
        else:
            out += ["External decision table", "no external CCCR", ""]
    else:
        out += ["External decision table", "single process", ""]

    res = find_internal(profile)
    if res.ccrs:
        out += _table_block("Internal decision table", internal_decision_table(profile, res), None)
    else:
        out += ["Internal decision table", "no internal CCR", ""]
    return "\n".join(out)


def _table_block(title: str, table: DecisionTable, scope: str | None) -> list[str]:
    lines = [title]
    if scope:
        lines.append(f"over {scope}")
    lines += [table.render(), ""]
    if len(table) < 2:
        return lines + ["Discernibility matrix", "a single entry: nothing to discern", ""]
    lines += ["Discernibility matrix", build_discernibility(table).render(), ""]
    return lines
