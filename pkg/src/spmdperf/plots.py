"""Figures for an analysis result, written as PNG files."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .profile import MetricKind, Profile, metric_table

_CATEGORY_COLOURS = {
    "very high": "#b2182b",
    "high": "#ef8a62",
    "medium": "#fddbc7",
    "low": "#d1e5f0",
    "very low": "#67a9cf",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def crnm_figure(doc: dict, path: Path) -> Path:
    plt = _pyplot()
    internal = doc["internal"]
    category = {r: label for label, regions in internal["categories"].items() for r in regions}
    regions = [rec["region"] for rec in internal["crnm"]]
    values = [rec["average"] for rec in internal["crnm"]]
    fig, ax = plt.subplots(figsize=(max(5.0, 0.45 * len(regions)), 3.5))
    ax.bar([str(r) for r in regions], values, color=[_CATEGORY_COLOURS[category[r]] for r in regions], edgecolor="black", linewidth=0.5)
    ax.set_xlabel("code region")
    ax.set_ylabel("average CRNM")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in _CATEGORY_COLOURS.values()]
    ax.legend(handles, list(_CATEGORY_COLOURS), fontsize="small", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def cpu_figure(profile: Profile, doc: dict, path: Path) -> Path:
    """CPU time per process over the external CCCRs (all top-level regions if none)."""
    plt = _pyplot()
    ext = doc["external"]
    regions: list[int] = []
    for e in ext.get("search", {}).get("entries", []):
        if e["cccr"]:
            for r in e["node"] if isinstance(e["node"], list) else [e["node"]]:
                if r not in regions:
                    regions.append(r)
    if not regions:
        regions = list(profile.tree.top_level())
    regions.sort()
    cpu = metric_table(profile, MetricKind.CPU_TIME)[:, [r - 1 for r in regions]]
    kind = [0] * profile.process_count
    for idx, members in enumerate(ext.get("clusters", [])):
        for rank in members:
            kind[rank] = idx
    cmap = plt.get_cmap("tab10")
    fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * profile.process_count), 3.5))
    bottom = np.zeros(profile.process_count)
    ranks = np.arange(profile.process_count)
    for j, r in enumerate(regions):
        ax.bar(ranks, cpu[:, j], bottom=bottom, color=[cmap(k % 10) for k in kind], edgecolor="black",
               linewidth=0.5, hatch="" if j % 2 == 0 else "//")
        bottom += cpu[:, j]
    ax.set_xticks(ranks)
    ax.set_xlabel("process rank (colour: kind)")
    word = "region" if len(regions) == 1 else "regions"
    ax.set_ylabel(f"CPU time (s), {word} " + ", ".join(map(str, regions)))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(profile: Profile, doc: dict, outdir) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    return [crnm_figure(doc, out / "crnm.png"), cpu_figure(profile, doc, out / "cpu_by_process.png")]
