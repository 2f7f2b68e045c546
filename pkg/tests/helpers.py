"""Small builders shared by the test modules."""

from __future__ import annotations

import json

import numpy as np

from spmdperf.profile import METRIC_FIELDS, CodeRegionTree, Profile


def cell(wall=1.0, cpu=None, cycles=0.0, instructions=0.0, **rest) -> dict:
    out = {name: 0 for name in METRIC_FIELDS}
    out.update(wall_time=wall, cpu_time=wall if cpu is None else cpu, cycles=cycles, instructions=instructions)
    out.update(rest)
    return out


def document(parents, rows, program_wall=None, names=None, ids=None) -> dict:
    """Profile document from per-process lists of cell dicts."""
    n = len(parents)
    ids = list(ids) if ids is not None else list(range(1, n + 1))
    regions = []
    for k in range(n):
        reg = {"id": ids[k], "name": names[k] if names else f"r{ids[k]}", "parent": parents[k]}
        regions.append(reg)
    m = len(rows)
    return {
        "version": 1,
        "regions": regions,
        "processes": m,
        "program_wall_time": list(program_wall) if program_wall is not None else [10.0] * m,
        "metrics": rows,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc)


def cpu_profile(cpu, parents=None, pwt=100.0) -> Profile:
    """Profile whose only content is a CPU-time table (wall = CPU, CPI 1)."""
    cpu = np.asarray(cpu, dtype=float)
    m, n = cpu.shape
    parents = tuple(parents) if parents is not None else (None,) * n
    table = np.zeros((m, n, len(METRIC_FIELDS)))
    table[:, :, 0] = cpu
    table[:, :, 1] = cpu
    table[:, :, 2] = cpu * 1e9
    table[:, :, 3] = cpu * 1e9
    return Profile(CodeRegionTree.from_parents(parents), table, np.full(m, pwt))


def random_tree(rng, n: int) -> tuple:
    """Parent links where every region's parent has a smaller id."""
    return tuple(None if k == 0 or rng.random() < 0.4 else rng.randrange(1, k + 1) for k in range(n))


def random_search_instance(rng, max_m: int = 6, max_n: int = 6):
    """A small profile with clumped inclusive CPU times, plus its parents."""
    m = rng.randint(2, max_m)
    n = rng.randint(1, max_n)
    parents = random_tree(rng, n)
    levels = [0.0, 5.0, 10.0, 20.0, 40.0]
    own = [[rng.choice(levels) * (1 + 0.02 * rng.random()) for _ in range(n)] for _ in range(m)]
    # inclusive: add descendants' self time, deepest first
    incl = [list(row) for row in own]
    for k in reversed(range(n)):
        if parents[k] is not None:
            for row in incl:
                row[parents[k] - 1] += row[k]
    return cpu_profile(incl, parents), parents
