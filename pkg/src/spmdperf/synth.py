"""Synthetic SPMD profiles with injected bottlenecks.

Baseline metrics are per-region *self* costs.  Each process gets a copy
perturbed by uniform multiplicative noise of at most 1%, injections are
applied on top, and parents finally absorb their children (inclusive
accounting) for every additive field.

Noise comes from SplitMix64 (state += 0x9E3779B97F4A7C15, then the two
xor-shift-multiply rounds with 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB,
final shift 31).  A draw ``u`` in ``[0, 1)`` is ``(x >> 11) * 2**-53``;
the noise factor is ``1 + a * (2u - 1)`` with amplitude ``a`` at most 0.01
(the default).  Draws are consumed per rank,
per region (ascending id), per field in :data:`NOISE_FIELDS` order, so a
given ``(spec, seed)`` yields the same profile in any implementation.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .profile import (
    COUNT_FIELDS,
    FIELD_INDEX,
    METRIC_FIELDS,
    CodeRegionTree,
    Profile,
    RegionMetrics,
    emit_profile,
)

NOISE_AMPLITUDE = 0.01
NOISE_FIELDS = (
    "wall_time",
    "cpu_time",
    "cpi",
    "l1_miss",
    "l1_access",
    "l2_miss",
    "l2_access",
    "disk_io_bytes",
    "net_io_bytes",
)
DEFAULT_CLOCK_HZ = 2.0e9
_MASK = (1 << 64) - 1


class SynthSpecError(ValueError):
    pass


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


class InjectionKind(enum.Enum):
    LOAD_IMBALANCE = "LoadImbalance"
    HIGH_L2_MISS = "HighL2Miss"
    HIGH_DISK_IO = "HighDiskIo"
    HIGH_NET_IO = "HighNetIo"
    HIGH_INSTRUCTION_COUNT = "HighInstructionCount"


@dataclass(frozen=True)
class Injection:
    """A bottleneck planted in one region.

    ``magnitude`` multiplies the region's cost: instructions and CPU time
    for the two instruction kinds, CPU time at constant instruction count
    for ``HighL2Miss``, wall time (I/O wait) for the I/O kinds.  ``value``
    overrides the L2 miss rate or the byte count; when absent the rate
    becomes ``min(0.9, magnitude * baseline rate)`` (0.1 standing in for a
    zero baseline rate) and bytes become
    ``magnitude`` times the largest baseline byte count of that field
    (or 1 GiB when the baseline has none).  ``ranks=None`` means every
    process, except for ``LoadImbalance`` where it means the upper half.
    """

    kind: InjectionKind
    target: int
    magnitude: float = 3.0
    ranks: tuple[int, ...] | None = None
    value: float | None = None

    def affected(self, m: int) -> tuple[int, ...]:
        if self.ranks is not None:
            return self.ranks
        if self.kind is InjectionKind.LOAD_IMBALANCE:
            return tuple(range(m // 2, m))
        return tuple(range(m))


@dataclass(frozen=True)
class SynthSpec:
    processes: int
    parents: tuple[int | None, ...]
    baseline: tuple[RegionMetrics, ...]
    injections: tuple[Injection, ...] = ()
    names: tuple[str, ...] | None = None
    clock_hz: float = DEFAULT_CLOCK_HZ
    serial_time: float = 0.0
    noise: float = NOISE_AMPLITUDE

    def validate(self) -> None:
        n = len(self.parents)
        if self.processes < 1:
            raise SynthSpecError("processes must be at least 1")
        if len(self.baseline) != n:
            raise SynthSpecError(f"baseline has {len(self.baseline)} regions, tree has {n}")
        if self.names is not None and len(self.names) != n:
            raise SynthSpecError("names must cover every region")
        if self.clock_hz <= 0 or self.serial_time < 0:
            raise SynthSpecError("clock_hz must be positive and serial_time non-negative")
        if not 0 <= self.noise <= NOISE_AMPLITUDE:
            raise SynthSpecError(f"noise must lie in [0, {NOISE_AMPLITUDE}]")
        for r, base in enumerate(self.baseline, start=1):
            if any(v < 0 for v in base.as_array()):
                raise SynthSpecError(f"region {r}: negative baseline value")
            if base.cpu_time > base.wall_time:
                raise SynthSpecError(f"region {r}: cpu_time exceeds wall_time")
        for inj in self.injections:
            if not 1 <= inj.target <= n:
                raise SynthSpecError(f"injection targets unknown region {inj.target}")
            if inj.magnitude <= 0:
                raise SynthSpecError("injection magnitude must be positive")
            if inj.kind is InjectionKind.HIGH_L2_MISS and inj.value is not None and not 0 <= inj.value <= 1:
                raise SynthSpecError("L2 miss rate must lie in [0, 1]")
            if inj.value is not None and inj.value < 0:
                raise SynthSpecError("injection value must be non-negative")
            if any(not 0 <= r < self.processes for r in inj.affected(self.processes)):
                raise SynthSpecError("injection names an unknown process rank")
        CodeRegionTree.from_parents(self.parents)


def _rate(miss: float, access: float) -> float:
    return miss / (miss + access) if miss + access > 0 else 0.0


def _with_rate(rate: float, total: float) -> tuple[float, float]:
    """(miss, access) with ``miss / (miss + access) == rate`` and the given sum."""
    miss = rate * total
    return miss, total - miss


def _self_tables(spec: SynthSpec, noise_seed: int) -> np.ndarray:
    m, n = spec.processes, len(spec.parents)
    rng = SplitMix64(noise_seed)
    out = np.zeros((m, n, len(METRIC_FIELDS)))
    for i in range(m):
        for t, base in enumerate(spec.baseline):
            f = {name: 1.0 + spec.noise * (2.0 * rng.uniform() - 1.0) for name in NOISE_FIELDS}
            cpi = base.cycles / base.instructions if base.instructions > 0 and base.cycles > 0 else 1.0
            wall = base.wall_time * f["wall_time"]
            cpu = min(base.cpu_time * f["cpu_time"], wall)
            cycles = cpu * spec.clock_hz
            cell = {
                "wall_time": wall,
                "cpu_time": cpu,
                "cycles": cycles,
                "instructions": cycles / (cpi * f["cpi"]),
                "l1_miss": base.l1_miss * f["l1_miss"],
                "l1_access": base.l1_access * f["l1_access"],
                "l2_miss": base.l2_miss * f["l2_miss"],
                "l2_access": base.l2_access * f["l2_access"],
                "disk_io_bytes": base.disk_io_bytes * f["disk_io_bytes"],
                "net_io_bytes": base.net_io_bytes * f["net_io_bytes"],
            }
            out[i, t] = [cell[name] for name in METRIC_FIELDS]
    return out


def _inject(spec: SynthSpec, table: np.ndarray) -> None:
    W, C, Y, I = (FIELD_INDEX[k] for k in ("wall_time", "cpu_time", "cycles", "instructions"))
    L2M, L2A = FIELD_INDEX["l2_miss"], FIELD_INDEX["l2_access"]
    for inj in spec.injections:
        t = inj.target - 1
        base = spec.baseline[t]
        mag = inj.magnitude
        for i in inj.affected(spec.processes):
            cell = table[i, t]
            if inj.kind in (InjectionKind.LOAD_IMBALANCE, InjectionKind.HIGH_INSTRUCTION_COUNT):
                extra = cell[C] * (mag - 1.0)
                cell[W] += extra
                cell[C] += extra
                cell[Y] *= mag
                cell[I] *= mag
            elif inj.kind is InjectionKind.HIGH_L2_MISS:
                extra = cell[C] * (mag - 1.0)
                cell[W] += extra
                cell[C] += extra
                cell[Y] = cell[C] * spec.clock_hz
                rate = inj.value
                if rate is None:
                    base_rate = _rate(base.l2_miss, base.l2_access)
                    rate = min(0.9, mag * (base_rate if base_rate > 0 else 0.1))
                total = cell[L2M] + cell[L2A]
                if total == 0:
                    total = max(cell[I] * 0.01, 1.0)
                cell[L2M], cell[L2A] = _with_rate(rate, total)
            else:
                name = "disk_io_bytes" if inj.kind is InjectionKind.HIGH_DISK_IO else "net_io_bytes"
                k = FIELD_INDEX[name]
                if inj.value is not None:
                    cell[k] = inj.value
                else:
                    peak = max(getattr(b, name) for b in spec.baseline)
                    cell[k] = mag * peak if peak > 0 else mag * 2.0**30
                cell[W] *= mag


def rollup(parents: Sequence[int | None], self_table: np.ndarray) -> np.ndarray:
    """Inclusive metrics: every region absorbs its descendants' self costs."""
    total = np.array(self_table, dtype=float)
    tree = CodeRegionTree.from_parents(parents)
    for node in sorted(tree.nodes, key=lambda nd: -nd.depth):
        if node.parent is not None:
            total[:, node.parent - 1] += total[:, node.id - 1]
    return total


def _round_counts(table: np.ndarray) -> np.ndarray:
    for name in COUNT_FIELDS:
        k = FIELD_INDEX[name]
        table[:, :, k] = np.round(table[:, :, k])
    return table


def generate(spec: SynthSpec, noise_seed: int) -> Profile:
    """Deterministic synthetic profile for ``(spec, noise_seed)``."""
    spec.validate()
    table = _self_tables(spec, noise_seed)
    _inject(spec, table)
    table = _round_counts(table)
    inclusive = rollup(spec.parents, table)
    tree = CodeRegionTree.from_parents(spec.parents, spec.names)
    top = [r - 1 for r in tree.top_level()]
    pwt = inclusive[:, top, FIELD_INDEX["wall_time"]].sum(axis=1) + spec.serial_time
    return Profile(tree, inclusive, pwt)


def emit_fixture(profile: Profile) -> bytes:
    return emit_profile(profile)


# --- spec documents ----------------------------------------------------------


def _metrics_from_dict(d: dict, where: str) -> RegionMetrics:
    unknown = set(d) - set(METRIC_FIELDS)
    if unknown:
        raise SynthSpecError(f"{where}: unknown metric fields {sorted(unknown)}")
    try:
        return RegionMetrics(**{k: float(v) for k, v in d.items()})
    except (TypeError, ValueError) as exc:
        raise SynthSpecError(f"{where}: {exc}") from None


def spec_from_dict(doc: Any) -> SynthSpec:
    """Build a spec from its document form.

    ``{"processes": 8, "regions": [{"id", "name", "parent", "baseline": {...}}],
    "injections": [{"kind", "target", "magnitude", "ranks", "value"}],
    "clock_hz": ..., "serial_time": ..., "noise": ...}``.  Region ids must be ``1..n``.
    """
    if not isinstance(doc, dict):
        raise SynthSpecError("spec: top level must be an object")
    try:
        regions = sorted(doc["regions"], key=lambda r: r["id"])
        if [r["id"] for r in regions] != list(range(1, len(regions) + 1)):
            raise SynthSpecError("regions: ids must be 1..n")
        injections = tuple(
            Injection(
                InjectionKind(j["kind"]),
                int(j["target"]),
                float(j.get("magnitude", 3.0)),
                None if j.get("ranks") is None else tuple(int(r) for r in j["ranks"]),
                None if j.get("value") is None else float(j["value"]),
            )
            for j in doc.get("injections", [])
        )
        spec = SynthSpec(
            processes=int(doc["processes"]),
            parents=tuple(r.get("parent") for r in regions),
            baseline=tuple(_metrics_from_dict(r.get("baseline", {}), f"region {r['id']}") for r in regions),
            injections=injections,
            names=tuple(r.get("name", f"region {r['id']}") for r in regions),
            clock_hz=float(doc.get("clock_hz", DEFAULT_CLOCK_HZ)),
            serial_time=float(doc.get("serial_time", 0.0)),
            noise=float(doc.get("noise", NOISE_AMPLITUDE)),
        )
    except KeyError as exc:
        raise SynthSpecError(f"spec: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SynthSpecError):
            raise
        raise SynthSpecError(f"spec: {exc}") from None
    spec.validate()
    return spec


def load_spec(path) -> SynthSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SynthSpecError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)


def uniform_spec(
    processes: int,
    parents: Iterable[int | None],
    baseline: RegionMetrics | Sequence[RegionMetrics],
    injections: Iterable[Injection] = (),
    **kw,
) -> SynthSpec:
    parents = tuple(parents)
    if isinstance(baseline, RegionMetrics):
        baseline = (baseline,) * len(parents)
    return SynthSpec(processes, parents, tuple(baseline), tuple(injections), **kw)
