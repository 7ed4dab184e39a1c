r"""Microbenchmarks for the resolve fast paths.

Times one resolve per call on each pipeline path and compares against a bare
dict lookup. Batches of calls are timed with ``time.perf_counter_ns`` and the
figure of merit is the median of batch means; ``min`` is reported as the
noise floor. The point of the exercise: with a hashed long list and an MRU
short list, per-resolve cost must not grow with the long-list size, and after
sealing the long list must not be read at all.

Paths:

* ``baseline``     membership probe on a plain dict
* ``global_hit``   name in the caller VM's global-object table
* ``short_hit``    name on the MRU short list
* ``long_hit``     first touch of a listed host object (short-list insert)
* ``rename_miss``  unlisted name renamed into the VM namespace
* ``post_seal_miss`` unlisted name after the flag is set
* ``reference_scan`` (opt-in) full linear scan in the reference oracle
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field

from .engine import ConfinementEngine, ReferenceEngine
from .errors import InvalidConfig
from .model import Intent, ProcessRef, Scope, VmId
from .model import PORT as _PORT_CATEGORY
from .model import SHARED_MEMORY as _SECTION_CATEGORY

__all__ = ["BenchConfig", "BenchResult", "run_bench", "collect_counters"]

_VM_PROC = ProcessRef(pid=1, vm=VmId(1))

OPTIMIZED_PATHS = ("global_hit", "short_hit", "long_hit", "rename_miss", "post_seal_miss")


def collect_counters(engine):
    """Detached snapshot of the engine's counters."""
    return engine.counters.copy()


@dataclass(frozen=True)
class BenchConfig:
    long_list_size: int = 1000
    batch_size: int = 200
    batches: int = 5
    short_warm_count: int = 16
    global_pool: int = 8
    include_reference: bool = False

    def check(self):
        if self.long_list_size < 1 or self.batch_size < 1 or self.batches < 1:
            raise InvalidConfig("long_list_size, batch_size, batches must be positive")
        if self.short_warm_count < 1 or self.global_pool < 1:
            raise InvalidConfig("short_warm_count and global_pool must be positive")


@dataclass
class BenchResult:
    config: BenchConfig
    paths: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)
    post_seal_long_list_reads: int = 0
    long_list_structure: dict = field(default_factory=lambda: {
        "exact": "hash set", "patterns": "prefix list", "short": "ordered dict (MRU first)",
    })

    def to_dict(self) -> dict:
        return {
            "config": {
                "long_list_size": self.config.long_list_size,
                "batch_size": self.config.batch_size,
                "batches": self.config.batches,
                "short_warm_count": self.config.short_warm_count,
                "global_pool": self.config.global_pool,
            },
            "paths": self.paths,
            "ratios_vs_baseline": self.ratios,
            "post_seal_long_list_reads": self.post_seal_long_list_reads,
            "long_list_structure": self.long_list_structure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def text(self) -> str:
        lines = [
            f"long list: {self.config.long_list_size} entries "
            f"({self.config.batches} batches x {self.config.batch_size} calls)",
            f"{'path':<16} {'median ns':>10} {'min ns':>10} {'x baseline':>11}",
        ]
        for name, stats in self.paths.items():
            ratio = self.ratios.get(name)
            shown = f"{ratio:.2f}" if ratio is not None else "-"
            lines.append(f"{name:<16} {stats['median_ns']:>10.0f} "
                         f"{stats['min_ns']:>10.0f} {shown:>11}")
        lines.append(f"post-seal long-list reads: {self.post_seal_long_list_reads}")
        return "\n".join(lines) + "\n"


def _long_names(size: int) -> list[str]:
    return [rf"\bench\host-{i:06d}" for i in range(size)]


def _miss_names(size: int) -> list[str]:
    return [rf"\bench\priv-{i:06d}" for i in range(size)]


def _loaded_engine(long_names) -> ConfinementEngine:
    engine = ConfinementEngine()
    engine.load_long_list(long_names)
    return engine


def _time_batch(resolve, names) -> float:
    start = time.perf_counter_ns()
    for name in names:
        resolve(name)
    return (time.perf_counter_ns() - start) / len(names)


def _stats(batch_means) -> dict:
    return {
        "median_ns": statistics.median(batch_means),
        "mean_ns": statistics.fmean(batch_means),
        "min_ns": min(batch_means),
        "batches": len(batch_means),
    }


def run_bench(config: BenchConfig = BenchConfig()) -> BenchResult:
    config.check()
    long_names = _long_names(config.long_list_size)
    batch = min(config.batch_size, config.long_list_size)
    result = BenchResult(config=config)

    def open_resolver(engine):
        def resolve(name):
            engine.resolve(_VM_PROC, name, _PORT_CATEGORY, Intent.OPEN)
        return resolve

    # baseline: dict membership on the same key population
    table = dict.fromkeys(long_names)
    probe = [long_names[i % len(long_names)] for i in range(batch)]
    sink = table.__contains__
    means = [_time_batch(sink, probe) for _ in range(config.batches)]
    result.paths["baseline"] = _stats(means)

    # global_hit: the caller VM's global-object table resolves the name
    engine = _loaded_engine(long_names)
    globals_pool = [rf"\bench\global-{i:04d}" for i in range(config.global_pool)]
    for name in globals_pool:
        engine.resolve(_VM_PROC, name, _SECTION_CATEGORY, Intent.CREATE, Scope.GLOBAL)
    probe = [globals_pool[i % len(globals_pool)] for i in range(batch)]
    means = [_time_batch(open_resolver(engine), probe) for _ in range(config.batches)]
    result.paths["global_hit"] = _stats(means)

    # short_hit: warm a few host objects, then cycle over them
    engine = _loaded_engine(long_names)
    warm = long_names[: min(config.short_warm_count, len(long_names))]
    for name in warm:
        engine.resolve(_VM_PROC, name, _PORT_CATEGORY, Intent.OPEN)
    probe = [warm[i % len(warm)] for i in range(batch)]
    means = [_time_batch(open_resolver(engine), probe) for _ in range(config.batches)]
    result.paths["short_hit"] = _stats(means)

    # long_hit: every call is a first touch, so rebuild the engine per batch
    means = []
    for _ in range(config.batches):
        engine = _loaded_engine(long_names)
        means.append(_time_batch(open_resolver(engine), long_names[:batch]))
    result.paths["long_hit"] = _stats(means)

    # rename_miss: unlisted names before the seal (no state is mutated)
    engine = _loaded_engine(long_names)
    probe = _miss_names(batch)
    means = [_time_batch(open_resolver(engine), probe) for _ in range(config.batches)]
    result.paths["rename_miss"] = _stats(means)

    # post_seal_miss: same probe after the flag; the long list must stay cold
    engine = _loaded_engine(long_names)
    engine.seal_host_objects()
    reads_before = engine.counters.long_list_reads
    means = [_time_batch(open_resolver(engine), probe) for _ in range(config.batches)]
    result.paths["post_seal_miss"] = _stats(means)
    result.post_seal_long_list_reads = engine.counters.long_list_reads - reads_before

    if config.include_reference:
        reference = ReferenceEngine()
        reference.load_long_list(long_names)
        def ref_resolve(name):
            reference.resolve(_VM_PROC, name, _PORT_CATEGORY, Intent.OPEN)
        means = [_time_batch(ref_resolve, probe) for _ in range(config.batches)]
        result.paths["reference_scan"] = _stats(means)

    base = result.paths["baseline"]["median_ns"]
    for name, stats in result.paths.items():
        result.ratios[name] = stats["median_ns"] / base if base else float("nan")
    return result
