"""Micro and bulk benchmarks over the three object frameworks.

Frameworks:

``voo``       list objects from a compiled class
``baseline``  handle objects with explicit destroy
``native``    host records behind class-style commands

Timings come from the monotonic nanosecond clock and are reported in
microseconds.  Memory is the allocation ledger's byte count, which is
deterministic for a fixed scenario.
"""
from __future__ import annotations

import csv
import gc
import io
import json
import os
import random
import time
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, fields
from typing import TextIO

from . import corpus
from .baseline import HandleClass, HandleTable, register_handle_class
from .compiler import compile_class
from .dsl import parse_class
from .native import register_native_point
from .registry import Registry
from .value import Ledger

SUITES = ("creation-explicit", "creation-default", "setter", "getter", "class-declaration")
FRAMEWORKS = ("voo", "baseline", "native", "voo-virtual")
DEFAULT_FRAMEWORKS = ("voo", "baseline", "native")
DEFAULT_ITERATIONS = 1000
DEFAULT_BULK = 100_000
SEED_ENV = "VOO_BENCH_SEED"

POINT_FIELDS = ("x", "y", "name", "id", "active")
POINT_DEFAULTS = (0.0, 0.0, "point", 0, True)
EXPLICIT_ARGS = (1.0, 2.0, "test", 1, True)

_CLASS_NAMES = {"voo": "VooPoint", "voo-virtual": "VirtualPoint",
                "baseline": "TclooPoint", "native": "CppVooPoint"}


@dataclass
class BenchResult:
    suite: str
    framework: str
    iterations: int
    avg_us: float
    population: int
    bytes_total: int
    bytes_per_object: float


CSV_COLUMNS = tuple(f.name for f in fields(BenchResult))


def profile(body: Callable[[], object], times: int) -> float:
    """Average microseconds per call of ``body`` over ``times`` runs.

    One extra call runs first and is not measured.
    """
    if times < 1:
        raise ValueError("times must be at least 1")
    body()
    clock = time.perf_counter_ns
    start = clock()
    for _ in range(times):
        body()
    return (clock() - start) / times / 1000.0


def bench_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _check_frameworks(names: Iterable[str]) -> list[str]:
    names = list(names)
    for n in names:
        if n not in FRAMEWORKS:
            raise ValueError(f"unknown framework '{n}' (choose from {', '.join(FRAMEWORKS)})")
    return names


class Runtime:
    """One isolated runtime holding a point class under a framework."""

    def __init__(self, framework: str):
        _check_frameworks([framework])
        self.framework = framework
        self.registry = Registry()
        self.env = self.registry.globals
        self.ns = _CLASS_NAMES[framework]
        if framework == "voo":
            corpus.load(self.registry, "voo-point")
        elif framework == "voo-virtual":
            corpus.load(self.registry, "voo-point-virtual")
        elif framework == "native":
            register_native_point(self.registry, self.ns)
        else:
            self.table = HandleTable()
            register_handle_class(self.registry, self.table,
                                  HandleClass(self.ns, POINT_FIELDS, POINT_DEFAULTS))
        self._by_ref = framework != "baseline"

    def cmd(self, name: str) -> Callable:
        f = self.registry.lookup(f"{self.ns}::{name}")
        env = self.env
        return lambda *args: f(env, *args)

    def new(self, *vals):
        return self.registry.invoke(f"{self.ns}::new", self.env, vals)

    def get(self, obj, field):
        return self.registry.invoke(f"{self.ns}::get.{field}", self.env, (obj,))

    def set(self, var: str, field: str, value):
        """Set through a variable holding the object (or its handle)."""
        target = var if self._by_ref else self.env.get(var)
        self.registry.invoke(f"{self.ns}::set.{field}", self.env, (target, value))


def _declare_body(framework: str) -> Callable[[], object]:
    if framework == "baseline":
        r = Registry()
        table = HandleTable()
        return lambda: register_handle_class(
            r, table, HandleClass("DeclPoint", POINT_FIELDS, POINT_DEFAULTS))
    r = Registry()
    decl = corpus.VOO_POINT.replace("VooPoint", "DeclPoint")
    if framework == "voo-virtual":
        decl = decl.replace("DeclPoint {", "DeclPoint -virtual {")
    return lambda: compile_class(parse_class(decl), r)


def run_suite(suites: Iterable[str] = SUITES, frameworks: Iterable[str] = DEFAULT_FRAMEWORKS,
              iterations: int = DEFAULT_ITERATIONS, bulk: int | None = None) -> list[BenchResult]:
    """Run the micro suites (and optionally the bulk suite) per framework."""
    suites = list(suites)
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite '{s}' (choose from {', '.join(SUITES)})")
    frameworks = _check_frameworks(frameworks)
    results = []
    for fw in frameworks:
        rt = Runtime(fw)
        rt.env.set("obj", rt.new(*EXPLICIT_ARGS))
        for suite in suites:
            if suite == "class-declaration" and fw == "native":
                # native layouts are fixed when the host code is built
                continue
            body = _micro_body(rt, suite)
            led = Ledger()
            with led.active():
                avg = profile(body, iterations)
            results.append(BenchResult(suite, fw, iterations, avg, 0, 0, 0))
        if bulk is not None:
            results.append(bulk_bench(bulk, fw))
    return results


def _micro_body(rt: Runtime, suite: str) -> Callable[[], object]:
    invoke, env, ns = rt.registry.invoke, rt.env, rt.ns
    if suite == "creation-explicit":
        return lambda: invoke(f"{ns}::new", env, EXPLICIT_ARGS)
    if suite == "creation-default":
        return lambda: invoke(f"{ns}::new()", env, ())
    if suite == "setter":
        target = "obj" if rt._by_ref else env.get("obj")
        return lambda: invoke(f"{ns}::set.x", env, (target, 3.5))
    if suite == "getter":
        return lambda: invoke(f"{ns}::get.x", env, (env.get("obj"),))
    return _declare_body(rt.framework)


def point_args(i: int, rng: random.Random) -> tuple:
    return (rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), f"p{i}", i, i % 2 == 0)


def bulk_bench(n: int = DEFAULT_BULK, framework: str = "voo", seed: int | None = None,
               keep: list | None = None) -> BenchResult:
    """Create ``n`` objects in a fresh runtime and ledger; report time and bytes.

    Class setup happens before measurement.  Objects stay alive (in ``keep``
    when given) until the byte count is taken.
    """
    rng = random.Random(bench_seed() if seed is None else seed)
    args = [point_args(i, rng) for i in range(n)]
    led = Ledger()
    with led.active():
        rt = Runtime(framework)
        new = rt.cmd("new")
        objs = [] if keep is None else keep
        append = objs.append
        before = led.snapshot()
        # as timeit does: keep cycle collection out of the timed loop
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            start = time.perf_counter_ns()
            for a in args:
                append(new(*a))
            elapsed = time.perf_counter_ns() - start
        finally:
            if gc_was_enabled:
                gc.enable()
        after = led.snapshot()
    total = after.live_bytes - before.live_bytes
    return BenchResult("bulk", framework, n, elapsed / 1000.0 / n if n else 0.0, n, total,
                       total / n if n else 0)


def emit_report(results: Iterable[BenchResult], fmt: str = "text", sink: TextIO | None = None) -> str:
    """Write ``results`` as ``text``, ``csv`` or ``json``; returns the text too."""
    rows = list(results)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([getattr(r, c) for c in CSV_COLUMNS])
        out = buf.getvalue()
    elif fmt == "json":
        out = json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    elif fmt == "text":
        head = f"{'suite':<18} {'framework':<12} {'iters':>8} {'avg_us':>10} " \
               f"{'objects':>8} {'bytes':>12} {'bytes/obj':>10}"
        lines = [head, "-" * len(head)]
        for r in rows:
            lines.append(f"{r.suite:<18} {r.framework:<12} {r.iterations:>8} {r.avg_us:>10.3f} "
                         f"{r.population:>8} {r.bytes_total:>12} {r.bytes_per_object:>10.1f}")
        out = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown report format '{fmt}' (choose text, csv or json)")
    if sink is not None:
        sink.write(out)
    return out


def load_report(text: str) -> list[BenchResult]:
    return [BenchResult(**d) for d in json.loads(text)]
