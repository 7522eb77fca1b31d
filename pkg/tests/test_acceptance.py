"""Acceptance criteria AC1 to AC10, one or more tests per criterion.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import gc
import random
import time

import pytest

from vobj import bench, corpus
from vobj.baseline import (
    HandleClass,
    HandleTable,
    handle_create,
    handle_destroy,
    live_count,
)
from vobj.compiler import compile_class
from vobj.dsl import parse_classes
from vobj.errors import ConstructorArgError
from vobj.expand import expand
from vobj.native import native_point_descriptor, native_set, register_native_point
from vobj.registry import Registry
from vobj.value import (
    SLOT_BYTES,
    Kind,
    Ledger,
    as_float,
    as_int,
    as_value,
    dict_set,
    list_get,
    list_length,
    to_text,
)

criterion = pytest.mark.criterion
SEED = bench.bench_seed()


def _rand_scalar(rng):
    pick = rng.randrange(4)
    if pick == 0:
        return rng.randint(-1000, 1000)
    if pick == 1:
        return rng.uniform(-1e6, 1e6)
    if pick == 2:
        return "".join(rng.choice("abc xyz{}") for _ in range(rng.randint(0, 6)))
    return rng.random() < 0.5


def _public_fields(cls):
    return [f for f in cls.field_order if cls.visibility[f] != "private"]


# -- AC1 -------------------------------------------------------------------------------

@criterion(1, "COW soundness: 10,000 randomized alias trials")
def test_ac1_cow_soundness():
    r = Registry()
    corpus.load(r, "person", "point", "voo-point", "shapes", "inventory")
    register_native_point(r, "CppVooPoint", "VooPoint")
    desc = native_point_descriptor()
    classes = [c for c in r.classes.values() if _public_fields(c)]
    env = r.globals
    rng = random.Random(SEED)
    start = time.perf_counter()
    leaks = 0
    for _ in range(10_000):
        kind = rng.randrange(3)
        if kind == 0:
            cls = rng.choice(classes)
            env.set("a", r.call(f"{cls.name}::new()"))
        elif kind == 1:
            env.set("a", r.call("Crate::constructor", "box", rng.randint(0, 9)))
        else:
            env.set("a", r.call("CppVooPoint::new", 1.0, 2.0, "n", 1, True))
        env.set("b", env.get("a"))
        mutated, watched = rng.sample(["a", "b"], 2)
        snapshot = to_text(env.get(watched))
        if kind == 0:
            f = rng.choice(_public_fields(cls))
            r.call(f"{cls.name}::set.{f}", mutated, _rand_scalar(rng))
        elif kind == 1:
            key, val = f"k{rng.randrange(5)}", _rand_scalar(rng)
            r.call("Crate::update.meta", mutated, "m", lambda ref: dict_set(ref, key, val))
        else:
            f = rng.choice(["x", "y", "name", "id", "active"])
            val = {"x": 9.5, "y": -1.0, "name": "zz", "id": 42, "active": False}[f]
            native_set(env.ref(mutated), desc, f, val)
        if to_text(env.get(watched)) != snapshot:
            leaks += 1
    elapsed = time.perf_counter() - start
    assert leaks == 0
    assert elapsed < 10.0


# -- AC2 -------------------------------------------------------------------------------

@criterion(2, "walkthrough classes compile and dispatch")
def test_ac2_walkthrough():
    r = Registry()
    corpus.load(r, "person", "point", "shapes")
    r2 = Registry()
    corpus.load(r2, "shapes-base-field")
    assert {"Person", "Point", "Shape", "Circle", "ColoredCircle"} <= set(r.classes)

    p = r.call("Person::new", "Alice", 30, 75000.0)
    assert to_text(r.call("Person::greet", p)) == "Hello, I'm Alice"

    c = r.call("Circle::new", 5.0)
    assert abs(as_float(r.call("Shape::area", c)) - 78.53975) <= 1e-9
    c2 = r2.call("Circle::new", 5.0)
    assert abs(as_float(r2.call("Shape::area", c2)) - 78.53975) <= 1e-9

    cc = r.call("ColoredCircle::new", 5.0, "blue")
    base = as_float(r.call("Circle::base.area", cc))
    assert as_float(r.call("Shape::area", cc)) == base * 1.1
    assert as_float(r.call("Circle::area", cc)) == base * 1.1


# -- AC3 -------------------------------------------------------------------------------

@criterion(3, "named constructor contract")
def test_ac3_named_constructor(loaded):
    with pytest.raises(ConstructorArgError, match="must be a list of '-<field> <value>' pairs"):
        loaded.call("Point::new.args", "-x")
    with pytest.raises(ConstructorArgError, match="must start with '-', got 'x'"):
        loaded.call("Point::new.args", "x", 1.0)
    with pytest.raises(ConstructorArgError, match="Unknown field option: z"):
        loaded.call("Point::new.args", "-z", 1.0)

    p = loaded.call("Point::new.args", "-x", 1.5, "-y", 2.5)
    assert to_text(loaded.call("Point::get.name", p)) == "point"
    assert to_text(p) == "1.5 2.5 point"

    # private fields are reachable through the my.set fallback
    c = loaded.call("Crate::new.args", "-secret", "hidden", "-qty", 4)
    assert to_text(loaded.call("Crate::my.reveal", c)) == "hidden"
    assert to_text(loaded.call("Crate::get.label", c)) == "item"


# -- AC4 -------------------------------------------------------------------------------

class Injected(Exception):
    pass


@criterion(4, "updater exception safety over 1,000 injected errors")
def test_ac4_updater_exception_safety(loaded):
    rng = random.Random(SEED + 4)
    env = loaded.globals
    classes = [c for c in loaded.classes.values() if _public_fields(c)]
    for trial in range(1000):
        cls = rng.choice(classes)
        env.set("o", loaded.call(f"{cls.name}::new()"))
        before = [to_text(x) for x in env.get("o").payload]
        f = rng.choice(_public_fields(cls))
        idx = cls.index_of[f]
        point = rng.randrange(3)
        newval = _rand_scalar(rng)

        def body(ref):
            if point == 0:
                raise Injected(trial)
            ref.set(newval)
            if point == 1:
                raise Injected(trial)
            ref.set(ref.get())
            raise Injected(trial)

        with pytest.raises(Injected):
            loaded.call(f"{cls.name}::update.{f}", "o", "t", body)
        obj = env.get("o")
        assert list_length(obj) == len(before)
        expected = before[idx] if point == 0 else to_text(env.get("t"))
        assert to_text(list_get(obj, idx)) == expected
        assert [to_text(x) for i, x in enumerate(obj.payload) if i != idx] == \
            [t for i, t in enumerate(before) if i != idx]


@criterion(4, "updater exception safety over 1,000 injected errors")
def test_ac4_update_method_errors(loaded):
    env = loaded.globals
    env.set("c", loaded.call("Crate::constructor", "box", 3))

    def boom(ctx, n):
        ctx.set("qty", 3 + as_int(n))
        raise Injected()

    loaded.bind_method("Crate", "restock", boom)
    with pytest.raises(Injected):
        loaded.call("Crate::restock", "c", 2)
    assert to_text(env.get("c")) == "::Crate box 5 1.5 {} {} s3cret"


# -- AC5 -------------------------------------------------------------------------------

def _atoms_and_bytes(framework, n):
    led = Ledger()
    rng = random.Random(SEED)
    args = [bench.point_args(i, rng) for i in range(n)]
    with led.active():
        rt = bench.Runtime(framework)
        new = rt.cmd("new")
        before = led.live_bytes
        objs = [new(*a) for a in args]
        total = led.live_bytes - before
    atoms = led.by_kind[Kind.ATOM.value]
    del objs
    return atoms, total / n


@criterion(5, "virtual tag economy at 100,000 objects")
def test_ac5_virtual_tag_economy():
    start = time.perf_counter()
    atoms_plain, bpo_plain = _atoms_and_bytes("voo", 100_000)
    atoms_virtual, bpo_virtual = _atoms_and_bytes("voo-virtual", 100_000)
    elapsed = time.perf_counter() - start
    assert atoms_virtual - atoms_plain == 1
    assert 0 <= bpo_virtual - bpo_plain <= SLOT_BYTES
    assert elapsed < 30.0


# -- AC6 -------------------------------------------------------------------------------

@criterion(6, "directional performance at N=10,000")
def test_ac6_directional_performance():
    voo = bench.bulk_bench(10_000, "voo")
    base = bench.bulk_bench(10_000, "baseline")
    assert voo.avg_us < base.avg_us
    assert voo.bytes_per_object <= 0.5 * base.bytes_per_object


# -- AC7 -------------------------------------------------------------------------------

POINT = HandleClass("Point", ("x", "y", "name"), (0.0, 0.0, "point"))


@criterion(7, "leak detection")
def test_ac7_baseline_leaks():
    t = HandleTable()
    for i in range(1000):
        handle_create(t, POINT, (float(i), 0.0, "p"))
    assert live_count(t) == 1000

    t = HandleTable()
    for i in range(1000):
        h = handle_create(t, POINT, (float(i), 0.0, "p"))
        handle_destroy(t, h)
    assert live_count(t) == 0


@criterion(7, "leak detection")
def test_ac7_value_objects_need_no_action():
    led = Ledger()
    with led.active():
        r = Registry()
        corpus.load(r, "point")
        gc.collect()
        before = led.snapshot()
        objs = [r.call("Point::new", float(i), 0.0, f"p{i}") for i in range(1000)]
        assert led.live_bytes > before.live_bytes
        del objs
        gc.collect()
        assert led.snapshot().live_bytes == before.live_bytes
        assert led.snapshot().live_allocations == before.live_allocations


# -- AC8 -------------------------------------------------------------------------------

@criterion(8, "accessor oracle equivalence")
def test_ac8_oracle_equivalence(loaded):
    rng = random.Random(SEED + 8)
    env = loaded.globals
    checked = 0
    for cls in loaded.classes.values():
        if not cls.field_order:
            continue
        env.set("o", loaded.call(f"{cls.name}::new()"))
        oracle = list(env.get("o").payload)
        for _ in range(1000):
            f = rng.choice(cls.field_order)
            idx = cls.index_of[f]
            p = "my." if cls.visibility[f] == "private" else ""
            op = rng.randrange(3)
            if op == 0:
                got = loaded.call(f"{cls.name}::{p}get.{f}", env.get("o"))
                assert got is oracle[idx]
            elif op == 1:
                v = _rand_scalar(rng)
                loaded.call(f"{cls.name}::{p}set.{f}", "o", v)
                oracle[idx] = list_get(env.get("o"), idx)
                assert to_text(oracle[idx]) == to_text(as_value(v))
            else:
                v = _rand_scalar(rng)
                loaded.call(f"{cls.name}::{p}update.{f}", "o", "t", lambda ref: ref.set(v))
                oracle[idx] = list_get(env.get("o"), idx)
                assert to_text(oracle[idx]) == to_text(as_value(v))
            obj = env.get("o")
            assert list_length(obj) == len(oracle)
            assert all(a is b for a, b in zip(obj.payload, oracle))
            checked += 1
    assert checked >= 1000 * 5


# -- AC9 -------------------------------------------------------------------------------

@criterion(9, "expand golden files")
@pytest.mark.parametrize("name, source, landmarks", [
    ("point", corpus.POINT, ("variable x 0", "class.get.count")),
    ("shape", corpus.SHAPES_WITH_BASE_FIELD, ("Index 0 is permanently reserved",)),
])
def test_ac9_expand_goldens(name, source, landmarks, request):
    r = Registry()
    chunks = []
    for decl in parse_classes(source):
        chunks.append(expand(decl, r))
        compile_class(decl, r)
    text = "\n".join(chunks)
    golden = (request.path.parent / "golden" / f"{name}.expand.txt").read_text()
    assert text == golden
    for mark in landmarks:
        assert mark in golden


# -- AC10 ------------------------------------------------------------------------------

def _scenario(r, ns):
    env = r.globals
    out = []
    env.set("p", r.call(f"{ns}::new", 1.0, 2.0, "test", 1, True))
    out.append(to_text(env.get("p")))
    out.append([to_text(r.call(f"{ns}::get.{f}", env.get("p")))
                for f in ("x", "y", "name", "id", "active")])
    env.set("q", env.get("p"))
    r.call(f"{ns}::set.x", "q", 3.0)
    r.call(f"{ns}::set.name", "q", "moved")
    out.append((to_text(env.get("p")), to_text(env.get("q"))))
    out.append(to_text(r.call(f"{ns}::new()")))
    out.append(as_float(r.call(f"{ns}::distance", r.call(f"{ns}::new", 3.0, 4.0, "d", 0, 0))))
    return out


@criterion(10, "native bridge parity")
def test_ac10_native_parity():
    r = Registry()
    corpus.load(r, "voo-point")
    register_native_point(r, "CppVooPoint", "VooPoint")
    assert _scenario(r, "VooPoint") == _scenario(r, "CppVooPoint")
    script = bench.bulk_bench(10_000, "voo")
    native = bench.bulk_bench(10_000, "native")
    assert script.population == native.population == 10_000
    assert native.bytes_per_object <= script.bytes_per_object
