"""Walkthrough classes used by the demo, the benchmarks and the tests.

Each entry pairs declaration source with host bodies for its methods.
Bodies receive a :class:`~vobj.compiler.CallContext` followed by the
method's parameter values.
"""
from __future__ import annotations

import math

from .registry import Registry
from .value import as_float, as_int, as_text

PERSON = """\
voo::class Person {
    public {
        string_t name "unknown"
        int_t age 0
        double_t salary 50000.0
    }

    method greet {} {
        return "Hello, I'm [get.name $this]"
    }
}
"""

POINT = """\
voo::class Point {
    public {
        double_t x 0.0
        double_t y 0.0
        string_t name "point"
        int_t -static count 0
    }

    method distance {} {
        set dx [get.x $this]; set dy [get.y $this]
        return [expr {sqrt($dx*$dx + $dy*$dy)}]
    }
}
"""

VOO_POINT = """\
voo::class VooPoint {
    public {
        double_t x 0.0
        double_t y 0.0
        string_t name "point"
        int_t id 0
        bool_t active 1
    }

    method distance {} {
        set dx [get.x $this]
        set dy [get.y $this]
        return [expr {sqrt($dx * $dx + $dy * $dy)}]
    }
}
"""

# Same fields as VooPoint, tagged for dispatch.
VOO_POINT_VIRTUAL = VOO_POINT.replace("voo::class VooPoint {", "voo::class VirtualPoint -virtual {")

# Virtual base carrying the field.
SHAPES_WITH_BASE_FIELD = """\
voo::class Shape -virtual {
    public { double_t radius 1.0 }
    method area -virtual {} { return 0.0 }
}

voo::class Circle -extends Shape {
    method area -override {} {
        return [expr {3.14159 * [get.radius $this] ** 2}]
    }
}
"""

# Field-less virtual base; the child adds the radius.
SHAPES = """\
voo::class Shape -virtual {
    method area -virtual {} { return 0.0 }
}

voo::class Circle -extends Shape {
    public { double_t radius 1.0 }
    method area -override {} {
        return [expr {3.14159 * [get.radius $this] ** 2}]
    }
}
"""

COLORED_CIRCLE = """\
voo::class ColoredCircle -extends Circle {
    public { string_t color "red" }
    method area -override {} {
        # Add 10%
        set base [Circle::base.area $this]
        return [expr {$base * 1.1}]
    }
}
"""

# Every declaration form in one hierarchy.
INVENTORY = """\
voo::class Item -virtual {
    public {
        string_t label "item"
        int_t qty 0
        int_t -static created 0
        method describe -virtual {} { return "[get.label $this] x[get.qty $this]" }
        method total {} { return [get.qty $this] }
    }
}

voo::class Crate -extends Item {
    public {
        double_t weight 1.5
        list_t tags [list a b]
        dict_t meta [dict create k v]
        int_t -static crates 0

        method describe -override {} { return "crate [Item::base.describe $this]" }
        method make {n} -static { return [Crate::new crate $n 2.0 {} {} s3cret] }
        method add {n} -upvar { set.qty this [expr {[get.qty $this] + $n}] }
        method restock {n} -update {qty} { set qty [expr {$qty + $n}] }
        method heavier {{by 1.0} args} { return [expr {[get.weight $this] + $by}] }
    }
    private {
        string_t secret "s3cret"
        method reveal {} { return [my.get.secret $this] }
    }
    constructor {label qty} { return [Crate::new $label $qty 1.5 {} {} s3cret] }
    importMethods {total}
}
"""


def _greet(ctx):
    return f"Hello, I'm {as_text(ctx.call('get.name', ctx.this))}"


def _distance(ctx):
    dx = as_float(ctx.call("get.x", ctx.this))
    dy = as_float(ctx.call("get.y", ctx.this))
    return math.sqrt(dx * dx + dy * dy)


def _shape_area(ctx):
    return 0.0


def _circle_area(ctx):
    return 3.14159 * as_float(ctx.call("get.radius", ctx.this)) ** 2


def _colored_area(ctx):
    base = as_float(ctx.call("::Circle::base.area", ctx.this))
    return base * 1.1


def _item_describe(ctx):
    return f"{as_text(ctx.call('get.label', ctx.this))} x{as_text(ctx.call('get.qty', ctx.this))}"


def _item_total(ctx):
    return ctx.call("get.qty", ctx.this)


def _crate_describe(ctx):
    return "crate " + as_text(ctx.call("::Item::base.describe", ctx.this))


def _crate_make(ctx, n):
    return ctx.call("new", "crate", n, 2.0, "", "", "s3cret")


def _crate_add(ctx, n):
    qty = as_int(ctx.call("get.qty", ctx.this))
    ctx.call("set.qty", "this", qty + as_int(n))


def _crate_restock(ctx, n):
    ctx.set("qty", as_int(ctx.get("qty")) + as_int(n))


def _crate_heavier(ctx, by, *rest):
    return as_float(ctx.call("get.weight", ctx.this)) + as_float(by)


def _crate_reveal(ctx):
    return ctx.call("my.get.secret", ctx.this)


def _crate_constructor(ctx, label, qty):
    return ctx.call("new", label, qty, 1.5, "", "", "s3cret")


BODIES = {
    "Person": {"greet": _greet},
    "Point": {"distance": _distance},
    "VooPoint": {"distance": _distance},
    "VirtualPoint": {"distance": _distance},
    "Shape": {"area": _shape_area},
    "Circle": {"area": _circle_area},
    "ColoredCircle": {"area": _colored_area},
    "Item": {"describe": _item_describe, "total": _item_total},
    "Crate": {"describe": _crate_describe, "make": _crate_make, "add": _crate_add,
              "restock": _crate_restock, "heavier": _crate_heavier, "reveal": _crate_reveal,
              "constructor": _crate_constructor},
}

SOURCES = {
    "person": PERSON,
    "point": POINT,
    "voo-point": VOO_POINT,
    "voo-point-virtual": VOO_POINT_VIRTUAL,
    "shapes": SHAPES + "\n" + COLORED_CIRCLE,
    "shapes-base-field": SHAPES_WITH_BASE_FIELD,
    "inventory": INVENTORY,
}


def bind_bodies(r: Registry, classes) -> None:
    for cls in classes:
        for method, body in BODIES.get(cls.name, {}).items():
            if method in cls.own_methods:
                r.bind_method(cls.name, method, body)


def load(r: Registry, *names: str) -> list:
    """Declare the named corpus sources into ``r`` and bind their bodies."""
    out = []
    for name in names:
        classes = r.declare(SOURCES[name])
        bind_bodies(r, classes)
        out.extend(classes)
    return out
