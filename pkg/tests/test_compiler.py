import pytest

from vobj import corpus
from vobj.compiler import (
    base_call,
    construct_default,
    construct_named,
    construct_positional,
    dispatch_virtual,
    get_field,
    import_methods,
    set_field,
    static_get,
    static_set,
    update_field,
)
from vobj.dsl import parse_class
from vobj.errors import (
    ArityError,
    CommandNotFound,
    ConstructorArgError,
    DispatchError,
    RegistrationError,
    UnboundMethodError,
    ValidationError,
)
from vobj.registry import Registry
from vobj.value import EMPTY, Kind, as_float, list_get, new_list, to_text


@pytest.fixture
def shapes_base(registry):
    corpus.load(registry, "shapes-base-field")
    return registry


def test_layouts(loaded, shapes_base):
    assert loaded.classes["Point"].index_of == {"x": 0, "y": 1, "name": 2}
    shape = shapes_base.classes["Shape"]
    circle = shapes_base.classes["Circle"]
    assert shape.index_of == {"radius": 1}
    assert circle.index_of["radius"] == shape.index_of["radius"]
    assert circle.is_virtual


def test_layout_invariant(loaded):
    for cls in loaded.classes.values():
        d = construct_default(cls)
        assert len(d) == len(cls.field_order) + (1 if cls.is_virtual else 0)
        assert max(cls.index_of.values(), default=len(d) - 1) == len(d) - 1
        if cls.is_virtual:
            assert list_get(d, 0) is loaded.intern("::" + cls.name)


def test_inheritance_prefix(loaded):
    item = construct_default(loaded.classes["Item"])
    crate = construct_default(loaded.classes["Crate"])
    for i in range(1, len(item)):
        assert list_get(crate, i) == list_get(item, i)


def test_construct_positional(loaded, shapes_base):
    point = loaded.classes["Point"]
    assert to_text(construct_positional(point, (1.5, 2.5, "A"))) == "1.5 2.5 A"
    assert to_text(shapes_base.call("Circle::new", 1.0)) == "::Circle 1.0"
    with pytest.raises(ArityError, match="expects 3 field values .* got 1"):
        construct_positional(point, (1.5,))


def test_construct_default(loaded, shapes_base):
    assert to_text(construct_default(loaded.classes["Point"])) == "0.0 0.0 point"
    assert to_text(loaded.call("VooPoint::new()")) == "0.0 0.0 point 0 1"
    assert to_text(shapes_base.call("Shape::new()")) == "::Shape 1.0"


def test_default_object_shared_and_protected(loaded):
    point = loaded.classes["Point"]
    env = loaded.globals
    env.set("p", loaded.call("Point::new()"))
    assert env.get("p") is point.defaults
    loaded.call("Point::set.x", "p", 9.0)
    assert to_text(point.defaults) == "0.0 0.0 point"
    assert to_text(env.get("p")) == "9.0 0.0 point"


def test_construct_named(loaded):
    point = loaded.classes["Point"]
    assert to_text(construct_named(point, ["-x", 1.5, "-y", 2.5])) == "1.5 2.5 point"
    assert to_text(construct_named(point, ["-x", 1, "-x", 2])) == "2 0.0 point"
    with pytest.raises(ConstructorArgError, match="must be a list of '-<field> <value>' pairs"):
        construct_named(point, ["-x"])
    with pytest.raises(ConstructorArgError, match="keys must start with '-', got 'x'"):
        construct_named(point, ["x", 1.5])
    with pytest.raises(ConstructorArgError, match="Unknown field option: bogus"):
        construct_named(point, ["-bogus", 1])


def test_construct_named_private_fallback(loaded):
    c = loaded.call("Crate::new.args", "-secret", "pw", "-qty", 2)
    assert loaded.call("Crate::my.get.secret", c) == "pw"
    assert loaded.call("Crate::get.qty", c) == 2


def test_get_field(loaded, shapes_base):
    point = loaded.classes["Point"]
    assert get_field(point, "x", new_list([1.5, 2.5, "A"])) == 1.5
    circle = shapes_base.classes["Circle"]
    assert get_field(circle, "radius", shapes_base.call("Circle::new", 5.0)) == 5.0
    with pytest.raises(CommandNotFound):
        get_field(point, "z", new_list([1, 2, 3]))
    crate = loaded.classes["Crate"]
    obj = construct_default(crate)
    with pytest.raises(CommandNotFound, match="private"):
        get_field(crate, "secret", obj)
    assert get_field(crate, "secret", obj, private=True) == "s3cret"


def test_set_field_cow(loaded):
    point = loaded.classes["Point"]
    env = loaded.globals
    env.set("p", construct_positional(point, (0, 0, "point")))
    env.set("q", env.get("p"))
    set_field(point, "x", "p", env, 3.14)
    assert to_text(env.get("p")) == "3.14 0 point"
    assert to_text(env.get("q")) == "0 0 point"


def test_update_field(loaded):
    point = loaded.classes["Point"]
    env = loaded.globals
    env.set("p", construct_positional(point, (2, 0, "a")))
    seen = []

    def body(temp):
        seen.append(get_field(point, "x", env.get("p")))
        temp.set(as_float(temp.get()) * 2)

    update_field(point, "x", "p", env, body)
    assert seen[0] is EMPTY
    assert get_field(point, "x", env.get("p")) == 4.0


def test_update_field_error(loaded):
    point = loaded.classes["Point"]
    env = loaded.globals
    env.set("p", construct_positional(point, (2, 0, "a")))

    def body(temp):
        raise KeyError("inner")

    with pytest.raises(KeyError):
        update_field(point, "x", "p", env, body)
    assert to_text(env.get("p")) == "2 0 a"


def test_update_field_sole_holder_no_copy(loaded, ledger):
    point = loaded.classes["Point"]
    env = loaded.globals
    env.set("p", construct_positional(point, (new_list([1, 2]), 0, "a")))
    obj = env.get("p")
    before = ledger.total_allocations
    from vobj.value import list_set
    update_field(point, "x", "p", env, lambda temp: list_set(temp, 0, EMPTY))
    assert env.get("p") is obj
    assert ledger.total_allocations == before


def test_statics(loaded):
    point = loaded.classes["Point"]
    assert static_get(point, "count") == 0
    static_set(point, "count", 5)
    assert loaded.call("Point::class.get.count") == 5
    loaded.call("Point::class.set.count", 6)
    assert static_get(point, "count") == 6
    assert len(point.defaults) == len(point.field_order) == 3
    with pytest.raises(CommandNotFound):
        static_get(point, "nope")


def test_dispatch(loaded):
    shape = loaded.classes["Shape"]
    circle = loaded.call("Circle::new", 5.0)
    assert abs(as_float(dispatch_virtual(shape, "area", circle)) - 78.53975) < 1e-9
    assert dispatch_virtual(shape, "area", loaded.call("Shape::new()")) == 0.0
    cc = loaded.call("ColoredCircle::new", 5.0, "red")
    base = as_float(loaded.call("Circle::base.area", cc))
    assert as_float(dispatch_virtual(shape, "area", cc)) == base * 1.1


def test_dispatch_unregistered_tag(loaded):
    shape = loaded.classes["Shape"]
    forged = new_list([loaded.intern("::Ghost")])
    with pytest.raises(DispatchError, match="Ghost"):
        dispatch_virtual(shape, "area", forged)


def test_dispatch_without_override_uses_base(loaded):
    loaded.declare("class Square -extends Shape { double_t side 1.0 }")
    sq = loaded.call("Square::new", 2.0)
    assert loaded.call("Shape::area", sq) == 0.0


def test_dispatch_unbound_route(registry):
    registry.declare(corpus.SHAPES)
    with pytest.raises(UnboundMethodError):
        registry.call("Shape::area", registry.call("Circle::new", 1.0))


def test_base_call(loaded):
    circle = loaded.classes["Circle"]
    shape = loaded.classes["Shape"]
    obj = loaded.call("Circle::new", 5.0)
    assert abs(as_float(base_call(circle, "area", obj)) - 78.53975) < 1e-9
    assert base_call(shape, "area", obj) == 0.0
    with pytest.raises(DispatchError):
        base_call(loaded.classes["Point"], "distance", loaded.call("Point::new()"))


def test_deep_dispatch_from_every_ancestor(loaded):
    cc = loaded.call("ColoredCircle::new", 2.0, "red")
    expected = 3.14159 * 4 * 1.1
    for name in ("Shape", "Circle", "ColoredCircle"):
        assert abs(as_float(loaded.call(f"{name}::area", cc)) - expected) < 1e-9


def test_import_methods(registry):
    corpus.load(registry, "person")
    registry.declare("class Employee -extends Person { string_t title none\n"
                     "importMethods {greet} }")
    e = registry.call("Employee::new", "Eve", 40, 1.0, "cto")
    assert registry.call("Employee::greet", e) == "Hello, I'm Eve"
    assert registry.call("Person::greet", e) == registry.call("Employee::greet", e)


def test_import_methods_later(registry):
    corpus.load(registry, "person")
    (child,) = registry.declare("class Kid -extends Person { }")
    import_methods(child, ["greet"])
    assert registry.call("Kid::greet", registry.call("Kid::new", "Al", 3, 0.0)) == "Hello, I'm Al"
    with pytest.raises(ValidationError):
        import_methods(child, ["nope"])


def test_import_private_rejected(loaded):
    with pytest.raises(ValidationError, match="private"):
        loaded.declare("class Sub -extends Crate { importMethods {reveal} }")


def test_redeclaration_replaces(registry):
    registry.declare("class R { int_t a 0 }")
    registry.declare("class R { int_t a 0; int_t b 1 }")
    assert to_text(registry.call("R::new()")) == "0 1"
    registry.declare("class R { int_t c 2 }")
    assert not registry.has_command("R::get.a")
    strict = Registry(allow_replace=False)
    strict.declare("class R { int_t a 0 }")
    with pytest.raises(RegistrationError, match="already defined"):
        strict.declare("class R { int_t a 0 }")


def test_virtual_tag_shared(registry, ledger):
    corpus.load(registry, "shapes")
    objs = [registry.call("Circle::new", float(i)) for i in range(1000)]
    assert ledger.by_kind["atom"] == 3  # one per class in the hierarchy
    assert all(list_get(o, 0) is list_get(objs[0], 0) for o in objs)


def test_custom_constructor(loaded):
    c = loaded.call("Crate::constructor", "box", 2)
    assert to_text(c) == "::Crate box 2 1.5 {} {} s3cret"
    assert loaded.classes["Crate"].methods["constructor"].convention == "static"


def test_statics_not_inherited(loaded):
    assert loaded.has_command("Item::class.get.created")
    assert not loaded.has_command("Crate::class.get.created")
    assert loaded.call("Crate::class.get.crates") == 0


def test_parse_then_compile_fresh_registries_are_independent():
    a, b = Registry(), Registry()
    ca = corpus.load(a, "shapes")[1]
    corpus.load(b, "shapes")
    assert a.intern("::Circle") is not b.intern("::Circle")
    assert ca.tag is a.intern("::Circle")
    assert ca.defaults.kind is Kind.LIST


def test_method_param_rules(registry):
    with pytest.raises(ValidationError, match="follows an optional"):
        registry.declare("class Q { method m {{a 1} b} { } }")
    del registry


def test_compile_single_decl(registry):
    from vobj.compiler import compile_class
    cls = compile_class(parse_class(corpus.PERSON), registry)
    assert cls.qualified == "::Person" and cls.slot_count == 3
