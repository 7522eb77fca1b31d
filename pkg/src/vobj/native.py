"""Host-defined record types living inside ordinary values.

A :class:`NativeTypeDescriptor` describes how to copy, print and parse a
host record.  Native values share the same share-count machinery as every
other value: a mutating accessor duplicates the instance only when the value
has more than one holder.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from .env import Environment
from .errors import ArityError, ConversionError, RegistrationError, ValueTypeError
from .registry import Registry
from .value import (
    CELL_BYTES,
    Kind,
    Value,
    as_bool,
    as_float,
    as_int,
    as_text,
    as_value,
    format_double,
    quote_element,
    replace_rep,
    split_list,
    to_text,
)


@dataclass(frozen=True, eq=False)
class NativeTypeDescriptor:
    type_name: str
    duplicate: Callable[[Any], Any] | None
    to_text: Callable[[Any], str] | None = None
    from_generic: Callable[[Value], Any] | None = None
    size_of: Callable[[Any], int] | None = None
    new: Callable[..., Any] | None = None
    # name -> cast applied to incoming values by set.<name>
    fields: tuple = ()

    def nbytes(self, inst) -> int:
        return CELL_BYTES + (self.size_of(inst) if self.size_of else 0)


def register_native_type(r: Registry, d: NativeTypeDescriptor) -> None:
    if d.duplicate is None:
        raise RegistrationError(f'native type "{d.type_name}" has no duplicate hook')
    if d.type_name in r.native_types:
        raise RegistrationError(f'native type "{d.type_name}" is already registered')
    r.native_types[d.type_name] = d


def wrap_native(desc: NativeTypeDescriptor, inst) -> Value:
    return Value(Kind.NATIVE, (desc, inst), desc.nbytes(inst))


def native_new(desc: NativeTypeDescriptor, init=None) -> Value:
    """A fresh native value; ``init=None`` (or empty) uses the type's defaults."""
    if desc.new is None:
        raise ConversionError(f'native type "{desc.type_name}" has no constructor')
    args = list(init or ())
    try:
        inst = desc.new(*args)
    except (TypeError, ValueError) as e:
        raise ConversionError(f'cannot create "{desc.type_name}": {e}') from None
    return wrap_native(desc, inst)


def value_to_native(v: Value, desc: NativeTypeDescriptor):
    """The native instance behind ``v``, converting ``v`` in place if needed.

    On failure ``v`` is left exactly as it was.
    """
    if v.kind is Kind.NATIVE and v.payload[0] is desc:
        return v.payload[1]
    if desc.from_generic is None:
        raise ConversionError(f'Failed to convert to "{desc.type_name}": no conversion hook')
    try:
        text = to_text(v)
        inst = desc.from_generic(v)
    except Exception as e:  # the hook may raise anything; nothing is committed
        raise ConversionError(f'Failed to convert to "{desc.type_name}": {e}') from None
    replace_rep(v, Kind.NATIVE, (desc, inst), desc.nbytes(inst))
    v._text = text
    return inst


def _recharge(v: Value) -> None:
    desc, inst = v.payload
    n = desc.nbytes(inst)
    if v._ledger is not None and n != v._nbytes:
        v._ledger.resize(v._nbytes, n)
    v._nbytes = n
    v._text = None


def _unshared(ref, desc: NativeTypeDescriptor) -> Value:
    v = ref.get()
    value_to_native(v, desc)
    if v.refs > 1:
        inst = desc.duplicate(v.payload[1])
        v = ref.set(wrap_native(desc, inst))
    return v


def native_set(ref, desc: NativeTypeDescriptor, field: str, value: Any) -> Value:
    """Write one field of the native value bound to ``ref`` (copy on write)."""
    cast = dict(desc.fields).get(field)
    if cast is None:
        raise ValueTypeError(f'native type "{desc.type_name}" has no field "{field}"')
    try:
        converted = cast(value)
    except ConversionError:
        raise
    except (TypeError, ValueError) as e:
        raise ConversionError(str(e)) from None
    v = _unshared(ref, desc)
    setattr(v.payload[1], field, converted)
    _recharge(v)
    return v


def native_get(v: Any, desc: NativeTypeDescriptor, field: str) -> Value:
    inst = value_to_native(as_value(v), desc)
    return as_value(getattr(inst, field))


def register_native_class(r: Registry, class_name: str, type_name: str,
                          fields=None, methods=None) -> None:
    """Expose a registered native type under class-style command names.

    The command names match what a compiled class with the same fields gets,
    so call sites differ only in the namespace prefix.
    """
    desc = r.native_types.get(type_name)
    if desc is None:
        raise RegistrationError(f'native type "{type_name}" is not registered')
    names = list(fields) if fields is not None else [f for f, _ in desc.fields]
    n = class_name
    cmds: dict[str, Callable] = {
        f"{n}::new": lambda env, *vals: _positional(desc, names, vals),
        f"{n}::new()": lambda env: native_new(desc),
        f"{n}::new.args": lambda env, *args: _named(desc, env, args),
    }
    for f in names:
        cmds[f"{n}::get.{f}"] = _native_getter(desc, f)
        cmds[f"{n}::set.{f}"] = _native_setter(desc, f)
        cmds[f"{n}::update.{f}"] = _native_updater(desc, f)
    for mname, fn in (methods or {}).items():
        cmds[f"{n}::{mname}"] = _native_method(desc, fn)
    clash = [c for c in cmds if c in r.commands]
    if clash and not r.allow_replace:
        raise RegistrationError(f'command "{clash[0]}" already exists')
    for c, f in cmds.items():
        r.register_command(c, f, replace=True)


def _positional(desc, names, vals) -> Value:
    if len(vals) != len(names):
        raise ArityError(f'wrong # args: "{desc.type_name}" expects {len(names)} field values '
                         f'({" ".join(names)}), got {len(vals)}')
    return native_new(desc, vals)


def _named(desc, env, args) -> Value:
    args = list(args)
    from .errors import ConstructorArgError
    if len(args) % 2:
        raise ConstructorArgError("Constructor argument must be a list of '-<field> <value>' pairs")
    scratch = Environment()
    ref = scratch.ref("obj")
    ref.set(native_new(desc))
    known = dict(desc.fields)
    for key, value in zip(args[::2], args[1::2]):
        key = as_text(key)
        if not key.startswith("-"):
            raise ConstructorArgError(f"Constructor argument keys must start with '-', got '{key}'")
        if key[1:] not in known:
            raise ConstructorArgError(f"Unknown field option: {key[1:]}")
        native_set(ref, desc, key[1:], value)
    return ref.get()


def _native_getter(desc, field):
    return lambda env, this: native_get(this, desc, field)


def _native_setter(desc, field):
    def set_(env, var, value):
        return native_set(env.ref(as_text(var)), desc, field, value)
    return set_


def _native_updater(desc, field):
    def update(env, var, temp, body):
        ref = env.ref(as_text(var))
        tref = env.ref(as_text(temp))
        original = native_get(ref.get(), desc, field)
        tref.set(original)
        try:
            return body(tref)
        finally:
            final = tref.get() if tref.exists() else original
            native_set(ref, desc, field, final)
    return update


def _native_method(desc, fn):
    return lambda env, this, *args: fn(value_to_native(as_value(this), desc), *args)


# -- the benchmark point ----------------------------------------------------------

class NativePoint:
    __slots__ = ("active", "id", "name", "x", "y")

    def __init__(self, x=0.0, y=0.0, name="point", id=0, active=True):
        self.x = as_float(x)
        self.y = as_float(y)
        self.name = as_text(name)
        self.id = as_int(id)
        self.active = as_bool(active)

    def copy(self) -> NativePoint:
        return NativePoint(self.x, self.y, self.name, self.id, self.active)

    def __eq__(self, other):
        return isinstance(other, NativePoint) and all(
            getattr(self, s) == getattr(other, s) for s in self.__slots__)

    def __repr__(self):
        return f"NativePoint({self.x!r}, {self.y!r}, {self.name!r}, {self.id!r}, {self.active!r})"


def _point_text(p: NativePoint) -> str:
    return " ".join([format_double(p.x), format_double(p.y), quote_element(p.name),
                     str(p.id), "1" if p.active else "0"])


def _point_from_generic(v: Value) -> NativePoint:
    words = split_list(to_text(v))
    if len(words) != 5:
        raise ValueError("Expected list of 5 elements: x y name id active")
    return NativePoint(*words)


def _point_size(p: NativePoint) -> int:
    # five inline fields plus the small-string buffer; longer names spill
    return 56 + max(0, len(p.name.encode("utf-8")) - 15)


def native_point_descriptor(type_name: str = "VooPoint") -> NativeTypeDescriptor:
    return NativeTypeDescriptor(
        type_name=type_name,
        duplicate=NativePoint.copy,
        to_text=_point_text,
        from_generic=_point_from_generic,
        size_of=_point_size,
        new=NativePoint,
        fields=(("x", as_float), ("y", as_float), ("name", as_text), ("id", as_int),
                ("active", as_bool)),
    )


def _distance(p: NativePoint) -> float:
    return (p.x * p.x + p.y * p.y) ** 0.5


def register_native_point(r: Registry, class_name: str = "CppVooPoint",
                          type_name: str = "VooPoint") -> NativeTypeDescriptor:
    """Register the native point type and its class-style commands."""
    desc = native_point_descriptor(type_name)
    register_native_type(r, desc)
    register_native_class(r, class_name, type_name, methods={"distance": _distance})
    return desc
