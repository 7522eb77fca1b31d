"""Turn validated declarations into compiled classes and their commands.

A compiled class owns a field-name to slot-index map, a shared default
object, static storage and method bindings.  Objects are plain list values:
``[tag?, field0, field1, ...]``, where the tag slot exists only for virtual
classes and holds the interned ``::ClassName`` atom.

Generated command names, relative to the class namespace::

    new  new()  new.args  constructor
    get.f  set.f  update.f            (my.get.f ... for private fields)
    class.get.s  class.set.s          (my.class.get.s ... for private statics)
    m                                 (my.m for private methods)
    base.m  m                         (virtual methods: body + dispatcher)
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from .dsl import PRIVATE, ClassDecl, MethodDecl, validate_decl
from .env import Environment, VariableRef
from .errors import (
    ArityError,
    CommandNotFound,
    ConstructorArgError,
    DispatchError,
    UnboundMethodError,
    ValidationError,
)
from .registry import Registry, qualify
from .value import (
    EMPTY,
    Value,
    as_value,
    list_get,
    list_set,
    new_list,
    split_list,
    to_text,
)


def _name(x: Any) -> str:
    return x if isinstance(x, str) else to_text(x)


@dataclass(eq=False)
class MethodBinding:
    """A declared method plus its (optional) host body."""

    decl: MethodDecl
    owner: str
    body: Callable | None = None
    required: int = 0
    optional: tuple = ()
    variadic: bool = False
    param_names: tuple = ()

    def __post_init__(self):
        names = []
        required = 0
        optional = []
        params = list(self.decl.params)
        if params and params[-1] == "args":
            self.variadic = True
            params = params[:-1]
        for spec in params:
            parts = split_list(spec)
            if len(parts) == 1:
                if optional:
                    raise ValidationError(
                        f"method '{self.decl.name}': required parameter '{parts[0]}' "
                        f"follows an optional one")
                required += 1
            elif len(parts) == 2:
                optional.append(parts[1])
            else:
                raise ValidationError(f"method '{self.decl.name}': bad parameter '{spec}'")
            names.append(parts[0])
        self.required = required
        self.optional = tuple(optional)
        self.param_names = tuple(names)

    @property
    def convention(self) -> str:
        return self.decl.convention

    def usage(self) -> str:
        words = [] if self.convention == "static" else (
            ["this"] if self.convention == "value" else ["thisVar"])
        words += list(self.param_names[:self.required])
        words += [f"?{n}?" for n in self.param_names[self.required:]]
        if self.variadic:
            words.append("?arg ...?")
        return " ".join(words)


class CallContext:
    """What a method body sees: its frame and name resolution in its class."""

    __slots__ = ("cls", "env")

    def __init__(self, cls: CompiledClass, env: Environment):
        self.cls = cls
        self.env = env

    @property
    def registry(self) -> Registry:
        return self.cls.registry

    @property
    def this(self) -> Value:
        return self.env.get("this")

    def get(self, name: str) -> Value:
        return self.env.get(name)

    def set(self, name: str, value: Any) -> Value:
        return self.env.set(name, value)

    def ref(self, name: str) -> VariableRef:
        return self.env.ref(name)

    def resolve(self, cmd: str) -> str:
        if cmd.startswith("::"):
            return cmd[2:]
        local = f"{self.cls.name}::{cmd}"
        if local in self.cls.registry.commands:
            return local
        return cmd

    def call(self, cmd: str, *args: Any) -> Value:
        return self.cls.registry.invoke(self.resolve(cmd), self.env, args)


class CompiledClass:
    def __init__(self, decl: ClassDecl, registry: Registry, parent: CompiledClass | None):
        self.name = decl.name
        self.decl = decl
        self.registry = registry
        self.parent = parent
        self.is_virtual = decl.is_virtual or (parent is not None and parent.is_virtual)
        self.index_of: dict[str, int] = dict(parent.index_of) if parent else {}
        self.field_order: list[str] = list(parent.field_order) if parent else []
        self.visibility: dict[str, str] = dict(parent.visibility) if parent else {}
        self.field_types: dict[str, str] = dict(parent.field_types) if parent else {}
        self.statics: dict[str, Value] = {}
        self.static_visibility: dict[str, str] = {}
        self.methods: dict[str, MethodBinding] = {}
        self.own_methods: set[str] = set()
        self.virtual_methods: set[str] = set(parent.virtual_methods) if parent else set()
        self.commands: list[str] = []
        self.tag: Value | None = registry.intern(self.qualified) if self.is_virtual else None

        base = 1 if self.is_virtual else 0
        items: list[Value] = [self.tag] if self.is_virtual else []
        if parent is not None:
            items.extend(parent.defaults.payload[base:])
        for f in decl.fields:
            if f.is_static:
                f.default_value.refs += 1
                self.statics[f.name] = f.default_value
                self.static_visibility[f.name] = f.visibility
                continue
            self.index_of[f.name] = base + len(self.field_order)
            self.field_order.append(f.name)
            self.visibility[f.name] = f.visibility
            self.field_types[f.name] = f.type_tag
            items.append(f.default_value)
        self.defaults = new_list(items)
        self.defaults.refs += 1

        for m in decl.methods:
            self.methods[m.name] = MethodBinding(m, self.name)
            self.own_methods.add(m.name)
            if m.is_virtual or (m.is_override and m.name in self.virtual_methods):
                self.virtual_methods.add(m.name)
        if decl.custom_constructor is not None:
            ctor = decl.custom_constructor
            self.methods["constructor"] = MethodBinding(
                MethodDecl("constructor", ctor.params, frozenset({"static"}), (),
                           ctor.body_text, line=ctor.line), self.name)
            self.own_methods.add("constructor")

    @property
    def qualified(self) -> str:
        return "::" + self.name

    @property
    def slot_count(self) -> int:
        return len(self.field_order) + (1 if self.is_virtual else 0)

    def is_method_virtual(self, name: str) -> bool:
        return name in self.virtual_methods and name in self.methods

    def release(self) -> None:
        """Drop the class's hold on its defaults and statics (on replacement)."""
        if self.defaults is not None:
            self.defaults.refs -= 1
            self.defaults = None
        for v in self.statics.values():
            v.refs -= 1
        self.statics = {}

    def __repr__(self):
        kind = "virtual " if self.is_virtual else ""
        return f"<{kind}class {self.name} fields={self.field_order}>"


# -- compile ----------------------------------------------------------------

def compile_class(decl: ClassDecl, registry: Registry) -> CompiledClass:
    validate_decl(decl, registry)
    parent = registry.classes[decl.parent] if decl.parent else None
    cls = CompiledClass(decl, registry, parent)
    commands = _class_commands(cls)
    for name in decl.imports:
        commands.update(_import_commands(cls, name))
    registry._install(cls, commands)
    return cls


def _class_commands(cls: CompiledClass) -> dict[str, Callable]:
    n = cls.name
    cmds: dict[str, Callable] = {
        f"{n}::new": lambda env, *vals: construct_positional(cls, vals),
        f"{n}::new()": lambda env: construct_default(cls),
        f"{n}::new.args": lambda env, *args: construct_named(cls, args),
    }
    for f in cls.field_order:
        p = "my." if cls.visibility[f] == PRIVATE else ""
        idx = cls.index_of[f]
        cmds[f"{n}::{p}get.{f}"] = _getter(idx)
        cmds[f"{n}::{p}set.{f}"] = _setter(idx)
        cmds[f"{n}::{p}update.{f}"] = _updater(idx)
    for s in cls.statics:
        p = "my." if cls.static_visibility[s] == PRIVATE else ""
        cmds[f"{n}::{p}class.get.{s}"] = _static_getter(cls, s)
        cmds[f"{n}::{p}class.set.{s}"] = _static_setter(cls, s)
    for m in cls.decl.methods:
        cmds.update(_method_commands(cls, cls.methods[m.name], m.name in cls.virtual_methods))
    if "constructor" in cls.own_methods:
        binding = cls.methods["constructor"]
        cmds[f"{n}::constructor"] = lambda env, *args: call_method(cls, binding, env, args)
    return cmds


def _getter(idx: int):
    def get(env, this):
        return list_get(as_value(this), idx)
    return get


def _setter(idx: int):
    def set_(env, var, value):
        return list_set(env.ref(_name(var)), idx, value)
    return set_


def _updater(idx: int):
    def update(env, var, temp, body):
        return _detached_update(env.ref(_name(var)), idx, env.ref(_name(temp)), body)
    return update


def _static_getter(cls, name):
    return lambda env: static_get(cls, name)


def _static_setter(cls, name):
    def set_(env, value):
        static_set(cls, name, value)
        return cls.statics[name]
    return set_


def _method_commands(cls: CompiledClass, binding: MethodBinding, virtual: bool) -> dict:
    p = "my." if binding.decl.visibility == PRIVATE else ""
    name = binding.decl.name
    run = lambda env, *args: call_method(cls, binding, env, args)
    if not virtual:
        return {f"{cls.name}::{p}{name}": run}
    return {
        f"{cls.name}::{p}base.{name}": run,
        f"{cls.name}::{p}{name}": _dispatcher(cls, p + name, p + "base." + name,
                                              binding.convention),
    }


def _dispatcher(cls: CompiledClass, full_name: str, base_name: str, convention: str):
    registry = cls.registry
    own_tag = cls.qualified
    base_cmd = f"{cls.name}::{base_name}"

    def dispatch(env, *args):
        if not args:
            raise ArityError(f'wrong # args: should be "{cls.name}::{full_name} this ..."')
        if convention == "value":
            obj = as_value(args[0])
        else:
            obj = env.get(_name(args[0]))
        tag = to_text(list_get(obj, 0))
        if tag != own_tag:
            target_cls = qualify(tag)
            if target_cls not in registry.classes:
                raise DispatchError(
                    f'cannot dispatch "{full_name}": object tag "{tag}" names no registered class')
            target = registry.commands.get(f"{target_cls}::{full_name}")
            if target is not None:
                return target(env, *args)
        return registry.lookup(base_cmd)(env, *args)

    return dispatch


# -- methods ----------------------------------------------------------------

def call_method(cls: CompiledClass, binding: MethodBinding, env: Environment, args) -> Value:
    """Run a bound method body under its declared calling convention."""
    decl = binding.decl
    body = binding.body
    if body is None:
        raise UnboundMethodError(f'method "{binding.owner}::{decl.name}" has no bound body')
    conv = decl.convention
    if conv == "static":
        params = args
    else:
        if not args:
            raise ArityError(f'wrong # args: should be "{cls.name}::{decl.name} {binding.usage()}"')
        params = args[1:]
    nparams = len(params)
    if nparams < binding.required or (
            not binding.variadic and nparams > binding.required + len(binding.optional)):
        raise ArityError(f'wrong # args: should be "{cls.name}::{decl.name} {binding.usage()}"')

    if conv == "value":
        this = as_value(args[0])
    elif conv != "static":
        this_ref = env.ref(_name(args[0]))

    values = [as_value(a) for a in params]
    fixed = len(binding.param_names)
    if nparams < fixed:
        values.extend(as_value(d) for d in binding.optional[nparams - binding.required:])

    env.push()
    try:
        if conv == "value":
            env.set("this", this)
        elif conv != "static":
            env.link("this", this_ref)
        for pname, v in zip(binding.param_names, values):
            env.set(pname, v)
        if binding.variadic:
            env.set("args", new_list(values[fixed:]))
        ctx = CallContext(cls, env)
        if conv == "update":
            result = _run_with_detached(cls, env, decl.update_fields, lambda: body(ctx, *values))
        else:
            result = body(ctx, *values)
    finally:
        env.pop()
    return as_value(result)


def _run_with_detached(cls, env, fields, run):
    if not fields:
        return run()
    f = fields[0]
    return _detached_update(env.ref("this"), cls.index_of[f], env.ref(f),
                            lambda _ref: _run_with_detached(cls, env, fields[1:], run))


def _detached_update(this_ref: VariableRef, idx: int, temp_ref: VariableRef, body):
    original = list_get(this_ref.get(), idx)
    temp_ref.set(original)
    list_set(this_ref, idx, EMPTY)
    try:
        return body(temp_ref)
    finally:
        final = temp_ref.get() if temp_ref.exists() else original
        list_set(this_ref, idx, final)


# -- object operations --------------------------------------------------------

def construct_positional(cls: CompiledClass, vals) -> Value:
    n = len(cls.field_order)
    if len(vals) != n:
        raise ArityError(f'wrong # args: "{cls.name}::new" expects {n} field values '
                         f'({" ".join(cls.field_order)}), got {len(vals)}')
    if cls.tag is not None:
        return new_list([cls.tag, *vals])
    return new_list(vals)


def construct_default(cls: CompiledClass) -> Value:
    return cls.defaults


def construct_named(cls: CompiledClass, args) -> Value:
    """Default object with ``-field value`` pairs applied left to right."""
    args = list(args)
    if len(args) % 2:
        raise ConstructorArgError("Constructor argument must be a list of '-<field> <value>' pairs")
    env = Environment()
    env.set("obj", cls.defaults)
    commands = cls.registry.commands
    for key, value in zip(args[::2], args[1::2]):
        key = _name(key)
        if not key.startswith("-"):
            raise ConstructorArgError(f"Constructor argument keys must start with '-', got '{key}'")
        fname = key[1:]
        setter = commands.get(f"{cls.name}::set.{fname}")
        if setter is None:
            setter = commands.get(f"{cls.name}::my.set.{fname}")
        if setter is None:
            raise ConstructorArgError(f"Unknown field option: {fname}")
        setter(env, "obj", value)
    return env.get("obj")


def _field_index(cls: CompiledClass, field: str, private: bool) -> int:
    idx = cls.index_of.get(field)
    if idx is None:
        raise CommandNotFound(f'class "{cls.name}" has no field "{field}"')
    if cls.visibility[field] == PRIVATE and not private:
        raise CommandNotFound(f'field "{field}" of "{cls.name}" is private (use my.get.{field})')
    return idx


def get_field(cls: CompiledClass, field: str, obj: Any, *, private: bool = False) -> Value:
    return list_get(as_value(obj), _field_index(cls, field, private))


def set_field(cls: CompiledClass, field: str, var: str, env: Environment, value: Any,
              *, private: bool = False) -> Value:
    return list_set(env.ref(var), _field_index(cls, field, private), value)


def update_field(cls: CompiledClass, field: str, var: str, env: Environment,
                 body: Callable[[VariableRef], Any], *, temp: str = "temp",
                 private: bool = False):
    """Detach ``field`` into variable ``temp`` while ``body`` runs, then reattach.

    The slot holds the empty value during ``body``.  Reattachment happens on
    every exit path; ``body``'s exception propagates afterwards.
    """
    idx = _field_index(cls, field, private)
    return _detached_update(env.ref(var), idx, env.ref(temp), body)


def static_get(cls: CompiledClass, name: str) -> Value:
    try:
        return cls.statics[name]
    except KeyError:
        raise CommandNotFound(f'class "{cls.name}" has no static field "{name}"') from None


def static_set(cls: CompiledClass, name: str, value: Any) -> None:
    old = static_get(cls, name)
    value = as_value(value)
    value.refs += 1
    cls.statics[name] = value
    old.refs -= 1


def dispatch_virtual(cls: CompiledClass, method: str, obj: Any, args=(),
                     env: Environment | None = None) -> Value:
    if not cls.is_method_virtual(method):
        raise DispatchError(f'"{method}" is not a virtual method of "{cls.name}"')
    binding = cls.methods[method]
    p = "my." if binding.decl.visibility == PRIVATE else ""
    env = env if env is not None else cls.registry.globals
    return cls.registry.invoke(f"{cls.name}::{p}{method}", env, (obj, *args))


def base_call(cls: CompiledClass, method: str, obj: Any, args=(),
              env: Environment | None = None) -> Value:
    if not cls.is_method_virtual(method):
        raise DispatchError(f'"{cls.name}::base.{method}" does not exist: '
                            f'"{method}" is not a virtual method of "{cls.name}"')
    binding = cls.methods[method]
    env = env if env is not None else cls.registry.globals
    return call_method(cls, binding, env, (obj, *args))


def _import_commands(cls: CompiledClass, name: str) -> dict:
    parent = cls.parent
    binding = parent.methods.get(name) if parent else None
    if binding is None:
        raise ValidationError(f"cannot import unknown method '{name}'")
    if binding.decl.visibility == PRIVATE:
        raise ValidationError(f"cannot import private method '{name}' from '{parent.name}'")
    cls.methods[name] = binding
    virtual = name in parent.virtual_methods
    if virtual:
        cls.virtual_methods.add(name)
    return _method_commands(cls, binding, virtual)


def import_methods(cls: CompiledClass, names) -> None:
    """Make parent methods invocable under the child's namespace."""
    if cls.parent is None:
        raise ValidationError(f"class '{cls.name}' has no parent to import from")
    names = list(names)
    for name in names:
        binding = cls.parent.methods.get(name)
        if binding is None or binding.decl.visibility == PRIVATE:
            _import_commands(cls, name)  # raises with the specific reason
    commands = {}
    for name in names:
        commands.update(_import_commands(cls, name))
    for cmd, f in commands.items():
        cls.registry.register_command(cmd, f, replace=True)
    cls.commands.extend(c for c in commands if c not in cls.commands)
