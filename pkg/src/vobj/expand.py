"""Emit the raw generated form of a declaration as Tcl-style source text.

The output lists exactly the commands :func:`~vobj.compiler.compile_class`
registers, in a stable order (fields, then methods, in declaration order),
so it can be diffed against golden files.
"""
from __future__ import annotations

import textwrap

from .dsl import PRIVATE, ClassDecl, FieldDecl, MethodDecl
from .value import quote_element, split_list, to_text

_DISPATCH = """\
proc {ns}::{name} {{{recv}{params}}} {{
    set __voo_cls [lindex {obj} 0]
    if {{$__voo_cls ne [namespace current] && \\
        [info commands ${{__voo_cls}}::{name}] ne {{}}}} {{
        return [${{__voo_cls}}::{name} {call}]
    }}
    return [{base} {call}]
}}"""

_NEW_ARGS = """\
proc {ns}::new.args {{args}} {{
    variable __defaultObj
    set obj $__defaultObj
    if {{[catch {{dict size $args}}]}} {{
        error "Constructor argument must be a list of '-<field> <value>' pairs"
    }}
    dict for {{key value}} $args {{
        if {{[string index $key 0] ne "-"}} {{
            error "Constructor argument keys must start with '-', got '$key'"
        }}
        set field [string range $key 1 end]
        set setter set.$field
        if {{[info commands $setter] ne ""}} {{
            $setter obj $value
        }} else {{
            set setter my.set.$field
            if {{[info commands $setter] ne ""}} {{
                $setter obj $value
            }} else {{
                error "Unknown field option: $field"
            }}
        }}
    }}
    return $obj
}}"""

_UPDATE = """\
proc {ns}::{p}update.{f} {{thisVar tempVar body}} {{
    variable {f}
    upvar $thisVar this
    upvar $tempVar temp
    try {{
        set temp [lindex $this ${f}]
        lset this ${f} {{}}
        uplevel $body
    }} finally {{
        lset this ${f} $temp
    }}
}}"""


def _default_word(f: FieldDecl) -> str:
    src = f.default_source
    if f.type_tag == "string_t" and src and src[0] not in '"{[':
        return '"' + src + '"'
    if src:
        return src
    return quote_element(to_text(f.default_value))


def _param_list(words) -> str:
    return " ".join(quote_element(w) for w in words)


def expand(decl: ClassDecl, registry=None) -> str:
    """Raw generated form for ``decl``.

    When ``decl`` extends a class, ``registry`` must hold the compiled parent
    so inherited indices and defaults can be shown.
    """
    parent = None
    if decl.parent is not None:
        if registry is None or decl.parent not in registry.classes:
            from .errors import ValidationError
            raise ValidationError(f"parent class '{decl.parent}' of '{decl.name}' is not defined")
        parent = registry.classes[decl.parent]
    ns = decl.name
    virtual = decl.is_virtual or (parent is not None and parent.is_virtual)
    base = 1 if virtual else 0

    # (name, index, default word, inherited-from)
    slots: list[tuple[str, int, str, str | None]] = []
    if parent is not None:
        pdefaults = parent.defaults.payload
        for fname in parent.field_order:
            idx = parent.index_of[fname]
            owner = _declaring_class(parent, fname)
            slots.append((fname, idx, _inherited_default(parent, fname, pdefaults[idx]), owner))
    fields = [f for f in decl.fields if not f.is_static]
    for f in fields:
        slots.append((f.name, base + len(slots), _default_word(f), None))
    visibility = dict(parent.visibility) if parent else {}
    visibility.update({f.name: f.visibility for f in fields})

    out: list[str] = []
    emit = out.append

    emit(f"namespace eval {ns} {{")
    if virtual:
        emit("    # Index 0 is permanently reserved for the class namespace tag.")
    for fname, idx, _, owner in slots:
        line = f"    variable {fname} {idx}"
        if owner is not None:
            line = f"{line:<30};# same index as {owner}::{fname}"
        elif virtual:
            line = f"{line:<30};# field index = {idx}"
        emit(line)
    emit("")
    words = ([f"::{ns}"] if virtual else []) + [w for _, _, w, _ in slots]
    emit(f"    variable __defaultObj [list {' '.join(words)}]")
    emit(f"    variable __fields [list {' '.join(s[0] for s in slots)}]")
    if virtual:
        emit("    variable __voo_is_virtual_class 1")
    for f in decl.static_fields:
        p = "my." if f.visibility == PRIVATE else ""
        emit("")
        emit(f"    variable {f.name} {_default_word(f)}")
        emit(f"    proc {p}class.get.{f.name} {{}} {{ variable {f.name}; return ${f.name} }}")
        emit(f"    proc {p}class.set.{f.name} {{value}} "
             f"{{ variable {f.name}; set {f.name} $value }}")
    emit("}")
    emit("")

    names = [s[0] for s in slots]
    tag = f"::{ns} " if virtual else ""
    emit(f"proc {ns}::new {{{' '.join(names)}}} "
         f"{{ return [list {tag}{' '.join('$' + n for n in names)}] }}".replace("[list ]", "[list]"))
    emit("")
    emit(f"proc {ns}::new() {{}} {{\n    variable __defaultObj\n    return $__defaultObj\n}}")
    emit("")
    emit(_NEW_ARGS.format(ns=ns))
    if decl.custom_constructor is not None:
        c = decl.custom_constructor
        emit("")
        emit(f"proc {ns}::constructor {{{_param_list(c.params)}}} {_body_block(c.body_text)}")

    for fname in names:
        p = "my." if visibility[fname] == PRIVATE else ""
        emit("")
        emit(f"proc {ns}::{p}get.{fname} {{this}} "
             f"{{ variable {fname}; return [lindex $this ${fname}] }}")
    for fname in names:
        p = "my." if visibility[fname] == PRIVATE else ""
        emit("")
        emit(f"proc {ns}::{p}set.{fname} {{thisVar value}} {{\n    variable {fname}\n"
             f"    upvar $thisVar this\n    lset this ${fname} $value\n}}")
    for fname in names:
        p = "my." if visibility[fname] == PRIVATE else ""
        emit("")
        emit(_UPDATE.format(ns=ns, p=p, f=fname))

    inherited_virtual = set(parent.virtual_methods) if parent else set()
    for m in decl.methods:
        is_virtual = m.is_virtual or (m.is_override and m.name in inherited_virtual)
        emit("")
        emit(_method_text(ns, m, is_virtual))
    for name in decl.imports:
        binding = parent.methods[name]
        emit("")
        emit(f"# imported from {binding.owner}")
        emit(_method_text(ns, binding.decl, name in parent.virtual_methods))
    return "\n".join(out) + "\n"


def _inherited_default(cls, fname: str, value) -> str:
    while cls is not None:
        for f in cls.decl.fields:
            if f.name == fname:
                return _default_word(f)
        cls = cls.parent
    return quote_element(to_text(value))


def _declaring_class(cls, fname: str) -> str:
    while cls.parent is not None and fname in cls.parent.index_of:
        cls = cls.parent
    return cls.name


def _body_block(body_text: str, conv: str = "static", update_fields=()) -> str:
    lines = textwrap.dedent(body_text.strip("\n")).strip().splitlines()
    one_line = "\n" not in body_text.strip()
    if conv == "update":
        for f in reversed(update_fields):
            if one_line:
                lines = [f"update.{f} this {f} {{ {'; '.join(lines)} }}"]
            else:
                lines = [f"update.{f} this {f} {{"] + ["    " + ln for ln in lines] + ["}"]
    if conv in ("upvar", "update"):
        lines = ["upvar $thisVar this"] + lines
    if not lines:
        return "{}"
    if one_line:
        return "{ " + "; ".join(lines) + " }"
    return "{\n" + "\n".join("    " + ln if ln.strip() else "" for ln in lines) + "\n}"


def _method_text(ns: str, m: MethodDecl, virtual: bool) -> str:
    p = "my." if m.visibility == PRIVATE else ""
    conv = m.convention
    params = _param_list(m.params)
    recv = {"static": "", "value": "this"}.get(conv, "thisVar")
    sep = " " if recv and params else ""
    body = _body_block(m.body_text, conv, m.update_fields)
    name = m.name
    if not virtual:
        return f"proc {ns}::{p}{name} {{{recv}{sep}{params}}} {body}"
    base = f"{p}base.{name}"
    call_words = ["$this" if conv == "value" else "$thisVar"] + [
        "$" + split_list(w)[0] for w in m.params]
    disp = _DISPATCH.format(ns=ns, name=p + name, recv=recv, params=sep + params,
                            obj="$this", base=base, call=" ".join(call_words))
    if conv != "value":
        disp = disp.replace("{\n    set __voo_cls", "{\n    upvar $thisVar this\n    set __voo_cls", 1)
    return "\n".join([
        f"# {base} holds the original body for direct parent calls",
        f"proc {ns}::{base} {{{recv}{sep}{params}}} {body}",
        "",
        f"# {p}{name} is a dispatcher",
        disp,
    ])
