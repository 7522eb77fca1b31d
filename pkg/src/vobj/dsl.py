"""Class-declaration language: tokenizer, declaration records and validation.

The accepted shape::

    class Name ?-virtual? ?-extends Parent? {
        public  { type_t ?-static? field default ... method ... }
        private { ... }
        method name ?modifiers? {params} ?modifiers? {body}
        constructor {params} {body}
        importMethods {a b}
    }

``voo::class`` is accepted as a synonym for ``class``.  Method bodies are
kept verbatim and never evaluated here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .value import (
    EMPTY,
    Value,
    format_double,
    new_bool,
    new_dict,
    new_double,
    new_int,
    new_list,
    new_text,
    split_list,
)

FIELD_TYPES = ("double_t", "int_t", "string_t", "bool_t", "list_t", "dict_t", "obj_t")
METHOD_MODIFIERS = ("static", "upvar", "update", "override", "virtual")
CLASS_KEYWORDS = ("class", "voo::class", "::voo::class")
PUBLIC, PRIVATE = "public", "private"


@dataclass(frozen=True)
class Token:
    text: str
    kind: str  # bare | brace | quote | bracket
    line: int

    def source(self) -> str:
        if self.kind == "brace":
            return "{" + self.text + "}"
        if self.kind == "quote":
            return '"' + self.text + '"'
        if self.kind == "bracket":
            return "[" + self.text + "]"
        return self.text


@dataclass
class FieldDecl:
    type_tag: str
    name: str
    default_value: Value
    is_static: bool = False
    visibility: str = PUBLIC
    default_source: str = ""
    line: int = field(default=0, compare=False)


@dataclass
class MethodDecl:
    name: str
    params: tuple[str, ...]
    modifiers: frozenset = frozenset()
    update_fields: tuple[str, ...] = ()
    body_text: str = ""
    visibility: str = PUBLIC
    line: int = field(default=0, compare=False)

    @property
    def is_static(self) -> bool:
        return "static" in self.modifiers

    @property
    def is_virtual(self) -> bool:
        return "virtual" in self.modifiers

    @property
    def is_override(self) -> bool:
        return "override" in self.modifiers

    @property
    def convention(self) -> str:
        """How the receiver is passed: static, update, upvar or value."""
        if "static" in self.modifiers:
            return "static"
        if "update" in self.modifiers:
            return "update"
        if "upvar" in self.modifiers:
            return "upvar"
        return "value"


@dataclass
class ConstructorDecl:
    params: tuple[str, ...]
    body_text: str
    line: int = field(default=0, compare=False)


@dataclass
class ClassDecl:
    name: str
    parent: str | None = None
    is_virtual: bool = False
    fields: list[FieldDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    custom_constructor: ConstructorDecl | None = None
    imports: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def instance_fields(self) -> list[FieldDecl]:
        return [f for f in self.fields if not f.is_static]

    @property
    def static_fields(self) -> list[FieldDecl]:
        return [f for f in self.fields if f.is_static]

    def method(self, name: str) -> MethodDecl | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None


# -- tokenizer --------------------------------------------------------------

def _match_close(text: str, i: int, open_ch: str, close_ch: str, line: int) -> int:
    depth = 1
    j = i + 1
    n = len(text)
    while j < n:
        c = text[j]
        if c == "\\":
            j += 2
            continue
        if c == open_ch:
            depth += 1
        elif c == close_ch:
            depth -= 1
            if depth == 0:
                return j
        j += 1
    raise ParseError(f"missing close-{'brace' if open_ch == '{' else 'bracket'}", line=line)


def tokenize(text: str, line: int = 1) -> list[list[Token]]:
    """Split text into commands (lists of words), tracking line numbers."""
    commands: list[list[Token]] = []
    words: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n" or c == ";":
            if c == "\n":
                line += 1
            if words:
                commands.append(words)
                words = []
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "\\" and i + 1 < n and text[i + 1] == "\n":
            i += 2
            line += 1
            continue
        if c == "#" and not words:
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = line
        if c == "{" or c == "[":
            close = "}" if c == "{" else "]"
            j = _match_close(text, i, c, close, line)
            content = text[i + 1:j]
            line += content.count("\n")
            words.append(Token(content, "brace" if c == "{" else "bracket", start))
            i = j + 1
            if i < n and text[i] not in " \t\r\n;":
                raise ParseError(f"extra characters after close-{'brace' if c == '{' else 'bracket'}",
                                 line=line)
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise ParseError("missing close-quote", line=start)
            content = text[i + 1:j]
            line += content.count("\n")
            words.append(Token(content, "quote", start))
            i = j + 1
            if i < n and text[i] not in " \t\r\n;":
                raise ParseError("extra characters after close-quote", line=line)
        else:
            j = i
            while j < n and text[j] not in " \t\r\n;":
                j += 1
            words.append(Token(text[i:j], "bare", start))
            i = j
    if words:
        commands.append(words)
    return commands


# -- parser -----------------------------------------------------------------

def parse_classes(source: str) -> list[ClassDecl]:
    decls = []
    for words in tokenize(source):
        head = words[0]
        if head.kind != "bare" or head.text not in CLASS_KEYWORDS:
            raise ParseError(f"expected a class declaration, got '{head.text}'", line=head.line)
        decls.append(_parse_class_command(words))
    return decls


def parse_class(source: str) -> ClassDecl:
    decls = parse_classes(source)
    if len(decls) != 1:
        raise ParseError(f"expected exactly one class declaration, found {len(decls)}")
    return decls[0]


def _parse_class_command(words: list[Token]) -> ClassDecl:
    head = words[0]
    if len(words) < 3:
        raise ParseError("class declaration needs a name and a body", line=head.line)
    name = words[1].text.lstrip(":")
    if not name:
        raise ParseError("empty class name", line=words[1].line)
    body = words[-1]
    if body.kind != "brace":
        raise ParseError(f"class '{name}' body must be a braced block", line=body.line)
    decl = ClassDecl(name=name, line=head.line)
    opts = words[2:-1]
    k = 0
    while k < len(opts):
        opt = opts[k]
        if opt.text == "-virtual":
            decl.is_virtual = True
        elif opt.text == "-extends":
            if k + 1 >= len(opts):
                raise ParseError("-extends requires a parent class name", line=opt.line)
            k += 1
            decl.parent = opts[k].text.lstrip(":")
        else:
            raise ParseError(f"unknown class option '{opt.text}'", line=opt.line)
        k += 1
    _parse_block(decl, body, None)
    _check_unique(decl)
    return decl


def _parse_block(decl: ClassDecl, block: Token, visibility: str | None) -> None:
    for words in tokenize(block.text, block.line):
        head = words[0]
        kw = head.text if head.kind == "bare" else None
        if kw in (PUBLIC, PRIVATE):
            if visibility is not None:
                raise ParseError(f"'{kw}' blocks cannot be nested", line=head.line)
            if len(words) != 2 or words[1].kind != "brace":
                raise ParseError(f"'{kw}' expects one braced block", line=head.line)
            _parse_block(decl, words[1], kw)
        elif kw in FIELD_TYPES:
            decl.fields.append(_parse_field(words, visibility or PUBLIC))
        elif kw is not None and kw.endswith("_t"):
            raise ParseError(f"unknown type tag '{kw}'", line=head.line)
        elif kw == "method":
            decl.methods.append(_parse_method(words, visibility or PUBLIC))
        elif kw == "constructor":
            if len(words) != 3:
                raise ParseError("constructor expects a parameter list and a body", line=head.line)
            if decl.custom_constructor is not None:
                raise ParseError("duplicate constructor", line=head.line)
            decl.custom_constructor = ConstructorDecl(
                tuple(split_list(words[1].text)), words[2].text, head.line)
        elif kw == "importMethods":
            if len(words) != 2:
                raise ParseError("importMethods expects one list of method names", line=head.line)
            decl.imports = decl.imports + tuple(split_list(words[1].text))
        else:
            raise ParseError(f"unknown declaration '{head.text}'", line=head.line)


def _parse_field(words: list[Token], visibility: str) -> FieldDecl:
    tag = words[0].text
    rest = words[1:]
    is_static = bool(rest) and rest[0].kind == "bare" and rest[0].text == "-static"
    if is_static:
        rest = rest[1:]
    if not rest:
        raise ParseError(f"{tag} declaration is missing a field name", line=words[0].line)
    name = rest[0].text
    if len(rest) == 1:
        raise ParseError(f"field '{name}' is missing a default value", line=words[0].line)
    if len(rest) > 2:
        raise ParseError(f"too many words in declaration of field '{name}'", line=words[0].line)
    default = rest[1]
    return FieldDecl(tag, name, parse_default(default, tag), is_static, visibility,
                     default.source(), words[0].line)


def parse_default(tok: Token, tag: str) -> Value:
    """Turn a literal default into a cell; no expressions are evaluated."""
    text = tok.text
    if tok.kind == "bracket":
        parts = split_list(text)
        if parts[:1] == ["list"]:
            return new_list([new_text(p) for p in parts[1:]])
        if parts[:2] == ["dict", "create"]:
            rest = parts[2:]
            if len(rest) % 2:
                raise ParseError("dict create needs key/value pairs", line=tok.line)
            return new_dict(zip(rest[::2], rest[1::2]))
        raise ParseError(f"unsupported default expression [{text}]", line=tok.line)
    if tag == "double_t":
        try:
            x = float(text)
        except ValueError:
            return new_text(text) if text else EMPTY
        return new_double(x) if format_double(x) == text else new_text(text)
    if tag == "int_t":
        try:
            n = int(text)
        except ValueError:
            return new_text(text) if text else EMPTY
        return new_int(n) if str(n) == text else new_text(text)
    if tag == "bool_t":
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return new_bool(True)
        if low in ("0", "false", "no", "off"):
            return new_bool(False)
        return new_text(text) if text else EMPTY
    if tag == "list_t":
        return new_list([new_text(p) for p in split_list(text)])
    if tag == "dict_t":
        parts = split_list(text)
        if len(parts) % 2:
            raise ParseError("dict default needs key/value pairs", line=tok.line)
        return new_dict(zip(parts[::2], parts[1::2]))
    return new_text(text) if text else EMPTY


def _parse_method(words: list[Token], visibility: str) -> MethodDecl:
    head = words[0]
    if len(words) < 4:
        raise ParseError("method expects a name, a parameter list and a body", line=head.line)
    name = words[1].text
    body = words[-1]
    middle = words[2:-1]
    modifiers = set()
    update_fields: tuple[str, ...] = ()
    params = None
    k = 0
    while k < len(middle):
        tok = middle[k]
        if tok.kind == "bare" and tok.text.startswith("-"):
            mod = tok.text[1:]
            if mod not in METHOD_MODIFIERS:
                raise ParseError(f"unknown method modifier '{tok.text}' on method '{name}'",
                                 line=tok.line)
            if mod == "update":
                if k + 1 >= len(middle) or not split_list(middle[k + 1].text):
                    raise ParseError(f"-update on method '{name}' requires a non-empty field list",
                                     line=tok.line)
                k += 1
                update_fields = tuple(split_list(middle[k].text))
            modifiers.add(mod)
        elif params is None:
            params = tuple(split_list(tok.text))
        else:
            raise ParseError(f"method '{name}' has more than one parameter list", line=tok.line)
        k += 1
    if params is None:
        raise ParseError(f"method '{name}' is missing its parameter list", line=head.line)
    if "virtual" in modifiers and "static" in modifiers:
        raise ParseError(f"method '{name}': -virtual and -static are exclusive", line=head.line)
    if "virtual" in modifiers and "override" in modifiers:
        raise ParseError(f"method '{name}': -virtual and -override are exclusive", line=head.line)
    if "static" in modifiers and modifiers & {"upvar", "update"}:
        raise ParseError(f"method '{name}': -static takes no object", line=head.line)
    return MethodDecl(name, params, frozenset(modifiers), update_fields, body.text,
                      visibility, head.line)


def _check_unique(decl: ClassDecl) -> None:
    seen = set()
    for f in decl.fields:
        if f.name in seen:
            raise ParseError(f"duplicate field '{f.name}' in class '{decl.name}'", line=f.line)
        seen.add(f.name)
    scoped = set()
    for m in decl.methods:
        key = (m.visibility, m.name)
        if key in scoped:
            raise ParseError(f"duplicate {m.visibility} method '{m.name}' in class '{decl.name}'",
                             line=m.line)
        scoped.add(key)


# -- validation -------------------------------------------------------------

def _ancestors(cls):
    while cls is not None:
        yield cls
        cls = cls.parent


def validate_decl(decl: ClassDecl, registry) -> None:
    """Check a declaration against already-compiled classes in ``registry``."""
    parent = None
    if decl.parent is not None:
        if decl.parent == decl.name:
            raise ValidationError(f"class '{decl.name}' cannot extend itself")
        parent = registry.classes.get(decl.parent)
        if parent is None:
            raise ValidationError(f"parent class '{decl.parent}' of '{decl.name}' is not defined")
        if decl.is_virtual and not parent.is_virtual:
            raise ValidationError(
                f"virtual class '{decl.name}' cannot extend non-virtual class '{parent.name}'")
    virtual_lineage = decl.is_virtual or (parent is not None and parent.is_virtual)

    inherited = set(parent.index_of) | set(parent.statics) if parent else set()
    instance_fields = set(parent.index_of) if parent else set()
    for f in decl.fields:
        if f.name in inherited:
            raise ValidationError(
                f"field '{f.name}' of '{decl.name}' redeclares an inherited field")
        if not f.is_static:
            instance_fields.add(f.name)

    for m in decl.methods:
        if m.is_override:
            if parent is None or not any(m.name in c.methods for c in _ancestors(parent)):
                raise ValidationError(
                    f"method '{m.name}' of '{decl.name}' is marked -override "
                    f"but no ancestor defines it")
        if m.is_virtual and not virtual_lineage:
            raise ValidationError(
                f"virtual method '{m.name}' declared in non-virtual class '{decl.name}'")
        for f in m.update_fields:
            if f not in instance_fields:
                raise ValidationError(
                    f"method '{m.name}' of '{decl.name}' updates unknown field '{f}'")

    own_methods = {m.name for m in decl.methods}
    for name in decl.imports:
        if parent is None:
            raise ValidationError(f"class '{decl.name}' imports '{name}' but has no parent")
        binding = parent.methods.get(name)
        if binding is None:
            raise ValidationError(
                f"cannot import unknown method '{name}' from '{parent.name}' "
                f"(known: {', '.join(sorted(parent.methods)) or 'none'})")
        if binding.decl.visibility == PRIVATE:
            raise ValidationError(f"cannot import private method '{name}' from '{parent.name}'")
        if name in own_methods:
            raise ValidationError(f"class '{decl.name}' both declares and imports '{name}'")
