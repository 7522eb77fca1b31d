"""Shareable copy-on-write values with a canonical text form.

Every datum the object system touches is a :class:`Value` cell.  A cell has a
typed internal form (``payload``), a lazily built canonical text form, and an
explicit share count (``refs``) that counts *runtime holders*: variable
bindings, list and dict slots, class storage and the intern table.  Python
locals that happen to reference a cell are borrowers and are not counted, the
same way a C caller of a reference-counted runtime must retain what it keeps.

Mutation only ever happens through a variable (see :func:`list_set`); when the
cell bound to that variable has more than one holder, its spine is copied
first, so no other holder can observe the write.

Byte accounting
---------------
Allocation and release of cells are reported to the active :class:`Ledger`.
Sizes come from the per-kind constants below, modelled on a 64-bit
dual-representation object cell, and never from process RSS:

* every cell: ``CELL_BYTES``
* text and atom cells: ``CELL_BYTES + utf8 length + 1``
* list cells: ``CELL_BYTES + LIST_HEADER_BYTES + SLOT_BYTES * length``
* dict cells: ``CELL_BYTES + DICT_HEADER_BYTES`` plus, per entry,
  ``DICT_ENTRY_BYTES + utf8 key length + 1``
* native cells: ``CELL_BYTES`` plus whatever the type's ``size_of`` hook reports

Children are separate cells and are charged separately, so a shared child is
paid for once.  Cached text forms are not charged.
"""
from __future__ import annotations

import enum
import math
import re
from collections import Counter
from collections.abc import Iterable
from contextlib import contextmanager
from typing import Any, NamedTuple

from .errors import (
    ConversionError,
    ParseError,
    TextCastError,
    ValueRangeError,
    ValueTypeError,
)

CELL_BYTES = 48
LIST_HEADER_BYTES = 24
SLOT_BYTES = 8
DICT_HEADER_BYTES = 48
DICT_ENTRY_BYTES = 40
EMPTY_LIST_BYTES = CELL_BYTES + LIST_HEADER_BYTES


class Kind(enum.Enum):
    INT = "int"
    DOUBLE = "double"
    BOOL = "bool"
    TEXT = "text"
    LIST = "list"
    DICT = "dict"
    ATOM = "atom"
    NATIVE = "native"


class LedgerSnapshot(NamedTuple):
    live_allocations: int
    live_bytes: int
    total_allocations: int
    total_bytes: int


class Ledger:
    """Counts live and total allocations under the accounting model."""

    def __init__(self):
        self.live_allocations = 0
        self.live_bytes = 0
        self.total_allocations = 0
        self.total_bytes = 0
        self.by_kind: Counter[str] = Counter()

    def alloc(self, label: str, nbytes: int) -> None:
        self.live_allocations += 1
        self.live_bytes += nbytes
        self.total_allocations += 1
        self.total_bytes += nbytes
        self.by_kind[label] += 1

    def release(self, nbytes: int) -> None:
        self.live_allocations -= 1
        self.live_bytes -= nbytes

    def resize(self, old: int, new: int) -> None:
        # internal-form replacement: same allocation, different size
        self.live_bytes += new - old
        if new > old:
            self.total_bytes += new - old

    def snapshot(self) -> LedgerSnapshot:
        return LedgerSnapshot(self.live_allocations, self.live_bytes,
                              self.total_allocations, self.total_bytes)

    @contextmanager
    def active(self):
        """Charge every cell created inside the block to this ledger."""
        global _active
        prev = _active
        _active = self
        try:
            yield self
        finally:
            _active = prev

    def __repr__(self):
        return (f"Ledger(live={self.live_allocations}, live_bytes={self.live_bytes}, "
                f"total={self.total_allocations})")


_active = Ledger()


def active_ledger() -> Ledger:
    return _active


class Value:
    __slots__ = ("_ledger", "_nbytes", "_text", "kind", "payload", "refs")

    def __init__(self, kind: Kind, payload: Any, nbytes: int, *, charge: bool = True):
        self.kind = kind
        self.payload = payload
        self.refs = 0
        self._text = None
        self._nbytes = nbytes
        self._ledger = None
        if charge:
            led = _active
            led.alloc(kind._value_, nbytes)
            self._ledger = led

    def __del__(self, _LIST=Kind.LIST, _DICT=Kind.DICT):
        led = self._ledger
        if led is not None:
            led.live_allocations -= 1
            led.live_bytes -= self._nbytes
        kind = self.kind
        if kind is _LIST:
            for item in self.payload:
                item.refs -= 1
        elif kind is _DICT:
            for item in self.payload.values():
                item.refs -= 1

    @property
    def share_count(self) -> int:
        return self.refs

    @property
    def nbytes(self) -> int:
        """Bytes charged for this cell alone (children excluded)."""
        return self._nbytes

    def __len__(self):
        if self.kind is Kind.LIST:
            return len(self.payload)
        if self.kind is Kind.DICT:
            return len(self.payload)
        return len(_list_items(self))

    def __eq__(self, other):
        if other is self:
            return True
        try:
            if isinstance(other, Value):
                return to_text(self) == to_text(other)
            return to_text(self) == render(other)
        except TextCastError:
            return (isinstance(other, Value) and other.kind is Kind.NATIVE
                    and self.kind is Kind.NATIVE and other.payload[1] is self.payload[1])
        except TypeError:
            return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        try:
            text = to_text(self)
        except TextCastError:
            text = f"<{self.payload[0].type_name}>"
        return f"Value({self.kind.value}, {text!r})"


# -- construction -----------------------------------------------------------

def _text_bytes(s: str) -> int:
    n = len(s) if s.isascii() else len(s.encode("utf-8"))
    return CELL_BYTES + n + 1


def new_int(n: int) -> Value:
    return Value(Kind.INT, int(n), CELL_BYTES)


def new_double(x: float) -> Value:
    return Value(Kind.DOUBLE, float(x), CELL_BYTES)


def new_bool(b: bool) -> Value:
    return Value(Kind.BOOL, bool(b), CELL_BYTES)


def new_text(s: str) -> Value:
    v = Value(Kind.TEXT, s, _text_bytes(s))
    v._text = s
    return v


def new_list(items: Iterable[Any] = ()) -> Value:
    vals = [as_value(x) for x in items]
    for item in vals:
        item.refs += 1
    return Value(Kind.LIST, vals, EMPTY_LIST_BYTES + SLOT_BYTES * len(vals))


def _dict_bytes(d: dict) -> int:
    n = CELL_BYTES + DICT_HEADER_BYTES
    for key in d:
        n += DICT_ENTRY_BYTES + _text_bytes(key) - CELL_BYTES
    return n


def new_dict(pairs: Any = ()) -> Value:
    """Build a dict from a mapping or an iterable of ``(key, value)`` pairs."""
    if isinstance(pairs, dict):
        pairs = pairs.items()
    d: dict[str, Value] = {}
    for key, val in pairs:
        key = key if isinstance(key, str) else to_text(as_value(key))
        val = as_value(val)
        val.refs += 1
        old = d.get(key)
        if old is not None:
            old.refs -= 1
        d[key] = val
    return Value(Kind.DICT, d, _dict_bytes(d))


# Detached-slot sentinel used by updaters: shared, never charged.
EMPTY = Value(Kind.TEXT, "", _text_bytes(""), charge=False)
EMPTY._text = ""


def _text_or_empty(s: str) -> Value:
    return new_text(s) if s else EMPTY


_FACTORIES = {bool: new_bool, int: new_int, float: new_double, str: _text_or_empty}


def as_value(x: Any) -> Value:
    """Wrap a Python scalar/list/dict as a cell; cells pass through unchanged."""
    t = type(x)
    if t is Value:
        return x
    f = _FACTORIES.get(t)
    if f is not None:
        return f(x)
    if isinstance(x, bool):
        return new_bool(x)
    if isinstance(x, int):
        return new_int(x)
    if isinstance(x, float):
        return new_double(x)
    if isinstance(x, str):
        return new_text(x) if x else EMPTY
    if isinstance(x, (list, tuple)):
        return new_list(x)
    if isinstance(x, dict):
        return new_dict(x)
    if x is None:
        return EMPTY
    raise ValueTypeError(f"cannot make a value from {type(x).__name__}")


# -- text form --------------------------------------------------------------

_WS = " \t\n\r\v\f"
_NEEDS_QUOTE = re.compile(r"[ \t\n\r\v\f{}]")
_BARE_WORD = re.compile(r"[^ \t\n\r\v\f]+")
_SKIP_WS = re.compile(r"[ \t\n\r\v\f]*")


def format_double(x: float) -> str:
    """Shortest text that reads back as the same double."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    return repr(x)


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def quote_element(s: str) -> str:
    if not s:
        return "{}"
    if s[0] == '"' or _NEEDS_QUOTE.search(s):
        if not _balanced(s):
            raise ValueTypeError(f"cannot quote list element {s!r}: unbalanced braces")
        return "{" + s + "}"
    return s


def to_text(v: Value) -> str:
    t = v._text
    if t is not None:
        return t
    kind = v.kind
    p = v.payload
    if kind is Kind.LIST:
        t = " ".join([quote_element(to_text(item)) for item in p])
    elif kind is Kind.DOUBLE:
        t = format_double(p)
    elif kind is Kind.INT:
        t = str(p)
    elif kind is Kind.BOOL:
        t = "1" if p else "0"
    elif kind is Kind.DICT:
        t = " ".join([quote_element(k) + " " + quote_element(to_text(item))
                      for k, item in p.items()])
    elif kind is Kind.NATIVE:
        desc, inst = p
        if desc.to_text is None:
            raise TextCastError(f'type "{desc.type_name}" cannot be cast to text')
        t = desc.to_text(inst)
    else:
        t = p
    v._text = t
    return t


def render(x: Any) -> str:
    """Canonical text of a cell or plain Python value, without allocating cells."""
    if isinstance(x, Value):
        return to_text(x)
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format_double(x)
    if isinstance(x, str):
        return x
    if isinstance(x, (list, tuple)):
        return " ".join(quote_element(render(item)) for item in x)
    if isinstance(x, dict):
        return " ".join(quote_element(str(k)) + " " + quote_element(render(item))
                        for k, item in x.items())
    if x is None:
        return ""
    raise TypeError(f"no text form for {type(x).__name__}")


def split_list(s: str) -> list[str]:
    """Split list text into element strings (braces and double quotes group)."""
    out = []
    i = 0
    n = len(s)
    while True:
        i = _SKIP_WS.match(s, i).end()
        if i >= n:
            return out
        ch = s[i]
        if ch == "{":
            depth = 1
            j = i + 1
            while j < n:
                c = s[j]
                if c == "{":
                    depth += 1
                elif c == "}":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if depth:
                raise ParseError("unmatched open brace in list", pos=i)
            out.append(s[i + 1:j])
            i = j + 1
            if i < n and s[i] not in _WS:
                raise ParseError("list element in braces followed by extra characters", pos=i)
        elif ch == '"':
            j = s.find('"', i + 1)
            if j < 0:
                raise ParseError("unmatched open quote in list", pos=i)
            out.append(s[i + 1:j])
            i = j + 1
            if i < n and s[i] not in _WS:
                raise ParseError("list element in quotes followed by extra characters", pos=i)
        else:
            m = _BARE_WORD.match(s, i)
            out.append(m.group())
            i = m.end()


def parse_list(s: str) -> Value:
    v = new_list([new_text(item) for item in split_list(s)])
    v._text = s
    return v


# -- internal-form replacement ------------------------------------------------

def replace_rep(v: Value, kind: Kind, payload: Any, nbytes: int) -> None:
    """Swap ``v``'s internal form in place; the text form is left to the caller."""
    if v.kind is Kind.LIST:
        for item in v.payload:
            item.refs -= 1
    elif v.kind is Kind.DICT:
        for item in v.payload.values():
            item.refs -= 1
    if v._ledger is not None:
        v._ledger.resize(v._nbytes, nbytes)
    v.kind = kind
    v.payload = payload
    v._nbytes = nbytes


def _list_items(v: Value) -> list:
    kind = v.kind
    if kind is Kind.LIST:
        return v.payload
    if kind is Kind.TEXT or kind is Kind.NATIVE:
        text = to_text(v)
        if v is EMPTY:
            return []
        items = [new_text(t) for t in split_list(text)]
        for item in items:
            item.refs += 1
        replace_rep(v, Kind.LIST, items, EMPTY_LIST_BYTES + SLOT_BYTES * len(items))
        v._text = text
        return items
    raise ValueTypeError(f"expected a list value but got {kind.value} {render(v)!r}")


def _dict_items(v: Value) -> dict:
    if v.kind is Kind.DICT:
        return v.payload
    if v.kind is Kind.TEXT and v is not EMPTY:
        text = to_text(v)
        words = split_list(text)
        if len(words) % 2:
            raise ValueTypeError("missing value to go with key")
        d = {}
        for k, w in zip(words[::2], words[1::2]):
            item = new_text(w)
            item.refs += 1
            if k in d:
                d[k].refs -= 1
            d[k] = item
        replace_rep(v, Kind.DICT, d, _dict_bytes(d))
        v._text = text
        return d
    if v is EMPTY:
        return {}
    raise ValueTypeError(f"expected a dict value but got {v.kind.value}")


# -- list / dict operations ---------------------------------------------------

def list_length(v: Value) -> int:
    return len(_list_items(v))


def list_get(v: Value, i: int) -> Value:
    items = _list_items(v)
    if not 0 <= i < len(items):
        raise ValueRangeError(f"list index {i} out of range for list of length {len(items)}")
    return items[i]


def _copy_spine(v: Value) -> Value:
    if v.kind is Kind.LIST:
        items = list(v.payload)
        for item in items:
            item.refs += 1
        return Value(Kind.LIST, items, v._nbytes)
    d = dict(v.payload)
    for item in d.values():
        item.refs += 1
    return Value(Kind.DICT, d, v._nbytes)


def list_set(slot, i: int, value: Any) -> Value:
    """Write ``value`` at index ``i`` of the list bound to ``slot``.

    ``slot`` is anything with ``get()``/``set()`` (normally a
    :class:`~vobj.env.VariableRef`).  Returns the list now bound to the slot.
    """
    cur = slot.get()
    items = _list_items(cur)
    n = len(items)
    if not 0 <= i < n:
        raise ValueRangeError(f"list index {i} out of range for list of length {n}")
    value = as_value(value)
    value.refs += 1
    if cur.refs > 1:
        cur = _copy_spine(cur)
        slot.set(cur)
        items = cur.payload
    old = items[i]
    items[i] = value
    old.refs -= 1
    cur._text = None
    return cur


def dict_get(v: Value, key: str) -> Value:
    d = _dict_items(v)
    try:
        return d[key]
    except KeyError:
        raise ValueRangeError(f'key "{key}" not known in dictionary') from None


def dict_set(slot, key: str, value: Any) -> Value:
    cur = slot.get()
    _dict_items(cur)
    value = as_value(value)
    value.refs += 1
    if cur.refs > 1:
        cur = _copy_spine(cur)
        slot.set(cur)
    d = cur.payload
    old = d.get(key)
    if old is not None:
        old.refs -= 1
    d[key] = value
    new_bytes = _dict_bytes(d)
    if new_bytes != cur._nbytes:
        if cur._ledger is not None:
            cur._ledger.resize(cur._nbytes, new_bytes)
        cur._nbytes = new_bytes
    cur._text = None
    return cur


def is_shared(v: Value) -> bool:
    return v.refs > 1


# -- interning --------------------------------------------------------------

class InternTable:
    """Maps text to one shared atom cell; the table itself holds each atom."""

    def __init__(self):
        self._atoms: dict[str, Value] = {}

    def intern(self, s: str) -> Value:
        atom = self._atoms.get(s)
        if atom is None:
            atom = Value(Kind.ATOM, s, _text_bytes(s))
            atom._text = s
            atom.refs = 1
            self._atoms[s] = atom
        return atom

    def __contains__(self, s):
        return s in self._atoms

    def __len__(self):
        return len(self._atoms)


_default_atoms = InternTable()


def intern(s: str, table: InternTable | None = None) -> Value:
    return (table or _default_atoms).intern(s)


# -- accounting ---------------------------------------------------------------

def footprint_bytes(*values: Value) -> int:
    """Bytes of every distinct cell reachable from ``values``.

    Passing a whole population counts shared children (atoms, default
    elements) once.
    """
    seen = set()
    total = 0
    stack = list(values)
    while stack:
        v = stack.pop()
        if id(v) in seen:
            continue
        seen.add(id(v))
        total += v._nbytes
        if v.kind is Kind.LIST:
            stack.extend(v.payload)
        elif v.kind is Kind.DICT:
            stack.extend(v.payload.values())
    return total


# -- casts --------------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def as_float(x: Any) -> float:
    if isinstance(x, Value):
        if x.kind is Kind.DOUBLE or x.kind is Kind.INT:
            return float(x.payload)
        if x.kind is Kind.BOOL:
            return 1.0 if x.payload else 0.0
        x = to_text(x)
    if isinstance(x, (int, float)):
        return float(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ConversionError(f'expected floating-point number but got "{x}"') from None


def as_int(x: Any) -> int:
    if isinstance(x, Value):
        if x.kind is Kind.INT or x.kind is Kind.BOOL:
            return int(x.payload)
        x = to_text(x)
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    try:
        return int(str(x).strip(), 0) if str(x).strip()[:2].lower() in ("0x", "0o", "0b") else int(x)
    except (TypeError, ValueError):
        raise ConversionError(f'expected integer but got "{x}"') from None


def as_bool(x: Any) -> bool:
    if isinstance(x, Value):
        if x.kind is Kind.BOOL:
            return x.payload
        if x.kind is Kind.INT or x.kind is Kind.DOUBLE:
            return x.payload != 0
        x = to_text(x)
    if isinstance(x, (bool, int, float)):
        return bool(x)
    s = str(x).strip().lower()
    if s in _TRUE:
        return True
    if s in _FALSE:
        return False
    try:
        return float(s) != 0
    except ValueError:
        raise ConversionError(f'expected boolean value but got "{x}"') from None


def as_text(x: Any) -> str:
    return render(x)
