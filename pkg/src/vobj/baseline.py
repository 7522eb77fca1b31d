"""Reference-semantics comparator: handle-keyed objects with explicit destroy.

Each object is a table record reached through a generated handle string.
Copies of a handle alias one object, and a record lives until someone calls
:meth:`HandleTable.destroy`.  The per-object bookkeeping is charged to the
active ledger so footprints can be compared with plain list objects.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from .errors import ArityError, UseAfterDestroyError, ValueTypeError
from .registry import Registry
from .value import Value, active_ledger, as_text, as_value, new_text

# Accounting constants for handle bookkeeping (see the README's accounting model).
HANDLE_RECORD_BYTES = 160   # object record: class link, namespace, command token
TABLE_ENTRY_BYTES = 40      # hash entry mapping handle text to the record
VAR_RECORD_BYTES = 64       # one instance variable record per field


@dataclass
class HandleClass:
    name: str
    fields: tuple
    defaults: tuple = ()

    def __post_init__(self):
        self.fields = tuple(self.fields)
        if not self.defaults:
            self.defaults = ("",) * len(self.fields)
        self.defaults = tuple(self.defaults)
        if len(self.defaults) != len(self.fields):
            raise ArityError(f'class "{self.name}": {len(self.fields)} fields but '
                             f'{len(self.defaults)} defaults')
        self.index_of = {f: i for i, f in enumerate(self.fields)}


class _Record:
    __slots__ = ("cls", "handle", "ledger", "nbytes", "slots")


@dataclass
class HandleTable:
    prefix: str = "::h::obj"
    live: dict = field(default_factory=dict)

    def __post_init__(self):
        self._ids = itertools.count(1)

    def create(self, cls: HandleClass, vals=None) -> Value:
        vals = cls.defaults if vals is None else tuple(vals)
        if len(vals) != len(cls.fields):
            raise ArityError(f'wrong # args: "{cls.name}" expects {len(cls.fields)} field '
                             f'values ({" ".join(cls.fields)}), got {len(vals)}')
        text = f"{self.prefix}{next(self._ids)}"
        rec = _Record()
        rec.cls = cls
        slots = [as_value(v) for v in vals]
        for v in slots:
            v.refs += 1
        rec.slots = slots
        rec.handle = handle = new_text(text)
        handle.refs += 1
        led = active_ledger()
        rec.ledger = led
        rec.nbytes = (HANDLE_RECORD_BYTES, TABLE_ENTRY_BYTES) + (VAR_RECORD_BYTES,) * len(slots)
        for n in rec.nbytes:
            led.alloc("handle", n)
        self.live[text] = rec
        return handle

    def _record(self, h: Any) -> _Record:
        text = as_text(h)
        rec = self.live.get(text)
        if rec is None:
            raise UseAfterDestroyError(f'invalid object handle "{text}" (destroyed or never created)')
        return rec

    def _index(self, rec: _Record, name: str) -> int:
        try:
            return rec.cls.index_of[name]
        except KeyError:
            raise ValueTypeError(f'object "{rec.handle}" has no field "{name}"') from None

    def get(self, h: Any, name: str) -> Value:
        rec = self._record(h)
        return rec.slots[self._index(rec, name)]

    def set(self, h: Any, name: str, value: Any) -> None:
        rec = self._record(h)
        i = self._index(rec, name)
        value = as_value(value)
        value.refs += 1
        old = rec.slots[i]
        rec.slots[i] = value
        old.refs -= 1

    def destroy(self, h: Any) -> None:
        rec = self._record(h)
        del self.live[as_text(h)]
        for v in rec.slots:
            v.refs -= 1
        rec.slots = []
        rec.handle.refs -= 1
        for n in rec.nbytes:
            rec.ledger.release(n)

    def live_count(self) -> int:
        return len(self.live)

    def footprint(self, h: Any) -> int:
        """Bytes charged for one object: handle text, bookkeeping and field cells."""
        rec = self._record(h)
        return rec.handle.nbytes + sum(rec.nbytes) + sum(v.nbytes for v in rec.slots)


def handle_create(t: HandleTable, cls: HandleClass, vals=None) -> Value:
    return t.create(cls, vals)


def handle_get(t: HandleTable, h: Any, name: str) -> Value:
    return t.get(h, name)


def handle_set(t: HandleTable, h: Any, name: str, value: Any) -> None:
    t.set(h, name, value)


def handle_destroy(t: HandleTable, h: Any) -> None:
    t.destroy(h)


def live_count(t: HandleTable) -> int:
    return t.live_count()


def register_handle_class(r: Registry, table: HandleTable, cls: HandleClass,
                          name: str | None = None) -> None:
    """Register ``new``/``new()``/``get.f``/``set.f``/``destroy`` taking handles."""
    n = name or cls.name
    r.register_command(f"{n}::new", lambda env, *vals: table.create(cls, vals))
    r.register_command(f"{n}::new()", lambda env: table.create(cls))
    r.register_command(f"{n}::destroy", lambda env, h: table.destroy(h))
    for f in cls.fields:
        r.register_command(f"{n}::get.{f}", lambda env, h, f=f: table.get(h, f))
        r.register_command(f"{n}::set.{f}", lambda env, h, v, f=f: table.set(h, f, v))
