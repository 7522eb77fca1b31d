"""Variable frames with by-name (caller-visible) access."""
from __future__ import annotations

from contextlib import contextmanager
from typing import Any

from .errors import UnboundVariableError
from .value import Value, as_value


class Frame:
    __slots__ = ("links", "vars")

    def __init__(self):
        self.vars: dict[str, Value] = {}
        self.links: dict[str, VariableRef] = {}

    def release(self):
        for v in self.vars.values():
            v.refs -= 1
        self.vars.clear()
        self.links.clear()


class VariableRef:
    """A resolved variable slot: one name in one frame."""

    __slots__ = ("frame", "name")

    def __init__(self, frame: Frame, name: str):
        self.frame = frame
        self.name = name

    def get(self) -> Value:
        try:
            return self.frame.vars[self.name]
        except KeyError:
            raise UnboundVariableError(f'can\'t read "{self.name}": no such variable') from None

    def set(self, value: Any) -> Value:
        value = as_value(value)
        value.refs += 1
        old = self.frame.vars.get(self.name)
        self.frame.vars[self.name] = value
        if old is not None:
            old.refs -= 1
        return value

    def exists(self) -> bool:
        return self.name in self.frame.vars

    def unset(self) -> None:
        old = self.frame.vars.pop(self.name, None)
        if old is None:
            raise UnboundVariableError(f'can\'t unset "{self.name}": no such variable')
        old.refs -= 1

    def __repr__(self):
        return f"VariableRef({self.name!r})"


class Environment:
    """A stack of frames; lookups happen in the top frame, following links."""

    def __init__(self):
        self.frames: list[Frame] = [Frame()]

    @property
    def top(self) -> Frame:
        return self.frames[-1]

    @property
    def depth(self) -> int:
        return len(self.frames)

    def ref(self, name: str) -> VariableRef:
        top = self.frames[-1]
        link = top.links.get(name)
        if link is not None:
            return link
        return VariableRef(top, name)

    def get(self, name: str) -> Value:
        return self.ref(name).get()

    def set(self, name: str, value: Any) -> Value:
        return self.ref(name).set(value)

    def unset(self, name: str) -> None:
        top = self.frames[-1]
        if name in top.links:
            del top.links[name]
            return
        VariableRef(top, name).unset()

    def exists(self, name: str) -> bool:
        return self.ref(name).exists()

    def link(self, local: str, target: VariableRef) -> None:
        """Make ``local`` in the top frame an alias of ``target`` (upvar)."""
        top = self.frames[-1]
        old = top.vars.pop(local, None)
        if old is not None:
            old.refs -= 1
        top.links[local] = target

    def push(self) -> Frame:
        frame = Frame()
        self.frames.append(frame)
        return frame

    def pop(self) -> None:
        if len(self.frames) == 1:
            raise RuntimeError("cannot pop the global frame")
        self.frames.pop().release()

    @contextmanager
    def frame(self):
        self.push()
        try:
            yield self.frames[-1]
        finally:
            self.pop()


def env_get(env: Environment, name: str) -> Value:
    return env.get(name)


def env_set(env: Environment, name: str, value: Any) -> Value:
    return env.set(name, value)
