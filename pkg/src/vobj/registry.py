"""Command registry: qualified command names, compiled classes and atoms."""
from __future__ import annotations

from collections.abc import Callable, Iterable
from typing import Any

from .env import Environment
from .errors import CommandNotFound, RegistrationError, UnboundMethodError
from .value import InternTable, Value, as_value

Command = Callable[..., Any]


def qualify(name: str) -> str:
    """Registry key for a command or class name (leading ``::`` dropped)."""
    return name.removeprefix("::")


class Registry:
    """One runtime instance: commands, classes, atoms and a global frame.

    With ``allow_replace`` (the default) registering an existing name
    replaces it, the way redefining a procedure does.
    """

    def __init__(self, *, allow_replace: bool = True):
        self.commands: dict[str, Command] = {}
        self.classes: dict[str, Any] = {}
        self.native_types: dict[str, Any] = {}
        self.atoms = InternTable()
        self.allow_replace = allow_replace
        self.globals = Environment()

    def intern(self, s: str) -> Value:
        return self.atoms.intern(s)

    def register_command(self, name: str, f: Command, *, replace: bool | None = None) -> None:
        name = qualify(name)
        if replace is None:
            replace = self.allow_replace
        if name in self.commands and not replace:
            raise RegistrationError(f'command "{name}" already exists')
        self.commands[name] = f

    def lookup(self, name: str) -> Command:
        try:
            return self.commands[qualify(name)]
        except KeyError:
            raise CommandNotFound(f'invalid command name "{name}"') from None

    def invoke(self, name: str, env: Environment, args: Iterable[Any] = ()) -> Value:
        result = self.lookup(name)(env, *args)
        return as_value(result)

    def call(self, name: str, *args: Any, env: Environment | None = None) -> Value:
        """Invoke ``name`` with ``args`` in ``env`` (the global frame by default)."""
        return self.invoke(name, self.globals if env is None else env, args)

    def has_command(self, name: str) -> bool:
        return qualify(name) in self.commands

    def command_names(self, namespace: str | None = None) -> set[str]:
        if namespace is None:
            return set(self.commands)
        prefix = qualify(namespace) + "::"
        return {n for n in self.commands if n.startswith(prefix)}

    def bind_method(self, class_name: str, method: str, f: Callable) -> None:
        """Attach a host callable as the body of a declared method."""
        cls = self.classes.get(qualify(class_name))
        if cls is None:
            raise CommandNotFound(f'unknown class "{class_name}"')
        binding = cls.methods.get(method)
        if binding is None:
            raise UnboundMethodError(f'class "{cls.name}" declares no method "{method}"')
        binding.body = f

    def declare(self, source: str) -> list:
        """Parse, validate and compile every class declared in ``source``."""
        from .compiler import compile_class
        from .dsl import parse_classes

        return [compile_class(decl, self) for decl in parse_classes(source)]

    def _install(self, cls, commands: dict[str, Command]) -> None:
        old = self.classes.get(cls.name)
        if old is not None and not self.allow_replace:
            raise RegistrationError(f'class "{cls.name}" is already defined')
        owned = set(old.commands) if old is not None else set()
        if not self.allow_replace:
            clash = [n for n in commands if n in self.commands and n not in owned]
            if clash:
                raise RegistrationError(f'command "{clash[0]}" already exists')
        for name in owned:
            self.commands.pop(name, None)
        self.commands.update(commands)
        cls.commands = list(commands)
        self.classes[cls.name] = cls
        if old is not None:
            old.release()


def register_command(r: Registry, name: str, f: Command) -> None:
    r.register_command(name, f)


def invoke(r: Registry, name: str, env: Environment, args: Iterable[Any] = ()) -> Value:
    return r.invoke(name, env, args)


def bind_method(r: Registry, class_name: str, method: str, f: Callable) -> None:
    r.bind_method(class_name, method, f)
