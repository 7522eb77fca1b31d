"""Exception hierarchy shared by every layer of the runtime."""


class VobjError(Exception):
    """Base class for all runtime errors."""


class ParseError(VobjError):
    """Malformed list text or class declaration.

    ``line`` is set for declaration errors, ``pos`` for list-text errors.
    """

    def __init__(self, message, *, line=None, pos=None):
        self.line = line
        self.pos = pos
        if line is not None:
            message = f"line {line}: {message}"
        elif pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class ValueRangeError(VobjError, IndexError):
    pass


class ValueTypeError(VobjError, TypeError):
    pass


class TextCastError(ValueTypeError):
    """A native value whose type has no text hook was asked for text."""


class ConversionError(VobjError, ValueError):
    pass


class UnboundVariableError(VobjError, LookupError):
    pass


class CommandNotFound(VobjError, LookupError):
    pass


class ArityError(VobjError, TypeError):
    pass


class ConstructorArgError(VobjError, ValueError):
    pass


class ValidationError(VobjError):
    pass


class RegistrationError(VobjError):
    pass


class DispatchError(VobjError):
    pass


class UnboundMethodError(VobjError):
    pass


class UseAfterDestroyError(VobjError):
    pass
