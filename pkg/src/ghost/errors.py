"""Error taxonomy shared by every layer of the runtime."""


class GhostError(Exception):
    """Base class. ``pos`` is a (line, column) pair once a script position is known."""

    exit_code = 2

    def __init__(self, message="", pos=None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def __str__(self):
        if self.pos is None:
            return self.message
        line, col = self.pos
        return f"{line}:{col}: {self.message}"


class RefusedBecome(GhostError):
    pass


class FatalRuntime(GhostError):
    pass


class DoesNotUnderstand(GhostError):
    def __init__(self, class_name, selector, pos=None):
        super().__init__(f"{class_name} does not understand #{selector}", pos)
        self.class_name = class_name
        self.selector = selector


class InvalidActivation(GhostError):
    pass


class PrimitiveFailed(GhostError):
    """Raised inside a primitive to fall back to ordinary lookup."""


class SlotError(GhostError):
    pass


class ClassDefinitionError(GhostError):
    pass


class HandlerConfigError(GhostError):
    pass


class EncodingError(GhostError):
    pass


class SwapFault(GhostError):
    pass


class NotWrapped(GhostError):
    pass


class UnboundVariable(GhostError):
    pass


class ScriptAssertionFailed(GhostError):
    exit_code = 1


class LexError(GhostError):
    exit_code = 3


class ParseError(GhostError):
    exit_code = 3

    def __init__(self, message, pos=None, expected=()):
        super().__init__(message, pos)
        self.expected = tuple(expected)
