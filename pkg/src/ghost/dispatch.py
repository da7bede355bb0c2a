"""Message sending: lookup, activation and the two trap paths.

A send looks up its selector along the superclass chain.  Three things can
stop the walk: a matching method, a class whose method dictionary is nil
(the receiver then gets ``cannotInterpret:`` with lookup restarted above that
class) or the end of the chain (``doesNotUnderstand:``).  A method-dictionary
entry that is not a method receives ``run:with:in:``.  Identity comparison is
the only selector that never goes through lookup.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FatalRuntime, InvalidActivation, PrimitiveFailed
from .object_model import METHODS, MISSING, SUPERCLASS, ObjectMemory, Ref
from .script.lexer import BINARY_CHARS
from .trace import Trace

IDENTITY = "=="
CANNOT_INTERPRET = "cannotInterpret:"
DOES_NOT_UNDERSTAND = "doesNotUnderstand:"
RUN_WITH_IN = "run:with:in:"
TRAP_SELECTORS = (CANNOT_INTERPRET, DOES_NOT_UNDERSTAND)
MAX_TRAP_NESTING = 2
MAX_SEND_DEPTH = 400
MAX_CHAIN = 1000


def selector_arity(selector: str) -> int:
    if selector and selector[0] in BINARY_CHARS:
        return 1
    return selector.count(":")


@dataclass(frozen=True)
class Found:
    defining_class: Ref
    entry: Ref


@dataclass(frozen=True)
class NilDictionary:
    trapping_class: Ref


@dataclass(frozen=True)
class NotFound:
    pass


@dataclass
class MessageReification:
    selector: str
    arguments: list
    lookup_class: Ref


@dataclass
class Primitive:
    fn: object  # fn(interp, receiver, args) -> value
    arity: int
    tag: str


class Interpreter:
    def __init__(self, memory: ObjectMemory, trace: Trace):
        self.mem = memory
        self.trace = trace
        self.evaluator = None  # set by the runtime; activates compiled methods
        self.rt = None
        self.depth = 0
        self.trap_nesting = 0

    # -- methods ---------------------------------------------------------

    def method_dict(self, cls):
        return self.mem.slot_read(cls, METHODS)

    def install_method(self, cls, selector: str, method) -> None:
        md = self.method_dict(cls)
        if md is None:
            raise FatalRuntime(f"{self.mem.describe(cls)} has a nil method dictionary")
        self.mem.dict_put(md, selector, method)

    def define_primitive(self, cls, selector: str, fn, tag=None) -> Ref:
        mem = self.mem
        prim = Primitive(fn, selector_arity(selector), tag or selector)
        method = mem.alloc(mem.core.primitive_method, [mem.intern(selector)], native=prim)
        self.install_method(cls, selector, method)
        return method

    def method_kind(self, entry) -> str:
        if type(entry) is not Ref:
            return "foreign"
        cls = self.mem.class_of(entry)
        if cls == self.mem.core.primitive_method:
            return "primitive"
        if cls == self.mem.core.compiled_method:
            return "compiled"
        return "foreign"

    def method_arity(self, entry) -> int:
        kind = self.method_kind(entry)
        if kind == "primitive":
            return self.mem.get(entry).native.arity
        if kind == "compiled":
            return len(self.evaluator.compiled_info(entry).node.params)
        raise InvalidActivation(f"{self.mem.describe(entry)} is not a method")

    # -- lookup ----------------------------------------------------------

    def lookup(self, selector: str, start):
        mem = self.mem
        cls = start
        steps = 0
        chain = []
        while cls is not None:
            if not mem.is_class_shaped(cls):
                raise FatalRuntime(f"{mem.describe(cls)} in the lookup chain is not class-shaped")
            cls = mem.resolve(cls)
            steps += 1
            if steps > MAX_CHAIN:
                dump = " -> ".join(mem.describe_class_position(c) for c in chain[:12])
                raise FatalRuntime(f"cyclic superclass chain: {dump} ...")
            chain.append(cls)
            payload = mem.get(cls)
            md = payload.slots[METHODS]
            if md is None:
                return NilDictionary(cls)
            entry = mem.dict_at(md, selector)
            if entry is not MISSING:
                return Found(cls, entry)
            cls = payload.slots[SUPERCLASS]
        return NotFound()

    # -- sending ---------------------------------------------------------

    def send(self, receiver, selector: str, args=(), start=None):
        args = list(args)
        if selector_arity(selector) != len(args):
            raise InvalidActivation(
                f"#{selector} expects {selector_arity(selector)} arguments, got {len(args)}")
        if type(receiver) is Ref:
            receiver = self.mem.resolve(receiver)
        if selector == IDENTITY:
            self.trace.record_send(self.depth, self._class_label(receiver), selector, "identity-bypass")
            return self.mem.boolean(self.mem.identical(receiver, args[0]))
        cls = self.mem.class_of(receiver) if start is None else start
        self.depth += 1
        try:
            if self.depth > MAX_SEND_DEPTH:
                raise FatalRuntime(f"send depth exceeded {MAX_SEND_DEPTH} at #{selector}")
            return self._dispatch(receiver, selector, args, cls)
        except RecursionError:
            raise FatalRuntime(f"interpreter stack exhausted at #{selector}") from None
        finally:
            self.depth -= 1

    def _class_label(self, receiver):
        return self.mem.describe_class_position(self.mem.class_of(receiver))

    def _dispatch(self, receiver, selector, args, cls):
        mem = self.mem
        label = mem.describe_class_position(cls) if self.trace.sends else None
        start = cls
        while True:
            outcome = self.lookup(selector, start)
            if type(outcome) is Found:
                kind = self.method_kind(outcome.entry)
                if kind == "primitive":
                    self.trace.record_send(self.depth, label, selector, "primitive")
                    try:
                        return mem.get(outcome.entry).native.fn(self, receiver, args)
                    except PrimitiveFailed:
                        start = mem.slot_read(outcome.defining_class, SUPERCLASS)
                        if start is None:
                            return self._does_not_understand(receiver, selector, args, cls)
                        continue
                self.trace.record_send(self.depth, label, selector, "executed")
                if kind == "compiled":
                    return self.evaluator.activate(outcome.entry, receiver, args)
                return self.run_foreign(outcome.entry, selector, args, receiver)
            if type(outcome) is NilDictionary:
                self.trace.record_send(self.depth, label, selector, "trapped-CI")
                return self._cannot_interpret(receiver, selector, args, cls, outcome.trapping_class)
            self.trace.record_send(self.depth, label, selector, "trapped-DNU")
            return self._does_not_understand(receiver, selector, args, cls)

    def run_foreign(self, entry, selector, args, receiver):
        """Objects as methods: the entry gets ``run:with:in:``."""
        mem = self.mem
        return self.send(entry, RUN_WITH_IN, [mem.intern(selector), mem.new_array(args), receiver])

    def new_message(self, selector, args, lookup_class) -> Ref:
        mem = self.mem
        return mem.alloc(mem.core.message, [mem.intern(selector), mem.new_array(args), lookup_class])

    def reify(self, message) -> MessageReification:
        mem = self.mem
        selector, arguments, lookup_class = (mem.slot_read(message, i) for i in range(3))
        return MessageReification(mem.text_of(selector), mem.array_items(arguments), lookup_class)

    def _deliver_trap(self, trap_selector, receiver, selector, args, lookup_class, search_from):
        mem = self.mem
        outcome = NotFound() if search_from is None else self.lookup(trap_selector, search_from)
        if type(outcome) is not Found:
            raise FatalRuntime(
                f"unhandled trap: #{trap_selector} for #{selector} sent to "
                f"{mem.describe(receiver)}")
        nested = selector in TRAP_SELECTORS
        if nested:
            self.trap_nesting += 1
        try:
            if self.trap_nesting > MAX_TRAP_NESTING:
                raise FatalRuntime(f"recursive trap on #{selector}")
            message = self.new_message(selector, args, lookup_class)
            return self.activate(outcome.entry, receiver, [message], trap_selector)
        finally:
            if nested:
                self.trap_nesting -= 1

    def _cannot_interpret(self, receiver, selector, args, lookup_class, trapping_class):
        above = self.mem.slot_read(trapping_class, SUPERCLASS)
        return self._deliver_trap(CANNOT_INTERPRET, receiver, selector, args, lookup_class, above)

    def _does_not_understand(self, receiver, selector, args, lookup_class):
        return self._deliver_trap(DOES_NOT_UNDERSTAND, receiver, selector, args, lookup_class,
                                  lookup_class)

    def activate(self, entry, receiver, args, selector):
        kind = self.method_kind(entry)
        if kind == "primitive":
            return self.mem.get(entry).native.fn(self, receiver, args)
        if kind == "compiled":
            return self.evaluator.activate(entry, receiver, args)
        return self.run_foreign(entry, selector, args, receiver)

    # -- direct execution ------------------------------------------------

    def execute_method(self, method, receiver, args=()):
        """Run ``method`` on ``receiver`` with no lookup and no send to the receiver."""
        args = list(args)
        kind = self.method_kind(method)
        if kind == "foreign":
            raise InvalidActivation(f"{self.mem.describe(method)} cannot be activated as a method")
        arity = self.method_arity(method)
        if arity != len(args):
            raise InvalidActivation(f"method expects {arity} arguments, got {len(args)}")
        if type(receiver) is Ref:
            receiver = self.mem.resolve(receiver)
        if kind == "primitive":
            try:
                return self.mem.get(method).native.fn(self, receiver, args)
            except PrimitiveFailed as e:
                raise InvalidActivation(f"primitive failed: {e.message}") from None
        return self.evaluator.activate(method, receiver, args)

    value_with_receiver = execute_method

    def perform(self, receiver, selector, args=()):
        """Python-side send used by handlers and tests."""
        return self.send(receiver, selector, args)


def install_dnu_baseline(interp: Interpreter, cls, handler_body) -> None:
    """Install a ``doesNotUnderstand:`` override (the classic proxy technique).

    ``handler_body`` is a CompiledMethod whose selector is ``doesNotUnderstand:``.
    """
    mem = interp.mem
    if interp.method_kind(handler_body) != "compiled":
        raise InvalidActivation("baseline handler body must be a compiled method")
    mem.slot_write(handler_body, 2, mem.resolve(cls))
    interp.install_method(cls, DOES_NOT_UNDERSTAND, handler_body)
