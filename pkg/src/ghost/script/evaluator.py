"""Tree-walking evaluator for method bodies, blocks and top-level directives.

Every message in a body is a real send through the dispatcher; nothing is
inlined, so ``ifTrue:`` and ``whileTrue:`` show up in the send trace like any
other selector.  A ``^`` inside a block returns from that block only.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import GhostError, InvalidActivation, ScriptAssertionFailed, UnboundVariable
from ..object_model import MISSING, Ref
from . import nodes as n
from .parser import parse_method


@dataclass
class CompiledInfo:
    node: n.MethodNode
    ivars: dict  # instance variable name -> slot index


@dataclass
class Closure:
    node: n.Block
    env: "Env"
    frame: "Frame"


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, names=(), parent=None):
        self.vars = dict.fromkeys(names)
        self.parent = parent

    def find(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env
            env = env.parent
        return None


@dataclass
class Frame:
    receiver: object
    method_class: object  # real class the method was found in; None at top level
    ivars: dict
    top_level: bool = False


class Evaluator:
    def __init__(self, runtime):
        self.rt = runtime
        self.mem = runtime.memory
        self.interp = runtime.interp
        self.workspace = self.mem.new_system_dict()

    # -- compiled methods ------------------------------------------------

    def compile_method(self, cls, method: n.MethodNode) -> Ref:
        """CompiledMethod object for ``method`` on ``cls`` (not yet installed)."""
        mem = self.mem
        real = self.rt.real_class(cls)
        info = CompiledInfo(method, self._ivar_map(real))
        return mem.alloc(mem.core.compiled_method,
                         [mem.new_string(method.source), mem.intern(method.selector), real],
                         native=info)

    def define_method(self, cls, source_or_node) -> Ref:
        node = source_or_node
        if isinstance(node, str):
            node = parse_method(node)
        method = self.compile_method(cls, node)
        self.interp.install_method(self.rt.real_class(cls), node.selector, method)
        return method

    def _ivar_map(self, cls):
        return {name: i for i, name in enumerate(self.mem.instance_layout(cls))}

    def compiled_info(self, method) -> CompiledInfo:
        payload = self.mem.get(method)
        if payload.native is None:
            # materialized from a segment: recompile from the stored source
            source = self.mem.text_of(self.mem.slot_read(method, 0))
            cls = self.rt.real_class(self.mem.slot_read(method, 2))
            payload.native = CompiledInfo(parse_method(source), self._ivar_map(cls))
        return payload.native

    def method_class(self, method):
        return self.rt.real_class(self.mem.slot_read(method, 2))

    def activate(self, method, receiver, args):
        info = self.compiled_info(method)
        node = info.node
        env = Env(node.params + node.temps)
        for name, value in zip(node.params, args):
            env.vars[name] = value
        frame = Frame(receiver, self.mem.slot_read(method, 2), info.ivars)
        returned, value = self.run_statements(node.body, env, frame)
        return value if returned else receiver

    # -- blocks ----------------------------------------------------------

    def make_block(self, node, env, frame) -> Ref:
        mem = self.mem
        return mem.alloc(mem.core.block, [], native=Closure(node, env, frame))

    def block_arity(self, block) -> int:
        return len(self.mem.get(block).native.node.params)

    def call_block(self, block, args):
        closure = self.mem.get(block).native
        node = closure.node
        if len(args) != len(node.params):
            raise InvalidActivation(
                f"block expects {len(node.params)} arguments, got {len(args)}", node.pos)
        env = Env(node.params + node.temps, closure.env)
        for name, value in zip(node.params, args):
            env.vars[name] = value
        _, value = self.run_statements(node.body, env, closure.frame)
        return value

    # -- statements and expressions --------------------------------------

    def run_statements(self, statements, env, frame):
        value = None
        for stmt in statements:
            if isinstance(stmt, n.Return):
                return True, self.eval(stmt.value, env, frame)
            value = self.eval(stmt, env, frame)
        return False, value

    def eval(self, node, env, frame):
        kind = type(node)
        if kind is n.Literal:
            return self.literal(node)
        if kind is n.VariableRef:
            return self.lookup_variable(node, env, frame)
        if kind in (n.UnarySend, n.BinarySend, n.KeywordSend):
            return self.eval_send(node, env, frame)
        if kind is n.Assignment:
            value = self.eval(node.value, env, frame)
            self.assign(node, value, env, frame)
            return value
        if kind is n.Block:
            return self.make_block(node, env, frame)
        if kind is n.Super:
            return frame.receiver
        if kind is n.Sequence:
            return self.run_statements(node.statements, env, frame)[1]
        if kind is n.Return:
            return self.eval(node.value, env, frame)
        raise TypeError(f"cannot evaluate {kind.__name__}")

    def literal(self, node):
        mem = self.mem
        if node.kind == "int":
            return node.value
        if node.kind == "string":
            return mem.new_string(node.value)
        if node.kind == "symbol":
            return mem.intern(node.value)
        if node.kind == "true":
            return mem.true
        if node.kind == "false":
            return mem.false
        return None

    def eval_send(self, node, env, frame):
        start = None
        if isinstance(node.receiver, n.Super):
            receiver = frame.receiver
            if frame.method_class is None:
                raise GhostError("super used outside a method", node.pos)
            start = self.mem.superclass_of(self.rt.real_class(frame.method_class))
            if start is None:
                return self.interp._does_not_understand(
                    receiver, node.selector, [self.eval(a, env, frame) for a in n.send_args(node)],
                    self.rt.real_class(frame.method_class))
        else:
            receiver = self.eval(node.receiver, env, frame)
        args = [self.eval(a, env, frame) for a in n.send_args(node)]
        try:
            return self.interp.send(receiver, node.selector, args, start=start)
        except GhostError as e:
            if e.pos is None:
                e.pos = node.pos
            raise

    def lookup_variable(self, node, env, frame):
        name = node.name
        if name == "self":
            return frame.receiver
        holder = env.find(name) if env is not None else None
        if holder is not None:
            return holder.vars[name]
        index = frame.ivars.get(name)
        if index is not None:
            return self.mem.slot_read(frame.receiver, index)
        if frame.top_level:
            value = self.mem.dict_at(self.workspace, name)
            if value is not MISSING:
                return value
        value = self.mem.dict_at(self.mem.globals, name)
        if value is not MISSING:
            return value
        raise UnboundVariable(f"unbound variable {name}", node.pos)

    def assign(self, node, value, env, frame):
        name = node.name
        holder = env.find(name) if env is not None else None
        if holder is not None:
            holder.vars[name] = value
            return
        index = frame.ivars.get(name)
        if index is not None:
            self.mem.slot_write(frame.receiver, index, value)
            return
        if frame.top_level:
            self.mem.dict_put(self.workspace, name, value)
            return
        raise UnboundVariable(f"cannot assign to undeclared {name}", node.pos)

    # -- top level -------------------------------------------------------

    def top_frame(self):
        return Frame(None, None, {}, top_level=True)

    def evaluate_expression(self, node):
        return self.eval(node, None, self.top_frame())

    def run_directive(self, d):
        """Evaluate one directive; returns its value (asserts answer True)."""
        mem = self.mem
        if isinstance(d, n.ClassDef):
            superclass = None
            if d.super_name is not None:
                superclass = self.lookup_variable(n.VariableRef(d.super_name, pos=d.pos), None,
                                                  self.top_frame())
            try:
                return self.rt.define_class(d.name, superclass, d.slot_names, d.compact)
            except GhostError as e:
                e.pos = e.pos or d.pos
                raise
        if isinstance(d, n.MethodDef):
            cls = mem.global_at(d.class_name)
            if cls is None:
                raise UnboundVariable(f"no class named {d.class_name}", d.pos)
            cls = self.rt.real_class(cls)
            if d.class_side:
                cls = mem.class_of(cls)
            return self.define_method(cls, d.method)
        if isinstance(d, n.Declare):
            for name in d.names:
                if mem.dict_at(self.workspace, name) is MISSING:
                    mem.dict_put(self.workspace, name, None)
            return None
        if isinstance(d, n.ExpressionStatement):
            return self.evaluate_expression(d.expr)
        if isinstance(d, n.AssertEqual):
            actual = self.evaluate_expression(d.actual)
            expected = self.evaluate_expression(d.expected)
            if not self.rt.structurally_equal(actual, expected):
                raise ScriptAssertionFailed(
                    f"expected {mem.describe(expected)} but got {mem.describe(actual)}", d.pos)
            return True
        if isinstance(d, n.AssertTrapCount):
            before = self.rt.trace.interceptions
            self.evaluate_expression(d.expr)
            got = self.rt.trace.interceptions - before
            if got != d.count:
                raise ScriptAssertionFailed(f"expected {d.count} interceptions but got {got}", d.pos)
            return True
        raise TypeError(f"unknown directive {type(d).__name__}")
