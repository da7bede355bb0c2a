"""Shared fixtures for the test suite: scripts, graph generators and oracles."""

from __future__ import annotations

import random
from collections import deque
from pathlib import Path

from ghost.object_model import HeapObject, ObjectMemory, Ref
from ghost.script import nodes as n

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

PRELUDE = """
ObjectRoot subclass: #Point instanceVariableNames: 'x y'.
ObjectRoot subclass: #User instanceVariableNames: 'name'.

!Point class methodsFor!
x: ax y: ay
    ^ self new setX: ax y: ay
! !

!Point methodsFor: 'accessing'!
setX: ax y: ay
    x := ax.
    y := ay
!
x
    ^ x
!
y
    ^ y
! !

!User class methodsFor!
named: aString
    ^ self new setName: aString
! !

!User methodsFor!
setName: aString
    name := aString
!
username ^ name
! !
"""

FORWARDER_TEST = """
| proxy |
proxy := TargetBasedProxy createProxyFor: (Point x: 3 y: 4) handler: SimpleForwarderHandler new.
self assert: proxy x equals: 3.
self assert: proxy y equals: 4.
"""

METHOD_PROXY_TEST = """
| mProxy kurt method |
kurt := User named: 'Kurt'.
method := User compiledMethodAt: #username.
mProxy := TargetBasedProxy createProxyAndReplace: method handler: SimpleForwarderHandler new.
self assert: mProxy getSource equals: 'username ^ name'.
self assert: kurt username equals: 'Kurt'.
"""

CLASS_PROXY_TEST = """
| cProxy kurt |
kurt := User named: 'Kurt'.
cProxy := TargetBasedClassProxy createProxyAndReplace: User handler: SimpleForwarderHandler new.
self assert: User name equals: #User.
self assert: kurt username equals: 'Kurt'.
"""

PAPER_SCRIPTS = (FORWARDER_TEST, METHOD_PROXY_TEST, CLASS_PROXY_TEST)


# -- become oracle ---------------------------------------------------------------


def random_memory_graph(rng: random.Random, size: int):
    """Fresh memory holding ``size`` random objects; answers (memory, objects)."""
    mem = ObjectMemory()
    cls = mem.define_class("GNode", mem.core.root, ["a", "b", "c", "d"])
    objects = [mem.instantiate(cls) for _ in range(size)]
    for obj in objects:
        for k in range(4):
            roll = rng.random()
            if roll < 0.6:
                value = rng.choice(objects)
            elif roll < 0.8:
                value = rng.randint(-50, 50)
            else:
                value = None
            mem.slot_write(obj, k, value)
    return mem, objects


def payload_references(mem: ObjectMemory) -> dict:
    """Independent full scan keyed by payload identity: id(payload) -> {(id(holder), slot)}."""
    refs: dict[int, set] = {}
    table = mem.table
    for entry in table:
        if type(entry) is not HeapObject:
            continue
        for k, v in enumerate(entry.slots or ()):
            if type(v) is Ref:
                target = table[mem.resolve(v).index]
                refs.setdefault(id(target), set()).add((id(entry), k))
    return refs


# -- swap round trip ---------------------------------------------------------------


GRAPH_CLASSES = """
ObjectRoot subclass: #GNode instanceVariableNames: 'a b c'.
ObjectRoot subclass: #GPair instanceVariableNames: 'left right' compact: true.
ObjectRoot subclass: #GHolder instanceVariableNames: 'held'.
"""


def random_swap_graph(rt, rng: random.Random, size: int):
    """A connected graph under ``root`` plus a holder that points into its middle."""
    mem = rt.memory
    node_cls = mem.global_at("GNode")
    pair_cls = mem.global_at("GPair")
    externals = [mem.true, mem.false, mem.intern("ghost"), node_cls]
    objects = []
    for k in range(size):
        roll = rng.random()
        if roll < 0.15 and k:
            objects.append(mem.new_string(f"s{rng.randint(0, 999)}'x"))
        elif roll < 0.35:
            objects.append(mem.instantiate(pair_cls))
        else:
            objects.append(mem.instantiate(node_cls))
    for obj in objects:
        if mem.is_bytes(obj):
            continue
        for s in range(mem.slot_count(obj)):
            roll = rng.random()
            if roll < 0.5:
                value = rng.choice(objects)
            elif roll < 0.7:
                value = rng.randint(-1000, 1000)
            elif roll < 0.85:
                value = rng.choice(externals)
            else:
                value = None
            mem.slot_write(obj, s, value)
    # a spanning tree keeps every member reachable from objects[0]
    for k in range(1, size):
        parent = rng.choice([o for o in objects[:k] if not mem.is_bytes(o)])
        mem.slot_write(parent, rng.randrange(mem.slot_count(parent)), objects[k])
    root = objects[0]
    holder = mem.instantiate(mem.global_at("GHolder"))
    mem.slot_write(holder, 0, rng.choice(objects))
    return root, holder


def signature(mem, start):
    """Canonical breadth-first description of the graph reachable from ``start``.

    Objects are named by visit order; anything that is a class, a symbol or a
    special object is recorded by identity, since those never move.
    """
    order = {}
    out = []
    queue = deque([mem.resolve(start)])
    order[queue[0].index] = 0

    def describe(value):
        if value is None:
            return ("nil",)
        if type(value) is int:
            return ("int", value)
        ref = mem.resolve(value)
        if ref.index in mem.special or mem.is_class(ref) or mem.is_symbol(ref):
            return ("ext", ref.index)
        if ref.index not in order:
            order[ref.index] = len(order)
            queue.append(ref)
        return ("obj", order[ref.index])

    while queue:
        ref = queue.popleft()
        payload = mem.get(ref)
        name = mem.class_name(mem.resolve(payload.cls))
        if payload.slots is None:
            out.append((name, "bytes", bytes(payload.body)))
        else:
            out.append((name, tuple(describe(v) for v in payload.slots)))
    return out


# -- expression generator for the parser round trip -----------------------------------

NAMES = ("a", "b", "x1", "total", "point", "Foo", "aBlock")
UNARY = ("abs", "size", "x", "y", "isNil", "printString", "next")
BINARY = ("+", "-", "*", "<", ">=", "=", "~=", ",", "@", "//", "->")
KEYWORDS = ("at:", "put:", "ifTrue:", "ifFalse:", "with:", "inject:", "into:", "value:")


def random_expr(rng: random.Random, depth: int = 0):
    if depth > 3 or rng.random() < 0.25:
        return random_leaf(rng)
    roll = rng.random()
    if roll < 0.25:
        return n.UnarySend(random_expr(rng, depth + 1), rng.choice(UNARY))
    if roll < 0.5:
        return n.BinarySend(random_expr(rng, depth + 1), rng.choice(BINARY),
                            random_expr(rng, depth + 1))
    if roll < 0.7:
        parts = rng.sample(KEYWORDS, rng.randint(1, 3))
        return n.KeywordSend(random_expr(rng, depth + 1), "".join(parts),
                             tuple(random_expr(rng, depth + 1) for _ in parts))
    if roll < 0.8:
        return n.Assignment(rng.choice(NAMES[:4]), random_expr(rng, depth + 1))
    return random_block(rng, depth + 1)


def random_block(rng, depth):
    params = tuple(rng.sample(("p", "q", "r"), rng.randint(0, 2)))
    temps = tuple(rng.sample(("t", "u"), rng.randint(0, 2)))
    body = [random_expr(rng, depth + 1) for _ in range(rng.randint(0, 3))]
    if body and rng.random() < 0.3:
        body[-1] = n.Return(body[-1])
    return n.Block(params, temps, tuple(body))


def random_leaf(rng):
    roll = rng.random()
    if roll < 0.35:
        return n.Literal("int", rng.randint(-500, 500))
    if roll < 0.45:
        return n.Literal("string", rng.choice(("", "it's", "hello world", "a''b")))
    if roll < 0.55:
        return n.Literal("symbol", rng.choice(("foo", "at:put:", "+", "with space")))
    if roll < 0.65:
        return n.Literal(rng.choice(("true", "false", "nil")))
    return n.VariableRef(rng.choice(NAMES))


# -- program corpus for the wrapper differential ---------------------------------------

BODIES = (
    "f: n ^ n < 1 ifTrue: [{c0}] ifFalse: [(self f: n - 1) * {c1} + n]",
    "f: n | acc | acc := {c0}. 1 to: n do: [:k | acc := acc + (k * {c1})]. ^ acc",
    "f: n ^ n < 2 ifTrue: [n + {c0}] ifFalse: [(self f: n - 1) + (self f: n - 2) - {c1}]",
    "f: n | k s | k := 0. s := {c0}. [k < n] whileTrue: [s := s + (k \\\\ {c1}). k := k + 1]. ^ s",
    "f: n ^ (Array with: n with: {c0} with: n * {c1}) inject: 0 into: [:a :b | a max: b]",
    "f: n ^ n isZero ifTrue: [(Array with: {c0} with: {c1}) first] ifFalse: [(self f: n - 1) + {c1}]",
)


def program_corpus(seed: int = 0, count: int = 20):
    """``count`` (class name, script) pairs; each class answers ``f:`` and ``g:``."""
    rng = random.Random(seed)
    programs = []
    for k in range(count):
        name = f"Prog{k}"
        body = rng.choice(BODIES).format(c0=rng.randint(-9, 9), c1=rng.randint(1, 9))
        script = (f"ObjectRoot subclass: #{name} instanceVariableNames: ''.\n"
                  f"!{name} methodsFor!\n{body}\n!\n"
                  f"g: n ^ (self f: n) + (self f: n // 2)\n! !\n")
        programs.append((name, script))
    return programs
