"""Expression trees and top-level directives.

Source positions ride along as ``pos`` but never take part in equality, so a
reparsed tree compares equal to the original regardless of layout.
"""

from dataclasses import dataclass, field


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Node:
    pos: tuple = _pos()


@dataclass
class Literal(Node):
    kind: str  # int, string, symbol, true, false, nil
    value: object = None


@dataclass
class VariableRef(Node):
    name: str


@dataclass
class Super(Node):
    """The ``super`` pseudo-variable; only meaningful as a send receiver."""


@dataclass
class Assignment(Node):
    name: str
    value: Node


@dataclass
class UnarySend(Node):
    receiver: Node
    selector: str


@dataclass
class BinarySend(Node):
    receiver: Node
    selector: str
    arg: Node


@dataclass
class KeywordSend(Node):
    receiver: Node
    selector: str
    args: tuple


@dataclass
class Block(Node):
    params: tuple
    temps: tuple
    body: tuple


@dataclass
class Return(Node):
    value: Node


@dataclass
class Sequence(Node):
    statements: tuple


SENDS = (UnarySend, BinarySend, KeywordSend)


def send_args(node):
    if isinstance(node, UnarySend):
        return ()
    if isinstance(node, BinarySend):
        return (node.arg,)
    return node.args


def is_super_send(node) -> bool:
    return isinstance(node, SENDS) and isinstance(node.receiver, Super)


@dataclass
class MethodNode(Node):
    selector: str
    params: tuple
    temps: tuple
    body: tuple
    source: str = field(default="", compare=False)


# -- directives ------------------------------------------------------------


@dataclass
class ClassDef(Node):
    name: str
    super_name: str  # None for a rootless class
    slot_names: tuple
    compact: bool = False


@dataclass
class MethodDef(Node):
    class_name: str
    class_side: bool
    method: MethodNode


@dataclass
class ExpressionStatement(Node):
    expr: Node


@dataclass
class AssertEqual(Node):
    actual: Node
    expected: Node


@dataclass
class AssertTrapCount(Node):
    expr: Node
    count: int


@dataclass
class Declare(Node):
    names: tuple
