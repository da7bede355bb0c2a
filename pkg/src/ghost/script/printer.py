"""Pretty-printer producing text that reparses to an equal tree."""

import re

from . import nodes as n

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = re.compile(r"([A-Za-z_][A-Za-z0-9_]*:)+")
_BINARY = re.compile(r"[-+*/\\<>=~@%&?,]+")

# how tightly each node binds; a child that binds looser than its slot allows gets parens
_LEVEL = {n.UnarySend: 1, n.BinarySend: 2, n.KeywordSend: 3, n.Assignment: 4}


def _level(node):
    return _LEVEL.get(type(node), 0)


def _wrap(node, max_level):
    text = print_expr(node)
    return f"({text})" if _level(node) > max_level else text


def print_literal(node: n.Literal) -> str:
    if node.kind == "int":
        return str(node.value)
    if node.kind == "string":
        return "'" + node.value.replace("'", "''") + "'"
    if node.kind == "symbol":
        v = node.value
        if _IDENT.fullmatch(v) or _KEYWORDS.fullmatch(v) or _BINARY.fullmatch(v):
            return "#" + v
        return "#'" + v.replace("'", "''") + "'"
    return node.kind


def print_expr(node) -> str:
    if isinstance(node, n.Literal):
        return print_literal(node)
    if isinstance(node, n.VariableRef):
        return node.name
    if isinstance(node, n.Super):
        return "super"
    if isinstance(node, n.Assignment):
        return f"{node.name} := {print_expr(node.value)}"
    if isinstance(node, n.UnarySend):
        return f"{_wrap(node.receiver, 1)} {node.selector}"
    if isinstance(node, n.BinarySend):
        return f"{_wrap(node.receiver, 2)} {node.selector} {_wrap(node.arg, 1)}"
    if isinstance(node, n.KeywordSend):
        parts = re.findall(r"[^:]+:", node.selector)
        pieces = [_wrap(node.receiver, 2)]
        for part, arg in zip(parts, node.args):
            pieces.append(f"{part} {_wrap(arg, 2)}")
        return " ".join(pieces)
    if isinstance(node, n.Block):
        head = "".join(f":{p} " for p in node.params)
        if node.params:
            head += "| "
        if node.temps:
            head += "| " + " ".join(node.temps) + " | "
        return "[" + head + print_statements(node.body) + "]"
    if isinstance(node, n.Return):
        return "^ " + print_expr(node.value)
    if isinstance(node, n.Sequence):
        return print_statements(node.statements)
    raise TypeError(f"cannot print {type(node).__name__}")


def print_statements(statements) -> str:
    return ". ".join(print_expr(s) for s in statements)


def print_method(method: n.MethodNode) -> str:
    if not method.params:
        pattern = method.selector
    elif _BINARY.fullmatch(method.selector):
        pattern = f"{method.selector} {method.params[0]}"
    else:
        parts = re.findall(r"[^:]+:", method.selector)
        pattern = " ".join(f"{k} {p}" for k, p in zip(parts, method.params))
    text = pattern
    if method.temps:
        text += " | " + " ".join(method.temps) + " |"
    if method.body:
        text += " " + print_statements(method.body)
    return text
