import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import PRELUDE, random_expr

from ghost.errors import LexError, ParseError, ScriptAssertionFailed, UnboundVariable
from ghost.runtime import Runtime
from ghost.script import nodes as n
from ghost.script.lexer import tokenize
from ghost.script.parser import parse_expression, parse_method, parse_program
from ghost.script.printer import print_expr, print_method


def kinds(text):
    return [(t.kind, t.lexeme) for t in tokenize(text)][:-1]


def test_negative_literals_only_where_an_operand_is_expected():
    assert kinds("a-1 - -2") == [("identifier", "a"), ("binaryOp", "-"), ("integer", "1"),
                                 ("binaryOp", "-"), ("integer", "-2")]
    assert kinds("x: -3") == [("keyword", "x:"), ("integer", "-3")]


def test_comments_strings_and_symbols():
    assert kinds("\"note\" 'it''s' #at:put: #+ #'two words'") == [
        ("string", "'it''s'"), ("symbol", "#at:put:"), ("symbol", "#+"), ("symbol", "#'two words'")]
    assert parse_expression("'it''s'") == n.Literal("string", "it's")
    assert parse_expression("#'two words'") == n.Literal("symbol", "two words")


def test_precedence():
    tree = parse_expression("a foo: b + c bar baz: d")
    assert tree == n.KeywordSend(
        n.VariableRef("a"), "foo:baz:",
        (n.BinarySend(n.VariableRef("b"), "+", n.UnarySend(n.VariableRef("c"), "bar")),
         n.VariableRef("d")))


def test_positions_are_ignored_by_equality():
    assert parse_expression("a  +   b") == parse_expression("a + b")
    shifted, plain = parse_expression("  a + b"), parse_expression("a + b")
    assert shifted == plain and shifted.receiver.pos != plain.receiver.pos


@pytest.mark.parametrize("text, error", [
    ("x := ", ParseError),
    ("[:a b]", ParseError),
    ("'open", LexError),
    ("3 $", LexError),
    ("(1 + 2", ParseError),
])
def test_errors_carry_positions(text, error):
    with pytest.raises(error) as info:
        parse_program(text)
    assert info.value.pos is not None and info.value.exit_code == 3


def test_chunks_and_directives():
    directives = parse_program(PRELUDE)
    classes = [d for d in directives if isinstance(d, n.ClassDef)]
    methods = [d for d in directives if isinstance(d, n.MethodDef)]
    assert [(c.name, c.slot_names) for c in classes] == [("Point", ("x", "y")), ("User", ("name",))]
    assert [(m.class_name, m.class_side, m.method.selector) for m in methods] == [
        ("Point", True, "x:y:"), ("Point", False, "setX:y:"), ("Point", False, "x"),
        ("Point", False, "y"), ("User", True, "named:"), ("User", False, "setName:"),
        ("User", False, "username")]
    assert methods[-1].method.source == "username ^ name"


def test_assert_directives():
    prog = parse_program("self assert: 3 + 4 equals: 7.\nself assert: x foo trapCount: 2.\n")
    assert isinstance(prog[0], n.AssertEqual) and isinstance(prog[1], n.AssertTrapCount)
    assert prog[1].count == 2


def test_method_round_trip():
    for source in ("fact: n ^ n < 2 ifTrue: [1] ifFalse: [n * (self fact: n - 1)]",
                   "+ other | t | t := other. ^ t", "at: i put: v ^ super at: i put: v", "yourself"):
        method = parse_method(source)
        assert parse_method(print_method(method)) == method


def test_seeded_expression_round_trip():
    rng = random.Random(2)
    for _ in range(300):
        tree = random_expr(rng)
        assert parse_expression(print_expr(tree)) == tree


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_expression_round_trip_property(seed):
    tree = random_expr(random.Random(seed))
    printed = print_expr(tree)
    again = parse_expression(printed)
    assert again == tree
    assert print_expr(again) == printed


# -- evaluation ---------------------------------------------------------------------


@pytest.fixture
def rt():
    rt = Runtime()
    rt.run(PRELUDE)
    return rt


def test_assertion_failure_reports_position(rt):
    with pytest.raises(ScriptAssertionFailed) as info:
        rt.run("\nself assert: 1 + 1 equals: 3.\n")
    assert info.value.exit_code == 1 and info.value.pos[0] == 2


def test_trap_count_assertion(rt):
    rt.run("| p |\np := TargetBasedProxy createProxyFor: (Point x: 1 y: 2)"
           " handler: SimpleForwarderHandler new.\n"
           "self assert: p x trapCount: 1.\n")
    with pytest.raises(ScriptAssertionFailed):
        rt.run("self assert: p proxyTarget trapCount: 1.\n")


def test_unbound_variable(rt):
    with pytest.raises(UnboundVariable):
        rt.evaluate("nowhere foo")


def test_workspace_and_blocks(rt):
    rt.run("| total |\ntotal := 0.\n(Array with: 1 with: 2 with: 3) do: [:x | total := total + x].\n")
    assert rt.evaluate("total") == 6
    assert rt.evaluate("[:a | | t | t := a * 2. t + 1] value: 4") == 9
    assert rt.memory.text_of(rt.evaluate("3 > 2 ifTrue: ['yes'] ifFalse: ['no']")) == "yes"


def test_structural_equality_in_assertions(rt):
    rt.run("self assert: 'abc' equals: 'abc'.\n"
           "self assert: (Array with: 1 with: 'x') equals: (Array with: 1 with: 'x').\n"
           "self assert: #foo equals: #foo.\n")
    with pytest.raises(ScriptAssertionFailed):
        rt.run("self assert: 'abc' equals: #abc.\n")
