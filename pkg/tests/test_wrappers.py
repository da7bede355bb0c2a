import pytest

from ghost.errors import DoesNotUnderstand, NotWrapped
from ghost.object_model import METHODS
from ghost.runtime import Runtime
from ghost.wrappers import unwrap_method, wrap_all_methods, wrap_method, wrapper_of

CALC = """
ObjectRoot subclass: #Calc instanceVariableNames: 'hits'.
!Calc methodsFor!
fact: n ^ n < 2 ifTrue: [1] ifFalse: [n * (self fact: n - 1)]
!
double: n ^ n * 2
!
broken ^ self noSuchThing
!
quad: n ^ self double: (self double: n)
! !
"""


@pytest.fixture
def rt():
    rt = Runtime()
    rt.run(CALC)
    return rt


def calc(rt):
    return rt.memory.global_at("Calc")


def kinds(rt, mark):
    return [(e["kind"], e.get("selector"), e.get("depth")) for e in rt.trace.since(mark)
            if e["kind"] in ("pre", "post")]


def test_hooks_see_the_message_and_the_answer(rt):
    seen = []
    wrap_method(rt, calc(rt), "double:",
                pre=lambda rt, i: seen.append(("pre", i.message.selector)),
                post=lambda rt, i, answer: seen.append(("post", answer)))
    assert rt.evaluate("Calc new double: 21") == 42
    assert seen == [("pre", "run:with:in:"), ("post", 42)]


def test_nested_brackets(rt):
    wrap_method(rt, calc(rt), "double:")
    mark = rt.trace.mark()
    assert rt.evaluate("Calc new quad: 3") == 12
    assert kinds(rt, mark) == [("pre", "double:", 0), ("post", "double:", 0),
                               ("pre", "double:", 0), ("post", "double:", 0)]
    wrap_method(rt, calc(rt), "fact:")
    mark = rt.trace.mark()
    rt.evaluate("Calc new fact: 3")
    assert kinds(rt, mark) == [("pre", "fact:", 0), ("pre", "fact:", 1), ("pre", "fact:", 2),
                               ("post", "fact:", 2), ("post", "fact:", 1), ("post", "fact:", 0)]


def test_post_skipped_when_the_method_fails(rt):
    posts = []
    wrapper = wrap_method(rt, calc(rt), "broken", post=lambda rt, i, a: posts.append(a))
    mark = rt.trace.mark()
    with pytest.raises(DoesNotUnderstand):
        rt.evaluate("Calc new broken")
    assert [k for k, _, _ in kinds(rt, mark)] == ["pre"]
    assert posts == []
    assert wrapper_of(rt, wrapper).depth == 0


def test_counts_and_rows(rt):
    proxy = wrap_method(rt, calc(rt), "fact:")
    rt.evaluate("Calc new fact: 4")
    wrapper = wrapper_of(rt, proxy)
    assert wrapper.counts["fact:"] == 4
    assert wrapper.rows() == [("Calc", "fact:", 4)]
    assert rt.evaluate("Ghost callsOf: #fact: in: (Calc compiledMethodAt: #fact:)") == 4


def test_unwrap_restores_the_original(rt):
    original = rt.evaluate("Calc compiledMethodAt: #double:")
    wrap_method(rt, calc(rt), "double:")
    unwrap_method(rt, calc(rt), "double:")
    mem = rt.memory
    assert mem.identical(mem.dict_at(mem.slot_read(calc(rt), METHODS), "double:"), original)
    before = rt.trace.interceptions
    assert rt.evaluate("Calc new double: 5") == 10
    assert rt.trace.interceptions == before
    with pytest.raises(NotWrapped):
        unwrap_method(rt, calc(rt), "double:")
    with pytest.raises(NotWrapped):
        unwrap_method(rt, calc(rt), "fact:")


def test_wrap_all_counts_every_selector(rt):
    rt.run("| c |\nc := Calc new.\n")
    proxy = wrap_all_methods(rt, calc(rt))
    # only instances made before the class was replaced point at the proxy
    assert rt.evaluate("c quad: 1") == 4
    wrapper = wrapper_of(rt, proxy)
    assert dict(wrapper.counts) == {"quad:": 1, "double:": 2}


def test_wrapping_from_a_script(rt):
    rt.run("| w |\nw := Ghost wrap: #fact: of: Calc.\n"
           "self assert: (Calc new fact: 5) equals: 120.\n"
           "self assert: (Ghost callsOf: #fact: in: w) equals: 5.\n"
           "Ghost unwrap: #fact: of: Calc.\n"
           "self assert: (Calc new fact: 5) equals: 120.\n")
