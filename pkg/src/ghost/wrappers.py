"""Method wrappers: hooks that run before and after a method executes.

A wrapped method is an ordinary method proxy whose handler brackets the
forwarded message with ``pre`` and ``post`` trace records (plus optional user
hooks).  If the wrapped method fails, ``post`` is skipped and the error
propagates unchanged.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .class_method_proxies import (compiled_method_of, create_class_proxy_and_replace,
                                   forwarder_instance_action)
from .dispatch import RUN_WITH_IN
from .errors import NotWrapped
from .ghost_core import (HandlerSpec, create_proxy_and_replace, forwarder_default_action,
                         new_handler, proxy_label, proxy_target, spec_of)
from .object_model import METHODS, MISSING, Ref


@dataclass
class MethodWrapper:
    """Python side of a wrapper handler: hooks, counters and the nesting depth."""

    class_name: str
    pre: Callable | None = None  # pre(rt, interception)
    post: Callable | None = None  # post(rt, interception, answer)
    counts: Counter = field(default_factory=Counter)
    depth: int = 0

    def around(self, rt, i, selector, body):
        rt.trace.record("pre", proxy=proxy_label(rt, i.proxy), selector=selector, depth=self.depth)
        if self.pre is not None:
            self.pre(rt, i)
        self.counts[selector] += 1
        self.depth += 1
        try:
            rt.trace.record("exec", selector=selector, depth=self.depth - 1)
            answer = body()
        finally:
            self.depth -= 1
        if self.post is not None:
            self.post(rt, i, answer)
        rt.trace.record("post", proxy=proxy_label(rt, i.proxy), selector=selector, depth=self.depth)
        return answer

    def rows(self):
        """(class name, selector, count) report rows."""
        return [(self.class_name, sel, n) for sel, n in sorted(self.counts.items())]


def executed_selector(rt, i) -> str:
    if i.message.selector == RUN_WITH_IN:
        return rt.memory.text_of(i.message.arguments[0])
    return i.message.selector


def wrapper_default_action(rt, i):
    wrapper = wrapper_of(rt, i.proxy)
    target = proxy_target(rt, i.proxy)

    def forward():
        return rt.interp.send(target, i.message.selector, i.message.arguments)

    return wrapper.around(rt, i, executed_selector(rt, i), forward)


def wrapper_spec(wrapper: MethodWrapper) -> HandlerSpec:
    return HandlerSpec(default_action=wrapper_default_action, name="MethodWrapper",
                       state={"wrapper": wrapper})


def wrap_method(rt, cls, selector: str, pre=None, post=None) -> Ref:
    """Replace ``cls>>selector`` by a proxy whose handler runs the hooks."""
    real = rt.real_class(cls)
    method = compiled_method_of(rt, real, selector)
    wrapper = MethodWrapper(rt.memory.class_name(real), pre, post)
    proxy = create_proxy_and_replace(rt, method, new_handler(rt, wrapper_spec(wrapper)))
    rt.wrapped[(real.index, selector)] = proxy
    return proxy


def wrapper_of(rt, proxy) -> MethodWrapper:
    return spec_of(rt, rt.interp.send(proxy, "proxyHandler")).state["wrapper"]


def unwrap_method(rt, cls, selector: str) -> None:
    mem = rt.memory
    real = rt.real_class(cls)
    proxy = rt.wrapped.pop((real.index, selector), None)
    entry = mem.dict_at(mem.slot_read(real, METHODS), selector)
    if proxy is None or entry is MISSING or not mem.identical(entry, proxy):
        raise NotWrapped(f"{mem.class_name(real)}>>{selector} is not wrapped")
    original = proxy_target(rt, proxy)
    mem.become_forward(proxy, original)


def wrap_all_methods(rt, cls, pre=None, post=None) -> Ref:
    """One class proxy whose instance-side action wraps every method."""
    wrapper = MethodWrapper(rt.memory.class_name(rt.real_class(cls)), pre, post)

    def instance_action(rt, i):
        return wrapper.around(rt, i, i.message.selector, lambda: forwarder_instance_action(rt, i))

    spec = HandlerSpec(default_action=forwarder_default_action, instance_action=instance_action,
                       name="ClassWrapper", state={"wrapper": wrapper})
    return create_class_proxy_and_replace(rt, cls, new_handler(rt, spec))
