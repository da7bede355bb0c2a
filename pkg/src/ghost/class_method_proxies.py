"""Proxies for classes and for methods.

A class proxy must itself look like a class to the dispatcher: slot 0 is its
superclass (``MethodLookupInterceptionDelegator``) and slot 1 its method
dictionary (nil).  Messages sent to the proxy trap through ``ProxyTrap`` as
usual, while messages sent to instances of the replaced class hit the nil
dictionary of the proxy *as a class* and land in the delegator's
``cannotInterpret:`` with ``self`` bound to the instance.

Method proxies need no class of their own: a ``TargetBasedProxy`` sitting in a
method dictionary receives ``run:with:in:`` and the handler maps that to
``handleMethodExecution:``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dispatch import CANNOT_INTERPRET, RUN_WITH_IN, Found, NilDictionary
from .errors import ClassDefinitionError, FatalRuntime, GhostError, PrimitiveFailed
from .ghost_core import (METHOD_EXECUTION_OP, Interception, create_proxy_and_replace,
                         handle_instance_interception, handle_method_execution, proxy_handler,
                         proxy_target, replace_with, spec_of)
from .object_model import METHODS, MISSING, SUPERCLASS, Ref

FIND_NIL_DICT = "ghostFindClassWithNilMethodDictInHierarchy"
CLASS_PROXY_IVARS = ("superclass", "methodDict", "target", "handler")


@dataclass
class ClassProxyClasses:
    delegator: Ref  # MethodLookupInterceptionDelegator
    proxy_class: Ref  # TargetBasedClassProxy


def install_class_proxies(rt) -> ClassProxyClasses:
    mem, interp = rt.memory, rt.interp
    delegator = mem.define_class("MethodLookupInterceptionDelegator", None)
    interp.define_primitive(delegator, CANNOT_INTERPRET, _instance_trap_primitive)
    proxy_class = mem.define_class("TargetBasedClassProxy", rt.traps.trap,
                                   list(CLASS_PROXY_IVARS), compact=True)
    interp.define_primitive(proxy_class, "proxyTarget", lambda i, r, a: i.mem.slot_read(r, 2))
    interp.define_primitive(proxy_class, "proxyHandler", lambda i, r, a: i.mem.slot_read(r, 3))
    interp.define_primitive(proxy_class, FIND_NIL_DICT, lambda i, r, a: r)
    meta = mem.class_of(proxy_class)
    interp.define_primitive(meta, "createProxyFor:handler:",
                            lambda i, r, a: create_class_proxy_for(i.rt, a[0], a[1], r))
    interp.define_primitive(meta, "createProxyAndReplace:handler:",
                            lambda i, r, a: create_class_proxy_and_replace(i.rt, a[0], a[1], r))
    rt.class_proxies = ClassProxyClasses(delegator, proxy_class)
    return rt.class_proxies


# -- class proxies ---------------------------------------------------------------


def create_class_proxy_for(rt, cls, handler, proxy_class=None) -> Ref:
    mem = rt.memory
    if not mem.is_class(cls):
        raise ClassDefinitionError(f"{mem.describe(cls)} is not a class")
    proxy = mem.instantiate(proxy_class or rt.class_proxies.proxy_class)
    # proxyInitialize: the dispatcher must be able to use the proxy as a class
    mem.slot_write(proxy, SUPERCLASS, rt.class_proxies.delegator)
    mem.slot_write(proxy, METHODS, None)
    mem.slot_write(proxy, 2, cls)
    mem.slot_write(proxy, 3, handler)
    return proxy


def create_class_proxy_and_replace(rt, cls, handler, proxy_class=None) -> Ref:
    rt.memory.check_becomeable(cls)
    proxy = create_class_proxy_for(rt, cls, handler, proxy_class)
    return replace_with(rt, cls, proxy, 2)


def is_class_proxy(rt, value) -> bool:
    mem = rt.memory
    return type(value) is Ref and mem.is_live(value) and \
        mem.class_of(value) == rt.class_proxies.proxy_class


def ghost_find_class_with_nil_dict(rt, start):
    """First class in the chain from ``start`` with a nil method dictionary, else nil."""
    mem = rt.memory
    cls = start
    while cls is not None:
        if not mem.is_class_shaped(cls):
            return None
        if is_class_proxy(rt, cls) or mem.slot_read(cls, METHODS) is None:
            return mem.resolve(cls)
        cls = mem.slot_read(cls, SUPERCLASS)
    return None


def instance_trap(rt, receiver, message):
    """``cannotInterpret:`` of MethodLookupInterceptionDelegator; ``receiver`` is the instance."""
    proxy = rt.interp.send(message.lookup_class, FIND_NIL_DICT)
    if proxy is None:
        raise FatalRuntime(f"no class with a nil method dictionary above "
                           f"{rt.memory.describe_class_position(message.lookup_class)}")
    handler = proxy_handler(rt, proxy)
    return handle_instance_interception(rt, handler, Interception(message, proxy, receiver))


def _instance_trap_primitive(interp, receiver, args):
    return instance_trap(interp.rt, receiver, interp.reify(args[0]))


def execute_from(rt, receiver, selector, args, start):
    """Look ``selector`` up from ``start`` and run it on ``receiver`` without sending to it."""
    interp, mem = rt.interp, rt.memory
    origin = start
    while True:
        outcome = interp.lookup(selector, start)
        if type(outcome) is Found:
            kind = interp.method_kind(outcome.entry)
            if kind == "foreign":
                return interp.run_foreign(outcome.entry, selector, args, receiver)
            if kind == "primitive":
                try:
                    return mem.get(outcome.entry).native.fn(interp, receiver, args)
                except PrimitiveFailed:
                    start = mem.slot_read(outcome.defining_class, SUPERCLASS)
                    if start is None:
                        break
                    continue
            return interp.execute_method(outcome.entry, receiver, args)
        if type(outcome) is NilDictionary:
            # another proxy further up: let it trap with itself as the lookup class
            return interp._cannot_interpret(receiver, selector, args, outcome.trapping_class,
                                            outcome.trapping_class)
        break
    return interp._does_not_understand(receiver, selector, args, origin)


def forwarder_instance_action(rt, i: Interception):
    original = proxy_target(rt, i.proxy)
    return execute_from(rt, i.receiver, i.message.selector, i.message.arguments, original)


# -- method proxies --------------------------------------------------------------


def compiled_method_of(rt, cls, selector):
    mem = rt.memory
    real = rt.real_class(cls)
    md = mem.slot_read(real, METHODS)
    entry = MISSING if md is None else mem.dict_at(md, selector)
    if entry is MISSING or rt.interp.method_kind(entry) != "compiled":
        raise GhostError(f"{mem.describe(real)} has no compiled method #{selector}")
    return entry


def create_method_proxy_and_replace(rt, cls, selector, handler) -> Ref:
    method = compiled_method_of(rt, cls, selector)
    spec = spec_of(rt, handler)
    if spec.method_execution_action is None:
        spec.method_execution_action = handle_method_execution
    spec.special_messages[RUN_WITH_IN] = METHOD_EXECUTION_OP
    return create_proxy_and_replace(rt, method, handler)
