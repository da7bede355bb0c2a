"""Proxies and handlers for regular objects.

The trap hierarchy is two classes: ``InterceptionDelegator`` (rootless, its only
method is ``cannotInterpret:``) and ``ProxyTrap`` below it with a nil method
dictionary.  Proxy classes subclass ``ProxyTrap``; whatever they define is
understood, everything else is intercepted and handed to the proxy's handler.

Handlers are ordinary heap objects whose ``native`` payload is a
``HandlerSpec``, so several proxies can share one handler and observe each
other's table changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .dispatch import CANNOT_INTERPRET, RUN_WITH_IN, MessageReification
from .errors import ClassDefinitionError, GhostError, HandlerConfigError
from .object_model import METHODS, Ref

METHOD_EXECUTION_OP = "handleMethodExecution:"

Operation = Callable  # op(runtime, interception) -> value


@dataclass
class Interception:
    message: MessageReification
    proxy: object
    receiver: object


@dataclass
class HandlerSpec:
    default_action: Operation | None = None
    special_messages: dict = field(default_factory=dict)  # selector -> operation name
    operations: dict = field(default_factory=dict)  # operation name -> op
    instance_action: Operation | None = None
    method_execution_action: Operation | None = None
    name: str = "handler"
    state: dict = field(default_factory=dict)


@dataclass
class TrapHierarchy:
    delegator: Ref
    trap: Ref
    proxy_class: Ref  # TargetBasedProxy
    handler_class: Ref  # SimpleForwarderHandler


# -- handler objects ---------------------------------------------------------


def new_handler(rt, spec: HandlerSpec, cls=None) -> Ref:
    """Heap object carrying ``spec``; instances of SimpleForwarderHandler by default."""
    return rt.memory.alloc(cls or rt.traps.handler_class, [], native=spec)


def spec_of(rt, handler) -> HandlerSpec:
    if type(handler) is Ref:
        spec = rt.memory.get(handler).native
        if isinstance(spec, HandlerSpec):
            return spec
    raise HandlerConfigError(f"{rt.memory.describe(handler)} is not a handler")


def proxy_target(rt, proxy):
    return rt.interp.send(proxy, "proxyTarget")


def proxy_handler(rt, proxy):
    return rt.interp.send(proxy, "proxyHandler")


def proxy_label(rt, proxy):
    return rt.memory.resolve(proxy).index if type(proxy) is Ref else proxy


# -- dispatching interceptions -----------------------------------------------


def handle_interception(rt, handler, i: Interception):
    """Special-message table first, then the default action."""
    spec = spec_of(rt, handler)
    selector = i.message.selector
    op_name = spec.special_messages.get(selector)
    if op_name is not None:
        op = spec.operations.get(op_name)
        if op is None and op_name == METHOD_EXECUTION_OP:
            op = spec.method_execution_action
        if op is None:
            raise HandlerConfigError(f"{spec.name} has no operation {op_name} for #{selector}")
        action = "methodExec" if op_name == METHOD_EXECUTION_OP else f"special:{op_name}"
        rt.trace.record_interception(proxy_label(rt, i.proxy), selector, action)
        return op(rt, i)
    if spec.default_action is None:
        raise HandlerConfigError(f"{spec.name} has no default action")
    rt.trace.record_interception(proxy_label(rt, i.proxy), selector, "forwarded")
    return spec.default_action(rt, i)


def handle_instance_interception(rt, handler, i: Interception):
    spec = spec_of(rt, handler)
    if spec.instance_action is None:
        raise HandlerConfigError(f"{spec.name} cannot handle messages to instances")
    rt.trace.record_interception(proxy_label(rt, i.proxy), i.message.selector, "instance")
    return spec.instance_action(rt, i)


def _delegator_cannot_interpret(interp, receiver, args):
    rt = interp.rt
    message = interp.reify(args[0])
    handler = proxy_handler(rt, receiver)
    return handle_interception(rt, handler, Interception(message, receiver, receiver))


# -- the forwarder -------------------------------------------------------------


def forwarder_default_action(rt, i: Interception):
    selector = i.message.selector
    rt.trace.record("log", text=f"Message #{selector} intercepted")
    target = proxy_target(rt, i.proxy)
    answer = rt.interp.send(target, selector, i.message.arguments)
    rt.trace.record("log", text="The message was forwarded to target")
    if rt.memory.identical(answer, target):
        return i.proxy
    return answer


def handle_method_execution(rt, i: Interception):
    """``run:with:in:`` reached the handler: run the target method on the real receiver."""
    args = i.message.arguments
    if i.message.selector != RUN_WITH_IN or len(args) != 3:
        raise HandlerConfigError(f"#{i.message.selector} is not a method execution")
    method = proxy_target(rt, i.proxy)
    receiver = args[2]
    arguments = rt.memory.array_items(args[1])
    return rt.interp.value_with_receiver(method, receiver, arguments)


def _describe_proxy(rt, i):
    return f"Proxy on {rt.memory.describe(proxy_target(rt, i.proxy))}"


def handle_print_string(rt, i):
    return rt.memory.new_string(_describe_proxy(rt, i))


def handle_print_string_limited(rt, i):
    limit = i.message.arguments[0]
    if type(limit) is not int:
        raise GhostError("printStringLimitedTo: needs an integer")
    return rt.memory.new_string(_describe_proxy(rt, i)[:limit])


def handle_inspect(rt, i):
    rt.trace.record("log", text=_describe_proxy(rt, i))
    return i.proxy


def handle_inspector_class(rt, i):
    return rt.memory.intern("ProxyInspector")


FORWARDER_OPERATIONS = {
    METHOD_EXECUTION_OP: handle_method_execution,
    "handleBasicInspect:": handle_inspect,
    "handleInspect:": handle_inspect,
    "handleInspectorClass:": handle_inspector_class,
    "handlePrintStringLimitedTo:": handle_print_string_limited,
    "handlePrintString:": handle_print_string,
}


def debugging_table() -> dict:
    return {
        "basicInspect": "handleBasicInspect:",
        "inspect": "handleInspect:",
        "inspectorClass": "handleInspectorClass:",
        "printStringLimitedTo:": "handlePrintStringLimitedTo:",
        "printString": "handlePrintString:",
    }


def forwarder_spec() -> HandlerSpec:
    from .class_method_proxies import forwarder_instance_action
    return HandlerSpec(
        default_action=forwarder_default_action,
        special_messages={RUN_WITH_IN: METHOD_EXECUTION_OP},
        operations=dict(FORWARDER_OPERATIONS),
        instance_action=forwarder_instance_action,
        method_execution_action=handle_method_execution,
        name="SimpleForwarderHandler",
    )


def set_special_messages(rt, handler, table: dict) -> None:
    spec_of(rt, handler).special_messages = dict(table)


# -- proxy creation ------------------------------------------------------------


def create_proxy_for(rt, target, handler, cls=None) -> Ref:
    cls = cls or rt.traps.proxy_class
    proxy = rt.memory.instantiate(cls)
    rt.memory.slot_write(proxy, 0, target)
    rt.memory.slot_write(proxy, 1, handler)
    return proxy


def replace_with(rt, target, proxy, target_slot) -> Ref:
    """Swap ``proxy`` in for ``target`` and point the proxy back at the original."""
    mem = rt.memory
    target = mem.check_becomeable(target)
    mem.become(target, proxy)
    # ``target`` now holds the proxy; ``proxy`` holds the original object
    mem.slot_write(target, target_slot, proxy)
    return target


def create_proxy_and_replace(rt, target, handler, cls=None) -> Ref:
    rt.memory.check_becomeable(target)
    proxy = create_proxy_for(rt, None, handler, cls)
    return replace_with(rt, target, proxy, 0)


# -- installation --------------------------------------------------------------


def install_trap_hierarchy(rt) -> TrapHierarchy:
    if getattr(rt, "traps", None) is not None:
        raise ClassDefinitionError("trap hierarchy is already installed")
    mem, interp = rt.memory, rt.interp
    delegator = mem.define_class("InterceptionDelegator", None)
    interp.define_primitive(delegator, CANNOT_INTERPRET, _delegator_cannot_interpret)
    trap = mem.define_class("ProxyTrap", delegator)
    mem.slot_write(trap, METHODS, None)
    proxy_class = mem.define_class("TargetBasedProxy", trap, ["target", "handler"], compact=True)
    interp.define_primitive(proxy_class, "proxyTarget", lambda i, r, a: i.mem.slot_read(r, 0))
    interp.define_primitive(proxy_class, "proxyHandler", lambda i, r, a: i.mem.slot_read(r, 1))
    meta = mem.class_of(proxy_class)
    interp.define_primitive(meta, "createProxyFor:handler:",
                            lambda i, r, a: create_proxy_for(i.rt, a[0], a[1], r))
    interp.define_primitive(meta, "createProxyAndReplace:handler:",
                            lambda i, r, a: create_proxy_and_replace(i.rt, a[0], a[1], r))

    handler_class = mem.define_class("SimpleForwarderHandler", mem.core.root)
    hmeta = mem.class_of(handler_class)
    interp.define_primitive(hmeta, "new", lambda i, r, a: new_handler(i.rt, forwarder_spec(), r))
    interp.define_primitive(handler_class, "enableDebugging", _enable_debugging)
    interp.define_primitive(handler_class, "clearSpecialMessages", _clear_special)
    interp.define_primitive(handler_class, "specialSelectors", _special_selectors)
    rt.traps = TrapHierarchy(delegator, trap, proxy_class, handler_class)
    return rt.traps


def _enable_debugging(interp, handler, args):
    set_special_messages(interp.rt, handler, debugging_table())
    return handler


def _clear_special(interp, handler, args):
    set_special_messages(interp.rt, handler, {})
    return handler


def _special_selectors(interp, handler, args):
    mem = interp.mem
    keys = sorted(spec_of(interp.rt, handler).special_messages)
    return mem.new_array([mem.intern(k) for k in keys])
