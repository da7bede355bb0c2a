"""Primitive methods for the boot classes.

Each primitive is ``fn(interp, receiver, args)``.  Raising ``PrimitiveFailed``
resumes lookup in the superclass of the class that holds the primitive, which
is how ``3 = 'x'`` ends up in the root class's identity comparison.
"""

from .errors import DoesNotUnderstand, GhostError, PrimitiveFailed, ScriptAssertionFailed
from .object_model import LAYOUT, METHODS, MISSING, NAME, THIS_CLASS, Ref


def _int(value):
    if type(value) is not int:
        raise PrimitiveFailed("not a small integer")
    return value


def _text(interp, value):
    mem = interp.mem
    if not mem.is_bytes(value):
        raise PrimitiveFailed("not a string")
    return mem.text_of(value)


def _string(interp, text):
    return interp.mem.new_string(text)


def _bool(interp, flag):
    return interp.mem.boolean(flag)


def value_selector(arity):
    if arity == 0:
        return "value"
    return "value:" * arity


def call(interp, block, *args):
    return interp.send(block, value_selector(len(args)), list(args))


def truth(interp, value):
    mem = interp.mem
    if mem.identical(value, mem.true):
        return True
    if mem.identical(value, mem.false):
        return False
    raise GhostError(f"non-boolean {mem.describe(value)} used as a condition")


# -- root ------------------------------------------------------------------


def print_string(interp, rcvr, args):
    return _string(interp, interp.mem.describe(rcvr))


def print_limited(interp, rcvr, args):
    limit = _int(args[0])
    return _string(interp, interp.mem.describe(rcvr)[:limit])


def pointers_to(interp, rcvr, args):
    holders = []
    seen = set()
    for holder, _slot in interp.mem.references_to(rcvr):
        if holder.index not in seen:
            seen.add(holder.index)
            holders.append(holder)
    return interp.mem.new_array(holders)


def become(interp, rcvr, args):
    interp.mem.become(rcvr, args[0])
    return rcvr


def become_forward(interp, rcvr, args):
    interp.mem.become_forward(rcvr, args[0])
    return args[0]


def perform(interp, rcvr, args):
    selector = interp.mem.text_of(args[0])
    return interp.send(rcvr, selector, args[1:])


def perform_with_arguments(interp, rcvr, args):
    selector = interp.mem.text_of(args[0])
    return interp.send(rcvr, selector, interp.mem.array_items(args[1]))


def responds_to(interp, rcvr, args):
    from .dispatch import Found
    selector = interp.mem.text_of(args[0])
    return _bool(interp, type(interp.lookup(selector, interp.mem.class_of(rcvr))) is Found)


def inst_var_at(interp, rcvr, args):
    return interp.mem.slot_read(rcvr, _int(args[0]) - 1)


def inst_var_at_put(interp, rcvr, args):
    interp.mem.slot_write(rcvr, _int(args[0]) - 1, args[1])
    return args[1]


def identity_hash(interp, rcvr, args):
    if type(rcvr) is Ref:
        return interp.mem.resolve(rcvr).index
    return rcvr if type(rcvr) is int else 0


def does_not_understand(interp, rcvr, args):
    message = interp.reify(args[0])
    cls = interp.mem.describe_class_position(interp.mem.class_of(rcvr))
    raise DoesNotUnderstand(cls, message.selector)


def error(interp, rcvr, args):
    raise GhostError(interp.mem.text_of(args[0]) if interp.mem.is_bytes(args[0])
                     else interp.mem.describe(args[0]))


def assert_(interp, rcvr, args):
    if not truth(interp, args[0]):
        raise ScriptAssertionFailed("assertion failed")
    return rcvr


def if_nil(interp, rcvr, args):
    return rcvr


def if_not_nil(interp, rcvr, args):
    block = args[-1]
    return _cull(interp, block, rcvr)


def _cull(interp, block, value):
    if interp.mem.class_of(block) == interp.mem.core.block and interp.evaluator.block_arity(block) == 1:
        return call(interp, block, value)
    return call(interp, block)


ROOT = {
    "=": lambda i, r, a: _bool(i, i.mem.identical(r, a[0])),
    "~=": lambda i, r, a: _bool(i, not truth(i, i.send(r, "=", a))),
    "~~": lambda i, r, a: _bool(i, not i.mem.identical(r, a[0])),
    "hash": identity_hash,
    "identityHash": identity_hash,
    "isNil": lambda i, r, a: i.mem.false,
    "notNil": lambda i, r, a: i.mem.true,
    "ifNil:": if_nil,
    "ifNotNil:": if_not_nil,
    "ifNil:ifNotNil:": lambda i, r, a: _cull(i, a[1], r),
    "ifNotNil:ifNil:": lambda i, r, a: _cull(i, a[0], r),
    "printString": print_string,
    "displayString": print_string,
    "printStringLimitedTo:": print_limited,
    "class": lambda i, r, a: i.mem.class_of(r),
    "yourself": lambda i, r, a: r,
    "value": lambda i, r, a: r,
    "initialize": lambda i, r, a: r,
    "pointersTo": pointers_to,
    "become:": become,
    "becomeForward:": become_forward,
    "inspect": lambda i, r, a: r,
    "basicInspect": lambda i, r, a: r,
    "inspectorClass": lambda i, r, a: i.mem.intern("Inspector"),
    "perform:": perform,
    "perform:with:": perform,
    "perform:with:with:": perform,
    "perform:withArguments:": perform_with_arguments,
    "respondsTo:": responds_to,
    "instVarAt:": inst_var_at,
    "instVarAt:put:": inst_var_at_put,
    "doesNotUnderstand:": does_not_understand,
    "error:": error,
    "assert:": assert_,
    "isString": lambda i, r, a: i.mem.false,
    "isSymbol": lambda i, r, a: i.mem.false,
    "isInteger": lambda i, r, a: i.mem.false,
    "isBehavior": lambda i, r, a: i.mem.false,
    "isClassSide": lambda i, r, a: i.mem.false,
    "isMeta": lambda i, r, a: i.mem.false,
    "->": lambda i, r, a: i.mem.new_array([r, a[0]]),
}


# -- classes ---------------------------------------------------------------


def class_new(interp, rcvr, args):
    rt = interp.rt
    instance = interp.mem.instantiate(rt.real_class(rcvr), _int(args[0]) if args else 0)
    return instance


def class_basic_new(interp, rcvr, args):
    return class_new(interp, rcvr, args)


def compiled_method_at(interp, rcvr, args):
    mem = interp.mem
    md = mem.slot_read(rcvr, METHODS)
    found = MISSING if md is None else mem.dict_at(md, mem.text_of(args[0]))
    if found is MISSING:
        raise GhostError(f"{mem.describe(rcvr)} has no method #{mem.text_of(args[0])}")
    return found


def includes_selector(interp, rcvr, args):
    mem = interp.mem
    md = mem.slot_read(rcvr, METHODS)
    return _bool(interp, md is not None and mem.dict_at(md, mem.text_of(args[0])) is not MISSING)


def selectors(interp, rcvr, args):
    mem = interp.mem
    md = mem.slot_read(rcvr, METHODS)
    names = [] if md is None else sorted(mem.dict_keys(md))
    return mem.new_array([mem.intern(s) for s in names])


def subclass(interp, rcvr, args):
    mem = interp.mem
    rt = interp.rt
    compact = len(args) == 3 and truth(interp, args[2])
    return rt.define_class(mem.text_of(args[0]), rcvr, mem.text_of(args[1]).split(), compact)


def compile_(interp, rcvr, args):
    return interp.evaluator.define_method(rcvr, interp.mem.text_of(args[0]))


def find_nil_dict(interp, rcvr, args):
    from .class_method_proxies import ghost_find_class_with_nil_dict
    return ghost_find_class_with_nil_dict(interp.rt, rcvr)


CLASS = {
    "new": class_new,
    "basicNew": class_basic_new,
    "new:": class_new,
    "name": lambda i, r, a: i.mem.slot_read(r, NAME),
    "superclass": lambda i, r, a: i.mem.slot_read(r, 0),
    "printString": lambda i, r, a: i.mem.new_string(i.mem.text_of(i.mem.slot_read(r, NAME))),
    "compiledMethodAt:": compiled_method_at,
    "includesSelector:": includes_selector,
    "selectors": selectors,
    "instVarNames": lambda i, r, a: i.mem.slot_read(r, LAYOUT),
    "isBehavior": lambda i, r, a: i.mem.true,
    "isClassSide": lambda i, r, a: i.mem.false,
    "isInstanceSide": lambda i, r, a: i.mem.true,
    "instanceSide": lambda i, r, a: r,
    "isMeta": lambda i, r, a: i.mem.false,
    "isCompact": lambda i, r, a: _bool(i, i.mem.slot_read(r, 5) > 0),
    "subclass:instanceVariableNames:": subclass,
    "subclass:instanceVariableNames:compact:": subclass,
    "compile:": compile_,
    "ghostFindClassWithNilMethodDictInHierarchy": find_nil_dict,
}

METACLASS = {
    "isMeta": lambda i, r, a: i.mem.true,
    "isClassSide": lambda i, r, a: i.mem.true,
    "isInstanceSide": lambda i, r, a: i.mem.false,
    "instanceSide": lambda i, r, a: i.mem.slot_read(r, THIS_CLASS),
}

UNDEFINED = {
    "isNil": lambda i, r, a: i.mem.true,
    "notNil": lambda i, r, a: i.mem.false,
    "ifNil:": lambda i, r, a: call(i, a[0]),
    "ifNotNil:": lambda i, r, a: None,
    "ifNil:ifNotNil:": lambda i, r, a: call(i, a[0]),
    "ifNotNil:ifNil:": lambda i, r, a: call(i, a[1]),
    "printString": lambda i, r, a: i.mem.new_string("nil"),
}

# -- booleans --------------------------------------------------------------

TRUE = {
    "ifTrue:": lambda i, r, a: call(i, a[0]),
    "ifFalse:": lambda i, r, a: None,
    "ifTrue:ifFalse:": lambda i, r, a: call(i, a[0]),
    "ifFalse:ifTrue:": lambda i, r, a: call(i, a[1]),
    "and:": lambda i, r, a: call(i, a[0]),
    "or:": lambda i, r, a: r,
    "&": lambda i, r, a: a[0],
    "not": lambda i, r, a: i.mem.false,
    "xor:": lambda i, r, a: _bool(i, not truth(i, a[0])),
    "printString": lambda i, r, a: i.mem.new_string("true"),
}

FALSE = {
    "ifTrue:": lambda i, r, a: None,
    "ifFalse:": lambda i, r, a: call(i, a[0]),
    "ifTrue:ifFalse:": lambda i, r, a: call(i, a[1]),
    "ifFalse:ifTrue:": lambda i, r, a: call(i, a[0]),
    "and:": lambda i, r, a: r,
    "or:": lambda i, r, a: call(i, a[0]),
    "&": lambda i, r, a: r,
    "not": lambda i, r, a: i.mem.true,
    "xor:": lambda i, r, a: _bool(i, truth(i, a[0])),
    "printString": lambda i, r, a: i.mem.new_string("false"),
}

# -- integers --------------------------------------------------------------


def _div(interp, rcvr, args):
    d = _int(args[0])
    if d == 0:
        raise GhostError("ZeroDivide")
    return rcvr // d


def _mod(interp, rcvr, args):
    d = _int(args[0])
    if d == 0:
        raise GhostError("ZeroDivide")
    return rcvr % d


def to_do(interp, rcvr, args):
    stop, block = _int(args[0]), args[1]
    for k in range(rcvr, stop + 1):
        call(interp, block, k)
    return rcvr


def to_by_do(interp, rcvr, args):
    stop, step, block = _int(args[0]), _int(args[1]), args[2]
    if step == 0:
        raise GhostError("step must not be zero")
    k = rcvr
    while (k <= stop) if step > 0 else (k >= stop):
        call(interp, block, k)
        k += step
    return rcvr


def times_repeat(interp, rcvr, args):
    for _ in range(rcvr):
        call(interp, args[0])
    return rcvr


INTEGER = {
    "+": lambda i, r, a: r + _int(a[0]),
    "-": lambda i, r, a: r - _int(a[0]),
    "*": lambda i, r, a: r * _int(a[0]),
    "//": _div,
    "\\\\": _mod,
    "<": lambda i, r, a: _bool(i, r < _int(a[0])),
    ">": lambda i, r, a: _bool(i, r > _int(a[0])),
    "<=": lambda i, r, a: _bool(i, r <= _int(a[0])),
    ">=": lambda i, r, a: _bool(i, r >= _int(a[0])),
    "=": lambda i, r, a: _bool(i, r == _int(a[0])),
    "~=": lambda i, r, a: _bool(i, r != _int(a[0])),
    "abs": lambda i, r, a: abs(r),
    "negated": lambda i, r, a: -r,
    "max:": lambda i, r, a: max(r, _int(a[0])),
    "min:": lambda i, r, a: min(r, _int(a[0])),
    "between:and:": lambda i, r, a: _bool(i, _int(a[0]) <= r <= _int(a[1])),
    "even": lambda i, r, a: _bool(i, r % 2 == 0),
    "odd": lambda i, r, a: _bool(i, r % 2 == 1),
    "isZero": lambda i, r, a: _bool(i, r == 0),
    "sign": lambda i, r, a: (r > 0) - (r < 0),
    "bitAnd:": lambda i, r, a: r & _int(a[0]),
    "bitOr:": lambda i, r, a: r | _int(a[0]),
    "bitXor:": lambda i, r, a: r ^ _int(a[0]),
    "bitShift:": lambda i, r, a: r << _int(a[0]) if _int(a[0]) >= 0 else r >> -a[0],
    "isInteger": lambda i, r, a: i.mem.true,
    "printString": lambda i, r, a: i.mem.new_string(str(r)),
    "asString": lambda i, r, a: i.mem.new_string(str(r)),
    "to:do:": to_do,
    "to:by:do:": to_by_do,
    "timesRepeat:": times_repeat,
}

# -- strings and symbols ---------------------------------------------------


def concat(interp, rcvr, args):
    return _string(interp, _text(interp, rcvr) + _text(interp, args[0]))


def string_eq(interp, rcvr, args):
    mem = interp.mem
    other = args[0]
    if not mem.is_bytes(other):
        return mem.false
    return _bool(interp, mem.text_of(rcvr) == mem.text_of(other))


def copy_from_to(interp, rcvr, args):
    text = _text(interp, rcvr)
    start, stop = _int(args[0]), _int(args[1])
    return _string(interp, text[start - 1:stop])


STRING = {
    "size": lambda i, r, a: len(_text(i, r)),
    ",": concat,
    "=": string_eq,
    "printString": print_string,
    "displayString": lambda i, r, a: _string(i, _text(i, r)),
    "asString": lambda i, r, a: _string(i, _text(i, r)),
    "asSymbol": lambda i, r, a: i.mem.intern(_text(i, r)),
    "isString": lambda i, r, a: i.mem.true,
    "isEmpty": lambda i, r, a: _bool(i, not _text(i, r)),
    "notEmpty": lambda i, r, a: _bool(i, bool(_text(i, r))),
    "copyFrom:to:": copy_from_to,
    "reversed": lambda i, r, a: _string(i, _text(i, r)[::-1]),
    "asUppercase": lambda i, r, a: _string(i, _text(i, r).upper()),
    "includesSubstring:": lambda i, r, a: _bool(i, _text(i, a[0]) in _text(i, r)),
    "hash": lambda i, r, a: sum(_text(i, r).encode()) & 0x3FFFFFFF,
}

SYMBOL = {
    "size": lambda i, r, a: len(_text(i, r)),
    ",": concat,
    "printString": print_string,
    "displayString": lambda i, r, a: _string(i, _text(i, r)),
    "asString": lambda i, r, a: _string(i, _text(i, r)),
    "asSymbol": lambda i, r, a: r,
    "isSymbol": lambda i, r, a: i.mem.true,
    "isString": lambda i, r, a: i.mem.true,
    "numArgs": lambda i, r, a: _selector_arity(_text(i, r)),
}


def _selector_arity(text):
    from .dispatch import selector_arity
    return selector_arity(text)


# -- arrays ----------------------------------------------------------------


def _index(interp, rcvr, k):
    size = interp.mem.slot_count(rcvr)
    k = _int(k)
    if not 1 <= k <= size:
        raise GhostError(f"index {k} out of bounds for size {size}")
    return k - 1


def array_do(interp, rcvr, args):
    for item in interp.mem.array_items(rcvr):
        call(interp, args[0], item)
    return rcvr


def array_collect(interp, rcvr, args):
    return interp.mem.new_array([call(interp, args[0], x) for x in interp.mem.array_items(rcvr)])


def array_select(interp, rcvr, args):
    items = interp.mem.array_items(rcvr)
    return interp.mem.new_array([x for x in items if truth(interp, call(interp, args[0], x))])


def array_inject(interp, rcvr, args):
    acc = args[0]
    for item in interp.mem.array_items(rcvr):
        acc = call(interp, args[1], acc, item)
    return acc


def array_includes(interp, rcvr, args):
    for item in interp.mem.array_items(rcvr):
        if truth(interp, interp.send(item, "=", [args[0]])):
            return interp.mem.true
    return interp.mem.false


def array_detect_if_none(interp, rcvr, args):
    for item in interp.mem.array_items(rcvr):
        if truth(interp, call(interp, args[0], item)):
            return item
    return call(interp, args[1])


def array_first(interp, rcvr, args):
    items = interp.mem.array_items(rcvr)
    if not items:
        raise GhostError("collection is empty")
    return items[0]


def array_last(interp, rcvr, args):
    items = interp.mem.array_items(rcvr)
    if not items:
        raise GhostError("collection is empty")
    return items[-1]


ARRAY = {
    "at:": lambda i, r, a: i.mem.slot_read(r, _index(i, r, a[0])),
    "at:put:": lambda i, r, a: (i.mem.slot_write(r, _index(i, r, a[0]), a[1]), a[1])[1],
    "size": lambda i, r, a: i.mem.slot_count(r),
    "do:": array_do,
    "collect:": array_collect,
    "select:": array_select,
    "inject:into:": array_inject,
    "includes:": array_includes,
    "detect:ifNone:": array_detect_if_none,
    "first": array_first,
    "last": array_last,
    "isEmpty": lambda i, r, a: _bool(i, i.mem.slot_count(r) == 0),
    "notEmpty": lambda i, r, a: _bool(i, i.mem.slot_count(r) > 0),
    "copyWith:": lambda i, r, a: i.mem.new_array(i.mem.array_items(r) + [a[0]]),
}

ARRAY_CLASS = {
    "with:": lambda i, r, a: i.mem.new_array(a),
    "with:with:": lambda i, r, a: i.mem.new_array(a),
    "with:with:with:": lambda i, r, a: i.mem.new_array(a),
    "with:with:with:with:": lambda i, r, a: i.mem.new_array(a),
    "with:with:with:with:with:": lambda i, r, a: i.mem.new_array(a),
}

# -- blocks ----------------------------------------------------------------


def block_value(interp, rcvr, args):
    return interp.evaluator.call_block(rcvr, args)


def while_true(interp, rcvr, args):
    while truth(interp, interp.send(rcvr, "value")):
        if args:
            interp.send(args[0], "value")
    return None


def while_false(interp, rcvr, args):
    while not truth(interp, interp.send(rcvr, "value")):
        if args:
            interp.send(args[0], "value")
    return None


BLOCK = {
    "value": block_value,
    "value:": block_value,
    "value:value:": block_value,
    "value:value:value:": block_value,
    "value:value:value:value:": block_value,
    "valueWithArguments:": lambda i, r, a: block_value(i, r, i.mem.array_items(a[0])),
    "numArgs": lambda i, r, a: i.evaluator.block_arity(r),
    "whileTrue:": while_true,
    "whileFalse:": while_false,
    "whileTrue": while_true,
    "whileFalse": while_false,
}

# -- messages and methods --------------------------------------------------


def send_to(interp, rcvr, args):
    message = interp.reify(rcvr)
    return interp.send(args[0], message.selector, message.arguments)


MESSAGE = {
    "selector": lambda i, r, a: i.mem.slot_read(r, 0),
    "arguments": lambda i, r, a: i.mem.slot_read(r, 1),
    "lookupClass": lambda i, r, a: i.mem.slot_read(r, 2),
    "sendTo:": send_to,
    "printString": lambda i, r, a: i.mem.new_string(
        "a Message #" + i.mem.text_of(i.mem.slot_read(r, 0))),
}


def run_with_in(interp, rcvr, args):
    # (selector, arguments, receiver)
    return interp.execute_method(rcvr, args[2], interp.mem.array_items(args[1]))


def value_with_receiver(interp, rcvr, args):
    return interp.execute_method(rcvr, args[0], interp.mem.array_items(args[1]))


def sends_selector(interp, rcvr, args):
    from .script import nodes as n
    wanted = interp.mem.text_of(args[0])
    info = interp.evaluator.compiled_info(rcvr)
    stack = list(info.node.body)
    while stack:
        node = stack.pop()
        if isinstance(node, n.SENDS) and node.selector == wanted:
            return interp.mem.true
        for value in vars(node).values():
            if isinstance(value, n.Node):
                stack.append(value)
            elif isinstance(value, tuple):
                stack.extend(v for v in value if isinstance(v, n.Node))
    return interp.mem.false


def method_print(interp, rcvr, args):
    mem = interp.mem
    owner = mem.describe_class_position(mem.slot_read(rcvr, 2))
    return mem.new_string(f"{owner}>>{mem.text_of(mem.slot_read(rcvr, 1))}")


COMPILED_METHOD = {
    "getSource": lambda i, r, a: i.mem.new_string(i.mem.text_of(i.mem.slot_read(r, 0))),
    "selector": lambda i, r, a: i.mem.slot_read(r, 1),
    "methodClass": lambda i, r, a: i.mem.slot_read(r, 2),
    "sendsSelector:": sends_selector,
    "run:with:in:": run_with_in,
    "valueWithReceiver:arguments:": value_with_receiver,
    "numArgs": lambda i, r, a: i.method_arity(r),
    "printString": method_print,
}

PRIMITIVE_METHOD = {
    "selector": lambda i, r, a: i.mem.slot_read(r, 0),
    "run:with:in:": run_with_in,
    "valueWithReceiver:arguments:": value_with_receiver,
    "numArgs": lambda i, r, a: i.method_arity(r),
}

SYSTEM_DICT = {
    "at:": lambda i, r, a: _dict_at(i, r, a[0]),
    "at:put:": lambda i, r, a: (i.mem.dict_put(r, i.mem.text_of(a[0]), a[1]), a[1])[1],
    "includesKey:": lambda i, r, a: _bool(i, i.mem.dict_at(r, i.mem.text_of(a[0])) is not MISSING),
}


def _dict_at(interp, rcvr, key):
    value = interp.mem.dict_at(rcvr, interp.mem.text_of(key))
    if value is MISSING:
        raise GhostError(f"key not found: {interp.mem.describe(key)}")
    return value


def install(interp):
    mem = interp.mem
    core = mem.core
    tables = [
        (core.root, ROOT), (core.klass, CLASS), (core.metaclass, METACLASS),
        (core.undefined, UNDEFINED), (core.true, TRUE), (core.false, FALSE),
        (core.integer, INTEGER), (core.string, STRING), (core.symbol, SYMBOL),
        (core.array, ARRAY), (mem.class_of(core.array), ARRAY_CLASS), (core.block, BLOCK),
        (core.message, MESSAGE), (core.compiled_method, COMPILED_METHOD),
        (core.primitive_method, PRIMITIVE_METHOD), (core.system_dict, SYSTEM_DICT),
    ]
    for cls, table in tables:
        for selector, fn in table.items():
            interp.define_primitive(cls, selector, fn)

