"""Heap, object table, class objects and reference swapping.

Every heap object lives in one slot of an object table.  Clients hold
:class:`Ref` handles (table ordinals), so ``become`` is an exchange of two
table payloads and ``become_forward`` plants a forwarding entry.  Slot values
are ``None`` (nil), a plain ``int`` (immediate small integer) or a ``Ref``.

Class objects keep their metadata in ordinary slots so that an object graph
containing classes can be serialized without side tables::

    0 superclass   1 methodDict   2 name   3 instVarNames   4 format   5 compactIndex

Metaclasses add ``6 thisClass``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ClassDefinitionError, FatalRuntime, RefusedBecome, SlotError, SwapFault

# footprint model, 32-bit words
SLOT_SIZE = 4
REGULAR_HEADER_SMALL = 8
REGULAR_HEADER_LARGE = 12
COMPACT_HEADER_SMALL = 4
COMPACT_HEADER_LARGE = 8
LARGE_BODY_THRESHOLD = 255
MAX_COMPACT_CLASSES = 31

SUPERCLASS, METHODS, NAME, LAYOUT, FORMAT, COMPACT, THIS_CLASS = range(7)
CLASS_IVARS = ("superclass", "methodDict", "name", "instVarNames", "format", "compactIndex")
METACLASS_IVARS = CLASS_IVARS + ("thisClass",)

# format word
FIXED, VARIABLE, BYTES = 0, 1, 2

CLASS_REF_SLOT = -1  # marks the class-reference position in references_to results


class Ref:
    """Opaque handle to an object-table slot."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def __eq__(self, other):
        return type(other) is Ref and other.index == self.index

    def __hash__(self):
        return hash(("ref", self.index))

    def __repr__(self):
        return f"<#{self.index}>"


class Forward:
    __slots__ = ("to",)

    def __init__(self, to: Ref):
        self.to = to


class Swapped:
    """Tombstone for a graph member that no longer exists in primary memory."""

    __slots__ = ("graph_id",)

    def __init__(self, graph_id: int):
        self.graph_id = graph_id


class HeapObject:
    __slots__ = ("cls", "slots", "body", "native", "cache")

    def __init__(self, cls, slots=None, body=None, native=None):
        self.cls = cls
        self.slots = slots
        self.body = body
        self.native = native
        self.cache = None

    def body_bytes(self) -> int:
        if self.body is not None:
            return len(self.body)
        return len(self.slots) * SLOT_SIZE


def header_size(compact: bool, body_bytes: int) -> int:
    if body_bytes > LARGE_BODY_THRESHOLD:
        return COMPACT_HEADER_LARGE if compact else REGULAR_HEADER_LARGE
    return COMPACT_HEADER_SMALL if compact else REGULAR_HEADER_SMALL


def footprint(compact: bool, body_bytes: int) -> int:
    return header_size(compact, body_bytes) + body_bytes


@dataclass
class CoreClasses:
    root: Ref
    klass: Ref
    metaclass: Ref
    undefined: Ref
    true: Ref
    false: Ref
    integer: Ref
    symbol: Ref
    string: Ref
    array: Ref
    method_dict: Ref
    system_dict: Ref
    compiled_method: Ref
    primitive_method: Ref
    message: Ref
    block: Ref


class ObjectMemory:
    """The object table plus everything that needs a whole-heap view."""

    def __init__(self):
        self.table: list = []
        self.special: set[int] = set()
        self.symbols: dict[str, Ref] = {}
        self.registry: dict[str, Ref] = {}  # class and metaclass names
        self.compact_classes: dict[int, Ref] = {}
        self.opaque: set[int] = set()  # classes whose instances carry native state
        self.epoch = 0  # bumped on every reference swap; invalidates dictionary caches
        self._boot()

    # ------------------------------------------------------------------
    # table access

    def alloc(self, cls, slots=None, body=None, native=None) -> Ref:
        ref = Ref(len(self.table))
        self.table.append(HeapObject(cls, slots, body, native))
        return ref

    def resolve(self, ref: Ref) -> Ref:
        entry = self.table[ref.index]
        if type(entry) is not Forward:
            return ref
        target = entry.to
        while True:
            nxt = self.table[target.index]
            if type(nxt) is not Forward:
                break
            target = nxt.to
        self.table[ref.index] = Forward(target)
        return target

    def get(self, ref: Ref) -> HeapObject:
        entry = self.table[ref.index]
        if type(entry) is Forward:
            entry = self.table[self.resolve(ref).index]
        if type(entry) is Swapped:
            raise SwapFault(f"object #{ref.index} was swapped out with graph {entry.graph_id}")
        return entry

    def is_live(self, ref: Ref) -> bool:
        return type(self.table[self.resolve(ref).index]) is HeapObject

    def live_refs(self):
        for i, entry in enumerate(self.table):
            if type(entry) is HeapObject:
                yield Ref(i)

    def live_count(self) -> int:
        return sum(1 for entry in self.table if type(entry) is HeapObject)

    def canonical(self, value):
        return self.resolve(value) if type(value) is Ref else value

    # ------------------------------------------------------------------
    # slots and identity

    def class_of(self, value) -> Ref:
        if value is None:
            return self.core.undefined
        if type(value) is int:
            return self.core.integer
        return self.resolve(self.get(value).cls)

    def slot_count(self, obj) -> int:
        payload = self._slotted(obj)
        return len(payload.slots)

    def slot_read(self, obj, index: int):
        payload = self._slotted(obj)
        if not 0 <= index < len(payload.slots):
            raise SlotError(f"slot index {index} out of range for #{obj.index}")
        value = payload.slots[index]
        if type(value) is Ref:
            return self.resolve(value)
        return value

    def slot_write(self, obj, index: int, value) -> None:
        payload = self._slotted(obj)
        if not 0 <= index < len(payload.slots):
            raise SlotError(f"slot index {index} out of range for #{obj.index}")
        payload.slots[index] = value
        payload.cache = None

    def _slotted(self, obj) -> HeapObject:
        if type(obj) is not Ref:
            raise SlotError(f"{self.describe(obj)} has no slots")
        payload = self.get(obj)
        if payload.slots is None:
            raise SlotError(f"{self.describe(obj)} is byte-indexed")
        return payload

    def identical(self, a, b) -> bool:
        if type(a) is Ref and type(b) is Ref:
            return self.resolve(a).index == self.resolve(b).index
        if type(a) is int and type(b) is int:
            return a == b
        return a is None and b is None

    # ------------------------------------------------------------------
    # become

    def check_becomeable(self, value) -> Ref:
        if type(value) is not Ref:
            raise RefusedBecome(f"cannot replace immediate {self.describe(value)}")
        ref = self.resolve(value)
        if ref.index in self.special:
            raise RefusedBecome(f"cannot replace special object {self.describe(ref)}")
        self.get(ref)
        return ref

    def become(self, a, b) -> None:
        a = self.check_becomeable(a)
        b = self.check_becomeable(b)
        if a.index == b.index:
            return
        t = self.table
        t[a.index], t[b.index] = t[b.index], t[a.index]
        self.epoch += 1

    def become_forward(self, a, b) -> None:
        a = self.check_becomeable(a)
        b = self.check_becomeable(b)
        if a.index == b.index:
            return
        self.table[a.index] = Forward(b)
        self.epoch += 1

    def references_to(self, obj) -> list[tuple[Ref, int]]:
        """Full-heap scan; class references are reported with slot ``CLASS_REF_SLOT``."""
        if type(obj) is not Ref:
            return []
        target = self.resolve(obj).index
        table = self.table
        found = []
        for i, entry in enumerate(table):
            if type(entry) is not HeapObject:
                continue
            if self._points_at(entry.cls, target):
                found.append((Ref(i), CLASS_REF_SLOT))
            if entry.slots is None:
                continue
            for j, v in enumerate(entry.slots):
                if type(v) is Ref and self._points_at(v, target):
                    found.append((Ref(i), j))
        return found

    def _points_at(self, ref, target: int) -> bool:
        if ref is None:
            return False
        if ref.index == target:
            return True
        return type(self.table[ref.index]) is Forward and self.resolve(ref).index == target

    # ------------------------------------------------------------------
    # footprint

    def is_compact_instance(self, payload: HeapObject) -> bool:
        cls = self.table[self.resolve(payload.cls).index]
        if type(cls) is not HeapObject or cls.slots is None or len(cls.slots) <= COMPACT:
            return False
        index = cls.slots[COMPACT]
        return type(index) is int and index > 0

    def footprint_of(self, obj) -> int:
        if type(obj) is not Ref:
            return 0
        payload = self.get(obj)
        return footprint(self.is_compact_instance(payload), payload.body_bytes())

    def footprint_total(self, objects) -> int:
        seen = set()
        total = 0
        for obj in objects:
            if type(obj) is not Ref:
                continue
            ref = self.resolve(obj)
            if ref.index in seen:
                continue
            seen.add(ref.index)
            total += self.footprint_of(ref)
        return total

    def heap_footprint(self) -> int:
        return self.footprint_total(self.live_refs())

    # ------------------------------------------------------------------
    # classes

    def define_class(self, name: str, superclass, slot_names=(), compact=False, kind=FIXED) -> Ref:
        if name in self.registry or self.global_at(name) is not None:
            raise ClassDefinitionError(f"{name} is already defined")
        if superclass is not None and not self.is_class(superclass):
            raise ClassDefinitionError(f"superclass of {name} is not a class")
        inherited = self.instance_layout(superclass) if superclass is not None else []
        own = list(slot_names)
        clash = set(inherited) & set(own) or len(set(own)) != len(own)
        if clash:
            raise ClassDefinitionError(f"duplicate instance variable in {name}")
        if superclass is not None:
            super_kind = self.get(superclass).slots[FORMAT]
            if super_kind != FIXED:
                kind = super_kind
        compact_index = self._next_compact_index(name) if compact else 0
        cls, _meta = self._new_class_pair(superclass, kind)
        self._finish_class(cls, name, inherited + own)
        if compact_index:
            self.get(cls).slots[COMPACT] = compact_index
            self.compact_classes[compact_index] = cls
        if hasattr(self, "globals"):
            self.global_put(name, cls)
        return cls

    def _next_compact_index(self, name):
        for index in range(1, MAX_COMPACT_CLASSES + 1):
            if index not in self.compact_classes:
                return index
        raise ClassDefinitionError(f"compact class table is full, cannot make {name} compact")

    def _new_class_pair(self, superclass, kind):
        meta_cls = self.core.metaclass if hasattr(self, "core") else None
        meta = self.alloc(meta_cls, [None, None, None, None, FIXED, 0, None])
        cls = self.alloc(meta, [superclass, None, None, None, kind, 0])
        self.get(meta).slots[THIS_CLASS] = cls
        if hasattr(self, "core"):
            self._link_metaclass(cls)
        return cls, meta

    def _link_metaclass(self, cls):
        meta = self.get(cls).cls
        superclass = self.get(cls).slots[SUPERCLASS]
        if superclass is None:
            meta_super = self.core.klass
        else:
            meta_super = self.get(superclass).cls
        self.get(meta).slots[SUPERCLASS] = meta_super
        self.get(meta).cls = self.core.metaclass

    def _finish_class(self, cls, name, layout):
        payload = self.get(cls)
        meta = payload.cls
        payload.slots[METHODS] = self.new_method_dict()
        payload.slots[NAME] = self.intern(name)
        payload.slots[LAYOUT] = self.new_array([self.intern(n) for n in layout])
        meta_payload = self.get(meta)
        meta_payload.slots[METHODS] = self.new_method_dict()
        meta_payload.slots[NAME] = self.intern(name + " class")
        meta_payload.slots[LAYOUT] = self.new_array([self.intern(n) for n in CLASS_IVARS])
        self.registry[name] = cls
        self.registry[name + " class"] = meta

    def is_class_shaped(self, value) -> bool:
        """True when slots 0 and 1 honour the superclass/methodDict contract."""
        if type(value) is not Ref or not self.is_live(value):
            return False
        payload = self.get(value)
        if payload.slots is None or len(payload.slots) < 2:
            return False
        md = payload.slots[METHODS]
        if md is None:
            return True
        return type(md) is Ref and self.class_of(md) == self.core.method_dict

    def is_class(self, value) -> bool:
        """A real class or metaclass: class-shaped with the full metadata layout."""
        if not self.is_class_shaped(value):
            return False
        payload = self.get(value)
        if len(payload.slots) < len(CLASS_IVARS):
            return False
        kind = self.class_of(self.class_of(value))
        return kind == self.core.metaclass or self.class_of(value) == self.core.metaclass

    def is_metaclass(self, value) -> bool:
        return type(value) is Ref and self.class_of(value) == self.core.metaclass

    def class_name(self, cls):
        """Name of a real class (``'User class'`` for metaclasses), else None."""
        if type(cls) is not Ref or not self.is_live(cls):
            return None
        payload = self.get(cls)
        if payload.slots is None or len(payload.slots) < len(CLASS_IVARS):
            return None
        name = payload.slots[NAME]
        if type(name) is not Ref:
            return None
        return self.text_of(name)

    def instance_layout(self, cls) -> list[str]:
        if not self.is_class(cls):
            raise ClassDefinitionError(f"{self.describe(cls)} is not a class")
        layout = self.slot_read(cls, LAYOUT)
        return [self.text_of(s) for s in self.array_items(layout)]

    def class_kind(self, cls) -> int:
        return self.slot_read(cls, FORMAT)

    def superclass_of(self, cls):
        return self.slot_read(cls, SUPERCLASS)

    def name_for_class(self, cls):
        """Registry name under which ``cls`` is currently reachable."""
        target = self.resolve(cls).index
        for name, ref in self.registry.items():
            if self.resolve(ref).index == target:
                return name
        return None

    def instantiate(self, cls, size: int = 0) -> Ref:
        if not self.is_class(cls):
            raise ClassDefinitionError(f"{self.describe(cls)} is not class-shaped")
        cls = self.resolve(cls)
        kind = self.class_kind(cls)
        if kind == BYTES:
            return self.alloc(cls, body=bytearray(size))
        count = len(self.array_items(self.slot_read(cls, LAYOUT)))
        if kind == VARIABLE:
            count += size
        elif size:
            raise ClassDefinitionError(f"{self.class_name(cls)} is not indexable")
        return self.alloc(cls, [None] * count)

    # ------------------------------------------------------------------
    # symbols, strings, arrays, dictionaries

    def intern(self, text: str) -> Ref:
        ref = self.symbols.get(text)
        if ref is None:
            cls = self.core.symbol if hasattr(self, "core") else None
            ref = self.alloc(cls, body=text.encode("utf-8"))
            self.symbols[text] = ref
        return ref

    def new_string(self, text: str) -> Ref:
        return self.alloc(self.core.string, body=bytearray(text.encode("utf-8")))

    def is_bytes(self, value) -> bool:
        return type(value) is Ref and self.get(value).body is not None

    def text_of(self, ref) -> str:
        payload = self.get(ref)
        if payload.body is None:
            raise SlotError(f"{self.describe(ref)} is not byte-indexed")
        return bytes(payload.body).decode("utf-8")

    def is_symbol(self, value) -> bool:
        return type(value) is Ref and self.class_of(value) == self.core.symbol

    def is_string(self, value) -> bool:
        return type(value) is Ref and self.class_of(value) == self.core.string

    def new_array(self, values=()) -> Ref:
        cls = self.core.array if hasattr(self, "core") else None
        return self.alloc(cls, [self.canonical(v) for v in values])

    def array_items(self, ref) -> list:
        payload = self._slotted(ref)
        return [self.canonical(v) for v in payload.slots]

    def new_method_dict(self) -> Ref:
        cls = self.core.method_dict if hasattr(self, "core") else None
        return self.alloc(cls, [])

    def _dict_index(self, payload: HeapObject) -> dict:
        cache = payload.cache
        if cache is None or cache[0] != self.epoch:
            slots = payload.slots
            index = {self.resolve(slots[i]).index: i for i in range(0, len(slots), 2)}
            cache = payload.cache = (self.epoch, index)
        return cache[1]

    def dict_at(self, d, key: str):
        """Value under symbol ``key`` or the module-level ``MISSING`` marker."""
        sym = self.symbols.get(key)
        if sym is None:
            return MISSING
        payload = self.get(d)
        i = self._dict_index(payload).get(self.resolve(sym).index)
        if i is None:
            return MISSING
        return self.canonical(payload.slots[i + 1])

    def dict_put(self, d, key: str, value) -> None:
        payload = self.get(d)
        sym = self.intern(key)
        i = self._dict_index(payload).get(sym.index)
        if i is None:
            payload.slots.extend([sym, value])
            payload.cache = None
        else:
            payload.slots[i + 1] = value

    def dict_remove(self, d, key: str) -> None:
        payload = self.get(d)
        sym = self.symbols.get(key)
        i = None if sym is None else self._dict_index(payload).get(sym.index)
        if i is not None:
            del payload.slots[i:i + 2]
            payload.cache = None

    def dict_keys(self, d) -> list[str]:
        slots = self.get(d).slots
        return [self.text_of(slots[i]) for i in range(0, len(slots), 2)]

    def new_system_dict(self) -> Ref:
        return self.alloc(self.core.system_dict, [])

    def global_at(self, name: str):
        if not hasattr(self, "globals"):
            return None
        value = self.dict_at(self.globals, name)
        return None if value is MISSING else value

    def global_put(self, name: str, value) -> None:
        self.dict_put(self.globals, name, value)

    def boolean(self, flag: bool) -> Ref:
        return self.true if flag else self.false

    # ------------------------------------------------------------------
    # printing without sends

    def describe(self, value) -> str:
        if value is None:
            return "nil"
        if type(value) is int:
            return str(value)
        if type(value) is not Ref:
            return repr(value)
        ref = self.resolve(value)
        entry = self.table[ref.index]
        if type(entry) is Swapped:
            return f"<swapped #{ref.index}>"
        if ref == self.true:
            return "true"
        if ref == self.false:
            return "false"
        cls = self.class_of(ref)
        if cls == self.core.symbol:
            return "#" + self.text_of(ref)
        if cls == self.core.string:
            return "'" + self.text_of(ref).replace("'", "''") + "'"
        name = self.class_name(ref)
        if name is not None:
            return name
        if cls == self.core.array:
            return "(" + " ".join(self.describe(v) for v in self.array_items(ref)) + ")"
        cls_name = self.class_name(cls) or self.describe_class_position(cls)
        article = "an" if cls_name[:1] in "AEIOU" else "a"
        return f"{article} {cls_name}"

    def describe_class_position(self, cls) -> str:
        """Name for whatever sits in a class position, including class proxies."""
        name = self.class_name(cls)
        if name is not None:
            return name
        holder = self.class_name(self.class_of(cls)) or "?"
        return f"{holder}#{self.resolve(cls).index}"

    # ------------------------------------------------------------------
    # boot

    def _boot(self):
        bare = {}

        def make(name, superclass, kind=FIXED):
            cls, _ = self._new_class_pair(superclass, kind)
            bare[name] = cls
            return cls

        root = make("ObjectRoot", None)
        klass = make("Class", root)
        metaclass = make("Metaclass", klass)
        symbol = make("Symbol", root, BYTES)
        string = make("String", root, BYTES)
        array = make("Array", root, VARIABLE)
        method_dict = make("MethodDictionary", root, VARIABLE)
        self.core = CoreClasses(
            root=root, klass=klass, metaclass=metaclass, undefined=None, true=None,
            false=None, integer=None, symbol=symbol, string=string, array=array,
            method_dict=method_dict, system_dict=None, compiled_method=None,
            primitive_method=None, message=None, block=None,
        )
        for cls in bare.values():
            self._link_metaclass(cls)
        layouts = {
            "ObjectRoot": [], "Class": list(CLASS_IVARS), "Metaclass": list(METACLASS_IVARS),
            "Symbol": [], "String": [], "Array": [], "MethodDictionary": [],
        }
        for name, cls in bare.items():
            self._finish_class(cls, name, layouts[name])

        system_dict = self._define_boot("SystemDictionary", root, [], VARIABLE)
        self.core.system_dict = system_dict
        self.globals = self.alloc(system_dict, [])
        for name, cls in bare.items():
            self.global_put(name, cls)
        self.global_put("SystemDictionary", system_dict)
        self.global_put("Smalltalk", self.globals)

        self.core.undefined = self._define_boot("UndefinedObject", root)
        boolean = self._define_boot("Boolean", root)
        self.core.true = self._define_boot("True", boolean)
        self.core.false = self._define_boot("False", boolean)
        self.core.integer = self._define_boot("SmallInteger", root)
        self.core.compiled_method = self._define_boot(
            "CompiledMethod", root, ["source", "selector", "methodClass"])
        self.core.primitive_method = self._define_boot("PrimitiveMethod", root, ["selector"])
        self.core.message = self._define_boot("Message", root, ["selector", "arguments", "lookupClass"])
        self.core.block = self._define_boot("BlockClosure", root)
        self.opaque.update({self.core.primitive_method.index, self.core.block.index,
                            system_dict.index})
        self.true = self.alloc(self.core.true, [])
        self.false = self.alloc(self.core.false, [])
        self.special.update({self.true.index, self.false.index,
                             self.core.integer.index, self.core.undefined.index})

    def _define_boot(self, name, superclass, ivars=(), kind=FIXED):
        return self.define_class(name, superclass, ivars, kind=kind)


class _Missing:
    def __repr__(self):
        return "MISSING"


MISSING = _Missing()
