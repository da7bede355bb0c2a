"""Swapping object graphs out to segments and back in on demand.

``swap_out`` serializes the closure of some roots, then replaces every member
that is still reachable from outside the graph by a tiny proxy holding only a
packed ``(graphID, position)`` id.  The handler is a shared singleton, so a
proxy is one slot under a compact header: 8 bytes.  The first message that
reaches any of those proxies brings the whole graph back.

Segment layout (all integers big-endian)::

    "GSW1" version:1 graphID:2 count:4
    count x record:
        nameLen:2 name kind:1
        kind 0: slotCount:2 then per slot tag:1 + payload
                (0 nil, 1 immediate int64, 2 position uint32, 3 external uint32)
        kind 1: length:4 bytes
    externalCount:4 then externalCount x table ordinal:4
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EncodingError, SwapFault
from .ghost_core import HandlerSpec, new_handler
from .class_method_proxies import FIND_NIL_DICT
from .object_model import HeapObject, Ref, Swapped

GRAPH_BITS = 15
POSITION_BITS = 16
MAX_GRAPH = (1 << GRAPH_BITS) - 1
MAX_POSITION = (1 << POSITION_BITS) - 1

MAGIC = b"GSW1"
VERSION = 1
SLOTTED, BYTE_BODY = 0, 1
TAG_NIL, TAG_IMMEDIATE, TAG_POSITION, TAG_EXTERNAL = 0, 1, 2, 3
INT64_MIN, INT64_MAX = -(1 << 63), (1 << 63) - 1


def encode_proxy_id(graph_id: int, position: int) -> int:
    if type(graph_id) is not int or not 0 <= graph_id <= MAX_GRAPH:
        raise EncodingError(f"graph id {graph_id} does not fit in {GRAPH_BITS} bits")
    if type(position) is not int or not 0 <= position <= MAX_POSITION:
        raise EncodingError(f"position {position} does not fit in {POSITION_BITS} bits")
    return (graph_id << POSITION_BITS) | position


def decode_proxy_id(value: int) -> tuple[int, int]:
    if type(value) is not int or not 0 <= value < (1 << (GRAPH_BITS + POSITION_BITS)):
        raise EncodingError(f"{value!r} is not a proxy id")
    return value >> POSITION_BITS, value & MAX_POSITION


# -- segment codec -----------------------------------------------------------------


@dataclass
class Record:
    class_name: str
    slots: list | None = None  # (tag, value) pairs for slotted objects
    body: bytes | None = None  # raw bytes for byte-indexed objects


@dataclass
class Segment:
    graph_id: int
    records: list[Record]
    externals: list[int] = field(default_factory=list)


def encode_segment(seg: Segment) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack(">BHI", VERSION, seg.graph_id, len(seg.records))
    for rec in seg.records:
        name = rec.class_name.encode("utf-8")
        out += struct.pack(">H", len(name)) + name
        if rec.slots is None:
            out += struct.pack(">BI", BYTE_BODY, len(rec.body)) + bytes(rec.body)
            continue
        out += struct.pack(">BH", SLOTTED, len(rec.slots))
        for tag, value in rec.slots:
            if tag == TAG_NIL:
                out += b"\x00"
            elif tag == TAG_IMMEDIATE:
                if not INT64_MIN <= value <= INT64_MAX:
                    raise EncodingError(f"integer {value} does not fit a segment slot")
                out += struct.pack(">Bq", tag, value)
            else:
                out += struct.pack(">BI", tag, value)
    out += struct.pack(">I", len(seg.externals))
    for ordinal in seg.externals:
        out += struct.pack(">I", ordinal)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.at = 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.at + size > len(self.data):
            raise SwapFault("segment is truncated")
        values = struct.unpack_from(fmt, self.data, self.at)
        self.at += size
        return values

    def raw(self, n):
        if self.at + n > len(self.data):
            raise SwapFault("segment is truncated")
        chunk = self.data[self.at:self.at + n]
        self.at += n
        return chunk


def decode_segment(data: bytes) -> Segment:
    if data[:4] != MAGIC:
        raise SwapFault("bad segment magic")
    r = _Reader(data)
    r.raw(4)
    version, graph_id, count = r.take(">BHI")
    if version != VERSION:
        raise SwapFault(f"unsupported segment version {version}")
    records = []
    for _ in range(count):
        (name_len,) = r.take(">H")
        try:
            name = r.raw(name_len).decode("utf-8")
        except UnicodeDecodeError:
            raise SwapFault("corrupt class name in segment") from None
        (kind,) = r.take(">B")
        if kind == BYTE_BODY:
            (length,) = r.take(">I")
            records.append(Record(name, body=r.raw(length)))
            continue
        if kind != SLOTTED:
            raise SwapFault(f"unknown record kind {kind}")
        (n,) = r.take(">H")
        slots = []
        for _ in range(n):
            (tag,) = r.take(">B")
            if tag == TAG_NIL:
                slots.append((TAG_NIL, None))
            elif tag == TAG_IMMEDIATE:
                slots.append((tag, r.take(">q")[0]))
            elif tag in (TAG_POSITION, TAG_EXTERNAL):
                slots.append((tag, r.take(">I")[0]))
            else:
                raise SwapFault(f"unknown slot tag {tag}")
        records.append(Record(name, slots=slots))
    (ext_count,) = r.take(">I")
    externals = [r.take(">I")[0] for _ in range(ext_count)]
    if r.at != len(data):
        raise SwapFault("trailing bytes after segment")
    for rec in records:
        for tag, value in rec.slots or ():
            if tag == TAG_POSITION and value >= count:
                raise SwapFault(f"position {value} outside graph of {count}")
            if tag == TAG_EXTERNAL and value >= ext_count:
                raise SwapFault(f"external ordinal {value} outside trailer of {ext_count}")
    return Segment(graph_id, records, externals)


class SegmentStore:
    """Segments by graph id, in memory or as ``graph-<id>.gsw`` files."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else None
        self.memory: dict[int, bytes] = {}
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, graph_id: int) -> Path:
        return self.directory / f"graph-{graph_id}.gsw"

    def put(self, graph_id: int, data: bytes) -> None:
        if self.directory is None:
            self.memory[graph_id] = bytes(data)
            return
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".graph-", suffix=".tmp")
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, self.path(graph_id))

    def get(self, graph_id: int) -> bytes:
        if self.directory is None:
            if graph_id not in self.memory:
                raise SwapFault(f"no segment for graph {graph_id}")
            return self.memory[graph_id]
        try:
            return self.path(graph_id).read_bytes()
        except FileNotFoundError:
            raise SwapFault(f"no segment for graph {graph_id}") from None

    def delete(self, graph_id: int) -> None:
        if self.directory is None:
            self.memory.pop(graph_id, None)
        else:
            self.path(graph_id).unlink(missing_ok=True)

    def __contains__(self, graph_id):
        if self.directory is None:
            return graph_id in self.memory
        return self.path(graph_id).exists()


# -- swapping --------------------------------------------------------------------------


@dataclass
class GraphInfo:
    proxies: list  # (proxy ref, position)
    members: int
    bytes_before: int
    bytes_after: int


class Swapper:
    def __init__(self, rt, store: SegmentStore | None = None):
        self.rt = rt
        self.mem = rt.memory
        self.store = store or SegmentStore()
        self.graphs: dict[int, GraphInfo] = {}
        self.next_graph = 1
        self.swap_outs = 0
        self.swap_ins = 0
        self._install()

    def _install(self):
        mem, interp = self.mem, self.rt.interp
        trap = self.rt.traps.trap
        self.handler_class = mem.define_class("MareaProxyHandler", mem.core.root)
        self.handler = new_handler(self.rt, HandlerSpec(
            default_action=marea_default_action, instance_action=marea_instance_action,
            name="MareaProxyHandler"), self.handler_class)
        singleton = self.handler
        self.proxy_class = mem.define_class("MareaProxy", trap, ["proxyID"], compact=True)
        interp.define_primitive(self.proxy_class, "proxyHandler", lambda i, r, a: singleton)
        self.class_proxy_class = mem.define_class(
            "MareaClassProxy", trap, ["superclass", "methodDict", "proxyID"], compact=True)
        cp = self.class_proxy_class
        interp.define_primitive(cp, "proxyHandler", lambda i, r, a: singleton)
        interp.define_primitive(cp, FIND_NIL_DICT, lambda i, r, a: r)
        # cached answers so that class queries never swap the class back in
        interp.define_primitive(cp, "isBehavior", lambda i, r, a: i.mem.true)
        interp.define_primitive(cp, "isInstanceSide", lambda i, r, a: i.mem.true)
        interp.define_primitive(cp, "isClassSide", lambda i, r, a: i.mem.false)
        interp.define_primitive(cp, "isMeta", lambda i, r, a: i.mem.false)
        interp.define_primitive(cp, "instanceSide", lambda i, r, a: r)

    # -- graph discovery ----------------------------------------------------------

    def is_boundary(self, ref: Ref, roots: set) -> bool:
        mem = self.mem
        if ref.index in roots:
            return False
        if ref.index in mem.special or mem.is_class(ref):
            return True
        payload = mem.get(ref)
        cls = mem.resolve(payload.cls)
        if cls == mem.core.symbol or cls.index in mem.opaque:
            return True
        if payload.native is not None and cls != mem.core.compiled_method:
            return True
        return self.rt.is_proxy(ref)

    def check_root(self, ref: Ref) -> Ref:
        mem = self.mem
        ref = mem.check_becomeable(ref)
        if self.is_boundary(ref, set()) and not mem.is_class(ref):
            raise SwapFault(f"{mem.describe(ref)} cannot be swapped out")
        return ref

    def closure(self, roots: list) -> list:
        mem = self.mem
        root_ids = {r.index for r in roots}
        members, seen = [], set()
        stack = list(reversed(roots))
        while stack:
            ref = stack.pop()
            if ref.index in seen:
                continue
            seen.add(ref.index)
            members.append(ref)
            payload = mem.get(ref)
            for value in reversed(payload.slots or ()):
                if type(value) is not Ref:
                    continue
                value = mem.resolve(value)
                if value.index in seen or type(mem.table[value.index]) is not HeapObject:
                    continue
                if not self.is_boundary(value, root_ids):
                    stack.append(value)
        return members

    def external_referents(self, member_ids: set) -> set:
        """Members referenced from any live object outside the graph."""
        mem = self.mem
        hit = set()
        for i, entry in enumerate(mem.table):
            if type(entry) is not HeapObject or i in member_ids:
                continue
            cls = mem.resolve(entry.cls).index
            if cls in member_ids:
                hit.add(cls)
            for value in entry.slots or ():
                if type(value) is Ref:
                    j = mem.resolve(value).index
                    if j in member_ids:
                        hit.add(j)
        return hit

    # -- swap out -----------------------------------------------------------------

    def swap_out(self, roots) -> int:
        mem = self.mem
        roots = [self.check_root(r) for r in roots]
        if not roots:
            raise SwapFault("swap out needs at least one root")
        members = self.closure(roots)
        if len(members) > MAX_POSITION + 1:
            raise EncodingError(f"graph of {len(members)} objects exceeds {MAX_POSITION + 1}")
        graph_id = self.next_graph
        encode_proxy_id(graph_id, 0)
        position = {m.index: p for p, m in enumerate(members)}
        segment = Segment(graph_id, [], [])
        ext_index: dict[int, int] = {}
        for m in members:
            segment.records.append(self._record(m, position, segment.externals, ext_index))
        mem_ids = set(position)
        entry_points = self.external_referents(mem_ids) | {r.index for r in roots}
        self.store.put(graph_id, encode_segment(segment))

        bytes_before = mem.footprint_total(members)
        proxies = []
        for m in members:
            if m.index in entry_points:
                proxies.append((self._new_proxy(m, encode_proxy_id(graph_id, position[m.index])),
                                position[m.index]))
        forwarded = {}
        for proxy, pos in proxies:
            forwarded[members[pos].index] = proxy
        for m in members:
            if m.index in forwarded:
                mem.become_forward(m, forwarded[m.index])
            else:
                mem.table[m.index] = Swapped(graph_id)
        mem.epoch += 1
        bytes_after = mem.footprint_total(p for p, _ in proxies)
        self.graphs[graph_id] = GraphInfo(proxies, len(members), bytes_before, bytes_after)
        self.next_graph += 1
        self.swap_outs += 1
        self.rt.trace.record("swap-out", graph=graph_id, objects=len(members), proxies=len(proxies))
        return graph_id

    def _record(self, ref, position, externals, ext_index) -> Record:
        mem = self.mem
        payload = mem.get(ref)
        name = mem.name_for_class(payload.cls)
        if name is None:
            raise EncodingError(f"class of {mem.describe(ref)} has no global name")
        if payload.slots is None:
            return Record(name, body=bytes(payload.body))
        slots = []
        for value in payload.slots:
            if value is None:
                slots.append((TAG_NIL, None))
            elif type(value) is int:
                slots.append((TAG_IMMEDIATE, value))
            else:
                target = mem.resolve(value).index
                if target in position:
                    slots.append((TAG_POSITION, position[target]))
                else:
                    if target not in ext_index:
                        ext_index[target] = len(externals)
                        externals.append(target)
                    slots.append((TAG_EXTERNAL, ext_index[target]))
        return Record(name, slots=slots)

    def _new_proxy(self, member, proxy_id) -> Ref:
        mem = self.mem
        if mem.is_class(member):
            return mem.alloc(self.class_proxy_class,
                             [self.rt.class_proxies.delegator, None, proxy_id])
        return mem.alloc(self.proxy_class, [proxy_id])

    # -- swap in ------------------------------------------------------------------

    def swap_in(self, graph_id: int) -> list:
        mem = self.mem
        info = self.graphs.get(graph_id)
        if info is None:
            raise SwapFault(f"graph {graph_id} is not swapped out")
        segment = decode_segment(self.store.get(graph_id))
        if segment.graph_id != graph_id:
            raise SwapFault(f"segment holds graph {segment.graph_id}, expected {graph_id}")
        if len(segment.records) != info.members:
            raise SwapFault(f"segment for graph {graph_id} has the wrong object count")
        objects = []
        for rec in segment.records:
            cls = mem.registry.get(rec.class_name)
            if cls is None:
                raise SwapFault(f"class {rec.class_name} no longer exists")
            if rec.slots is None:
                objects.append(mem.alloc(cls, body=bytearray(rec.body)))
            else:
                objects.append(mem.alloc(cls, [None] * len(rec.slots)))
        for rec, ref in zip(segment.records, objects):
            if rec.slots is None:
                continue
            slots = mem.get(ref).slots
            for k, (tag, value) in enumerate(rec.slots):
                if tag == TAG_IMMEDIATE:
                    slots[k] = value
                elif tag == TAG_POSITION:
                    slots[k] = objects[value]
                elif tag == TAG_EXTERNAL:
                    slots[k] = Ref(segment.externals[value])
        for proxy, pos in info.proxies:
            if mem.is_live(proxy) and mem.resolve(proxy) == proxy:
                mem.become_forward(proxy, objects[pos])
        del self.graphs[graph_id]
        self.store.delete(graph_id)
        self.swap_ins += 1
        self.rt.trace.record("swap-in", graph=graph_id, objects=len(objects))
        return objects

    def proxy_id_of(self, proxy) -> int:
        mem = self.mem
        cls = mem.class_of(proxy)
        if cls == self.proxy_class:
            return mem.slot_read(proxy, 0)
        if cls == self.class_proxy_class:
            return mem.slot_read(proxy, 2)
        raise SwapFault(f"{mem.describe(proxy)} is not a swap proxy")

    def materialize(self, proxy):
        """Swap in the graph behind ``proxy``; answer what the proxy turned into."""
        graph_id, _ = decode_proxy_id(self.proxy_id_of(proxy))
        self.swap_in(graph_id)
        return self.mem.resolve(proxy)

    def is_swap_proxy(self, value) -> bool:
        return type(value) is Ref and self.mem.is_live(value) and \
            self.mem.class_of(value) in (self.proxy_class, self.class_proxy_class)

    def outstanding_savings(self) -> int:
        return sum(g.bytes_before - g.bytes_after for g in self.graphs.values())


def marea_default_action(rt, i):
    original = rt.swapper.materialize(i.proxy)
    return rt.interp.send(original, i.message.selector, i.message.arguments)


def marea_instance_action(rt, i):
    # the class of the receiver (or one of its superclasses) was swapped out
    rt.swapper.materialize(i.proxy)
    return rt.interp.send(i.receiver, i.message.selector, i.message.arguments)


def footprint_report(rt, before, after) -> dict:
    mem = rt.memory
    total_before = mem.footprint_total(before)
    total_after = mem.footprint_total(after)
    proxies = sum(1 for r in after if type(r) is Ref and rt.is_proxy(r))
    saved = total_before - total_after
    return {
        "total_before": total_before,
        "total_after": total_after,
        "proxy_count": proxies,
        "bytes_saved": saved,
        "percent_saved": round(100.0 * saved / total_before, 2) if total_before else 0.0,
    }

