"""One booted world: memory, dispatcher, evaluator, proxies, swapper, wrappers."""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass

from . import primitives
from .class_method_proxies import create_method_proxy_and_replace, install_class_proxies
from .dispatch import Interpreter, install_dnu_baseline, selector_arity
from .errors import FatalRuntime
from .ghost_core import install_trap_hierarchy
from .object_model import SUPERCLASS, HeapObject, ObjectMemory, Ref
from .script.evaluator import Evaluator
from .script.parser import parse_expression, parse_method, parse_program
from .swapper import SegmentStore, Swapper
from .trace import Trace
from .wrappers import unwrap_method, wrap_all_methods, wrap_method, wrapper_of

DNU_BASELINE_SOURCE = "doesNotUnderstand: aMessage ^ aMessage sendTo: target"
SELECTOR_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
# one script-level send costs about a dozen Python frames
RECURSION_FLOOR = 20000


@dataclass
class RuntimeConfig:
    trace_sends: bool = False
    segment_dir: str | None = None
    seed: int = 0


class Runtime:
    def __init__(self, config: RuntimeConfig | None = None):
        self.config = config or RuntimeConfig()
        if sys.getrecursionlimit() < RECURSION_FLOOR:
            sys.setrecursionlimit(RECURSION_FLOOR)
        self.memory = ObjectMemory()
        self.trace = Trace(sends=self.config.trace_sends)
        self.interp = Interpreter(self.memory, self.trace)
        self.interp.rt = self
        self.evaluator = Evaluator(self)
        self.interp.evaluator = self.evaluator
        self.rng = random.Random(self.config.seed)
        self.wrapped: dict = {}
        self.traps = None
        primitives.install(self.interp)
        install_trap_hierarchy(self)
        install_class_proxies(self)
        self.swapper = Swapper(self, SegmentStore(self.config.segment_dir))
        self._install_transcript()
        self._install_dnu_baseline()
        self._install_facade()

    # -- boot extras -------------------------------------------------------

    def _install_transcript(self):
        mem, interp = self.memory, self.interp
        cls = mem.define_class("TranscriptStream", mem.core.root)

        def show(i, r, a):
            value = a[0]
            text = mem.text_of(value) if mem.is_bytes(value) else mem.describe(value)
            self.trace.record("log", text=text)
            return r

        interp.define_primitive(cls, "show:", show)
        interp.define_primitive(cls, "cr", lambda i, r, a: r)
        mem.global_put("Transcript", mem.instantiate(cls))

    def _install_dnu_baseline(self):
        """A classic doesNotUnderstand:-forwarding proxy, kept for comparison."""
        mem = self.memory
        cls = mem.define_class("DNUProxy", mem.core.root, ["target"])
        method = self.evaluator.compile_method(cls, parse_method(DNU_BASELINE_SOURCE))
        install_dnu_baseline(self.interp, cls, method)

        def on(i, r, a):
            proxy = mem.instantiate(r)
            mem.slot_write(proxy, 0, a[0])
            return proxy

        self.interp.define_primitive(mem.class_of(cls), "on:", on)
        self.dnu_proxy_class = cls

    def _install_facade(self):
        mem = self.memory
        cls = mem.define_class("GhostFacade", mem.core.root)
        sym = mem.text_of
        table = {
            "swapOut:": lambda i, r, a: self.swapper.swap_out([a[0]]),
            "swapOutAll:": lambda i, r, a: self.swapper.swap_out(mem.array_items(a[0])),
            "swapIn:": lambda i, r, a: (self.swapper.swap_in(a[0]), r)[1],
            "swapIns": lambda i, r, a: self.swapper.swap_ins,
            "swapOuts": lambda i, r, a: self.swapper.swap_outs,
            "wrap:of:": lambda i, r, a: wrap_method(self, a[1], sym(a[0])),
            "unwrap:of:": lambda i, r, a: (unwrap_method(self, a[1], sym(a[0])), r)[1],
            "wrapAll:": lambda i, r, a: wrap_all_methods(self, a[0]),
            "callsOf:in:": lambda i, r, a: wrapper_of(self, a[1]).counts[sym(a[0])],
            "proxyMethod:of:handler:": lambda i, r, a: create_method_proxy_and_replace(
                self, a[1], sym(a[0]), a[2]),
            "interceptions": lambda i, r, a: self.trace.interceptions,
            "isProxy:": lambda i, r, a: mem.boolean(self.is_proxy(a[0])),
            "footprintOf:": lambda i, r, a: mem.footprint_of(a[0]),
            "identical:to:": lambda i, r, a: mem.boolean(mem.identical(a[0], a[1])),
            "randomSelector": lambda i, r, a: mem.intern(self.random_selector()),
            "send:to:": lambda i, r, a: self.interp.send(
                a[1], sym(a[0]), [None] * selector_arity(sym(a[0]))),
            "log:": lambda i, r, a: (self.trace.record("log", text=sym(a[0])), r)[1],
        }
        for selector, fn in table.items():
            self.interp.define_primitive(cls, selector, fn)
        mem.global_put("Ghost", mem.instantiate(cls))

    # -- services used by the evaluator and handlers -----------------------

    def define_class(self, name, superclass, slot_names=(), compact=False):
        if superclass is not None:
            superclass = self.real_class(superclass)
        return self.memory.define_class(name, superclass, list(slot_names), compact)

    def real_class(self, cls):
        """Unwrap class proxies: Ghost proxies by target, swap proxies by swapping in."""
        mem = self.memory
        for _ in range(64):
            if type(cls) is not Ref:
                return cls
            cls = mem.resolve(cls)
            kind = mem.class_of(cls)
            if kind == self.class_proxies.proxy_class:
                cls = mem.slot_read(cls, 2)
            elif kind == self.swapper.class_proxy_class:
                cls = self.swapper.materialize(cls)
            else:
                return cls
        raise FatalRuntime("class proxy chain does not end")

    def is_proxy(self, value) -> bool:
        """Instance of a class below the trap class (regular, class or swap proxy)."""
        mem = self.memory
        if type(value) is not Ref or type(mem.table[mem.resolve(value).index]) is not HeapObject:
            return False
        cls = mem.resolve(mem.get(value).cls)
        trap = self.traps.trap
        while cls is not None:
            if cls == trap:
                return True
            entry = mem.table[cls.index]
            if type(entry) is not HeapObject or not entry.slots:
                return False
            nxt = entry.slots[SUPERCLASS]
            cls = mem.resolve(nxt) if type(nxt) is Ref else None
        return False

    def structurally_equal(self, a, b) -> bool:
        mem = self.memory
        if mem.identical(a, b):
            return True
        if type(a) is not Ref or type(b) is not Ref:
            return False
        if mem.class_of(a) != mem.class_of(b):
            return False
        if mem.is_bytes(a):
            return mem.text_of(a) == mem.text_of(b)
        if mem.class_of(a) == mem.core.array:
            xs, ys = mem.array_items(a), mem.array_items(b)
            return len(xs) == len(ys) and all(self.structurally_equal(x, y) for x, y in zip(xs, ys))
        return False

    def random_selector(self) -> str:
        rng = self.rng
        head = "".join(rng.choice(SELECTOR_ALPHABET) for _ in range(rng.randint(3, 10)))
        arity = rng.choice((0, 0, 1, 2))
        if arity == 0:
            return "zz" + head
        return "".join(f"zz{head}{k}:" for k in range(arity))

    # -- running scripts ---------------------------------------------------

    def run(self, text: str):
        """Parse and evaluate a whole script; answers the last directive's value."""
        value = None
        for directive in parse_program(text):
            value = self.evaluator.run_directive(directive)
        return value

    def evaluate(self, text: str):
        return self.evaluator.evaluate_expression(parse_expression(text))

    def send(self, receiver, selector, *args):
        return self.interp.send(receiver, selector, list(args))

    def report(self) -> dict:
        mem = self.memory
        after = mem.heap_footprint()
        return {
            "objects": mem.live_count(),
            "bytes_before": after + self.swapper.outstanding_savings(),
            "bytes_after": after,
            "proxies": sum(1 for r in mem.live_refs() if self.is_proxy(r)),
            "interceptions": self.trace.interceptions,
            "swap_ins": self.swapper.swap_ins,
            "swap_outs": self.swapper.swap_outs,
        }

