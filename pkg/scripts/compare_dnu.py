"""Send the same selectors to a Ghost proxy and to a doesNotUnderstand: proxy.

Selectors the root class understands never reach the classic proxy's trap,
while the Ghost proxy intercepts every one of them.
"""

import argparse

from ghost.dispatch import selector_arity
from ghost.ghost_core import HandlerSpec, create_proxy_for, new_handler
from ghost.runtime import Runtime, RuntimeConfig

ROOT_SELECTORS = ("pointersTo", "isNil", "printString", "class", "yourself", "hash", "inspect")


def outcome(rt, proxy, selector):
    mark = rt.trace.mark()
    rt.send(proxy, selector, *([None] * selector_arity(selector)))
    first = next(e for e in rt.trace.since(mark) if e["kind"] == "send")
    return first["outcome"]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--random", type=int, default=5, help="random selectors to add")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rt = Runtime(RuntimeConfig(trace_sends=True, seed=args.seed))
    rt.run("ObjectRoot subclass: #Sink instanceVariableNames: ''.\n"
           "!Sink methodsFor!\ndoesNotUnderstand: aMessage ^ nil\n! !\n")
    classic = rt.send(rt.dnu_proxy_class, "on:", rt.evaluate("Sink new"))
    ghost = create_proxy_for(rt, None, new_handler(rt, HandlerSpec(default_action=lambda rt, i: None)))
    selectors = list(ROOT_SELECTORS) + [rt.random_selector() for _ in range(args.random)]
    print(f"{'selector':28} {'doesNotUnderstand: proxy':26} ghost proxy")
    for sel in selectors:
        print(f"{sel:28} {outcome(rt, classic, sel):26} {outcome(rt, ghost, sel)}")


if __name__ == "__main__":
    main()
