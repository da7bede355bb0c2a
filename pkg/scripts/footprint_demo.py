"""Print the modeled footprint ledger: proxy sizes and the savings of swapping."""

import argparse

from ghost.ghost_core import create_proxy_for
from ghost.runtime import Runtime

LINK = "ObjectRoot subclass: #Link instanceVariableNames: 'value next'.\n"


def chain(rt, length):
    mem = rt.memory
    cls = mem.global_at("Link")
    links = [mem.instantiate(cls) for _ in range(length)]
    for k, link in enumerate(links):
        mem.slot_write(link, 0, k)
        if k + 1 < length:
            mem.slot_write(link, 1, links[k + 1])
    return links


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[1, 10, 100, 1000])
    args = p.parse_args()

    rt = Runtime()
    rt.run(LINK)
    mem = rt.memory
    marea = mem.alloc(rt.swapper.proxy_class, [0])
    ghost = create_proxy_for(rt, None, rt.evaluate("SimpleForwarderHandler new"))
    plain = mem.instantiate(mem.global_at("Link"))
    print("object                         bytes")
    print(f"swap proxy (1 slot, compact)   {mem.footprint_of(marea):5}")
    print(f"forwarding proxy (2, compact)  {mem.footprint_of(ghost):5}")
    print(f"regular object (2 slots)       {mem.footprint_of(plain):5}")
    print()
    print("members  heap before  heap after  saved  % of heap")
    for size in args.sizes:
        rt = Runtime()
        rt.run(LINK)
        links = chain(rt, size)
        before = rt.memory.heap_footprint()
        rt.swapper.swap_out([links[0]])
        after = rt.memory.heap_footprint()
        saved = before - after
        print(f"{size:7} {before:12} {after:11} {saved:6} {100 * saved / before:9.2f}%")


if __name__ == "__main__":
    main()
