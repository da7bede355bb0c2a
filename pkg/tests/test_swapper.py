import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghost.errors import EncodingError, RefusedBecome, SwapFault
from ghost.runtime import Runtime, RuntimeConfig
from ghost.swapper import (MAGIC, MAX_GRAPH, MAX_POSITION, TAG_EXTERNAL, TAG_IMMEDIATE, TAG_NIL,
                           TAG_POSITION, Record, Segment, SegmentStore, decode_proxy_id,
                           decode_segment, encode_proxy_id, encode_segment, footprint_report)

LINK = """
ObjectRoot subclass: #Link instanceVariableNames: 'value next'.
!Link methodsFor!
value ^ value
!
value: v value := v
!
next ^ next
!
next: aLink next := aLink
!
sum ^ next isNil ifTrue: [value] ifFalse: [value + next sum]
! !
"""


def make_rt(**config):
    rt = Runtime(RuntimeConfig(**config))
    rt.run(LINK)
    return rt


def chain(rt, length):
    mem = rt.memory
    cls = mem.global_at("Link")
    links = [mem.instantiate(cls) for _ in range(length)]
    for k, link in enumerate(links):
        mem.slot_write(link, 0, k + 1)
        if k + 1 < length:
            mem.slot_write(link, 1, links[k + 1])
    return links


# -- proxy ids and the segment codec --------------------------------------------------


@given(st.integers(0, MAX_GRAPH), st.integers(0, MAX_POSITION))
def test_proxy_id_bijection(graph, position):
    value = encode_proxy_id(graph, position)
    assert 0 <= value < 2**31
    assert decode_proxy_id(value) == (graph, position)


@pytest.mark.parametrize("bad", [-1, 2**31, "7", None])
def test_decode_rejects_non_ids(bad):
    with pytest.raises(EncodingError):
        decode_proxy_id(bad)


slot_values = st.one_of(
    st.just((TAG_NIL, None)),
    st.tuples(st.just(TAG_IMMEDIATE), st.integers(-(2**63), 2**63 - 1)),
    st.tuples(st.just(TAG_POSITION), st.integers(0, 3)),
    st.tuples(st.just(TAG_EXTERNAL), st.integers(0, 1)),
)
records = st.one_of(
    st.builds(Record, st.text(min_size=1, max_size=12), slots=st.lists(slot_values, max_size=6)),
    st.builds(Record, st.text(min_size=1, max_size=12), body=st.binary(max_size=40)),
)


@settings(max_examples=150)
@given(st.integers(0, MAX_GRAPH), st.lists(records, min_size=4, max_size=8),
       st.lists(st.integers(0, 2**32 - 1), min_size=2, max_size=3))
def test_segment_round_trip(graph, recs, externals):
    seg = Segment(graph, recs, externals)
    back = decode_segment(encode_segment(seg))
    assert back.graph_id == graph and back.externals == externals
    assert [(r.class_name, r.slots, r.body and bytes(r.body)) for r in back.records] == \
        [(r.class_name, [tuple(s) for s in r.slots] if r.slots is not None else None,
          r.body and bytes(r.body)) for r in recs]


def sample_segment():
    return encode_segment(Segment(3, [Record("Link", slots=[(TAG_IMMEDIATE, 5), (TAG_POSITION, 0)]),
                                      Record("String", body=b"hi")], [17]))


def test_segment_header():
    data = sample_segment()
    assert data[:4] == MAGIC
    assert data[4] == 1 and int.from_bytes(data[5:7], "big") == 3


@pytest.mark.parametrize("mangle, message", [
    (lambda d: b"XXXX" + d[4:], "magic"),
    (lambda d: d[:4] + b"\x09" + d[5:], "version"),
    (lambda d: d[:-3], "truncated"),
    (lambda d: d + b"\x00", "trailing"),
])
def test_corrupt_segments(mangle, message):
    with pytest.raises(SwapFault, match=message):
        decode_segment(mangle(sample_segment()))


def test_out_of_range_position_is_rejected():
    data = encode_segment(Segment(1, [Record("Link", slots=[(TAG_POSITION, 4)])], []))
    with pytest.raises(SwapFault, match="position"):
        decode_segment(data)


def test_huge_integer_cannot_be_encoded():
    with pytest.raises(EncodingError):
        encode_segment(Segment(1, [Record("Link", slots=[(TAG_IMMEDIATE, 2**70)])], []))


def test_directory_store(tmp_path):
    store = SegmentStore(tmp_path / "segs")
    store.put(4, b"abc")
    assert 4 in store and (tmp_path / "segs" / "graph-4.gsw").read_bytes() == b"abc"
    assert store.get(4) == b"abc"
    assert not list((tmp_path / "segs").glob("*.tmp"))
    store.delete(4)
    assert 4 not in store
    with pytest.raises(SwapFault):
        store.get(4)


# -- swapping ------------------------------------------------------------------------


def test_swap_out_and_lazy_swap_in():
    rt = make_rt()
    links = chain(rt, 5)
    head = links[0]
    graph = rt.swapper.swap_out([head])
    assert rt.swapper.is_swap_proxy(head)
    assert rt.memory.footprint_of(head) == 8
    with pytest.raises(SwapFault):
        rt.memory.get(links[3])
    assert rt.send(head, "sum") == 15
    assert rt.swapper.swap_ins == 1 and graph not in rt.swapper.graphs
    assert not rt.is_proxy(head)


def test_double_swap_in_fails():
    rt = make_rt()
    graph = rt.swapper.swap_out([chain(rt, 3)[0]])
    rt.swapper.swap_in(graph)
    with pytest.raises(SwapFault, match="not swapped out"):
        rt.swapper.swap_in(graph)


def test_interior_reference_gets_its_own_proxy():
    rt = make_rt()
    links = chain(rt, 4)
    rt.run("| keep |\n")
    rt.memory.dict_put(rt.evaluator.workspace, "keep", links[2])
    graph = rt.swapper.swap_out([links[0]])
    assert sorted(pos for _, pos in rt.swapper.graphs[graph].proxies) == [0, 2]
    assert rt.evaluate("keep value") == 3
    assert rt.send(links[0], "sum") == 10


def test_boundary_objects_stay_in_memory():
    rt = make_rt()
    mem = rt.memory
    links = chain(rt, 2)
    sym = mem.intern("kept")
    mem.slot_write(links[1], 0, sym)
    rt.swapper.swap_out([links[0]])
    assert mem.is_live(sym) and mem.is_live(mem.global_at("Link"))
    rt.swapper.swap_in(1)
    assert mem.slot_read(mem.slot_read(links[0], 1), 0) == sym


def test_refuses_immediates_and_specials():
    rt = make_rt()
    with pytest.raises(RefusedBecome):
        rt.swapper.swap_out([3])
    with pytest.raises(RefusedBecome):
        rt.swapper.swap_out([rt.memory.true])
    with pytest.raises(SwapFault):
        rt.swapper.swap_out([])


def test_segments_on_disk(tmp_path):
    rt = make_rt(segment_dir=str(tmp_path))
    head = chain(rt, 3)[0]
    graph = rt.swapper.swap_out([head])
    assert (tmp_path / f"graph-{graph}.gsw").exists()
    assert rt.send(head, "sum") == 6
    assert not (tmp_path / f"graph-{graph}.gsw").exists()


def test_missing_segment_is_a_fault():
    rt = make_rt()
    head = chain(rt, 3)[0]
    graph = rt.swapper.swap_out([head])
    rt.swapper.store.delete(graph)
    with pytest.raises(SwapFault, match="no segment"):
        rt.send(head, "sum")


def test_swapped_class_brings_itself_back_for_instances():
    rt = make_rt()
    link = chain(rt, 1)[0]
    cls = rt.memory.global_at("Link")
    rt.swapper.swap_out([cls])
    assert rt.swapper.is_swap_proxy(cls)
    assert rt.send(link, "value") == 1
    assert rt.swapper.swap_ins == 1
    assert not rt.swapper.is_swap_proxy(cls)


def test_shared_handler_for_every_proxy():
    rt = make_rt()
    a, b = chain(rt, 1)[0], chain(rt, 1)[0]
    rt.swapper.swap_out([a])
    rt.swapper.swap_out([b])
    assert rt.send(a, "proxyHandler") == rt.send(b, "proxyHandler") == rt.swapper.handler


def test_report_accounts_for_outstanding_savings():
    rt = make_rt()
    head = chain(rt, 10)[0]
    before = rt.report()
    rt.swapper.swap_out([head])
    after = rt.report()
    assert after["bytes_after"] == before["bytes_after"] - (10 * 16 - 8)
    assert after["bytes_before"] == before["bytes_after"]
    assert after["proxies"] == before["proxies"] + 1
    rt.send(head, "sum")
    assert rt.report()["bytes_before"] == rt.report()["bytes_after"]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 60))
def test_saving_is_monotone_in_graph_size(length):
    saved = []
    for n in (length, length + 1):
        rt = make_rt()
        rt.swapper.swap_out([chain(rt, n)[0]])
        saved.append(rt.swapper.outstanding_savings())
        assert saved[-1] == 16 * n - 8
    assert 0 <= saved[0] < saved[1]


def test_footprint_report_fields():
    rt = make_rt()
    links = chain(rt, 4)
    proxy = rt.memory.alloc(rt.swapper.proxy_class, [encode_proxy_id(1, 0)])
    report = footprint_report(rt, links, [proxy])
    assert report == {"total_before": 64, "total_after": 8, "proxy_count": 1,
                      "bytes_saved": 56, "percent_saved": 87.5}
