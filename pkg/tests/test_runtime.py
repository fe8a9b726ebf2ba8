import pytest
from hypothesis import given, settings, strategies as st

from streamspanner.runtime import (
    INF,
    EdgeRec,
    Identity,
    StateBudgetExceeded,
    StreamSortRuntime,
    StreamWriter,
    Transducer,
    TransducerFault,
    VertexRec,
    cmp_order0,
    cmp_order_cc,
    decode,
    encode,
    make_order_cc,
    order0_key,
)


def occurrences(pairs, w=1):
    out = []
    for u, v in pairs:
        out += [EdgeRec(u, v, w, u, v), EdgeRec(v, u, w, v, u)]
    return out


def test_identity_pass():
    rt = StreamSortRuntime()
    records = occurrences([(1, 2), (2, 3)]) + [VertexRec(1, 1)]
    out = rt.stream_pass(rt.materialize(records), Identity())
    assert list(out) == records
    assert rt.accounting.max_state_records == 0
    assert rt.accounting.stream_passes == 1


class DropDiscarded(Transducer):
    budget = 0

    def step(self, rec, emit):
        if not (type(rec) is EdgeRec and rec.spanner == -1):
            emit(rec)


def test_filter_pass():
    rt = StreamSortRuntime()
    recs = [EdgeRec(1, 2, 1, 1, 2, s) for s in (-1, 0, 1, -1, 0)]
    out = list(rt.stream_pass(rt.materialize(recs), DropDiscarded()))
    assert out == [r for r in recs if r.spanner != -1]


class GroupMin(Transducer):
    """Running minimum over the edges preceding each vertex record."""

    budget = 1

    def step(self, rec, emit):
        if type(rec) is EdgeRec:
            if "best" not in self.state or rec.w < self.state["best"]:
                self.state["best"] = rec.w
            emit(rec)
        else:
            emit(rec._replace(N=self.state.pop("best", INF)))


def test_running_min_matches_full_scan():
    weights = [7, 3, 9, 3.5, 11]
    group = [EdgeRec(4, x, w, 4, x) for x, w in zip(range(5, 10), weights)]
    rt = StreamSortRuntime()
    out = list(rt.stream_pass(rt.materialize(group + [VertexRec(4, 4)]), GroupMin()))
    assert out[-1].N == min(r.w for r in group)
    assert rt.accounting.max_state_records == 1


class Hoarder(Transducer):
    budget = 2

    def step(self, rec, emit):
        self.state[f"r{len(self.state)}"] = rec


class ListKeeper(Transducer):
    budget = 4

    def step(self, rec, emit):
        self.state.setdefault("all", 0)
        self.state["all"] = [rec]


class SideChannel(Transducer):
    budget = 1

    def step(self, rec, emit):
        self.count = getattr(self, "count", 0) + 1


@pytest.mark.parametrize("transducer,error", [
    (Hoarder(), StateBudgetExceeded),
    (ListKeeper(), TransducerFault),
    (SideChannel(), TransducerFault),
])
def test_memory_discipline_enforced(transducer, error):
    rt = StreamSortRuntime()
    with pytest.raises(error):
        rt.stream_pass(rt.materialize(occurrences([(1, 2), (2, 3)])), transducer)


def test_declared_budget_over_limit_rejected():
    class Greedy(Transducer):
        budget = 5

    rt = StreamSortRuntime()
    with pytest.raises(StateBudgetExceeded):
        rt.stream_pass(rt.materialize([]), Greedy())


def test_writer_is_write_once():
    w = StreamWriter(None)
    w.append(VertexRec(1, 1))
    w.close()
    with pytest.raises(RuntimeError):
        w.append(VertexRec(2, 2))


def test_sorted_input_unchanged():
    rt = StreamSortRuntime()
    recs = sorted(occurrences([(1, 2), (1, 3), (2, 3)]), key=order0_key)
    assert list(rt.sort_pass(rt.materialize(recs), order0_key)) == recs
    assert rt.accounting.sort_passes == 1


def test_order0_puts_pairs_together():
    rt = StreamSortRuntime()
    recs = occurrences([(3, 1), (1, 4), (2, 7), (5, 6), (1, 2)])
    out = list(rt.sort_pass(rt.materialize(recs[::-1]), order0_key))
    for a, b in zip(out[::2], out[1::2]):
        assert (a.u, a.v) == (b.v, b.u)


def test_cmp_order0_examples():
    e = lambda u, v: EdgeRec(u, v, 1, u, v)
    assert cmp_order0(e(3, 1), e(1, 4)) < 0
    assert cmp_order0(e(2, 7), e(7, 2)) < 0
    assert cmp_order0(e(1, 2), e(3, 4)) < 0
    assert cmp_order0(e(1, 2), e(1, 2)) == 0


def test_vertex_precedes_its_edges_under_identity_clustering():
    # mixed records sorted by (C0, C') with C' arbitrary: each vertex heads its incident edges
    centers = {1: 1, 2: 1, 3: 3, 4: 3, 5: 5}
    recs = [VertexRec(v, centers[v]) for v in centers]
    for u, v in [(1, 3), (2, 5), (1, 4), (3, 5), (2, 4)]:
        recs += [EdgeRec(u, v, 1, centers[u], centers[v]), EdgeRec(v, u, 1, centers[v], centers[u])]
    rt = StreamSortRuntime()
    out = list(rt.sort_pass(rt.materialize(recs[::-1]), make_order_cc("id", "center")))
    owner = None
    for rec in out:
        if type(rec) is VertexRec:
            owner = rec.v
        else:
            assert rec.u == owner
    # grouped by the far cluster within each vertex
    for v in centers:
        far = [r.rcenter for r in out if type(r) is EdgeRec and r.u == v]
        assert far == sorted(far)


def test_cmp_order_cc_examples():
    vertex = VertexRec(9, 5)
    edge = EdgeRec(2, 8, 1, 5, 8)
    assert cmp_order_cc(vertex, edge, "center", "id", "before") < 0
    assert cmp_order_cc(vertex, edge, "center", "id", "after") > 0
    heavy = EdgeRec(2, 8, 7, 2, 4)
    light = EdgeRec(2, 9, 2, 2, 4)
    assert cmp_order_cc(light, heavy, "id", "center", weight=True) < 0
    assert cmp_order_cc(light, heavy, "id", "center", weight=False) > 0


record = st.one_of(
    st.builds(EdgeRec, st.integers(1, 50), st.integers(1, 50), st.integers(0, 100),
              st.integers(1, 50), st.integers(1, 50), st.sampled_from([-2, -1, 0, 1]), st.integers(0, 1)),
    st.builds(VertexRec, st.integers(1, 50), st.integers(1, 50), st.integers(0, 1),
              st.one_of(st.just(INF), st.integers(0, 100)), st.integers(0, 50)),
)


@given(record)
def test_binary_round_trip(rec):
    assert decode(encode(rec)) == rec


@settings(max_examples=30, deadline=None)
@given(st.lists(record, max_size=200), st.sampled_from(["order0", "cc", "cc-after-w"]))
def test_external_sort_matches_memory_sort(tmp_path_factory, records, which):
    key = {
        "order0": order0_key,
        "cc": make_order_cc("center", "id"),
        "cc-after-w": make_order_cc("id", "center", vertices="after", weight=True),
    }[which]
    with StreamSortRuntime(storage="file", tmpdir=str(tmp_path_factory.mktemp("ext")), run_size=7) as rt:
        out = list(rt.sort_pass(rt.materialize(records), key))
    assert out == sorted(records, key=key)
