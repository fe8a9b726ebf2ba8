"""(2k-1)-spanner in the StreamSort model with constant-record working state.

Each of the ``k`` iterations samples clusters of the previous clustering,
hooks unsampled vertices onto their lightest sampled neighbour, emits one
lightest edge per lighter neighbouring cluster and rebuilds the clustering.
Every step is a sort pass followed by a stream pass whose transducer holds
at most four records/words, so an iteration costs 10 passes and a whole run
``10k + 2`` (the extra two deduplicate and augment the input).

Iteration ``k`` samples nothing, so every surviving vertex keeps one edge
to each neighbouring cluster and the live edge set ends empty.

Deleted occurrences leave on a side port tagged ``spanner=-1`` (dropped by
a lighter edge to the same cluster) or ``spanner=-2`` (intra-cluster after
the rebuild); they exist only so verifiers can replay deletions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .core import Edge, check_edge, prf_uniform, sampling_probability
from .runtime import (
    INF,
    EdgeRec,
    PassAccounting,
    RecordStream,
    StreamSortRuntime,
    Transducer,
    VertexRec,
    make_order_cc,
    order0_key,
)

PASSES_PER_ITERATION = 10
PREPROCESS_PASSES = 2
PASS_CONSTANT = 12  # documented c: total passes <= 10k + 2 <= 12k for every k >= 1

DISCARDED = -1
PURGED = -2


class StreamCorruption(RuntimeError):
    pass


def _pair_key(rec: EdgeRec) -> tuple:
    u, v = rec.u, rec.v
    return (u, v) if u < v else (v, u)


# -- preprocessing -----------------------------------------------------------


def _dedup_key(rec: EdgeRec) -> tuple:
    u, v = rec.u, rec.v
    return (u if u < v else v, v if u < v else u, rec.w, u, v)


class _Augment(Transducer):
    """Keeps the lightest copy of each vertex pair, doubles it into two
    occurrences and appends the vertex records."""

    name = "preprocess"
    budget = 3

    def __init__(self, n: int):
        super().__init__()
        self.n = n

    def step(self, rec, emit):
        st = self.state
        u, v = rec.u, rec.v
        lo, hi = (u, v) if u < v else (v, u)
        if st.get("lo") == lo and st.get("hi") == hi:
            return
        st["lo"], st["hi"] = lo, hi
        emit(EdgeRec(u, v, rec.w, u, v))
        emit(EdgeRec(v, u, rec.w, v, u))

    def finish(self, emit):
        st = self.state
        st.pop("lo", None)
        st.pop("hi", None)
        st["next"] = 1
        while st["next"] <= self.n:
            v = st["next"]
            emit(VertexRec(v, v))
            st["next"] = v + 1
        del st["next"]


def preprocess(rt: StreamSortRuntime, edges: Iterable, n: int) -> RecordStream:
    """Two occurrences per edge plus a vertex record for every vertex.

    Parallel edges collapse to their lightest copy first (a spanner of the
    lightest copies spans the multigraph too).
    """
    raw = []
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        check_edge(n, u, v)
        raw.append(EdgeRec(u, v, w, u, v))
    source = rt.materialize(raw)
    ordered = rt.sort_pass(source, _dedup_key, name="dedup")
    return rt.stream_pass(ordered, _Augment(n))


# -- step 1: sampling ----------------------------------------------------------


class _Sample(Transducer):
    name = "sample"
    budget = 2

    def __init__(self, iteration: int, k: int, n: int, seed: int):
        super().__init__()
        self.iteration = iteration
        self.active = iteration < k
        self.p = sampling_probability(n, k)
        self.seed = seed

    def step(self, rec, emit):
        st = self.state
        if type(rec) is VertexRec:
            if st.get("cluster") != rec.center:
                st["cluster"] = rec.center
                st["coin"] = int(
                    self.active
                    and prf_uniform(self.seed, "streamsort", self.iteration, rec.center) < self.p
                )
            emit(VertexRec(rec.v, rec.center, st["coin"], INF, 0))
        else:
            if st.get("cluster") != rec.lcenter:
                raise StreamCorruption(f"edge {rec.u}-{rec.v} owned by a cluster with no live vertex")
            emit(rec._replace(sampled=st["coin"], spanner=0))


def sample_clusters(rt: StreamSortRuntime, stream: RecordStream, iteration: int,
                    k: int, n: int, seed: int) -> RecordStream:
    """One coin per cluster of the previous clustering; none in the last iteration."""
    ordered = rt.sort_pass(stream, make_order_cc("center", "id"), name="by-cluster")
    return rt.stream_pass(ordered, _Sample(iteration, k, n, seed))


def cluster_is_sampled(seed: int, iteration: int, center: int, n: int, k: int) -> bool:
    return iteration < k and prf_uniform(seed, "streamsort", iteration, center) < sampling_probability(n, k)


# -- step 2: nearest sampled cluster ------------------------------------------


class _PairUp(Transducer):
    """Shared skeleton for passes over the (min,max)-sorted stream: hold
    the first occurrence of each pair until its mirror arrives."""

    budget = 1

    def step(self, rec, emit):
        st = self.state
        if type(rec) is VertexRec:
            if "held" in st:
                raise StreamCorruption("vertex record inside an edge pair")
            self.vertex(rec, emit)
            return
        held = st.get("held")
        if held is None:
            st["held"] = rec
            return
        del st["held"]
        if held.u != rec.v or held.v != rec.u:
            raise StreamCorruption(f"unpaired occurrence ({held.u},{held.v})")
        self.pair(held, rec, emit)

    def finish(self, emit):
        if "held" in self.state:
            held = self.state["held"]
            raise StreamCorruption(f"unpaired occurrence ({held.u},{held.v})")

    def vertex(self, rec, emit):
        emit(rec)

    def pair(self, a, b, emit):
        emit(a)
        emit(b)


class _Propagate(_PairUp):
    name = "propagate-sampled"

    def pair(self, a, b, emit):
        flag = a.sampled | b.sampled
        emit(a._replace(sampled=flag))
        emit(b._replace(sampled=flag))


def propagate_sampled_flag(rt: StreamSortRuntime, stream: RecordStream) -> RecordStream:
    ordered = rt.sort_pass(stream, order0_key, name="pairs")
    return rt.stream_pass(ordered, _Propagate())


class _NearestSampled(Transducer):
    """Running minimum over a vertex's sampled occurrences, written into the
    vertex record that trails the group."""

    name = "nearest-sampled"
    budget = 1

    def step(self, rec, emit):
        st = self.state
        if type(rec) is EdgeRec:
            if rec.sampled:
                best = st.get("best")
                if best is not None and best.u != rec.u:
                    raise StreamCorruption(f"edges of vertex {best.u} not followed by its record")
                if best is None or (rec.w, rec.rcenter, rec.v) < (best.w, best.rcenter, best.v):
                    st["best"] = rec
            emit(rec)
            return
        best = st.pop("best", None)
        if best is not None and best.u != rec.v:
            raise StreamCorruption(f"edges of vertex {best.u} not followed by its record")
        if rec.sampled or best is None:
            emit(rec._replace(N=INF, chosen=0))
        else:
            emit(rec._replace(center=best.rcenter, N=best.w, chosen=best.v))


def assign_nearest_sampled(rt: StreamSortRuntime, stream: RecordStream) -> RecordStream:
    ordered = rt.sort_pass(stream, make_order_cc("id", "id", vertices="after"), name="by-vertex,vertex-last")
    return rt.stream_pass(ordered, _NearestSampled())


# -- step 3: spanner edges -----------------------------------------------------


class _Select(Transducer):
    """Per unsampled vertex and neighbouring cluster: the lightest edge joins
    the spanner if it beats N(v) and the rest of the group is discarded.

    The pass also marks the hook edge and stamps each occurrence's lcenter
    with the owner's new center.
    """

    name = "select"
    budget = 3

    def step(self, rec, emit):
        st = self.state
        if type(rec) is VertexRec:
            st["vertex"] = rec
            st.pop("group", None)
            st.pop("decision", None)
            emit(rec)
            return
        vx = st.get("vertex")
        if vx is None or vx.v != rec.u:
            raise StreamCorruption(f"edge ({rec.u},{rec.v}) does not follow its vertex record")
        flag = 0
        if not vx.sampled:
            if st.get("group") != rec.rcenter:
                st["group"] = rec.rcenter
                if rec.w < vx.N:
                    flag = 1
                    st["decision"] = DISCARDED
                else:
                    st["decision"] = 0
            else:
                flag = st["decision"]
            if vx.chosen == rec.v and rec.w == vx.N:
                flag = 1
            if flag == 0 and vx.N == INF:
                raise StreamCorruption(f"edge ({rec.u},{rec.v}) of a dropped vertex left undecided")
        emit(rec._replace(spanner=flag, lcenter=vx.center))


def select_spanner_edges(rt: StreamSortRuntime, stream: RecordStream, iteration: int) -> RecordStream:
    ordered = rt.sort_pass(stream, make_order_cc("id", "center", weight=True), name="by-vertex,cluster,weight")
    return rt.stream_pass(ordered, _Select())


# -- step 4: rebuild -------------------------------------------------------------


class _Resolve(_PairUp):
    """Settles each occurrence pair and refreshes rcenter from the mirror.

    Ports: 0 live records, 1 spanner edges, 2 deleted occurrences.
    """

    name = "resolve"
    ports = 3

    def vertex(self, rec, emit):
        if rec.sampled == 0 and rec.N == INF:
            return
        emit(rec)

    def pair(self, a, b, emit):
        if a.spanner == 1 or b.spanner == 1:
            emit(a if a.u < a.v else b, 1)
        elif a.spanner == DISCARDED or b.spanner == DISCARDED:
            emit(a._replace(spanner=DISCARDED), 2)
            emit(b._replace(spanner=DISCARDED), 2)
        elif a.lcenter == b.lcenter:
            emit(a._replace(spanner=PURGED, rcenter=b.lcenter), 2)
            emit(b._replace(spanner=PURGED, rcenter=a.lcenter), 2)
        else:
            emit(a._replace(rcenter=b.lcenter, sampled=0))
            emit(b._replace(rcenter=a.lcenter, sampled=0))


def rebuild_clustering(rt: StreamSortRuntime, stream: RecordStream):
    """Returns ``(live, spanner_segment, deleted_segment)``."""
    ordered = rt.sort_pass(stream, order0_key, name="pairs")
    return rt.stream_pass(ordered, _Resolve())


# -- driver --------------------------------------------------------------------------


@dataclass
class Snapshot:
    """Live edges at the start of an iteration, with the spanner built so far."""

    iteration: int
    live: list[EdgeRec]
    spanner: list[Edge]


@dataclass
class StreamSortResult:
    n: int
    k: int
    spanner: list[Edge]
    accounting: PassAccounting
    deleted: list[tuple[int, EdgeRec]] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    final_live: int = 0

    def edge_set(self) -> set[Edge]:
        return set(self.spanner)

    def pass_bound(self) -> int:
        return PASS_CONSTANT * self.k


def _spanner_list(segments: list[RecordStream]) -> list[Edge]:
    out = []
    for seg in segments:
        for rec in seg:
            out.append(Edge(rec.u, rec.v, rec.w))
    return out


def run(k: int, seed: int, edges: Iterable, n: int, runtime: StreamSortRuntime | None = None,
        snapshots: bool = False, tap: Callable[[int, str, RecordStream], None] | None = None) -> StreamSortResult:
    """Build a (2k-1)-spanner of the weighted edge list in ``10k + 2`` passes.

    ``snapshots`` records the live edges before every iteration and keeps
    deleted occurrences (tagged with their iteration) for offline checks;
    ``tap(iteration, step, stream)`` sees every intermediate stream.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    own_rt = runtime is None
    rt = runtime or StreamSortRuntime()
    try:
        stream = preprocess(rt, edges, n)
        segments: list[RecordStream] = []
        result = StreamSortResult(n=n, k=k, spanner=[], accounting=rt.accounting)

        def seen(i, step, s):
            if tap is not None:
                tap(i, step, s)
            return s

        for i in range(1, k + 1):
            if snapshots:
                live = [r for r in stream if type(r) is EdgeRec]
                result.snapshots.append(Snapshot(i, live, _spanner_list(segments)))
            stream = seen(i, "sample", sample_clusters(rt, stream, i, k, n, seed))
            stream = seen(i, "propagate", propagate_sampled_flag(rt, stream))
            stream = seen(i, "assign", assign_nearest_sampled(rt, stream))
            stream = seen(i, "select", select_spanner_edges(rt, stream, i))
            stream, spanner_seg, deleted_seg = rebuild_clustering(rt, stream)
            seen(i, "rebuild", stream)
            segments.append(spanner_seg)
            if snapshots:
                result.deleted.extend((i, r) for r in deleted_seg)
        result.final_live = sum(1 for r in stream if type(r) is EdgeRec)
        result.spanner = _spanner_list(segments)
        return result
    finally:
        if own_rt:
            rt.close()
