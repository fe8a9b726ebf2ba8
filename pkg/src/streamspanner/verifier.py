"""Exact-distance oracles and invariant checks for spanner builds.

Stretch is checked per edge: if every edge ``(u, v, w)`` of ``G`` has
``d_S(u, v) <= t * w`` then concatenating along shortest paths gives
``d_S <= t * d_G`` for every pair.  ``mode="pairs"`` checks all pairs
directly and exists mainly to validate that reduction on small graphs.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Edge
from .incremental import SpannerState

INF = math.inf
DEFAULT_GUARD = 3000


class GuardExceeded(RuntimeError):
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)
    metrics: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name, bool(passed), detail))

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        self.checks.extend(other.checks)
        self.metrics.update(other.metrics)
        return self

    def lines(self) -> list[str]:
        out = [f"{key}={_fmt(val)}" for key, val in self.metrics.items()]
        for c in self.checks:
            line = f"check.{c.name}={'pass' if c.passed else 'FAIL'}"
            if c.detail:
                line += f" {c.detail}"
            out.append(line)
        out.append(f"status={'pass' if self.ok else 'FAIL'}")
        return out

    def summary(self) -> dict:
        return {
            "ok": self.ok,
            "metrics": {k: _jsonable(v) for k, v in self.metrics.items()},
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def _fmt(val) -> str:
    if isinstance(val, float):
        return "inf" if val == INF else f"{val:.6g}"
    if isinstance(val, tuple):
        return ",".join(map(str, val))
    return str(val)


def _jsonable(val):
    if isinstance(val, float) and not math.isfinite(val):
        return str(val)
    if isinstance(val, tuple):
        return list(val)
    return val


# -- graphs and oracles ----------------------------------------------------------


class Graph:
    """Undirected adjacency lists over ``1..n``; parallel edges keep the lightest."""

    def __init__(self, n: int, edges: Iterable, guard: int | None = DEFAULT_GUARD):
        if guard is not None and n > guard:
            raise GuardExceeded(f"n={n} exceeds the oracle guard {guard}")
        self.n = n
        best: dict[tuple[int, int], float] = {}
        for e in edges:
            u, v = e[0], e[1]
            w = e[2] if len(e) > 2 else 1
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in best or w < best[key]:
                best[key] = w
        self.edges = [Edge(a, b, w) for (a, b), w in best.items()]
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n + 1)]
        for a, b, w in self.edges:
            self.adj[a].append((b, w))
            self.adj[b].append((a, w))
        self.unit = all(w == 1 for _, _, w in self.edges)

    def edge_keys(self) -> set[tuple[int, int]]:
        return {(a, b) for a, b, _ in self.edges}


def exact_distances(graph: Graph, source: int) -> list[float]:
    """Distances from ``source`` (index 0 unused); BFS on unit weights, Dijkstra otherwise."""
    dist = [INF] * (graph.n + 1)
    dist[source] = 0
    adj = graph.adj
    if graph.unit:
        queue = deque([source])
        while queue:
            x = queue.popleft()
            nd = dist[x] + 1
            for y, _ in adj[x]:
                if dist[y] == INF:
                    dist[y] = nd
                    queue.append(y)
        return dist
    heap = [(0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        for y, w in adj[x]:
            nd = d + w
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def matrix_distances(n: int, edges: Iterable) -> np.ndarray:
    """All-pairs distances by repeated min-plus relaxation (Floyd-Warshall).

    Independent of :func:`exact_distances`; row/column 0 is unused.
    """
    D = np.full((n + 1, n + 1), np.inf)
    np.fill_diagonal(D, 0.0)
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        if w < D[u, v]:
            D[u, v] = D[v, u] = w
    for mid in range(1, n + 1):
        np.minimum(D, D[:, mid, None] + D[None, mid, :], out=D)
    return D


def all_pairs(graph: Graph) -> list[list[float]]:
    return [[]] + [exact_distances(graph, s) for s in range(1, graph.n + 1)]


def _ratio(ds: float, dg: float) -> float:
    if dg == 0:
        return 1.0 if ds == 0 else INF
    return ds / dg


def check_stretch(n: int, graph_edges: Iterable, spanner_edges: Iterable, t: float,
                  mode: str = "edges", guard: int | None = DEFAULT_GUARD) -> VerificationReport:
    """Check ``d_S <= t * d_G``; failures and the worst pair land in the report."""
    G = Graph(n, graph_edges, guard)
    S = Graph(n, spanner_edges, guard)
    report = VerificationReport()
    extra = S.edge_keys() - G.edge_keys()
    report.add("subset", not extra, f"foreign_edge={min(extra)}" if extra else "")
    worst, witness, violations, first = 1.0, None, 0, None
    if mode == "edges":
        by_source: dict[int, list[Edge]] = defaultdict(list)
        for e in G.edges:
            by_source[e.u].append(e)
        for u, group in by_source.items():
            ds = exact_distances(S, u)
            for _, v, w in group:
                r = _ratio(ds[v], w)
                if witness is None or r > worst:
                    worst, witness = r, (u, v)
                if ds[v] > t * w:
                    violations += 1
                    first = first or (u, v)
    elif mode == "pairs":
        for u in range(1, n + 1):
            dg = exact_distances(G, u)
            ds = exact_distances(S, u)
            for v in range(u + 1, n + 1):
                if dg[v] == INF:
                    continue
                r = _ratio(ds[v], dg[v])
                if witness is None or r > worst:
                    worst, witness = r, (u, v)
                if ds[v] > t * dg[v]:
                    violations += 1
                    first = first or (u, v)
    else:
        raise ValueError("mode must be 'edges' or 'pairs'")
    report.metrics.update(
        t=t, max_stretch_ratio=worst, witness=witness or (0, 0),
        graph_edges=len(G.edges), spanner_size=len(S.edges), stretch_violations=violations,
    )
    report.add("stretch", violations == 0, f"first_violation={first}" if first else "")
    return report


# -- single-pass invariants ------------------------------------------------------------


def _hook_graph(state: SpannerState) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(state.n + 1)]
    for u, v, _ in state.hook_edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _bfs_hops(adj: list[list[int]], source: int, limit: int) -> dict[int, int]:
    hops = {source: 0}
    frontier = [source]
    for depth in range(1, limit + 1):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in hops:
                    hops[y] = depth
                    nxt.append(y)
        frontier = nxt
    return hops


def check_cluster_radius(state: SpannerState) -> VerificationReport:
    """Every vertex clustered at level i reaches its center over <= i hook edges."""
    report = VerificationReport()
    adj = _hook_graph(state)
    C = state.clustering.centers
    worst, first = 0, None
    for i in range(state.k):
        members: dict[int, list[int]] = defaultdict(list)
        for v in range(1, state.n + 1):
            if C[i][v]:
                members[C[i][v]].append(v)
        for x, vs in members.items():
            if len(vs) == 1 and vs[0] == x:
                continue
            hops = _bfs_hops(adj, x, i)
            for v in vs:
                if v not in hops:
                    first = first or (i, v, x)
                else:
                    worst = max(worst, hops[v])
    report.metrics["max_cluster_radius"] = worst
    report.metrics["hook_edge_count"] = len(state.hook_edges)
    report.add("cluster_radius", first is None, f"level,vertex,center={first}" if first else "")
    return report


def check_cluster_invariants(state: SpannerState) -> VerificationReport:
    """Identity level 0, contiguous levels, sampled centers, rise consistency, Temp no longer than reps, clean scratch."""
    report = VerificationReport()
    h = state.hierarchy
    C = state.clustering.centers
    level = state.clustering.level
    n, k = state.n, state.k
    bad = {name: None for name in
           ("level0_identity", "contiguity", "centers_sampled", "rise_consistency", "buffer_bound", "nested_levels")}
    for v in range(1, n + 1):
        if C[0][v] != v and bad["level0_identity"] is None:
            bad["level0_identity"] = v
        levels = [i for i in range(k) if C[i][v]]
        if levels != list(range(level[v] + 1)) and bad["contiguity"] is None:
            bad["contiguity"] = v
        for i in levels:
            x = C[i][v]
            if (h.lmax[x] < i or C[i][x] != x) and bad["centers_sampled"] is None:
                bad["centers_sampled"] = (i, v)
            if i + 1 < k and h.lmax[x] > i and C[i + 1][v] != x and bad["rise_consistency"] is None:
                bad["rise_consistency"] = (i, v)
        if len(state.temp[v]) > len(state.reps[v]) and bad["buffer_bound"] is None:
            bad["buffer_bound"] = v
        if any(not h.in_level(v, i) for i in range(h.lmax[v] + 1)) and bad["nested_levels"] is None:
            bad["nested_levels"] = v
    for name, where in bad.items():
        report.add(name, where is None, f"at={where}" if where is not None else "")
    report.add("scratch_clear", not any(state.scratch))
    hooks = len(state.hook_edges)
    report.add("hook_edge_bound", hooks <= n * (k - 1), f"hooks={hooks} bound={n * (k - 1)}")
    return report


# -- StreamSort checks --------------------------------------------------------------------


def bottleneck_within_hops(n: int, edges: Sequence, source: int, hops: int) -> list[list[float]]:
    """``b[h][v]``: least possible heaviest-edge weight over paths from ``source`` to ``v``
    using at most ``h`` edges (``-inf`` for the source, ``inf`` if unreachable)."""
    cur = [INF] * (n + 1)
    cur[source] = -INF
    layers = [cur]
    for _ in range(hops):
        nxt = cur[:]
        for e in edges:
            a, b, w = e[0], e[1], e[2]
            if cur[a] < INF:
                val = max(cur[a], w)
                if val < nxt[b]:
                    nxt[b] = val
            if cur[b] < INF:
                val = max(cur[b], w)
                if val < nxt[a]:
                    nxt[a] = val
        layers.append(nxt)
        cur = nxt
    return layers


def check_property_P(snapshot, n: int) -> VerificationReport:
    """Each live occurrence (u,v) reaches u's center over <= i-1 spanner edges no heavier than w(u,v)."""
    report = VerificationReport()
    i = snapshot.iteration
    by_center: dict[int, list] = defaultdict(list)
    for rec in snapshot.live:
        if rec.u != rec.lcenter:
            by_center[rec.lcenter].append(rec)
    first = None
    for c, recs in by_center.items():
        layer = bottleneck_within_hops(n, snapshot.spanner, c, i - 1)[-1]
        for rec in recs:
            if layer[rec.u] > rec.w:
                first = first or (i, rec.u, rec.v, rec.w)
    report.add(f"property_P.iter{i}", first is None,
               f"iteration,u,v,w={first}" if first else f"live={len(snapshot.live)}")
    return report


def check_deletion_witnesses(result) -> VerificationReport:
    """Every deleted edge has a light, short detour in the final spanner.

    Edges dropped for a lighter edge to the same cluster at iteration ``i`` need
    at most ``2i-1`` hops; intra-cluster purges need at most ``2i``.
    """
    from .streamsort import DISCARDED

    report = VerificationReport()
    spanner = result.spanner
    by_source: dict[int, list] = defaultdict(list)
    for i, rec in result.deleted:
        if rec.u < rec.v:
            limit = 2 * i - 1 if rec.spanner == DISCARDED else 2 * i
            by_source[rec.u].append((rec, limit))
    first, worst = None, 0
    for u, items in by_source.items():
        layers = bottleneck_within_hops(result.n, spanner, u, max(l for _, l in items))
        for rec, limit in items:
            if layers[limit][rec.v] > rec.w:
                first = first or (rec.u, rec.v, rec.w, limit)
            else:
                worst = max(worst, next(h for h in range(limit + 1) if layers[h][rec.v] <= rec.w))
    report.metrics["deleted_edges"] = sum(len(v) for v in by_source.values())
    report.metrics["max_witness_hops"] = worst
    report.add("deletion_witness", first is None, f"u,v,w,limit={first}" if first else "")
    return report


def check_streamsort_accounting(result, state_limit: int = 4) -> VerificationReport:
    report = VerificationReport()
    acc = result.accounting
    report.metrics.update(
        stream_passes=acc.stream_passes, sort_passes=acc.sort_passes,
        total_passes=acc.total_passes, pass_bound=result.pass_bound(),
        max_state_records=acc.max_state_records,
    )
    report.add("pass_bound", acc.total_passes <= result.pass_bound())
    report.add("state_bound", acc.max_state_records <= state_limit)
    report.add("live_edges_empty", result.final_live == 0, f"live={result.final_live}")
    return report


# -- size and work -----------------------------------------------------------------------


@dataclass
class BuildStats:
    n: int
    k: int
    m: int
    size: int
    hook_edges: int = 0
    prune_scans: int = 0

    @classmethod
    def from_state(cls, state: SpannerState, m: int | None = None) -> "BuildStats":
        return cls(n=state.n, k=state.k, m=state.edges_processed if m is None else m,
                   size=len(state.spanner_edges()), hook_edges=len(state.hook_edges),
                   prune_scans=state.prune_scans)


def size_bound(n: int, k: int) -> float:
    return k * n ** (1 + 1 / k) + k * n


def check_size_and_work(runs: Sequence[BuildStats], size_factor: float = 4.0,
                        work_factor: float = 10.0) -> VerificationReport:
    """Aggregate size/work statistics over a batch of builds of one configuration."""
    report = VerificationReport()
    if not runs:
        raise ValueError("no runs")
    n, k = runs[0].n, runs[0].k
    sizes = np.array([r.size for r in runs], dtype=float)
    bound = size_bound(n, k)
    report.metrics.update(
        runs=len(runs), mean_size=float(sizes.mean()), size_bound=bound,
        size_ratio=float(sizes.mean() / bound),
        max_hook_edges=max(r.hook_edges for r in runs), hook_bound=n * (k - 1),
        max_scan_ratio=max(r.prune_scans / max(r.m, 1) for r in runs),
    )
    report.add("mean_size", sizes.mean() <= size_factor * bound)
    report.add("hook_edges", all(r.hook_edges <= r.n * (r.k - 1) for r in runs))
    report.add("prune_work", all(r.prune_scans <= work_factor * (r.m + r.k * r.n) for r in runs))
    return report
