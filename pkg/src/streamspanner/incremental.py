"""Single-pass streaming (2k-1)-spanner with buffered pruning.

Every vertex ``u`` keeps two lists at its current level ``i = level[u]``:
``reps[u]`` holds one edge per neighbouring level-``i`` cluster and
``temp[u]`` buffers fresh edges until it is as long as ``reps[u]``, at which
point :meth:`SpannerState.prune` merges it in with one scan over a shared
scratch array.  That keeps the cost per edge amortized constant.

Hooking onto a sampled cluster lifts ``u`` to a higher level; its buffers
are then committed to the spanner together with the hook edge.
"""

from __future__ import annotations

from typing import Iterable

from .core import Edge, MultiLevelClustering, SamplingHierarchy, check_edge


class InvariantViolation(AssertionError):
    pass


class WeightOrderError(ValueError):
    def __init__(self, position: int, previous: float, weight: float):
        super().__init__(
            f"weight order violated at position {position}: {weight} after {previous}"
        )
        self.position = position


class SpannerState:
    """Mutable state of one single-pass spanner build.

    Edges are stored oriented as ``(owner, other, w)``.  With
    ``check_invariants`` the scratch-array, discard-witness and buffer-size
    assertions run on every step (costly; meant for tests and ``--check-invariants``).
    """

    def __init__(self, h: SamplingHierarchy, check_invariants: bool = False):
        n, k = h.n, h.k
        self.hierarchy = h
        self.n = n
        self.k = k
        self.clustering = MultiLevelClustering(h)
        self.temp: list[list[tuple]] = [[] for _ in range(n + 1)]
        self.reps: list[list[tuple]] = [[] for _ in range(n + 1)]
        self.committed: list[tuple] = []
        self.hook_edges: list[tuple] = []
        self.scratch = bytearray(n + 1)
        self.check_invariants = check_invariants

        self.edges_processed = 0
        self.prune_calls = 0
        self.prune_scans = 0
        self.promotions = 0
        self.discards = 0
        self.rises = 0
        # rep_counts[i][u]: edges ever promoted into u's list while u sat at level i
        self.rep_counts = [[0] * (n + 1) for _ in range(k)]

    # -- edge processing -------------------------------------------------

    def process_edge(self, u: int, v: int, w: float = 1) -> None:
        check_edge(self.n, u, v)
        level = self.clustering.level
        if level[u] > level[v]:
            u, v = v, u
        i = level[u]
        centers = self.clustering.centers
        x = centers[i][v]
        if x == 0:
            raise InvariantViolation(f"vertex {v} unclustered at level {i} <= its level")
        h = self.hierarchy.lmax[x]
        self.edges_processed += 1
        if h > i:
            for j in range(i + 1, h + 1):
                centers[j][u] = x
            level[u] = h
            self.rises += 1
            self.committed.extend(self.temp[u])
            self.committed.extend(self.reps[u])
            self.committed.append((u, v, w))
            self.hook_edges.append((u, v, w))
            self.temp[u] = []
            self.reps[u] = []
        else:
            temp = self.temp[u]
            temp.append((u, v, w))
            if len(temp) >= len(self.reps[u]):
                self.prune(u, i)
        if self.check_invariants:
            self._check_buffer_bound(u)

    def prune(self, u: int, i: int) -> None:
        """Move the buffered edges of ``u`` that reach a new level-``i`` cluster into its reps."""
        A = self.scratch
        if self.check_invariants and any(A):
            raise InvariantViolation("scratch array not all-zero on prune entry")
        Ci = self.clustering.centers[i]
        reps = self.reps[u]
        temp = self.temp[u]
        self.prune_calls += 1
        self.prune_scans += len(reps) + len(temp)
        for e in reps:
            A[Ci[e[1]]] = 1
        own = Ci[u]
        before = len(reps)
        for e in temp:
            c = Ci[e[1]]
            if A[c] == 0 and c != own:
                A[c] = 1
                reps.append(e)
            else:
                self.discards += 1
                if self.check_invariants:
                    self._check_discard_witness(u, i, e)
        promoted = len(reps) - before
        self.promotions += promoted
        self.rep_counts[i][u] += promoted
        self.temp[u] = []
        for e in reps:
            A[Ci[e[1]]] = 0

    # -- results ---------------------------------------------------------

    def spanner_edges(self) -> set[Edge]:
        """Committed edges plus everything still buffered, one entry per vertex pair."""
        best: dict[tuple[int, int], float] = {}
        for group in (self.committed, *self.temp, *self.reps):
            for u, v, w in group:
                key = (u, v) if u < v else (v, u)
                old = best.get(key)
                if old is None or w < old:
                    best[key] = w
        return {Edge(a, b, w) for (a, b), w in best.items()}

    def hook_edge_set(self) -> set[Edge]:
        return {Edge(u, v, w).normalized() for u, v, w in self.hook_edges}

    def counters(self) -> dict[str, int]:
        return {
            "edges_processed": self.edges_processed,
            "prune_calls": self.prune_calls,
            "prune_scans": self.prune_scans,
            "promotions": self.promotions,
            "discards": self.discards,
            "hook_edges": len(self.hook_edges),
            "committed": len(self.committed),
        }

    # -- debug assertions ------------------------------------------------

    def _check_buffer_bound(self, u: int) -> None:
        if len(self.temp[u]) > len(self.reps[u]):
            raise InvariantViolation(
                f"buffer bound violated at {u}: |Temp|={len(self.temp[u])} > |reps|={len(self.reps[u])}"
            )

    def _check_discard_witness(self, u: int, i: int, e: tuple) -> None:
        Ci = self.clustering.centers[i]
        c = Ci[e[1]]
        if c == Ci[u]:
            return
        if not any(Ci[r[1]] == c for r in self.reps[u]):
            raise InvariantViolation(f"edge {e} discarded at level {i} without a representative")


def new_state(h: SamplingHierarchy, check_invariants: bool = False) -> SpannerState:
    return SpannerState(h, check_invariants=check_invariants)


def run_single_pass(
    h: SamplingHierarchy, edges: Iterable, check_invariants: bool = False
) -> SpannerState:
    s = SpannerState(h, check_invariants=check_invariants)
    process = s.process_edge
    for e in edges:
        process(*e)
    return s


def run_sorted_weighted(
    h: SamplingHierarchy, edges: Iterable, check_invariants: bool = False
) -> SpannerState:
    """Single pass over a stream whose weights must be nondecreasing.

    Weights are ignored by the algorithm itself; the order alone makes the
    result a weighted spanner.
    """
    s = SpannerState(h, check_invariants=check_invariants)
    previous = None
    for position, (u, v, w) in enumerate(edges, start=1):
        if previous is not None and w < previous:
            raise WeightOrderError(position, previous, w)
        previous = w
        s.process_edge(u, v, w)
    return s


def build_from_sorted_weighted_stream(h: SamplingHierarchy, stream: Iterable) -> set[Edge]:
    return run_sorted_weighted(h, stream).spanner_edges()
