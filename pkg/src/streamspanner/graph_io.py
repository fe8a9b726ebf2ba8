"""Edge-list files, replayable edge streams and deterministic graph generators.

Text format::

    n m weighted|unweighted
    u v [w]
    ...

ASCII, single spaces, one edge per newline-terminated line.  Self-loops are
dropped on ingestion and counted in ``EdgeStream.self_loops``.
"""

from __future__ import annotations

import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import Edge, VertexRangeError

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class EdgeStream:
    """A replayable sequence of edges over vertices ``1..n``.

    ``source`` is either a concrete list of edges or a zero-argument callable
    returning a fresh iterator (used for files, so each replay re-reads).
    """

    n: int
    weighted: bool
    source: list[Edge] | Callable[[], Iterator[Edge]]
    self_loops: int = 0
    origin: str = field(default="memory")

    def __iter__(self) -> Iterator[Edge]:
        if callable(self.source):
            return self.source()
        return iter(self.source)

    def edges(self) -> list[Edge]:
        return list(self)

    def __len__(self) -> int:
        if callable(self.source):
            return sum(1 for _ in self.source())
        return len(self.source)


def from_edges(n: int, edges: Iterable, weighted: bool = False) -> EdgeStream:
    """Build a stream from ``(u, v[, w])`` tuples, validating ids and dropping self-loops."""
    out: list[Edge] = []
    loops = 0
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = e[2] if len(e) > 2 else 1
        if not (1 <= u <= n and 1 <= v <= n):
            raise VertexRangeError(f"edge ({u},{v}) outside [1,{n}]")
        if u == v:
            loops += 1
            continue
        out.append(Edge(u, v, w))
    if loops:
        log.warning("dropped %d self-loop(s)", loops)
    return EdgeStream(n=n, weighted=weighted, source=out, self_loops=loops)


def _parse_weight(token: str):
    try:
        return int(token)
    except ValueError:
        return float(token)


def _parse_header(line: str) -> tuple[int, int, bool]:
    parts = line.split()
    if len(parts) != 3 or parts[2] not in ("weighted", "unweighted"):
        raise GraphFormatError("header must be 'n m weighted|unweighted'", 1)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError("n and m must be integers", 1) from None
    if n < 1 or m < 0:
        raise GraphFormatError("n must be >= 1 and m >= 0", 1)
    return n, m, parts[2] == "weighted"


def _parse_lines(lines: Iterable[str], n: int, m: int, weighted: bool, stats: dict) -> Iterator[Edge]:
    count = 0
    loops = 0
    for lineno, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != (3 if weighted else 2):
            raise GraphFormatError(f"expected {3 if weighted else 2} fields, got {len(parts)}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = _parse_weight(parts[2]) if weighted else 1
        except ValueError:
            raise GraphFormatError(f"malformed edge line {line.rstrip()!r}", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"vertex id out of range [1,{n}] in {line.rstrip()!r}", lineno)
        if weighted and w < 0:
            raise GraphFormatError("negative weight", lineno)
        count += 1
        if u == v:
            loops += 1
            continue
        yield Edge(u, v, w)
    if count != m:
        raise GraphFormatError(f"header declares {m} edges but {count} were read")
    stats["self_loops"] = loops
    if loops:
        log.warning("dropped %d self-loop(s)", loops)


def read_edge_stream(path: str | Path, format: str = "text") -> EdgeStream:
    """Open an edge-list file (``"-"`` reads stdin, materialized once).

    File streams are lazy: every iteration re-reads the file.  The header is
    parsed eagerly so ``n`` is known before the first edge.
    """
    if format != "text":
        raise ValueError(f"unsupported format {format!r}")
    if str(path) == "-":
        return parse_edge_list(sys.stdin.read())
    path = Path(path)
    with path.open("r", encoding="ascii") as fh:
        n, m, weighted = _parse_header(fh.readline())
    stream = EdgeStream(n=n, weighted=weighted, source=[], origin=str(path))

    def replay() -> Iterator[Edge]:
        stats: dict = {}
        with path.open("r", encoding="ascii") as fh:
            fh.readline()
            yield from _parse_lines(fh, n, m, weighted, stats)
        stream.self_loops = stats["self_loops"]

    stream.source = replay
    return stream


def parse_edge_list(text: str) -> EdgeStream:
    lines = io.StringIO(text)
    first = lines.readline()
    if not first:
        raise GraphFormatError("empty input", 1)
    n, m, weighted = _parse_header(first)
    stats: dict = {}
    edges = list(_parse_lines(lines, n, m, weighted, stats))
    return EdgeStream(n=n, weighted=weighted, source=edges, self_loops=stats["self_loops"])


def format_weight(w) -> str:
    if isinstance(w, (int, np.integer)):
        return str(int(w))
    w = float(w)
    return str(int(w)) if w.is_integer() else repr(w)


def format_edge_list(n: int, edges: Iterable, weighted: bool) -> str:
    edges = list(edges)
    out = [f"{n} {len(edges)} {'weighted' if weighted else 'unweighted'}\n"]
    for e in edges:
        if weighted:
            out.append(f"{e[0]} {e[1]} {format_weight(e[2])}\n")
        else:
            out.append(f"{e[0]} {e[1]}\n")
    return "".join(out)


def write_edge_list(path: str | Path, n: int, edges: Iterable, weighted: bool) -> None:
    text = format_edge_list(n, edges, weighted)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="ascii")


# -- generators --------------------------------------------------------------


def _weights(rng: np.random.Generator, count: int, weight_range) -> list:
    if weight_range is None:
        return [1] * count
    lo, hi = weight_range
    return rng.integers(lo, hi, size=count, endpoint=True).tolist()


def _finish(n: int, pairs: np.ndarray, rng: np.random.Generator, weight_range) -> EdgeStream:
    order = rng.permutation(len(pairs))
    pairs = pairs[order]
    weights = _weights(rng, len(pairs), weight_range)
    edges = [Edge(int(a), int(b), w) for (a, b), w in zip(pairs.tolist(), weights)]
    return EdgeStream(n=n, weighted=weight_range is not None, source=edges, origin="generator")


def gen_gnp(n: int, p: float, seed: int, weight_range: tuple[int, int] | None = None) -> EdgeStream:
    """Erdos-Renyi G(n, p) with integer weights drawn uniformly from ``weight_range``.

    Emission order is a seeded shuffle of the present pairs.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    rows = []
    for u in range(1, n):
        hits = np.flatnonzero(rng.random(n - u) < p)
        if hits.size:
            rows.append(np.column_stack((np.full(hits.size, u), hits + u + 1)))
    pairs = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return _finish(n, pairs, rng, weight_range)


def gen_complete(n: int, seed: int = 0, weight_range: tuple[int, int] | None = None) -> EdgeStream:
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    pairs = np.column_stack(iu) + 1
    return _finish(n, pairs, rng, weight_range)


def gen_grid(rows: int, cols: int, seed: int = 0, weight_range: tuple[int, int] | None = None) -> EdgeStream:
    """``rows x cols`` grid; vertex ``(r, c)`` is ``r*cols + c + 1``."""
    rng = np.random.default_rng(seed)
    pairs = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c + 1
            if c + 1 < cols:
                pairs.append((v, v + 1))
            if r + 1 < rows:
                pairs.append((v, v + cols))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return _finish(rows * cols, arr, rng, weight_range)


def sort_by_weight(stream: EdgeStream) -> EdgeStream:
    """Stable nondecreasing-weight reordering (Python's sort is stable)."""
    edges = sorted(stream, key=lambda e: e[2])
    return EdgeStream(n=stream.n, weighted=stream.weighted, source=edges,
                      self_loops=stream.self_loops, origin=stream.origin)


def distinct_edges(edges: Iterable) -> set[Edge]:
    """Normalized edge set, keeping the lightest copy of parallel edges."""
    best: dict[tuple[int, int], float] = {}
    for u, v, w in edges:
        key = (u, v) if u < v else (v, u)
        if key not in best or w < best[key]:
            best[key] = w
    return {Edge(a, b, w) for (a, b), w in best.items()}
