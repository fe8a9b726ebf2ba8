"""A small StreamSort machine: write-once streams, stream passes, sort passes.

A stream pass feeds records one at a time, left to right, to a
:class:`Transducer`.  Everything a transducer remembers between records
must live in its ``state`` dict, and the runtime counts the entries after
every step: each entry is one record or one machine word.  Going over the
declared budget aborts the pass.  A sort pass is a stable sort under a key
function; with ``storage="file"`` it runs as an external merge sort over
temporary files.

Binary record layout (little endian, 27 bytes)::

    B kind | I I I I vertex fields | d weight | b b flags

    edge   (kind 0): u, v, lcenter, rcenter | w | spanner_edge, sampled_edge
    vertex (kind 1): v, center, chosen, 0   | N | 0, sampled
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
import shutil
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, NamedTuple

INF = math.inf
TMPDIR_ENV = "STREAMSPANNER_TMPDIR"


class EdgeRec(NamedTuple):
    """One oriented occurrence ``(u, v)`` of an undirected edge."""

    u: int
    v: int
    w: float
    lcenter: int
    rcenter: int
    spanner: int = 0  # -1 discard, 0 undecided, 1 spanner edge
    sampled: int = 0


class VertexRec(NamedTuple):
    v: int
    center: int
    sampled: int = 0
    N: float = INF
    chosen: int = 0  # other endpoint of the hook edge, 0 if none


Record = EdgeRec | VertexRec

_LAYOUT = struct.Struct("<BIIIIdbb")
RECORD_SIZE = _LAYOUT.size


def _weight_out(w: float):
    return int(w) if math.isfinite(w) and float(w).is_integer() else w


def encode(rec: Record) -> bytes:
    if type(rec) is EdgeRec:
        return _LAYOUT.pack(0, rec.u, rec.v, rec.lcenter, rec.rcenter, rec.w, rec.spanner, rec.sampled)
    return _LAYOUT.pack(1, rec.v, rec.center, rec.chosen, 0, rec.N, 0, rec.sampled)


def decode(buf: bytes) -> Record:
    kind, a, b, c, d, w, f1, f2 = _LAYOUT.unpack(buf)
    if kind == 0:
        return EdgeRec(a, b, _weight_out(w), c, d, f1, f2)
    if kind == 1:
        return VertexRec(a, b, f2, _weight_out(w), c)
    raise ValueError(f"bad record kind {kind}")


# -- streams -----------------------------------------------------------------


class RecordStream:
    """Read-only view of a finished stream; iterate as often as needed."""

    def __iter__(self) -> Iterator[Record]:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError


class MemoryStream(RecordStream):
    def __init__(self, records: list[Record]):
        self._records = records

    def __iter__(self):
        return iter(self._records)

    def __len__(self):
        return len(self._records)


class FileStream(RecordStream):
    def __init__(self, path: Path, count: int):
        self.path = path
        self._count = count

    def __iter__(self):
        with open(self.path, "rb") as fh:
            while True:
                buf = fh.read(RECORD_SIZE * 4096)
                if not buf:
                    return
                for off in range(0, len(buf), RECORD_SIZE):
                    yield decode(buf[off:off + RECORD_SIZE])

    def __len__(self):
        return self._count


class StreamWriter:
    """Append-only sink; :meth:`close` seals it into a :class:`RecordStream`."""

    def __init__(self, path: Path | None):
        self._path = path
        self._records: list[Record] = []
        self._fh = open(path, "wb") if path is not None else None
        self._count = 0
        self._closed = False

    def append(self, rec: Record) -> None:
        if self._closed:
            raise RuntimeError("stream already sealed")
        if type(rec) is not EdgeRec and type(rec) is not VertexRec:
            raise TypeError(f"not a stream record: {rec!r}")
        self._count += 1
        if self._fh is not None:
            self._fh.write(encode(rec))
        else:
            self._records.append(rec)

    def close(self) -> RecordStream:
        self._closed = True
        if self._fh is not None:
            self._fh.close()
            return FileStream(self._path, self._count)
        return MemoryStream(self._records)


# -- transducers -------------------------------------------------------------


class StateBudgetExceeded(RuntimeError):
    pass


class TransducerFault(RuntimeError):
    pass


_STATE_TYPES = (int, float, bool, EdgeRec, VertexRec)


class Transducer:
    """Base class for stream-pass processors.

    Subclasses override :meth:`step` (and optionally :meth:`finish`), keep
    every piece of mutable memory in ``self.state`` and must not touch any
    other attribute while the pass runs.  Remove keys rather than storing
    ``None``.
    """

    budget = 4
    name = "pass"
    ports = 1

    def __init__(self):
        self.state: dict[str, object] = {}

    def step(self, rec: Record, emit: Callable[..., None]) -> None:
        emit(rec)

    def finish(self, emit: Callable[..., None]) -> None:
        pass


class Identity(Transducer):
    budget = 0
    name = "identity"


# -- accounting --------------------------------------------------------------


@dataclass
class PassRecord:
    kind: str
    name: str
    records_in: int
    records_out: int
    max_state: int


@dataclass
class PassAccounting:
    stream_passes: int = 0
    sort_passes: int = 0
    max_state_records: int = 0
    work: int = 0
    log: list[PassRecord] = field(default_factory=list)

    @property
    def total_passes(self) -> int:
        return self.stream_passes + self.sort_passes

    def report_lines(self) -> list[str]:
        lines = [
            f"stream_passes={self.stream_passes}",
            f"sort_passes={self.sort_passes}",
            f"total_passes={self.total_passes}",
            f"max_state_records={self.max_state_records}",
            f"record_work={self.work}",
        ]
        for idx, p in enumerate(self.log):
            lines.append(
                f"pass.{idx}={p.kind}:{p.name} in={p.records_in} out={p.records_out} state={p.max_state}"
            )
        return lines


# -- runtime -----------------------------------------------------------------


class StreamSortRuntime:
    """Executes passes and keeps the books.

    ``state_limit`` caps the budget any transducer may declare; the spanner
    driver runs with the default of 4.
    """

    def __init__(self, storage: str = "memory", tmpdir: str | None = None,
                 state_limit: int = 4, run_size: int = 50_000):
        if storage not in ("memory", "file"):
            raise ValueError("storage must be 'memory' or 'file'")
        self.storage = storage
        self.state_limit = state_limit
        self.run_size = run_size
        self.accounting = PassAccounting()
        self._tmp = None
        self._counter = itertools.count()
        if storage == "file":
            base = tmpdir or os.environ.get(TMPDIR_ENV) or None
            self._tmp = Path(tempfile.mkdtemp(prefix="streamsort-", dir=base))

    def close(self) -> None:
        if self._tmp is not None:
            shutil.rmtree(self._tmp, ignore_errors=True)
            self._tmp = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def writer(self) -> StreamWriter:
        path = None
        if self._tmp is not None:
            path = self._tmp / f"s{next(self._counter)}.bin"
        return StreamWriter(path)

    def materialize(self, records: Iterable[Record]) -> RecordStream:
        """Load an input stream; not counted as a pass."""
        w = self.writer()
        for rec in records:
            w.append(rec)
        return w.close()

    def stream_pass(self, source: RecordStream, transducer: Transducer):
        """Run ``transducer`` over ``source``.

        Returns the output stream, or a list of streams (one per port) when
        the transducer declares ``ports > 1``; ``emit(rec, port)`` picks one.
        """
        if transducer.budget > self.state_limit:
            raise StateBudgetExceeded(
                f"{transducer.name}: declared budget {transducer.budget} exceeds limit {self.state_limit}"
            )
        config = {k: v for k, v in vars(transducer).items() if k != "state"}
        outs = [self.writer() for _ in range(transducer.ports)]
        if transducer.ports == 1:
            emit = outs[0].append
        else:
            appenders = [o.append for o in outs]

            def emit(rec, port=0):
                appenders[port](rec)

        state = transducer.state
        budget = transducer.budget
        step = transducer.step
        peak = 0
        seen = 0
        try:
            for rec in source:
                seen += 1
                step(rec, emit)
                size = len(state)
                if size > peak:
                    peak = size
                    if size > budget:
                        raise StateBudgetExceeded(
                            f"{transducer.name}: holds {size} state items, budget {budget}"
                        )
                for val in state.values():
                    if not isinstance(val, _STATE_TYPES):
                        raise TransducerFault(
                            f"{transducer.name}: state item of type {type(val).__name__} is not a record or word"
                        )
            transducer.finish(emit)
        finally:
            results = [o.close() for o in outs]
        if transducer.state is not state or {k: v for k, v in vars(transducer).items() if k != "state"} != config:
            raise TransducerFault(f"{transducer.name}: mutated memory outside its state")
        acc = self.accounting
        acc.stream_passes += 1
        acc.work += seen
        acc.max_state_records = max(acc.max_state_records, peak)
        acc.log.append(PassRecord("stream", transducer.name, seen, sum(map(len, results)), peak))
        return results[0] if transducer.ports == 1 else results

    def sort_pass(self, source: RecordStream, key: Callable[[Record], tuple], name: str = "sort") -> RecordStream:
        if self.storage == "memory":
            result = MemoryStream(sorted(source, key=key))
        else:
            result = self._external_sort(source, key)
        acc = self.accounting
        acc.sort_passes += 1
        acc.log.append(PassRecord("sort", name, len(source), len(result), 0))
        return result

    def _external_sort(self, source: RecordStream, key) -> RecordStream:
        runs = []
        it = iter(source)
        while True:
            chunk = sorted(itertools.islice(it, self.run_size), key=key)
            if not chunk:
                break
            w = self.writer()
            for rec in chunk:
                w.append(rec)
            runs.append(w.close())
        out = self.writer()
        # heapq.merge prefers earlier runs on ties, so the merge stays stable
        for rec in heapq.merge(*runs, key=key):
            out.append(rec)
        return out.close()


# -- orders ------------------------------------------------------------------


def order0_key(rec: Record) -> tuple:
    """Edge occurrences by (min, max) endpoint, so both occurrences end up adjacent.

    Residual ties fall to the oriented pair and then the weight; vertex
    records sort ahead of all edges.
    """
    if type(rec) is EdgeRec:
        u, v = rec.u, rec.v
        return (1, u if u < v else v, v if u < v else u, u, v, rec.w)
    return (0, rec.v)


def _sign(a, b) -> int:
    return (a > b) - (a < b)


def cmp_order0(a: EdgeRec, b: EdgeRec) -> int:
    return _sign(order0_key(a), order0_key(b))


def make_order_cc(first: str = "center", second: str = "id", vertices: str = "before",
                  weight: bool = False) -> Callable[[Record], tuple]:
    """Key for the two-clustering order, read entirely off the records.

    ``first`` picks the owner-side clustering (``"center"`` = lcenter /
    vertex center, ``"id"`` = the singleton clustering), ``second`` the
    far-side one (``"center"`` = rcenter, ``"id"`` = far endpoint).  A vertex
    record sits before its edge group, or after it with ``vertices="after"``.
    ``weight=True`` orders edges of one (owner, cluster) group lightest first.
    """
    if first not in ("center", "id") or second not in ("center", "id"):
        raise ValueError("clustering keys must be 'center' or 'id'")
    if vertices not in ("before", "after"):
        raise ValueError("vertices must be 'before' or 'after'")
    vtag = 0 if vertices == "before" else 2
    f_center = first == "center"
    s_center = second == "center"

    def key(rec: Record) -> tuple:
        if type(rec) is EdgeRec:
            f = rec.lcenter if f_center else rec.u
            s = rec.rcenter if s_center else rec.v
            if weight:
                return (f, 1, s, rec.w, rec.u, rec.v)
            return (f, 1, s, rec.u, rec.v)
        f = rec.center if f_center else rec.v
        s = rec.center if s_center else rec.v
        return (f, vtag, s, rec.v)

    return key


def cmp_order_cc(a: Record, b: Record, first: str = "center", second: str = "id",
                 vertices: str = "before", weight: bool = False) -> int:
    key = make_order_cc(first, second, vertices, weight)
    return _sign(key(a), key(b))
