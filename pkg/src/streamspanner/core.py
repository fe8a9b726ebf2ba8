"""Vertex/edge vocabulary, the random sampling hierarchy and multilevel clustering.

Vertices are the integers ``1..n``.  A weighted edge is a plain ``(u, v, w)``
tuple; unweighted edges carry ``w == 1``.  Index 0 of every per-vertex array is
unused so that vertex ids can index directly (0 doubles as "unclustered").
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence


class Edge(NamedTuple):
    u: int
    v: int
    w: float = 1

    def key(self) -> tuple[int, int]:
        """Orientation-free identity of the underlying edge."""
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)

    def normalized(self) -> "Edge":
        return self if self.u < self.v else Edge(self.v, self.u, self.w)


class SelfLoopError(ValueError):
    pass


class VertexRangeError(ValueError):
    pass


def check_edge(n: int, u: int, v: int) -> None:
    if not (1 <= u <= n and 1 <= v <= n):
        raise VertexRangeError(f"edge ({u},{v}) references a vertex outside [1,{n}]")
    if u == v:
        raise SelfLoopError(f"self-loop at vertex {u}")


_PRF_TAG = {"hierarchy": 1, "streamsort": 2}


def prf_uniform(seed: int, purpose: str, level: int, vertex: int) -> float:
    """Keyed pseudorandom value in [0, 1) for ``(purpose, level, vertex)``.

    blake2b keyed with the 64-bit seed; the same inputs always give the same
    coin, which is what makes hierarchies replayable.
    """
    key = struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF)
    msg = struct.pack("<BQQ", _PRF_TAG[purpose], level, vertex)
    digest = hashlib.blake2b(msg, digest_size=8, key=key).digest()
    return (int.from_bytes(digest, "little") >> 11) * (1.0 / (1 << 53))


def sampling_probability(n: int, k: int) -> float:
    return n ** (-1.0 / k)


@dataclass(frozen=True)
class SamplingHierarchy:
    """Nested level sets ``S_0 ⊇ S_1 ⊇ ... ⊇ S_{k-1}`` stored as ``lmax``.

    ``lmax[v]`` is the highest level whose set contains ``v``; ``lmax[0]`` is
    a placeholder.  Instances are immutable and may be shared freely.
    """

    n: int
    k: int
    seed: int | None
    lmax: tuple[int, ...] = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.lmax) != self.n + 1:
            raise ValueError("lmax must have n+1 entries (index 0 unused)")
        for v in range(1, self.n + 1):
            if not 0 <= self.lmax[v] <= self.k - 1:
                raise ValueError(f"lmax({v}) = {self.lmax[v]} outside [0, {self.k - 1}]")

    @classmethod
    def from_levels(cls, levels: Sequence[int], k: int) -> "SamplingHierarchy":
        """Hierarchy with explicitly chosen levels ``levels[v-1] = lmax(v)``."""
        return cls(n=len(levels), k=k, seed=None, lmax=(0, *levels))

    def in_level(self, v: int, i: int) -> bool:
        return self.lmax[v] >= i

    def level_set(self, i: int) -> list[int]:
        return [v for v in range(1, self.n + 1) if self.lmax[v] >= i]


def build_sampling_hierarchy(n: int, k: int, seed: int) -> SamplingHierarchy:
    """Sample every vertex into ``S_1..S_{k-1}`` with a coin of bias n^(-1/k) per level.

    A vertex climbs while its coin for the next level succeeds, so membership
    is nested by construction.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    p = sampling_probability(n, k)
    lmax = [0] * (n + 1)
    for v in range(1, n + 1):
        level = 0
        while level + 1 <= k - 1 and prf_uniform(seed, "hierarchy", level + 1, v) < p:
            level += 1
        lmax[v] = level
    return SamplingHierarchy(n=n, k=k, seed=seed, lmax=tuple(lmax))


def is_sampled_cluster(h: SamplingHierarchy, center: int, level: int) -> bool:
    """Whether the level-``level`` cluster centered at ``center`` survives to level+1."""
    return h.lmax[center] > level


class MultiLevelClustering:
    """The arrays ``C_0..C_{k-1}`` plus the current level of every vertex.

    ``centers[i][v]`` is the center of ``v``'s level-``i`` cluster, 0 when
    ``v`` is unclustered at level ``i``.  Initially every vertex of ``S_i`` is
    a singleton cluster at level ``i``.
    """

    def __init__(self, h: SamplingHierarchy):
        n, k = h.n, h.k
        self.k = k
        self.centers: list[list[int]] = [
            [v if h.lmax[v] >= i else 0 for v in range(n + 1)] for i in range(k)
        ]
        self.centers[0][0] = 0
        self.level: list[int] = list(h.lmax)

    def center(self, i: int, v: int) -> int:
        return self.centers[i][v]

    def clustered_levels(self, v: int) -> list[int]:
        return [i for i in range(self.k) if self.centers[i][v] != 0]
