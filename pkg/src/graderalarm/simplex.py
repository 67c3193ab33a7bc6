"""Enumeration of answer-key count compositions.

The candidate answer keys for a test of size q over r labels are exactly the
r-tuples of nonnegative integers summing to q. This module enumerates them in
ascending lexicographic order, counts them without enumerating, and unranks
an index straight to its tuple so parallel scans can start mid-stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .model import InvalidCountsError, QPoint


def _check_dims(q: int, r: int) -> None:
    if q < 0:
        raise InvalidCountsError(f"test size must be nonnegative, got {q}")
    if r < 2:
        raise InvalidCountsError(f"need at least two labels, got {r}")


def simplex_size(q: int, r: int) -> int:
    """Number of r-tuples of nonnegative integers summing to q: C(q+r-1, r-1)."""
    _check_dims(q, r)
    return math.comb(q + r - 1, r - 1)


def compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to n, ascending lex."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_q_points(q: int, r: int) -> Iterator[QPoint]:
    """Yield every answer-key point for a test of size q, lexicographically ascending.

    Streams in constant memory; the first point is (0, ..., 0, q) and the last
    is (q, 0, ..., 0).
    """
    _check_dims(q, r)
    for counts in compositions(q, r):
        yield QPoint(counts)


def partition_range(q: int, r: int, n_chunks: int) -> list[tuple[int, int]]:
    """Split the simplex index range [0, simplex_size) into contiguous chunks.

    Exactly ``n_chunks`` half-open (start, stop) ranges are returned in order;
    they cover the range without gaps or overlap and differ in size by at most
    one (trailing chunks may be empty when n_chunks exceeds the size). The
    fixed chunk layout is what keeps scan output independent of worker
    scheduling.
    """
    if n_chunks < 1:
        raise InvalidCountsError(f"chunk count must be positive, got {n_chunks}")
    total = simplex_size(q, r)
    base, extra = divmod(total, n_chunks)
    chunks: list[tuple[int, int]] = []
    start = 0
    for i in range(n_chunks):
        stop = start + base + (1 if i < extra else 0)
        chunks.append((start, stop))
        start = stop
    return chunks


@dataclass(frozen=True)
class SimplexCursor:
    """Random access into the lexicographic enumeration of answer-key points.

    ``point_at`` unranks an index in O(r * q) time by peeling off one
    coordinate at a time: among points with a fixed first coordinate c, the
    remainder is the simplex of q - c over r - 1 labels, so block sizes are
    binomials. ``iter_range`` walks a chunk produced by ``partition_range``
    without touching anything outside it.
    """

    q: int
    r: int

    def __post_init__(self) -> None:
        _check_dims(self.q, self.r)

    @property
    def size(self) -> int:
        return simplex_size(self.q, self.r)

    def point_at(self, rank: int) -> QPoint:
        if not 0 <= rank < self.size:
            raise IndexError(f"rank {rank} out of range for simplex of size {self.size}")
        counts: list[int] = []
        remaining = self.q
        rest = self.r
        while rest > 1:
            first = 0
            while True:
                block = math.comb(remaining - first + rest - 2, rest - 2)
                if rank < block:
                    break
                rank -= block
                first += 1
            counts.append(first)
            remaining -= first
            rest -= 1
        counts.append(remaining)
        return QPoint(tuple(counts))

    def rank_of(self, point: QPoint) -> int:
        if len(point.counts) != self.r or point.total != self.q:
            raise InvalidCountsError("point does not belong to this simplex")
        rank = 0
        remaining = self.q
        rest = self.r
        for c in point.counts[:-1]:
            for first in range(c):
                rank += math.comb(remaining - first + rest - 2, rest - 2)
            remaining -= c
            rest -= 1
        return rank

    def iter_range(self, start: int, stop: int) -> Iterator[QPoint]:
        """Yield points with ranks in [start, stop), in rank order."""
        stop = min(stop, self.size)
        if start >= stop:
            return
        point = self.point_at(start)
        yield point
        counts = list(point.counts)
        for _ in range(stop - start - 1):
            # Lexicographic successor: bump the rightmost position whose
            # suffix still holds mass, then park the rest of that mass in the
            # final slot.
            i = self.r - 2
            while sum(counts[i + 1 :]) == 0:
                i -= 1
            suffix = sum(counts[i + 1 :])
            counts[i] += 1
            for j in range(i + 1, self.r):
                counts[j] = 0
            counts[-1] = suffix - 1
            yield QPoint(tuple(counts))
