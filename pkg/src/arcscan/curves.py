"""Tracing thinned rasters into ordered 8-connected curve segments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .raster import NEIGHBOR_ORDER, BinaryImage, Pixel


@dataclass
class CurveSegment:
    """An ordered run of 8-connected pixels.

    Closed curves store each pixel once; the sequence wraps implicitly and
    starts at a canonical pixel (topmost, then leftmost) so that tracing is
    deterministic and the chord between first and last pixel is well defined.
    """
    pixels: List[Pixel]
    closed: bool = False

    def __len__(self) -> int:
        return len(self.pixels)

    @property
    def a(self) -> Pixel:
        return self.pixels[0]

    @property
    def b(self) -> Pixel:
        return self.pixels[-1]

    @property
    def endpoints(self) -> Tuple[Pixel, Pixel]:
        return self.pixels[0], self.pixels[-1]

    def reversed(self) -> "CurveSegment":
        return CurveSegment(list(reversed(self.pixels)), self.closed)


@dataclass
class SegmentEntry:
    segment: CurveSegment
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None
    merged_from: int = 1


@dataclass
class SegmentList:
    entries: List[SegmentEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def append(self, entry: SegmentEntry) -> None:
        self.entries.append(entry)

    def segments(self) -> List[CurveSegment]:
        return [e.segment for e in self.entries]


def partition_regions(seg: CurveSegment) -> Tuple[range, range, range]:
    """Index ranges (left, central, right) splitting the sequence in thirds.

    left = [0, k//3), central = [k//3, 2k//3] inclusive, right = the rest.
    """
    k = len(seg.pixels)
    if k < 3:
        raise ValueError("segment too short to partition (k=%d < 3)" % k)
    lo = k // 3
    hi = 2 * k // 3
    return range(0, lo), range(lo, hi + 1), range(hi + 1, k)


def _neighbors(p: Pixel, occupied: Set[Pixel]) -> List[Pixel]:
    out = []
    for dx, dy in NEIGHBOR_ORDER:
        q = Pixel(p.x + dx, p.y + dy)
        if q in occupied:
            out.append(q)
    return out


def extract_segments(skeleton: BinaryImage) -> SegmentList:
    """Split the skeleton into maximal open chains and closed loops.

    Pixels with a neighbor count other than two act as nodes (endpoints and
    junctions); each chain of degree-2 pixels between nodes becomes one open
    segment carrying its terminal nodes, so a junction pixel is replicated
    into every incident branch. Remaining degree-2 pixels form closed loops.
    """
    occupied = skeleton.pixel_set()
    ordered = skeleton.object_pixels()
    degree: Dict[Pixel, int] = {p: len(_neighbors(p, occupied)) for p in ordered}
    nodes = {p for p in ordered if degree[p] != 2}
    visited: Set[Pixel] = set()
    out = SegmentList()

    def emit(pixels: List[Pixel], closed: bool) -> None:
        out.append(SegmentEntry(CurveSegment(pixels, closed)))

    # chains anchored at nodes, plus isolated pixels
    for n in ordered:
        if n not in nodes:
            continue
        if degree[n] == 0:
            emit([n], False)
            continue
        for dx, dy in NEIGHBOR_ORDER:
            q = Pixel(n.x + dx, n.y + dy)
            if q not in occupied or q in nodes or q in visited:
                continue
            chain = [n, q]
            visited.add(q)
            prev, cur = n, q
            while True:
                step = [t for t in _neighbors(cur, occupied) if t != prev]
                nxt = step[0]
                if nxt in nodes:
                    chain.append(nxt)
                    break
                if nxt in visited:  # loop closed back onto this chain's start
                    chain.append(nxt)
                    break
                chain.append(nxt)
                visited.add(nxt)
                prev, cur = cur, nxt
            if chain[0] == chain[-1]:
                emit(chain[:-1], True)
            else:
                emit(chain, False)

    # direct node-to-node adjacencies not covered by any chain
    seen_pairs: Set[Tuple[Pixel, Pixel]] = set()
    for n in ordered:
        if n not in nodes:
            continue
        for dx, dy in NEIGHBOR_ORDER:
            q = Pixel(n.x + dx, n.y + dy)
            if q in nodes and q in occupied:
                key = (n, q) if (n.y, n.x) <= (q.y, q.x) else (q, n)
                if key not in seen_pairs:
                    seen_pairs.add(key)
                    emit([key[0], key[1]], False)

    # leftover pure cycles; the row-major scan lands on each loop's
    # topmost-then-leftmost pixel first, which fixes the cut point
    for p in ordered:
        if p in nodes or p in visited:
            continue
        cycle = [p]
        visited.add(p)
        prev, cur = None, p
        while True:
            step = [t for t in _neighbors(cur, occupied) if t != prev and t not in nodes]
            nxt = None
            for t in step:
                if t == p and len(cycle) > 2:
                    nxt = p
                    break
                if t not in visited:
                    nxt = t
                    break
            if nxt is None or nxt == p:
                break
            cycle.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        emit(cycle, True)

    return out
