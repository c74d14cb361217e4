"""Arc detection by chord-and-sagitta analysis.

The pipeline: thin the input, trace it into segments, drop straight runs,
certify circular stretches by the constancy of chord-subtended angles,
glue certified neighbours back together, estimate each arc's circle from
its sagitta, then refine the estimate with a Hough accumulator restricted
to a small box around it.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .curves import CurveSegment, SegmentEntry, SegmentList, extract_segments, partition_regions
from .digigeom import (
    CollinearError,
    RealPoint,
    bresenham_line,
    circumcircle,
    is_digitally_straight,
    sagitta_estimate,
    subtended_angle,
    triangle_area2,
)
from .raster import BinaryImage, Pixel, thin


@dataclass
class CsaConfig:
    tau_h: int = 2
    tau_c: int = 7
    delta_phi: float = math.pi / 18.0
    hough_triple_budget: int = 2000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.tau_h < 0:
            raise ValueError("tau_h must be non-negative")
        if self.tau_c < 3:
            raise ValueError("tau_c must be at least 3")
        if not 0.0 < self.delta_phi < math.pi:
            raise ValueError("delta_phi must lie in (0, pi)")
        if self.hough_triple_budget < 1:
            raise ValueError("hough_triple_budget must be positive")


@dataclass
class ArcRecord:
    segment: CurveSegment
    center: RealPoint
    radius: float
    source: str = "sagitta"
    merged_from: int = 1
    mask: Optional[BinaryImage] = None


@dataclass
class RestrictedAccumulator:
    origin: Tuple[float, float, float]
    bin_size: float
    dims: Tuple[int, int, int]
    counts: Dict[Tuple[int, int, int], int] = field(default_factory=dict)

    def vote(self, cx: float, cy: float, r: float) -> bool:
        idx = []
        for value, base, size in zip((cx, cy, r), self.origin, self.dims):
            rel = value - base
            if rel < 0.0:
                return False
            i = int(rel / self.bin_size)
            if i >= size:
                return False
            idx.append(i)
        key = (idx[0], idx[1], idx[2])
        self.counts[key] = self.counts.get(key, 0) + 1
        return True

    def cell_midpoint(self, key: Tuple[int, int, int]) -> Tuple[float, float, float]:
        return tuple(base + (i + 0.5) * self.bin_size
                     for base, i in zip(self.origin, key))


def remove_straight(segments: SegmentList, cfg: CsaConfig) -> SegmentList:
    """Drop digitally straight segments; two pixels or fewer count as straight."""
    kept = [e for e in segments
            if len(e.segment) > 2 and not is_digitally_straight(e.segment, cfg.tau_h)]
    return SegmentList(kept)


def _passes_chord_test(seg: CurveSegment, cfg: CsaConfig) -> bool:
    """Constancy of the subtended angle over the central third of the segment."""
    pix = seg.pixels
    k = len(pix)
    a, b = pix[0], pix[-1]
    m = pix[k // 2]
    try:
        phi_m = subtended_angle(a, m, b)
        _, central, _ = partition_regions(seg)
        for i in central:
            if abs(subtended_angle(a, pix[i], b) - phi_m) > cfg.delta_phi:
                return False
    except ValueError:
        return False
    return True


def verify_circularity(seg: CurveSegment, cfg: CsaConfig) -> List[CurveSegment]:
    """Certify circular stretches, halving on failure.

    Each candidate (the input and every half produced) is discarded when
    shorter than tau_c; it is kept whole when the chord test passes, else
    split at the middle pixel, left half keeping that pixel. Only the whole
    input can stay closed. Straight chains pass the chord test (the
    inscribed angle degenerates to a flat angle) and are certified here;
    they are culled after merging, where a wide circle's locally straight
    runs have had their chance to combine into something visibly curved.
    """
    out: List[CurveSegment] = []

    def descend(pixels: List[Pixel], closed: bool) -> None:
        k = len(pixels)
        if k < cfg.tau_c:
            return
        cand = CurveSegment(pixels, closed)
        if _passes_chord_test(cand, cfg):
            out.append(cand)
            return
        mid = k // 2
        descend(pixels[:mid + 1], False)
        descend(pixels[mid + 1:], False)

    descend(list(seg.pixels), seg.closed)
    return out


def find_sagitta_foot(seg: CurveSegment) -> Pixel:
    """Pixel nearest the chord-midpoint perpendicular.

    The along-chord offset is compared as the exact integer 2*(p - m).(b - a),
    so geometric ties really tie; they fall to the pixel closest to the
    middle index, then the lower index. Exactness matters for closed
    curves, where the cut chord's perpendicular grazes pixels at both
    ends and rounding would otherwise pick the cut instead of the far
    side. Raises when the whole segment is collinear with its chord.
    """
    pix = seg.pixels
    if len(pix) < 3:
        raise ValueError("segment too short for a sagitta")
    a, b = pix[0], pix[-1]
    if a == b:
        raise ValueError("segment endpoints coincide")
    dx, dy = b.x - a.x, b.y - a.y
    if all((p.x - a.x) * dy - (p.y - a.y) * dx == 0 for p in pix):
        raise ValueError("segment is collinear with its chord")
    sx, sy = a.x + b.x, a.y + b.y
    mid = len(pix) // 2
    best = min(
        range(len(pix)),
        key=lambda i: (abs((2 * pix[i].x - sx) * dx + (2 * pix[i].y - sy) * dy),
                       abs(i - mid), i),
    )
    return pix[best]


def estimate_params(seg: CurveSegment) -> ArcRecord:
    """Sagitta-based circle estimate for one certified segment."""
    foot = find_sagitta_foot(seg)
    est = sagitta_estimate(seg.a, seg.b, foot)
    return ArcRecord(segment=seg, center=est.center, radius=est.radius)


def _segment_key(seg: CurveSegment) -> int:
    a, b = seg.a, seg.b
    mix = (a.x * 73856093) ^ (a.y * 19349663) ^ (b.x * 83492791) ^ (b.y * 2971215073)
    return (mix ^ (len(seg) * 97)) & 0x7FFFFFFFFFFFFFFF


def hough_accumulator(rec: ArcRecord, cfg: CsaConfig) -> RestrictedAccumulator:
    """Vote circumcircles of cross-region pixel triples into a box around rec.

    The box spans +-delta around the estimate in each of x, y, r with
    delta = rec.radius, binned at one pixel; the radius axis starts at
    zero exactly. Triples take one pixel from each outer-third region and
    enumerate exhaustively when their count fits the budget, else sample
    uniformly with replacement, seeded by the segment itself.
    """
    delta = rec.radius
    bin_size = 1.0
    origin = (rec.center.x - delta, rec.center.y - delta, max(rec.radius - delta, 0.0))
    dims = tuple(int(math.floor(2.0 * delta)) + 1 for _ in range(3))
    acc = RestrictedAccumulator(origin=origin, bin_size=bin_size, dims=dims)

    pix = rec.segment.pixels
    left, central, right = partition_regions(rec.segment)
    n_total = len(left) * len(central) * len(right)
    if n_total == 0:
        return acc

    def cast(i: int, j: int, l: int) -> None:
        try:
            circle = circumcircle(pix[i], pix[j], pix[l])
        except CollinearError:
            return
        acc.vote(circle.center.x, circle.center.y, circle.radius)

    if n_total <= cfg.hough_triple_budget:
        for i in left:
            for j in central:
                for l in right:
                    cast(i, j, l)
    else:
        rng = random.Random(_segment_key(rec.segment))
        for _ in range(cfg.hough_triple_budget):
            cast(rng.randrange(left.start, left.stop),
                 rng.randrange(central.start, central.stop),
                 rng.randrange(right.start, right.stop))
    return acc


def restricted_hough(rec: ArcRecord, cfg: CsaConfig) -> ArcRecord:
    """Replace rec's parameters with the best accumulator cell's midpoint.

    Ties prefer the smaller radius, then lexicographic center. With no
    votes at all the record is returned unchanged.
    """
    acc = hough_accumulator(rec, cfg)
    if not acc.counts:
        return rec
    best_key = None
    best_rank = None
    for key, count in acc.counts.items():
        x_mid, y_mid, r_mid = acc.cell_midpoint(key)
        rank = (-count, r_mid, x_mid, y_mid)
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best_key = key
    x_mid, y_mid, r_mid = acc.cell_midpoint(best_key)
    return ArcRecord(
        segment=rec.segment,
        center=RealPoint(x_mid, y_mid),
        radius=r_mid,
        source="hough-refined",
        merged_from=rec.merged_from,
        mask=rec.mask,
    )


_MERGE_GAP = 4


def _passes_full_chord_test(seg: CurveSegment, cfg: CsaConfig) -> bool:
    """Inscribed-angle check over the whole span, not just the central
    region. Every pixel gets the distance-dependent digitization allowance
    on top of delta_phi. Co-circular chains subtend near-equal angles all
    the way to the ends, while a chain bent at a junction splice shows a
    spread there that no allowance covers, even when its central region
    mimics an inscribed angle.
    """
    pixels = seg.pixels
    k = len(pixels)
    a, b = pixels[0], pixels[-1]
    try:
        phi_m = subtended_angle(a, pixels[k // 2], b)
    except ValueError:
        return False
    for p in pixels[1:-1]:
        d1 = math.hypot(p.x - a.x, p.y - a.y)
        d2 = math.hypot(p.x - b.x, p.y - b.y)
        if d1 <= 1.0 or d2 <= 1.0:
            continue
        allow = (cfg.delta_phi
                 + math.asin(min(1.0, 1.0 / d1))
                 + math.asin(min(1.0, 1.0 / d2)))
        if abs(subtended_angle(a, p, b) - phi_m) > allow:
            return False
    return True


def _supported_by_pixels(rec: ArcRecord, tol: float = 2.0, frac: float = 0.8) -> bool:
    """True when the record's own pixels actually lie on its circle. Two
    nearly collinear lines crossing at a shallow angle can chain into one
    record that slips past every angle gate, the bend being inside the
    angular slack; no circle fits both legs of such a chain, so the
    residual check rejects it globally.
    """
    cx, cy, r = rec.center.x, rec.center.y, rec.radius
    good = sum(1 for p in rec.segment.pixels
               if abs(math.hypot(p.x - cx, p.y - cy) - r) <= tol)
    return good >= frac * len(rec.segment.pixels)


def _line_dominated(seg: CurveSegment, cfg: CsaConfig) -> bool:
    """True when at least 80 percent of the pixels sit within tau_h of the
    chord line. A straight run that picked up a few arc pixels while being
    rejoined across junction knots fails the max-deviation straightness
    test yet is still a line, not an arc; an actual shallow arc keeps most
    of its pixels a growing sagitta away from the chord.
    """
    pixels = seg.pixels
    a, b = pixels[0], pixels[-1]
    span = math.hypot(b.x - a.x, b.y - a.y)
    if span < 1.0:
        return False
    near = sum(1 for p in pixels[1:-1]
               if abs(triangle_area2(a, p, b)) / span <= cfg.tau_h)
    return near >= 0.8 * (len(pixels) - 2)


def merge_adjacent(segments: SegmentList, cfg: CsaConfig) -> SegmentList:
    """Fuse endpoint-sharing segments whose union still passes the chord test.

    Thinning a crossing leaves a small knot of junction pixels, so the
    branch endpoints of one interrupted arc rarely coincide exactly;
    endpoints up to Chebyshev distance 4 apart count as common and the
    gap is bridged with the digital straight segment between them. Scans
    pairs lowest-index-first and restarts after every fusion, so the
    result is a fixpoint independent of encounter luck. Closed entries
    never participate.
    """
    entries: List[SegmentEntry] = []
    for e in segments:
        entries.append(SegmentEntry(e.segment, e.center, e.radius, e.merged_from))

    def try_merge(si: CurveSegment, sj: CurveSegment) -> Optional[CurveSegment]:
        variants = (
            (si.pixels, sj.pixels),
            (si.pixels, list(reversed(sj.pixels))),
            (list(reversed(si.pixels)), sj.pixels),
            (list(reversed(si.pixels)), list(reversed(sj.pixels))),
        )
        scored = []
        for order, (first, second) in enumerate(variants):
            gap = max(abs(first[-1].x - second[0].x), abs(first[-1].y - second[0].y))
            if gap <= _MERGE_GAP:
                scored.append((gap, order, first, second))
        for gap, _, first, second in sorted(scored, key=lambda t: (t[0], t[1])):
            if gap == 0:
                joined = first + second[1:]
            else:
                joined = first + bresenham_line(first[-1], second[0])[1:-1] + second
            closed = joined[0] == joined[-1]
            if closed:
                joined = joined[:-1]
            cand = CurveSegment(joined, closed)
            if _passes_chord_test(cand, cfg) and _passes_full_chord_test(cand, cfg):
                return cand
        return None

    restart = True
    while restart:
        restart = False
        for i in range(len(entries)):
            if entries[i].segment.closed:
                continue
            for j in range(i + 1, len(entries)):
                if entries[j].segment.closed:
                    continue
                cand = try_merge(entries[i].segment, entries[j].segment)
                if cand is None:
                    continue
                merged_from = entries[i].merged_from + entries[j].merged_from
                try:
                    rec = estimate_params(cand)
                    entry = SegmentEntry(cand, (rec.center.x, rec.center.y),
                                         rec.radius, merged_from)
                except ValueError:
                    entry = SegmentEntry(cand, None, None, merged_from)
                entries[i] = entry
                del entries[j]
                restart = True
                break
            if restart:
                break
    return SegmentList(entries)


def absorb_thick_pixels(records: List[ArcRecord], original: BinaryImage) -> List[BinaryImage]:
    """Grow each arc over the unthinned object, capped at 3 px from its circle.

    Flood-fills 8-connected from the arc's pixels through object pixels
    whose distance to the arc's circle stays within the cap, returning one
    mask per record.
    """
    masks: List[BinaryImage] = []
    h, w = original.height, original.width
    bits = original.bits
    for rec in records:
        cx, cy, r = rec.center.x, rec.center.y, rec.radius
        mask = np.zeros((h, w), dtype=bool)
        stack: List[Tuple[int, int]] = []
        for p in rec.segment.pixels:
            if 0 <= p.x < w and 0 <= p.y < h and bits[p.y, p.x] and not mask[p.y, p.x]:
                if abs(math.hypot(p.x - cx, p.y - cy) - r) <= 3.0:
                    mask[p.y, p.x] = True
                    stack.append((p.x, p.y))
        while stack:
            x, y = stack.pop()
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = x + dx, y + dy
                    if 0 <= nx < w and 0 <= ny < h and bits[ny, nx] and not mask[ny, nx]:
                        if abs(math.hypot(nx - cx, ny - cy) - r) <= 3.0:
                            mask[ny, nx] = True
                            stack.append((nx, ny))
        masks.append(BinaryImage(w, h, mask))
    return masks


_NBR8 = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))


def _prune_spurs(img: BinaryImage, max_spur: int = 4, rounds: int = 3) -> BinaryImage:
    """Strip speckle debris from a skeleton: isolated pixels, free runs of
    at most max_spur pixels, and whiskers of that length hanging off
    junctions. Salt noise touching a curve otherwise splits it at every
    contact pixel. Real curve ends survive because their runs exceed
    max_spur before any junction appears.
    """
    bits = img.bits.copy()
    h, w = bits.shape

    def live_neighbors(x: int, y: int, skip) -> List[Tuple[int, int]]:
        out = []
        for dx, dy in _NBR8:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and bits[ny, nx] and (nx, ny) != skip:
                out.append((nx, ny))
        return out

    for _ in range(rounds):
        padded = np.pad(bits, 1).astype(np.int8)
        deg = (padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
               + padded[1:-1, :-2] + padded[1:-1, 2:]
               + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:])
        changed = False
        iso = bits & (deg == 0)
        if iso.any():
            bits[iso] = False
            changed = True
        for y, x in np.argwhere(bits & (deg == 1)):
            x, y = int(x), int(y)
            if not bits[y, x]:
                continue
            chain = [(x, y)]
            prev: Optional[Tuple[int, int]] = None
            cur = (x, y)
            for _step in range(max_spur + 1):
                nbrs = live_neighbors(cur[0], cur[1], prev)
                if not nbrs:
                    if len(chain) <= max_spur:
                        for px, py in chain:
                            bits[py, px] = False
                        changed = True
                    break
                if len(nbrs) >= 2:
                    if 2 <= len(chain) and len(chain) - 1 <= max_spur:
                        for px, py in chain[:-1]:
                            bits[py, px] = False
                        changed = True
                    break
                prev, cur = cur, nbrs[0]
                chain.append(cur)
        if not changed:
            break
    return BinaryImage(w, h, bits)


def detect(img: BinaryImage, cfg: Optional[CsaConfig] = None) -> List[ArcRecord]:
    """Full detection pass over one binary image."""
    if cfg is None:
        cfg = CsaConfig()
    skeleton = _prune_spurs(thin(img))
    traced = extract_segments(skeleton)
    certified: List[CurveSegment] = []
    for entry in traced:
        certified.extend(verify_circularity(entry.segment, cfg))
    merged = merge_adjacent(SegmentList([SegmentEntry(s) for s in certified]), cfg)
    # Straightness is judged only after merging. A short run of a wide
    # circle is locally straight; culling it here, once adjacent runs have
    # been chained, rejects true lines without amputating shallow arcs.
    curved = [e for e in remove_straight(merged, cfg)
              if not _line_dominated(e.segment, cfg)]

    records: List[ArcRecord] = []
    for entry in curved:
        try:
            rec = estimate_params(entry.segment)
        except ValueError:
            continue
        rec.merged_from = entry.merged_from
        refined = restricted_hough(rec, cfg)
        if _supported_by_pixels(refined):
            records.append(refined)

    for rec, mask in zip(records, absorb_thick_pixels(records, img)):
        rec.mask = mask
    return records


def records_to_json(records: List[ArcRecord]) -> str:
    items = []
    for rec in records:
        a, b = rec.segment.endpoints
        items.append({
            "center": [rec.center.x, rec.center.y],
            "radius": rec.radius,
            "endpoints": [[a.x, a.y], [b.x, b.y]],
            "closed": rec.segment.closed,
            "n_pixels": len(rec.segment),
            "source": "hough" if rec.source == "hough-refined" else "sagitta",
        })
    return json.dumps(items, indent=2) + "\n"
