"""Whole-image baselines: randomized Hough transform and edge-vector matching.

Both return the same record type as the main detector so downstream
scoring code never cares which algorithm produced a circle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .csa import ArcRecord
from .curves import CurveSegment
from .digigeom import RealPoint
from .raster import BinaryImage, Pixel


@dataclass
class RhtConfig:
    n_t: int = 2
    T_r: float = 0.46
    max_steps: int = 25000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_t < 1:
            raise ValueError("n_t must be positive")
        if not 0.0 < self.T_r <= 1.0:
            raise ValueError("T_r must lie in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class EvmConfig:
    T_e: float = 0.5
    sample_count: int = 200
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.T_e <= 1.0:
            raise ValueError("T_e must lie in (0, 1]")
        if self.sample_count < 3:
            raise ValueError("sample_count must be at least 3")


def _angular_segment(xy: np.ndarray, cx: float, cy: float) -> CurveSegment:
    """Order support pixels by angle about the center into a closed pseudo-segment."""
    ang = np.mod(np.arctan2(xy[:, 1] - cy, xy[:, 0] - cx), 2.0 * math.pi)
    order = np.argsort(ang, kind="stable")
    return CurveSegment([Pixel(int(x), int(y)) for x, y in xy[order]], closed=True)


def _batch_circumcircles(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Circumcircles of row-aligned point triples; collinear rows get radius nan."""
    x1, y1 = a[:, 0], a[:, 1]
    x2, y2 = b[:, 0], b[:, 1]
    x3, y3 = c[:, 0], c[:, 1]
    d = 2.0 * (x1 * (y2 - y3) + x2 * (y3 - y1) + x3 * (y1 - y2))
    with np.errstate(divide="ignore", invalid="ignore"):
        q1 = x1 * x1 + y1 * y1
        q2 = x2 * x2 + y2 * y2
        q3 = x3 * x3 + y3 * y3
        ux = (q1 * (y2 - y3) + q2 * (y3 - y1) + q3 * (y1 - y2)) / d
        uy = (q1 * (x3 - x2) + q2 * (x1 - x3) + q3 * (x2 - x1)) / d
        r = np.hypot(x1 - ux, y1 - uy)
    r = np.where(np.abs(d) < 1e-9, np.nan, r)
    return ux, uy, r


def rht_detect(img: BinaryImage, cfg: Optional[RhtConfig] = None) -> List[ArcRecord]:
    """Randomized Hough: sample pixel triples, pool agreeing circumcircles.

    A sampled circle joins the candidate pool, or reinforces a pooled
    candidate whose first-seen parameters all lie within one pixel. At
    n_t votes the vote-mean circle is verified against the remaining
    pixels: support rate = on-circle count / circumference. Passing
    circles are emitted and their pixels withdrawn; the candidate leaves
    the pool either way.
    """
    if cfg is None:
        cfg = RhtConfig()
    pts = np.array([(p.x, p.y) for p in img.object_pixels()], dtype=np.float64)
    out: List[ArcRecord] = []
    if len(pts) < 3:
        return out

    limit = float(img.width + img.height)
    rng = random.Random(cfg.rng_seed)
    active = np.ones(len(pts), dtype=bool)
    active_idx = list(range(len(pts)))
    # bucket key floor(v); params within 1 are always in adjacent cells
    buckets: Dict[Tuple[int, int, int], List[List[float]]] = {}

    def find_match(cx: float, cy: float, r: float):
        kx, ky, kr = int(math.floor(cx)), int(math.floor(cy)), int(math.floor(r))
        for bx in (kx - 1, kx, kx + 1):
            for by in (ky - 1, ky, ky + 1):
                for br in (kr - 1, kr, kr + 1):
                    for entry in buckets.get((bx, by, br), ()):
                        if (abs(cx - entry[0]) <= 1.0 and abs(cy - entry[1]) <= 1.0
                                and abs(r - entry[2]) <= 1.0):
                            return (bx, by, br), entry
        return None, None

    steps = 0
    while steps < cfg.max_steps and len(active_idx) >= 3:
        steps += 1
        i1, i2, i3 = rng.sample(active_idx, 3)
        p1, p2, p3 = pts[i1], pts[i2], pts[i3]
        d = 2.0 * (p1[0] * (p2[1] - p3[1]) + p2[0] * (p3[1] - p1[1])
                   + p3[0] * (p1[1] - p2[1]))
        if abs(d) < 1e-9:
            continue
        q1 = p1[0] * p1[0] + p1[1] * p1[1]
        q2 = p2[0] * p2[0] + p2[1] * p2[1]
        q3 = p3[0] * p3[0] + p3[1] * p3[1]
        cx = (q1 * (p2[1] - p3[1]) + q2 * (p3[1] - p1[1]) + q3 * (p1[1] - p2[1])) / d
        cy = (q1 * (p3[0] - p2[0]) + q2 * (p1[0] - p3[0]) + q3 * (p2[0] - p1[0])) / d
        r = math.hypot(p1[0] - cx, p1[1] - cy)
        if r > limit:
            continue

        key, entry = find_match(cx, cy, r)
        if entry is None:
            kx, ky, kr = int(math.floor(cx)), int(math.floor(cy)), int(math.floor(r))
            # anchor params, running sums, vote count
            buckets.setdefault((kx, ky, kr), []).append([cx, cy, r, cx, cy, r, 1.0])
            continue

        entry[3] += cx
        entry[4] += cy
        entry[5] += r
        entry[6] += 1.0
        if entry[6] < cfg.n_t:
            continue

        mcx, mcy, mr = entry[3] / entry[6], entry[4] / entry[6], entry[5] / entry[6]
        buckets[key].remove(entry)
        if not buckets[key]:
            del buckets[key]
        live = pts[active]
        on = np.abs(np.hypot(live[:, 0] - mcx, live[:, 1] - mcy) - mr) <= 1.0
        count = int(on.sum())
        if count < 3 or count / (2.0 * math.pi * mr) < cfg.T_r:
            continue

        support = live[on]
        out.append(ArcRecord(
            segment=_angular_segment(support, mcx, mcy),
            center=RealPoint(float(mcx), float(mcy)),
            radius=float(mr),
            source="hough-refined",
        ))
        live_rows = np.nonzero(active)[0]
        active[live_rows[on]] = False
        active_idx = list(np.nonzero(active)[0])
    return out


def evm_detect(img: BinaryImage, cfg: Optional[EvmConfig] = None) -> List[ArcRecord]:
    """Edge-vector matching: isoceles triples from a sample, rate-ranked circles.

    Samples up to sample_count object pixels, forms circles from ordered
    pairs (p, q) plus thirds r equidistant from q within one pixel, scores
    each distinct circle by its support rate over the whole image, lets
    every object pixel endorse the best-rated circle through it, and
    emits endorsed circles at or above T_e.
    """
    if cfg is None:
        cfg = EvmConfig()
    pts = np.array([(p.x, p.y) for p in img.object_pixels()], dtype=np.float64)
    n = len(pts)
    out: List[ArcRecord] = []
    if n < 3:
        return out

    rng = random.Random(cfg.rng_seed)
    m = min(cfg.sample_count, n)
    sample = pts[sorted(rng.sample(range(n), m))]

    dmat = np.hypot(sample[:, 0, None] - sample[None, :, 0],
                    sample[:, 1, None] - sample[None, :, 1])
    # axes (p, q, r): d(q, r) within 1 of d(p, q); chords under 3 px are
    # digitization noise and breed spurious tiny circles
    cond = np.abs(dmat[None, :, :] - dmat[:, :, None]) <= 1.0
    cond &= (dmat > 2.0)[:, :, None]
    cond &= (dmat > 2.0)[None, :, :]
    pi, qi, ri = np.nonzero(cond)
    if len(pi) == 0:
        return out

    ux, uy, rr = _batch_circumcircles(sample[pi], sample[qi], sample[ri])
    keep = np.isfinite(rr) & (rr >= 3.0) & (rr <= float(img.width + img.height))
    ux, uy, rr = ux[keep], uy[keep], rr[keep]
    if len(rr) == 0:
        return out

    cells = np.stack([np.round(ux), np.round(uy), np.round(rr)], axis=1).astype(np.int64)
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    sums = np.zeros((len(uniq), 3), dtype=np.float64)
    np.add.at(sums, inverse, np.stack([ux, uy, rr], axis=1))
    counts = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
    cand = sums / counts[:, None]

    rates = np.empty(len(cand), dtype=np.float64)
    for lo in range(0, len(cand), 256):
        chunk = cand[lo:lo + 256]
        dist = np.hypot(pts[:, 0, None] - chunk[None, :, 0],
                        pts[:, 1, None] - chunk[None, :, 1])
        on = np.abs(dist - chunk[None, :, 2]) <= 1.0
        rates[lo:lo + 256] = on.sum(axis=0) / (2.0 * math.pi * chunk[:, 2])

    order = sorted(range(len(cand)),
                   key=lambda i: (-rates[i], cand[i, 0], cand[i, 1], cand[i, 2]))
    assigned = np.zeros(n, dtype=bool)
    for i in order:
        if rates[i] < cfg.T_e:
            break
        cx, cy, r = cand[i]
        on = np.abs(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) - r) <= 1.0
        votes = on & ~assigned
        if not votes.any():
            continue
        assigned |= votes
        out.append(ArcRecord(
            segment=_angular_segment(pts[votes], cx, cy),
            center=RealPoint(float(cx), float(cy)),
            radius=float(r),
            source="hough-refined",
        ))
    return out
