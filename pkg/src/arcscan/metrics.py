"""Ground truth, pixel metrics, and the synthetic scene generator.

Scenes are described by a plain dict so they round-trip through JSON:

    {"size": [w, h],
     "circles": [{"center": [x, y], "radius": r, "span": [a0, a1] | null}],
     "lines": [[[x0, y0], [x1, y1]], ...],
     "noise": 0.01}            # optional salt-and-pepper fraction

Noise pixels flip the image only; ground-truth masks keep the clean curves.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .csa import ArcRecord, absorb_thick_pixels
from .digigeom import bresenham_line, digital_arc, midpoint_circle
from .raster import BinaryImage, Pixel, add_salt_pepper, load_binary, save_binary


@dataclass
class ScenePrimitive:
    center: Tuple[float, float]
    radius: float
    span: Optional[Tuple[float, float]] = None


@dataclass
class GroundTruth:
    arc_mask: BinaryImage
    all_curves_mask: BinaryImage
    primitives: List[ScenePrimitive] = field(default_factory=list)

    def __post_init__(self) -> None:
        a, c = self.arc_mask, self.all_curves_mask
        if (a.width, a.height) != (c.width, c.height):
            raise ValueError("ground-truth masks differ in size")
        if bool((a.bits & ~c.bits).any()):
            raise ValueError("arc mask must be contained in the curves mask")


@dataclass
class MetricsReport:
    n_c: int
    n_g: int
    n_p: int
    n_fa: int
    n_fr: int
    e1: float
    e2: float
    ad: float
    elapsed: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return {
            "N_c": self.n_c, "N_g": self.n_g, "N_p": self.n_p,
            "N_fa": self.n_fa, "N_fr": self.n_fr,
            "E1": self.e1, "E2": self.e2, "AD": self.ad,
            "elapsed": self.elapsed,
        }

    def as_csv(self) -> str:
        """Header line plus one data row, same fields as as_dict."""
        d = self.as_dict()
        keys = list(d)
        return (",".join(keys) + "\n"
                + ",".join(str(d[k]) for k in keys) + "\n")

    @classmethod
    def from_counts(cls, n_c: int, n_g: int, n_p: int, n_fa: int, n_fr: int,
                    elapsed: float = 0.0) -> "MetricsReport":
        """Apply the rate formulas to raw pixel counts.

        E1 with no true arc pixels is 0 for an empty detection and
        infinite otherwise.
        """
        if min(n_c, n_g, n_p, n_fa, n_fr) < 0:
            raise ValueError("pixel counts must be non-negative")
        if n_g > 0:
            e1 = 100.0 * n_fa / n_g
            e2 = 100.0 * n_fr / n_g
        else:
            e1 = 0.0 if n_fa == 0 else math.inf
            e2 = 0.0
        if n_c > 0:
            ad = (n_c - (n_fa + n_fr)) / n_c
        else:
            ad = 1.0 if (n_fa == 0 and n_fr == 0) else 0.0
        return cls(n_c, n_g, n_p, n_fa, n_fr, e1, e2, ad, elapsed)


def compute_metrics(detected_mask: BinaryImage, truth: GroundTruth,
                    elapsed: float = 0.0) -> MetricsReport:
    """Pixel-level type I / type II errors and detection accuracy."""
    a = truth.arc_mask
    if (detected_mask.width, detected_mask.height) != (a.width, a.height):
        raise ValueError("detected mask size differs from ground truth")
    det = detected_mask.bits
    arc = a.bits
    n_c = int(truth.all_curves_mask.bits.sum())
    n_g = int(arc.sum())
    n_p = int(det.sum())
    n_fa = int((det & ~arc).sum())
    n_fr = int((arc & ~det).sum())
    return MetricsReport.from_counts(n_c, n_g, n_p, n_fa, n_fr, elapsed)


def synth_scene(spec: Dict, seed: int = 0) -> Tuple[BinaryImage, GroundTruth]:
    """Render a scene spec into an image plus exact ground truth."""
    w, h = int(spec["size"][0]), int(spec["size"][1])
    if w < 1 or h < 1:
        raise ValueError("scene size must be positive")
    arc_bits = np.zeros((h, w), dtype=bool)
    line_bits = np.zeros((h, w), dtype=bool)
    primitives: List[ScenePrimitive] = []

    def paint(bits: np.ndarray, pts: Sequence[Pixel], what: str) -> None:
        for p in pts:
            if not (0 <= p.x < w and 0 <= p.y < h):
                raise ValueError(f"{what} leaves the {w}x{h} canvas at ({p.x}, {p.y})")
            bits[p.y, p.x] = True

    for c in spec.get("circles", ()):
        cx, cy = int(c["center"][0]), int(c["center"][1])
        r = int(c["radius"])
        if r < 1:
            raise ValueError("radius must be a positive integer")
        span = c.get("span")
        if span is None:
            pts: Sequence[Pixel] = midpoint_circle((cx, cy), r)
            primitives.append(ScenePrimitive((float(cx), float(cy)), float(r)))
        else:
            a0, a1 = float(span[0]), float(span[1])
            pts = digital_arc((cx, cy), r, a0, a1).pixels
            primitives.append(ScenePrimitive((float(cx), float(cy)), float(r), (a0, a1)))
        paint(arc_bits, pts, f"circle r={r}")

    for ln in spec.get("lines", ()):
        paint(line_bits, bresenham_line(ln[0], ln[1]), "line")

    all_bits = arc_bits | line_bits
    img = BinaryImage(w, h, all_bits.copy())
    noise = float(spec.get("noise", 0.0))
    if noise > 0.0:
        img = add_salt_pepper(img, noise, seed)
    truth = GroundTruth(BinaryImage(w, h, arc_bits),
                        BinaryImage(w, h, all_bits), primitives)
    return img, truth


def detection_mask(records: List[ArcRecord], img: BinaryImage) -> BinaryImage:
    """Union of the per-arc absorbed masks, recomputing any that are missing."""
    bits = np.zeros((img.height, img.width), dtype=bool)
    pending = [r for r in records if r.mask is None]
    fresh = iter(absorb_thick_pixels(pending, img))
    for rec in records:
        mask = rec.mask if rec.mask is not None else next(fresh)
        bits |= mask.bits
    return BinaryImage(img.width, img.height, bits)


def match_primitives(detected: List[ArcRecord], truth: GroundTruth,
                     tol_center: float = 2.0, tol_radius: float = 2.0) -> Dict[str, int]:
    """Greedy one-to-one pairing of detections against truth primitives."""
    if tol_center <= 0 or tol_radius <= 0:
        raise ValueError("tolerances must be positive")
    pairs = []
    for i, rec in enumerate(detected):
        for j, prim in enumerate(truth.primitives):
            dc = math.hypot(rec.center.x - prim.center[0], rec.center.y - prim.center[1])
            dr = abs(rec.radius - prim.radius)
            if dc <= tol_center and dr <= tol_radius:
                pairs.append((dc, dr, i, j))
    pairs.sort()
    used_d: set = set()
    used_t: set = set()
    for _, _, i, j in pairs:
        if i in used_d or j in used_t:
            continue
        used_d.add(i)
        used_t.add(j)
    matched = len(used_d)
    return {
        "matched": matched,
        "missed": len(truth.primitives) - matched,
        "spurious": len(detected) - matched,
    }


def random_scene_spec(seed: int, size: Tuple[int, int] = (800, 800)) -> Dict:
    """Reproducible scene: disjoint circles and arcs plus a few free lines."""
    rng = random.Random(seed)
    w, h = size
    placed: List[Tuple[int, int, int]] = []
    circles = []
    for _ in range(rng.randint(3, 8)):
        for _attempt in range(200):
            r = rng.randint(15, min(120, (min(w, h) - 12) // 2))
            cx = rng.randint(r + 4, w - r - 5)
            cy = rng.randint(r + 4, h - r - 5)
            if all(math.hypot(cx - ox, cy - oy) >= r + orr + 8 for ox, oy, orr in placed):
                placed.append((cx, cy, r))
                break
        else:
            continue
        if rng.random() < 0.5:
            span = None
        else:
            a0 = rng.uniform(0.0, 2.0 * math.pi)
            span = (a0, a0 + rng.uniform(math.pi / 2.0, 1.5 * math.pi))
        circles.append({"center": [cx, cy], "radius": r, "span": span})
    lines = []
    for _ in range(rng.randint(2, 5)):
        for _attempt in range(100):
            p0 = (rng.randint(0, w - 1), rng.randint(0, h - 1))
            p1 = (rng.randint(0, w - 1), rng.randint(0, h - 1))
            if math.dist(p0, p1) >= 40.0:
                lines.append([list(p0), list(p1)])
                break
    return {"size": [w, h], "circles": circles, "lines": lines}


def save_ground_truth(truth: GroundTruth, path: str) -> None:
    """JSON next to two PBM masks named after the JSON file."""
    base, _ = os.path.splitext(path)
    stem = os.path.basename(base)
    arc_ref = stem + "_arcs.pbm"
    all_ref = stem + "_curves.pbm"
    folder = os.path.dirname(os.path.abspath(path))
    save_binary(truth.arc_mask, os.path.join(folder, arc_ref))
    save_binary(truth.all_curves_mask, os.path.join(folder, all_ref))
    doc = {
        "primitives": [
            {"center": list(p.center), "radius": p.radius,
             "span": list(p.span) if p.span is not None else None}
            for p in truth.primitives
        ],
        "masks": {"arc_mask": arc_ref, "all_curves_mask": all_ref},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_ground_truth(path: str) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    folder = os.path.dirname(os.path.abspath(path))
    arc = load_binary(os.path.join(folder, doc["masks"]["arc_mask"]))
    allc = load_binary(os.path.join(folder, doc["masks"]["all_curves_mask"]))
    prims = [
        ScenePrimitive((p["center"][0], p["center"][1]), p["radius"],
                       tuple(p["span"]) if p.get("span") else None)
        for p in doc["primitives"]
    ]
    return GroundTruth(arc, allc, prims)
