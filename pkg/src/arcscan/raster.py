"""Binary raster images: loading, thinning, and test perturbations.

Images are boolean occupancy grids (True = object pixel) with x growing
right and y growing down, so bits[y][x] addresses the pixel at (x, y).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Set, Tuple

import numpy as np
from PIL import Image


class Pixel(NamedTuple):
    x: int
    y: int


# 8-neighborhood offsets in fixed visiting order: E, NE, N, NW, W, SW, S, SE.
NEIGHBOR_ORDER: Tuple[Tuple[int, int], ...] = (
    (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1),
)


@dataclass
class BinaryImage:
    width: int
    height: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be at least 1x1")
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape != (self.height, self.width):
            raise ValueError(
                "bits shape %r does not match %dx%d"
                % (self.bits.shape, self.width, self.height)
            )

    @classmethod
    def blank(cls, width: int, height: int) -> "BinaryImage":
        return cls(width, height, np.zeros((height, width), dtype=bool))

    @classmethod
    def from_pixels(cls, width: int, height: int,
                    pixels: Iterable[Tuple[int, int]]) -> "BinaryImage":
        img = cls.blank(width, height)
        for x, y in pixels:
            img.bits[y, x] = True
        return img

    def copy(self) -> "BinaryImage":
        return BinaryImage(self.width, self.height, self.bits.copy())

    def get(self, x: int, y: int) -> bool:
        if 0 <= x < self.width and 0 <= y < self.height:
            return bool(self.bits[y, x])
        return False

    def count(self) -> int:
        return int(self.bits.sum())

    def object_pixels(self) -> List[Pixel]:
        """Object pixels in row-major (y, then x) order."""
        ys, xs = np.nonzero(self.bits)
        return [Pixel(int(x), int(y)) for x, y in zip(xs, ys)]

    def pixel_set(self) -> Set[Pixel]:
        return set(self.object_pixels())


def load_binary(path: str, threshold: int = 128) -> BinaryImage:
    """Read a PNG/PGM/PBM file; gray levels strictly below threshold are object.

    PBM black bits land at gray 0 and therefore count as object for any
    positive threshold. RGB input is converted to luma first.
    """
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be in [0, 255]")
    with Image.open(path) as im:
        if im.format not in ("PNG", "PPM"):
            raise ValueError("unsupported format %r (want PNG, PGM, or PBM)" % (im.format,))
        gray = np.asarray(im.convert("L"))
    if gray.size == 0:
        raise ValueError("zero-size image: %s" % path)
    h, w = gray.shape
    return BinaryImage(w, h, gray < threshold)


def save_binary(img: BinaryImage, path: str) -> None:
    """Write object pixels as black on white; format chosen by extension (.pbm/.png)."""
    lower = path.lower()
    gray = np.where(img.bits, 0, 255).astype(np.uint8)
    pil = Image.fromarray(gray, mode="L")
    if lower.endswith(".pbm"):
        pil.convert("1").save(path)
    elif lower.endswith(".png"):
        pil.save(path)
    else:
        raise ValueError("unsupported output extension for %r (want .pbm or .png)" % path)


def _neighbor_fields(grid: np.ndarray):
    """The eight neighbor planes P2..P9 (N, NE, E, SE, S, SW, W, NW)."""
    p = np.pad(grid, 1, constant_values=False)
    p2 = p[:-2, 1:-1]
    p3 = p[:-2, 2:]
    p4 = p[1:-1, 2:]
    p5 = p[2:, 2:]
    p6 = p[2:, 1:-1]
    p7 = p[2:, :-2]
    p8 = p[1:-1, :-2]
    p9 = p[:-2, :-2]
    return p2, p3, p4, p5, p6, p7, p8, p9


def _zs_deletable(grid: np.ndarray, second_pass: bool) -> np.ndarray:
    p2, p3, p4, p5, p6, p7, p8, p9 = _neighbor_fields(grid)
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    b = sum(n.astype(np.uint8) for n in ring)
    a = np.zeros_like(b)
    for i in range(8):
        cur, nxt = ring[i], ring[(i + 1) % 8]
        a += (~cur & nxt).astype(np.uint8)
    cond = grid & (b >= 2) & (b <= 6) & (a == 1)
    if second_pass:
        cond &= ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
    else:
        cond &= ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
    return cond


def _restore_lost_components(before: np.ndarray, after: np.ndarray) -> np.ndarray:
    """Put back one pixel for any input component that thinning erased whole.

    Flood from surviving pixels through the original foreground; original
    pixels never reached belong to fully deleted components, and each such
    component gets its topmost-then-leftmost pixel restored.
    """
    deleted = before & ~after
    if not deleted.any():
        return after
    # cheap screen: a deleted pixel with a surviving 8-neighbor cannot be part
    # of a fully erased component, so the flood is only needed for orphans
    p = np.pad(after, 1, constant_values=False)
    grown = after.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            grown |= p[1 + dy:p.shape[0] - 1 + dy, 1 + dx:p.shape[1] - 1 + dx]
    if not (deleted & ~grown).any():
        return after
    if after.any():
        seeds = {Pixel(int(x), int(y)) for y, x in zip(*np.nonzero(after))}
    else:
        seeds = set()
    original = {Pixel(int(x), int(y)) for y, x in zip(*np.nonzero(before))}
    alive = set(seeds)
    stack = list(seeds)
    while stack:
        px, py = stack.pop()
        for dx, dy in NEIGHBOR_ORDER:
            q = Pixel(px + dx, py + dy)
            if q in original and q not in alive:
                alive.add(q)
                stack.append(q)
    dead = original - alive
    if not dead:
        return after
    out = after.copy()
    while dead:
        rep = min(dead, key=lambda p: (p.y, p.x))
        comp = {rep}
        stack = [rep]
        while stack:
            px, py = stack.pop()
            for dx, dy in NEIGHBOR_ORDER:
                q = Pixel(px + dx, py + dy)
                if q in dead and q not in comp:
                    comp.add(q)
                    stack.append(q)
        out[rep.y, rep.x] = True
        dead -= comp
    return out


def thin(img: BinaryImage) -> BinaryImage:
    """Zhang-Suen two-subiteration thinning, run to convergence.

    The result is a subset of the input object pixels; no input connected
    component disappears (a lone representative pixel is kept if the mask
    erodes a tiny blob completely).
    """
    grid = img.bits.copy()
    while True:
        changed = False
        for second in (False, True):
            doomed = _zs_deletable(grid, second)
            if doomed.any():
                grid &= ~doomed
                changed = True
        if not changed:
            break
    _reduce_to_unit_width(grid)
    grid = _restore_lost_components(img.bits, grid)
    return BinaryImage(img.width, img.height, grid)


# circular 8-neighborhood, Zhang-Suen order p2..p9 (N, NE, E, ..., NW)
_ZS_RING = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def _reduce_to_unit_width(grid: np.ndarray) -> None:
    """Delete leftover simple pixels in place until the skeleton is strictly
    one pixel wide. The parallel passes above stop with two-row staircases
    still present; every such step makes its neighbors look like junctions
    and curve tracing then shatters at each one. A pixel goes when its
    on-neighbors form one 8-connected group and at least one of its four
    edge neighbors is off, so endpoints, crossings, and topology survive
    (no disconnection, no new hole, no component lost). The crossing-number
    shortcut is wrong here: diagonal ring positions two steps apart can be
    directly adjacent, which is exactly the staircase case. Deletion is
    sequential in raster order, so facing pairs cannot vanish together.
    """
    h, w = grid.shape
    while True:
        changed = False
        for y, x in np.argwhere(grid):
            ring = [grid[y + dy, x + dx] if 0 <= x + dx < w and 0 <= y + dy < h else False
                    for dx, dy in _ZS_RING]
            on = [i for i in range(8) if ring[i]]
            if len(on) < 2:
                continue
            if ring[0] and ring[2] and ring[4] and ring[6]:
                continue
            groups = 0
            seen: set = set()
            for i in on:
                if i in seen:
                    continue
                groups += 1
                stack = [i]
                seen.add(i)
                while stack:
                    j = stack.pop()
                    jx, jy = _ZS_RING[j]
                    for m in on:
                        if m not in seen:
                            mx, my = _ZS_RING[m]
                            if max(abs(jx - mx), abs(jy - my)) <= 1:
                                seen.add(m)
                                stack.append(m)
            if groups == 1:
                grid[y, x] = False
                changed = True
        if not changed:
            break


def add_salt_pepper(img: BinaryImage, fraction: float, seed: int) -> BinaryImage:
    """Flip exactly round(fraction * w * h) pixel positions, seeded and unique."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("noise fraction must be in [0, 1]")
    total = img.width * img.height
    n = int(round(fraction * total))
    rng = random.Random(seed)
    flips = rng.sample(range(total), n)
    out = img.copy()
    flat = out.bits.reshape(-1)
    for pos in flips:
        flat[pos] = not flat[pos]
    return out


def _rotation_geometry(width: int, height: int, degrees: float):
    theta = math.radians(degrees % 360.0)
    c, s = math.cos(theta), math.sin(theta)
    new_w = max(1, int(math.ceil(width * abs(c) + height * abs(s) - 1e-9)))
    new_h = max(1, int(math.ceil(height * abs(c) + width * abs(s) - 1e-9)))
    cin = ((width - 1) / 2.0, (height - 1) / 2.0)
    cout = ((new_w - 1) / 2.0, (new_h - 1) / 2.0)
    return c, s, new_w, new_h, cin, cout


def rotate_point(p: Tuple[float, float], width: int, height: int,
                 degrees: float) -> Tuple[float, float]:
    """Map source coordinates into the canvas produced by rotate()."""
    c, s, _, _, cin, cout = _rotation_geometry(width, height, degrees)
    dx, dy = p[0] - cin[0], p[1] - cin[1]
    return (c * dx - s * dy + cout[0], s * dx + c * dy + cout[1])


def rotate(img: BinaryImage, degrees: float) -> BinaryImage:
    """Nearest-neighbor rotation about the image center onto an enclosing canvas.

    Sampling is inverse-mapped (each destination pixel reads its rotated
    source position) and supersampled: the pixel turns on when any of five
    sample points inside it lands on an object pixel. Sampling only the
    center leaves pinholes where a one-pixel-wide curve steps diagonally,
    since corner-touching squares pinch the curve's footprint to zero
    width. At exact multiples of 90 degrees every sample of a pixel rounds
    to the same source pixel, so those rotations stay pure permutations.
    """
    c, s, new_w, new_h, cin, cout = _rotation_geometry(img.width, img.height, degrees)
    ys, xs = np.indices((new_h, new_w))
    out = np.zeros((new_h, new_w), dtype=bool)
    for ox, oy in ((0.0, 0.0), (0.25, 0.25), (0.25, -0.25), (-0.25, 0.25), (-0.25, -0.25)):
        dx = xs - cout[0] + ox
        dy = ys - cout[1] + oy
        # inverse map: rotate destination offsets by -theta back into the source
        sx = np.floor(c * dx + s * dy + cin[0] + 0.5).astype(np.int64)
        sy = np.floor(-s * dx + c * dy + cin[1] + 0.5).astype(np.int64)
        valid = (sx >= 0) & (sx < img.width) & (sy >= 0) & (sy < img.height)
        hit = np.zeros((new_h, new_w), dtype=bool)
        hit[valid] = img.bits[sy[valid], sx[valid]]
        out |= hit
    return BinaryImage(new_w, new_h, out)
