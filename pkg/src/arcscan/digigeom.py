"""Geometry of digitized circles: chord angles, sagitta estimates, circumcircles.

Everything that can be decided in integer arithmetic (areas, isothetic
distances, straightness) is; angle work uses atan2 on difference vectors,
which stays stable near 0 and pi.
"""

from __future__ import annotations

import math
from typing import List, NamedTuple, Sequence, Set, Tuple

from .curves import CurveSegment
from .raster import Pixel


class RealPoint(NamedTuple):
    x: float
    y: float


class CircleParams(NamedTuple):
    center: RealPoint
    radius: float


class ChordAngles(NamedTuple):
    phi_c: float
    phi_m: float
    dev_bound: float


class SagittaEstimate(NamedTuple):
    chord_len: float
    sagitta_len: float
    radius: float
    center: RealPoint
    err_bound: float


class CollinearError(ValueError):
    """Raised when three points admit no circle."""


def triangle_area2(a, c, b) -> int:
    """Twice the signed area of triangle (a, c, b), exact in integers."""
    ax, ay = a[0], a[1]
    cx, cy = c[0], c[1]
    bx, by = b[0], b[1]
    return ax * (cy - by) - ay * (cx - bx) + (cx * by - cy * bx)


def isothetic_distance(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def is_digitally_straight(seg: CurveSegment, tau_h: int = 2) -> bool:
    """Area-deviation straightness test, wholly in integer arithmetic.

    True iff every interior pixel stays within tau_h times the isothetic
    endpoint distance in doubled triangle area.
    """
    pix = seg.pixels
    if len(pix) < 2:
        return True
    a, b = pix[0], pix[-1]
    limit = tau_h * isothetic_distance(a, b)
    return all(abs(triangle_area2(a, c, b)) <= limit for c in pix[1:-1])


def bresenham_line(a, b) -> List[Pixel]:
    """All pixels of the digital straight segment from a to b, inclusive."""
    x0, y0 = int(a[0]), int(a[1])
    x1, y1 = int(b[0]), int(b[1])
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pts = []
    while True:
        pts.append(Pixel(x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def midpoint_circle(center, r: int) -> Set[Pixel]:
    """Midpoint digital circle: octant columns rounded, reflected eight ways."""
    if r < 1:
        raise ValueError("radius must be a positive integer")
    cx, cy = center[0], center[1]
    pts: Set[Pixel] = set()
    for x in range(0, int(math.ceil(r / math.sqrt(2))) + 1):
        y = int(math.floor(math.sqrt(r * r - x * x) + 0.5))
        for sx, sy in ((x, y), (x, -y), (-x, y), (-x, -y),
                       (y, x), (y, -x), (-y, x), (-y, -x)):
            pts.add(Pixel(cx + sx, cy + sy))
    return pts


def ordered_ring(center, r: int) -> List[Pixel]:
    """The digital circle as one 8-connected cycle, sorted by angle from +x."""
    cx, cy = center[0], center[1]
    two_pi = 2.0 * math.pi
    return sorted(midpoint_circle(center, r),
                  key=lambda p: math.atan2(p.y - cy, p.x - cx) % two_pi)


def digital_arc(center, r: int, start_angle: float, end_angle: float) -> CurveSegment:
    """Ring pixels whose angle lies in [start_angle, end_angle], ordered counter-clockwise."""
    span = end_angle - start_angle
    two_pi = 2.0 * math.pi
    if span <= 0.0 or span > two_pi + 1e-12:
        raise ValueError("angular span must lie in (0, 2*pi]")
    closed = span >= two_pi - 1e-12
    cx, cy = center[0], center[1]
    chosen = []
    for p in midpoint_circle(center, r):
        theta = math.atan2(p.y - cy, p.x - cx)
        offset = (theta - start_angle) % two_pi
        if closed or offset <= span + 1e-12:
            chosen.append((offset, p))
    chosen.sort()
    return CurveSegment([p for _, p in chosen], closed)


def subtended_angle(a, c, b) -> float:
    """Interior angle at c between rays toward a and b, in (0, pi]."""
    ux, uy = a[0] - c[0], a[1] - c[1]
    vx, vy = b[0] - c[0], b[1] - c[1]
    if (ux == 0 and uy == 0) or (vx == 0 and vy == 0):
        raise ValueError("angle vertex coincides with an endpoint")
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return math.atan2(abs(cross), dot)


def chord_deviation_bound(a, c, b) -> float:
    """Angular deviation cap asin(1/ac) + asin(1/cb); undefined too near an endpoint."""
    d1 = math.dist((a[0], a[1]), (c[0], c[1]))
    d2 = math.dist((c[0], c[1]), (b[0], b[1]))
    if d1 <= 1.0 or d2 <= 1.0:
        raise ValueError("pixel too close to a chord endpoint for the bound")
    return math.asin(1.0 / d1) + math.asin(1.0 / d2)


def corresponding_real_point(p, circle: CircleParams) -> RealPoint:
    """The real-circle point sharing p's dominant grid line.

    Keeps the coordinate of larger offset from the center and solves the
    other from the circle equation, matching the digitization direction.
    """
    cx, cy = circle.center
    r = circle.radius
    dx, dy = p[0] - cx, p[1] - cy
    if abs(dy) >= abs(dx):
        rest = math.sqrt(max(r * r - dx * dx, 0.0))
        return RealPoint(float(p[0]), cy + (rest if dy >= 0 else -rest))
    rest = math.sqrt(max(r * r - dy * dy, 0.0))
    return RealPoint(cx + (rest if dx >= 0 else -rest), float(p[1]))


def chord_angles(seg: CurveSegment, c_index: int) -> ChordAngles:
    """Chord angles at one interior pixel plus its deviation bound."""
    pix = seg.pixels
    a, b = pix[0], pix[-1]
    c = pix[c_index]
    m = pix[len(pix) // 2]
    return ChordAngles(
        phi_c=subtended_angle(a, c, b),
        phi_m=subtended_angle(a, m, b),
        dev_bound=chord_deviation_bound(a, c, b),
    )


def care(seg: CurveSegment, c_index: int, truth: CircleParams) -> float:
    """Relative error of the subtended angle against the true-circle angle at c."""
    pix = seg.pixels
    a, b, c = pix[0], pix[-1], pix[c_index]
    alpha = corresponding_real_point(a, truth)
    beta = corresponding_real_point(b, truth)
    gamma = corresponding_real_point(c, truth)
    phi_gamma = subtended_angle(alpha, gamma, beta)
    if phi_gamma == 0.0:
        raise ValueError("degenerate true angle")
    return abs(phi_gamma - subtended_angle(a, c, b)) / phi_gamma


def sagitta_estimate(a, b, foot) -> SagittaEstimate:
    """Radius and center from one chord and its sagitta foot.

    r = chord^2 / (8 s) + s / 2, with the center placed r along the unit
    vector from the foot through the chord midpoint.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if ax == bx and ay == by:
        raise ValueError("chord endpoints coincide")
    mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
    s = math.hypot(foot[0] - mx, foot[1] - my)
    if s == 0.0:
        raise ValueError("degenerate sagitta: foot sits on the chord midpoint")
    chord = math.hypot(bx - ax, by - ay)
    radius = chord * chord / (8.0 * s) + s / 2.0
    ux, uy = (mx - foot[0]) / s, (my - foot[1]) / s
    center = RealPoint(foot[0] + radius * ux, foot[1] + radius * uy)
    return SagittaEstimate(
        chord_len=chord,
        sagitta_len=s,
        radius=radius,
        center=center,
        err_bound=abs(1.0 - s / (2.0 * radius)),
    )


def circumcircle(p1, p2, p3) -> CircleParams:
    """The unique circle through three non-collinear points."""
    x1, y1 = p1[0], p1[1]
    x2, y2 = p2[0], p2[1]
    x3, y3 = p3[0], p3[1]
    d = 2.0 * (x1 * (y2 - y3) + x2 * (y3 - y1) + x3 * (y1 - y2))
    if abs(d) < 1e-9:
        raise CollinearError("collinear points admit no circumcircle")
    q1 = x1 * x1 + y1 * y1
    q2 = x2 * x2 + y2 * y2
    q3 = x3 * x3 + y3 * y3
    ux = (q1 * (y2 - y3) + q2 * (y3 - y1) + q3 * (y1 - y2)) / d
    uy = (q1 * (x3 - x2) + q2 * (x1 - x3) + q3 * (x2 - x1)) / d
    center = RealPoint(ux, uy)
    return CircleParams(center, math.hypot(x1 - ux, y1 - uy))
