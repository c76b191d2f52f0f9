"""Small planar-geometry helpers shared by the linking, scoring, and solver modules."""

from __future__ import annotations

import math


def point_segment_distance(px: float, py: float,
                           ax: float, ay: float, bx: float, by: float) -> float:
    """Euclidean distance from point P to segment AB."""
    dx = bx - ax
    dy = by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_polyline_distance(px: float, py: float,
                            polyline: list[tuple[float, float]]) -> float:
    """Distance from a point to the nearest segment of a polyline."""
    best = math.inf
    for (ax, ay), (bx, by) in zip(polyline, polyline[1:]):
        d = point_segment_distance(px, py, ax, ay, bx, by)
        if d < best:
            best = d
    if len(polyline) == 1:
        ax, ay = polyline[0]
        best = math.hypot(px - ax, py - ay)
    return best


def point_in_rect(x: float, y: float,
                  rect: tuple[float, float, float, float]) -> bool:
    """Closed-rectangle containment; rect is (x_min, y_min, x_max, y_max)."""
    x0, y0, x1, y1 = rect
    return x0 <= x <= x1 and y0 <= y <= y1


def clip_segment_to_rect(ax: float, ay: float, bx: float, by: float,
                         rect: tuple[float, float, float, float]
                         ) -> tuple[float, float] | None:
    """Liang-Barsky clip of segment AB against a rectangle.

    Returns the (t_enter, t_exit) parameter interval of the portion inside
    the rectangle, or None when the segment misses it entirely.
    """
    x0, y0, x1, y1 = rect
    dx = bx - ax
    dy = by - ay
    t_enter, t_exit = 0.0, 1.0
    for p, q in ((-dx, ax - x0), (dx, x1 - ax), (-dy, ay - y0), (dy, y1 - ay)):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        t = q / p
        if p < 0.0:
            if t > t_exit:
                return None
            if t > t_enter:
                t_enter = t
        else:
            if t < t_enter:
                return None
            if t < t_exit:
                t_exit = t
    return t_enter, t_exit


def segment_intersects_rect(ax: float, ay: float, bx: float, by: float,
                            rect: tuple[float, float, float, float]) -> bool:
    return clip_segment_to_rect(ax, ay, bx, by, rect) is not None


def point_in_polygon(x: float, y: float,
                     ring: list[tuple[float, float]]) -> bool:
    """Even-odd containment test; points on the boundary count as inside.

    `ring` may or may not repeat the first vertex at the end.
    """
    pts = list(ring)
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    n = len(pts)

    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if _on_segment(x, y, ax, ay, bx, by):
            return True

    inside = False
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def _on_segment(px: float, py: float,
                ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    if min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by):
        return True
    return False
