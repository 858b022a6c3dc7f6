"""Geometry for curved text regions.

A text region is bounded by two long sides (``TextContour``). Each side is
fitted with a clamped B-spline over its annotated vertices, resampled into
equal arc-length points, and the two resampled sides are zipped into a chain
of quadrilateral components (``ComponentSequence``). ``assemble`` closes a
sequence back into a polygon. Plain polygon predicates (area, containment,
simplicity) live here too so the rest of the package has one geometry home.

Conventions: points are float64 arrays of shape (2,), point lists are arrays
of shape (n, 2). Quad corners are ordered top-left, top-right, bottom-right,
bottom-left, where "top" is side_a. Both sides of a contour are stored
start-aligned: side_a[0] and side_b[0] sit at the same end of the text.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Point2",
    "ComponentQuad",
    "Polygon",
    "TextContour",
    "BSplineCurve",
    "ComponentSequence",
    "clamped_uniform_knots",
    "bspline_basis",
    "bspline_eval",
    "resample_side",
    "bezier_fit_side",
    "split_long_sides",
    "decompose",
    "assemble",
    "contour_polygon",
    "has_shared_edges",
    "polygon_area",
    "bbox",
    "point_in_polygon",
    "is_simple",
]

# Type aliases; these carry shape conventions, not behaviour.
Point2 = np.ndarray  # shape (2,)
ComponentQuad = np.ndarray  # shape (4, 2), corners TL, TR, BR, BL

# Segments per knot span when tabulating arc length for resampling.
TABLE_SEGMENTS_PER_SPAN = 1000


def _as_points(arr, name: str, min_points: int) -> np.ndarray:
    pts = np.asarray(arr, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {pts.shape}")
    if pts.shape[0] < min_points:
        raise ValueError(f"{name} needs at least {min_points} points, got {pts.shape[0]}")
    if not np.isfinite(pts).all():
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def _cross(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]


@dataclass
class Polygon:
    """Closed polygon given by its vertex ring (not repeated at the end)."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        self.vertices = _as_points(self.vertices, "vertices", 3)

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class TextContour:
    """The two long sides of a text region, start-aligned.

    Traversing side_a forward and side_b backward yields the region's
    boundary polygon (see ``contour_polygon``); for meaningful decomposition
    that traversal should be a simple polygon.
    """

    side_a: np.ndarray
    side_b: np.ndarray

    def __post_init__(self) -> None:
        self.side_a = _as_points(self.side_a, "side_a", 2)
        self.side_b = _as_points(self.side_b, "side_b", 2)


@dataclass
class BSplineCurve:
    """Clamped B-spline curve with explicit knot vector."""

    control_points: np.ndarray
    degree: int
    knots: np.ndarray

    def __post_init__(self) -> None:
        self.control_points = _as_points(self.control_points, "control_points", 2)
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        self.knots = np.asarray(self.knots, dtype=float)
        if self.knots.ndim != 1:
            raise ValueError("knots must be a 1D array")
        if not np.isfinite(self.knots).all():
            raise ValueError("knots contain non-finite values")
        if (np.diff(self.knots) < 0).any():
            raise ValueError("knots must be non-decreasing")
        expected = len(self.control_points) + self.degree + 1
        if len(self.knots) != expected:
            raise ValueError(
                f"knot count {len(self.knots)} does not match "
                f"{len(self.control_points)} control points at degree {self.degree} "
                f"(expected {expected})"
            )

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[len(self.control_points)])


@dataclass
class ComponentSequence:
    """Chain of quadrilateral components covering one text instance.

    quads has shape (t, 4, 2). Ground-truth chains share edges exactly:
    quads[i][1] == quads[i+1][0] and quads[i][2] == quads[i+1][3]; predicted
    chains may violate this and are reconciled by ``assemble``. scores, when
    present, holds one confidence per component. label is "text" for real
    instances and "empty" for padding targets in matching.
    """

    quads: np.ndarray
    scores: np.ndarray | None = None
    label: str = "text"

    def __post_init__(self) -> None:
        self.quads = np.asarray(self.quads, dtype=float)
        if self.quads.ndim != 3 or self.quads.shape[1:] != (4, 2):
            raise ValueError(f"quads must have shape (t, 4, 2), got {self.quads.shape}")
        if self.quads.shape[0] < 1:
            raise ValueError("sequence needs at least one component")
        if not np.isfinite(self.quads).all():
            raise ValueError("quads contain non-finite coordinates")
        if self.scores is not None:
            self.scores = np.asarray(self.scores, dtype=float)
            if self.scores.shape != (len(self.quads),):
                raise ValueError(
                    f"scores must have shape ({len(self.quads)},), got {self.scores.shape}"
                )
            if not np.isfinite(self.scores).all():
                raise ValueError("scores contain non-finite values")
            if ((self.scores < 0) | (self.scores > 1)).any():
                raise ValueError("scores must lie in [0, 1]")
        if self.label not in ("text", "empty"):
            raise ValueError(f"label must be 'text' or 'empty', got {self.label!r}")

    def __len__(self) -> int:
        return len(self.quads)


def clamped_uniform_knots(n_control: int, degree: int) -> np.ndarray:
    """Clamped knot vector on [0, 1]: ends repeated degree+1 times, interior uniform."""
    if n_control < degree + 1:
        raise ValueError(f"need at least {degree + 1} control points, got {n_control}")
    interior = n_control - degree - 1
    return np.concatenate(
        [
            np.zeros(degree + 1),
            np.arange(1, interior + 1) / (interior + 1),
            np.ones(degree + 1),
        ]
    )


def bspline_basis(i: int, degree: int, u: float, knots) -> float:
    """Basis function N_{i,degree}(u) by the Cox-de Boor recurrence.

    Zero-length knot spans contribute nothing (0/0 terms are dropped). Spans
    are half-open except that the final span of the knot range is closed on
    the right, so clamped curves reach their last control point.
    """
    knots = np.asarray(knots, dtype=float)
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if i < 0 or i + degree + 1 > len(knots) - 1:
        raise ValueError(f"basis index {i} out of range for {len(knots)} knots at degree {degree}")
    if degree == 0:
        if knots[i] <= u < knots[i + 1]:
            return 1.0
        if u == knots[-1] and knots[i] < knots[i + 1] == knots[-1]:
            return 1.0
        return 0.0
    left = 0.0
    den_l = knots[i + degree] - knots[i]
    if den_l > 0:
        left = (u - knots[i]) / den_l * bspline_basis(i, degree - 1, u, knots)
    right = 0.0
    den_r = knots[i + degree + 1] - knots[i + 1]
    if den_r > 0:
        right = (knots[i + degree + 1] - u) / den_r * bspline_basis(i + 1, degree - 1, u, knots)
    return left + right


def _basis_matrix(knots: np.ndarray, degree: int, u: np.ndarray) -> np.ndarray:
    """All basis values at each parameter: shape (len(u), n_control).

    Bottom-up evaluation of the same recurrence as ``bspline_basis``; the two
    agree bitwise because they evaluate the identical expression tree.
    """
    u = np.asarray(u, dtype=float)
    n_spans = len(knots) - 1
    right_end = knots[-1]
    basis = np.zeros((n_spans, len(u)))
    for j in range(n_spans):
        lo, hi = knots[j], knots[j + 1]
        if lo < hi:
            inside = (u >= lo) & (u < hi)
            if hi == right_end:
                inside |= u == right_end
            basis[j, inside] = 1.0
    for r in range(1, degree + 1):
        nxt = np.zeros((n_spans - r, len(u)))
        for j in range(n_spans - r):
            den_l = knots[j + r] - knots[j]
            if den_l > 0:
                nxt[j] += (u - knots[j]) / den_l * basis[j]
            den_r = knots[j + r + 1] - knots[j + 1]
            if den_r > 0:
                nxt[j] += (knots[j + r + 1] - u) / den_r * basis[j + 1]
        basis = nxt
    return basis.T


def bspline_eval(curve: BSplineCurve, u) -> np.ndarray:
    """Evaluate the curve at parameter(s) u within its domain.

    Scalar u gives a point of shape (2,); an array of parameters gives a
    (len(u), 2) array.
    """
    scalar = np.isscalar(u) or np.ndim(u) == 0
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    lo, hi = curve.domain
    if ((u_arr < lo) | (u_arr > hi)).any():
        raise ValueError(f"parameter outside curve domain [{lo}, {hi}]")
    pts = _basis_matrix(curve.knots, curve.degree, u_arr) @ curve.control_points
    return pts[0] if scalar else pts


def _side_curve(side: np.ndarray) -> BSplineCurve:
    """Clamped B-spline with the side's vertices as control points.

    Degree 3, lowered to len(side)-1 when the side has fewer than 4 vertices.
    """
    degree = min(3, len(side) - 1)
    return BSplineCurve(side, degree, clamped_uniform_knots(len(side), degree))


def _arc_length_params(eval_fn, breakpoints: np.ndarray, m: int) -> np.ndarray | None:
    """Parameters of m equal arc-length points via a dense polyline table.

    The table uses TABLE_SEGMENTS_PER_SPAN segments per breakpoint interval
    and linear inversion of cumulative length. Returns None when the curve
    has zero total length.
    """
    pieces = []
    for s in range(len(breakpoints) - 1):
        seg = np.linspace(breakpoints[s], breakpoints[s + 1], TABLE_SEGMENTS_PER_SPAN + 1)
        pieces.append(seg if s == 0 else seg[1:])
    params = np.concatenate(pieces)
    pts = eval_fn(params)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    if cum[-1] == 0.0:
        return None
    targets = np.linspace(0.0, cum[-1], m)
    return np.interp(targets, cum, params)


def resample_side(side, m: int) -> np.ndarray:
    """Resample a side into m points equally spaced along its B-spline fit.

    The first and last output points coincide exactly with the side's
    endpoints. m = 2 returns just the endpoints.
    """
    side = _as_points(side, "side", 2)
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    curve = _side_curve(side)
    lo, hi = curve.domain
    spans = np.unique(curve.knots[(curve.knots >= lo) & (curve.knots <= hi)])
    params = _arc_length_params(lambda uu: bspline_eval(curve, uu), spans, m)
    if params is None:  # all vertices coincide
        return np.repeat(side[:1], m, axis=0)
    return bspline_eval(curve, params)


def _bezier_eval(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = t[:, None]
    s = 1.0 - t
    return (
        s**3 * ctrl[0]
        + 3.0 * t * s**2 * ctrl[1]
        + 3.0 * t**2 * s * ctrl[2]
        + t**3 * ctrl[3]
    )


def _bezier_fit(side: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Least-squares interior control points at fixed parameters t."""
    p0, p3 = side[0], side[-1]
    s = 1.0 - t
    bern = np.stack([s**3, 3.0 * t * s**2, 3.0 * t**2 * s, t**3], axis=1)
    rhs = side - np.outer(bern[:, 0], p0) - np.outer(bern[:, 3], p3)
    interior, *_ = np.linalg.lstsq(bern[:, 1:3], rhs, rcond=None)
    return np.vstack([p0, interior, p3])


def bezier_fit_side(side, m: int) -> np.ndarray:
    """Resample a side into m points along a least-squares cubic Bezier fit.

    Endpoints are pinned to the side's endpoints. Starting from chord-length
    parameters, the fit alternates solving for the two interior control
    points with Newton reprojection of the side's vertices onto the current
    curve (Hoschek-style parameter correction). Output points are equally
    spaced in arc length along the fitted curve.
    """
    side = _as_points(side, "side", 2)
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    chord = np.linalg.norm(np.diff(side, axis=0), axis=1)
    total = chord.sum()
    if total == 0.0:
        raise ValueError("cannot fit a curve through coincident points")
    p0, p3 = side[0], side[-1]
    if len(side) == 2:
        ctrl = np.array([p0, p0 + (p3 - p0) / 3.0, p0 + 2.0 * (p3 - p0) / 3.0, p3])
    else:
        t = np.concatenate([[0.0], np.cumsum(chord)]) / total
        ctrl = _bezier_fit(side, t)
        for _ in range(32):
            t_old = t
            d1c = 3.0 * (ctrl[1:] - ctrl[:-1])
            d2c = 2.0 * (d1c[1:] - d1c[:-1])
            for _ in range(3):
                tt = t[:, None]
                ss = 1.0 - tt
                pos = _bezier_eval(ctrl, t) - side
                der1 = ss**2 * d1c[0] + 2.0 * tt * ss * d1c[1] + tt**2 * d1c[2]
                der2 = ss * d2c[0] + tt * d2c[1]
                f = (pos * der1).sum(axis=1)
                fp = (der1 * der1).sum(axis=1) + (pos * der2).sum(axis=1)
                step = np.where(np.abs(fp) > 1e-12, f / np.where(fp == 0.0, 1.0, fp), 0.0)
                t = np.clip(t - step, 0.0, 1.0)
            t[0], t[-1] = 0.0, 1.0
            ctrl = _bezier_fit(side, t)
            if np.abs(t - t_old).max() < 1e-10:
                break
    params = _arc_length_params(
        lambda tt: _bezier_eval(ctrl, np.asarray(tt)), np.array([0.0, 1.0]), m
    )
    if params is None:
        return np.repeat(side[:1], m, axis=0)
    return _bezier_eval(ctrl, params)


def _poly_vertices(poly) -> np.ndarray:
    if isinstance(poly, Polygon):
        return poly.vertices
    return _as_points(poly, "polygon", 3)


def split_long_sides(poly, format_hint: str | None = None) -> TextContour:
    """Split a simple annotation polygon into its two long sides.

    With format_hint="ctw1500-14pt" the fixed layout of 14-vertex annotations
    is used: vertices 0..6 are one side, vertices 13..7 (reversed into
    start-aligned order) the other. Otherwise the head and tail edges are
    found by corner sharpness: edge pairs are ranked by total exterior
    turning angle at their endpoints, ties broken toward equal side arc
    lengths, then toward shorter head/tail edges.
    """
    v = _poly_vertices(poly)
    n = len(v)
    if format_hint == "ctw1500-14pt":
        if n != 14:
            raise ValueError(f"ctw1500-14pt polygons have 14 vertices, got {n}")
        return TextContour(v[0:7], v[7:14][::-1])
    if format_hint is not None:
        raise ValueError(f"unknown format hint {format_hint!r}")
    if n < 4:
        raise ValueError("need at least 4 vertices to split into two sides")
    edges = np.roll(v, -1, axis=0) - v
    edge_len = np.linalg.norm(edges, axis=1)
    if (edge_len == 0.0).any():
        raise ValueError("polygon has a zero-length edge")
    prev = np.roll(edges, 1, axis=0)
    turn = np.abs(np.arctan2(_cross(prev, edges), (prev * edges).sum(axis=1)))
    score = turn + np.roll(turn, -1)  # sharpness of edge i = turn at both its endpoints

    def chain_len(first: int, last: int) -> float:
        # polyline length from vertex first to vertex last (cyclic, inclusive)
        k = first
        total = 0.0
        while k != last:
            total += edge_len[k]
            k = (k + 1) % n
        return total

    best_key, best_pair = None, None
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges cannot bound two sides
            la = chain_len((i + 1) % n, j)
            lb = chain_len((j + 1) % n, i)
            balance = min(la, lb) / max(la, lb)
            key = (
                round((score[i] + score[j]) * 1e9),
                round(balance * 1e9),
                -(edge_len[i] + edge_len[j]),
            )
            if best_key is None or key > best_key:
                best_key, best_pair = key, (i, j)
    i, j = best_pair
    idx_a = [(i + 1 + k) % n for k in range((j - i - 1) % n + 1)]
    idx_b = [(j + 1 + k) % n for k in range((i - j - 1) % n + 1)]
    return TextContour(v[idx_a], v[idx_b][::-1])


def decompose(contour: TextContour, t: int, method: str = "bspline") -> ComponentSequence:
    """Cut a contour into t quadrilateral components.

    Each side is resampled into t+1 equal arc-length points along its fitted
    curve ("bspline" default, "bezier" for the cubic Bezier alternative);
    consecutive point pairs are zipped into quads that share edges exactly.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if method == "bspline":
        a = resample_side(contour.side_a, t + 1)
        b = resample_side(contour.side_b, t + 1)
    elif method == "bezier":
        a = bezier_fit_side(contour.side_a, t + 1)
        b = bezier_fit_side(contour.side_b, t + 1)
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    quads = np.stack([a[:-1], a[1:], b[1:], b[:-1]], axis=1)
    return ComponentSequence(quads=quads, scores=None, label="text")


def assemble(seq: ComponentSequence) -> Polygon:
    """Close a component sequence into its boundary polygon.

    Top points are traversed forward, bottom points backward, giving a
    2(t+1)-gon. Where adjacent quads disagree about a shared point (predicted
    chains), the midpoint of the two candidates is used; exact chains are
    reproduced vertex for vertex.
    """
    q = seq.quads
    t = len(q)
    top = np.empty((t + 1, 2))
    bot = np.empty((t + 1, 2))
    top[0], top[-1] = q[0, 0], q[-1, 1]
    bot[0], bot[-1] = q[0, 3], q[-1, 2]
    if t > 1:
        top[1:-1] = 0.5 * (q[:-1, 1] + q[1:, 0])
        bot[1:-1] = 0.5 * (q[:-1, 2] + q[1:, 3])
    return Polygon(np.concatenate([top, bot[::-1]], axis=0))


def contour_polygon(contour: TextContour) -> Polygon:
    """Boundary polygon of a contour: side_a forward, then side_b backward."""
    return Polygon(np.concatenate([contour.side_a, contour.side_b[::-1]], axis=0))


def has_shared_edges(seq: ComponentSequence, tol: float = 1e-6) -> bool:
    """True if adjacent quads agree about their shared edge within tol."""
    q = seq.quads
    if len(q) < 2:
        return True
    top = np.abs(q[:-1, 1] - q[1:, 0]).max()
    bot = np.abs(q[:-1, 2] - q[1:, 3]).max()
    return bool(max(top, bot) <= tol)


def polygon_area(poly) -> float:
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    v = _poly_vertices(poly)
    w = np.roll(v, -1, axis=0)
    return float(0.5 * np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def bbox(poly) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box (min_x, min_y, max_x, max_y)."""
    v = _poly_vertices(poly)
    mn, mx = v.min(axis=0), v.max(axis=0)
    return float(mn[0]), float(mn[1]), float(mx[0]), float(mx[1])


def point_in_polygon(poly, point) -> bool:
    """Even-odd containment test; boundary points count as inside."""
    v = _poly_vertices(poly)
    p = np.asarray(point, dtype=float)
    a = v
    b = np.roll(v, -1, axis=0)
    # boundary: point collinear with an edge and within its extent
    d = _cross(b - a, p - a)
    scale = max(1.0, float(np.abs(v).max()))
    near = np.abs(d) <= 1e-12 * scale * scale
    if near.any():
        lo = np.minimum(a, b) - 1e-12 * scale
        hi = np.maximum(a, b) + 1e-12 * scale
        inside_box = ((p >= lo) & (p <= hi)).all(axis=1)
        if (near & inside_box).any():
            return True
    ya, yb = a[:, 1], b[:, 1]
    straddles = (ya > p[1]) != (yb > p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        x_hit = a[:, 0] + (p[1] - ya) / (yb - ya) * (b[:, 0] - a[:, 0])
    crossings = straddles & (p[0] < x_hit)
    return bool(crossings.sum() % 2 == 1)


def is_simple(poly) -> bool:
    """True if the polygon has no duplicate vertices and no edge crossings.

    Non-adjacent edges may not meet at all; adjacent edges may meet only at
    their shared vertex (no collinear fold-backs).
    """
    v = _poly_vertices(poly)
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)
    e = b - a
    if (np.linalg.norm(e, axis=1) == 0.0).any():
        return False
    # fold-back between consecutive edges: collinear and opposite direction
    nxt = np.roll(e, -1, axis=0)
    if ((_cross(e, nxt) == 0.0) & ((e * nxt).sum(axis=1) < 0.0)).any():
        return False
    # s1[i, j]: which side of edge i the start of edge j lies on
    rel_a = a[None, :, :] - a[:, None, :]
    rel_b = b[None, :, :] - a[:, None, :]
    s1 = _cross(e[:, None, :], rel_a)
    s2 = _cross(e[:, None, :], rel_b)
    straddle = s1 * s2 < 0.0
    proper = straddle & straddle.T
    # endpoint of edge j lying exactly on edge i
    lo = np.minimum(a, b)[:, None, :]
    hi = np.maximum(a, b)[:, None, :]
    on_a = (s1 == 0.0) & ((a[None] >= lo) & (a[None] <= hi)).all(axis=2)
    on_b = (s2 == 0.0) & ((b[None] >= lo) & (b[None] <= hi)).all(axis=2)
    touch = proper | on_a | on_b
    idx = np.arange(n)
    adjacent = (
        (idx[:, None] == idx[None, :])
        | ((idx[:, None] + 1) % n == idx[None, :])
        | ((idx[None, :] + 1) % n == idx[:, None])
    )
    return not (touch & ~adjacent).any()
