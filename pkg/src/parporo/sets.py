"""Closed-set models with parabolic distance oracles and freeness tests.

Every model is a nonempty closed subset of space-time with three queries:

* ``distance(pt, p)``        -- certified bracket on dist_p(pt, E)
* ``dist_box_range(box, p)`` -- certified brackets on inf/sup of dist_p(., E)
                                over a box (closure semantics)
* ``meets_box(box)``         -- does E intersect the half-open box?

The first four variants answer everything exactly; the iterated-function-
system variant works through conservative bounding boxes under a recursion
cap and reports ``UNKNOWN`` rather than guessing.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .geometry import ParabolicRectangle
from .intervals import Interval

Point = tuple[float, ...]
AxisBounds = tuple[tuple[float, float], ...]
Box = tuple[AxisBounds, tuple[float, float]]


class Freeness(Enum):
    EMPTY = "empty"        # rect does not meet E (rect is E-free)
    NONEMPTY = "nonempty"  # rect meets E
    UNKNOWN = "unknown"    # undecided under the recursion cap


def parabolic_distance(a: Sequence[float], b: Sequence[float], p: float) -> float:
    """max of the sup-norm spatial distance and |dt|^(1/p)."""
    if p <= 1:
        raise ValueError("parabolic exponent must exceed 1")
    *xa, ta = a
    *xb, tb = b
    if len(xa) != len(xb):
        raise ValueError("point dimension mismatch")
    spatial = max((abs(x - y) for x, y in zip(xa, xb)), default=0.0)
    return max(spatial, abs(ta - tb) ** (1.0 / p))


def _axis_gap(lo: float, hi: float, v: float) -> float:
    """Distance from v to the interval [lo, hi]."""
    if v < lo:
        return lo - v
    if v > hi:
        return v - hi
    return 0.0


def _axis_span(lo: float, hi: float, v: float) -> float:
    """Largest |x - v| over x in [lo, hi]."""
    return max(abs(lo - v), abs(hi - v))


def _interval_gap(alo: float, ahi: float, blo: float, bhi: float) -> float:
    return max(0.0, blo - ahi, alo - bhi)


def _interval_span(alo: float, ahi: float, blo: float, bhi: float) -> float:
    """Largest distance from a point of [alo, ahi] to the interval [blo, bhi]."""
    return max(_axis_gap(blo, bhi, alo), _axis_gap(blo, bhi, ahi))


def _halfopen_meets_closed(alo: float, ahi: float, blo: float, bhi: float) -> bool:
    """[alo, ahi) against [blo, bhi]."""
    return blo < ahi and bhi >= alo


# ---------------------------------------------------------------------------
# model variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointCloud:
    """Finite set of space-time points (vectorized over the cloud)."""

    points: tuple[Point, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("a closed-set model must be nonempty")
        dims = {len(pt) for pt in self.points}
        if len(dims) != 1:
            raise ValueError("all points must share a dimension")
        arr = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "_xs", arr[:, :-1])
        object.__setattr__(self, "_ts", arr[:, -1])

    @property
    def is_null(self) -> bool:
        return True

    def distance(self, pt: Sequence[float], p: float) -> Interval:
        *x, t = (float(v) for v in pt)
        inv = 1.0 / p
        if len(self.points) <= 12:
            best = math.inf
            for z in self.points:
                sp = max((abs(a - b) for a, b in zip(z[:-1], x)), default=0.0)
                best = min(best, max(sp, abs(z[-1] - t) ** inv))
            return Interval.point(best)
        sp = np.abs(self._xs - np.asarray(x)).max(axis=1) if self._xs.shape[1] \
            else np.zeros(len(self._ts))
        d = np.maximum(sp, np.abs(self._ts - t) ** inv)
        return Interval.point(float(d.min()))

    def _gap_span_arrays(self, box: Box, p: float):
        """Per-point (inf, sup) of the distance over the box closure.

        Returns plain lists for small clouds (numpy round trips dominate
        there) and numpy arrays otherwise.
        """
        bounds, (tlo, thi) = box
        inv = 1.0 / p
        if len(self.points) <= 12:
            gaps, spans = [], []
            for z in self.points:
                g, s = self._box_range_single(z, box, p)
                gaps.append(g)
                spans.append(s)
            return gaps, spans
        lo = np.asarray([b[0] for b in bounds])
        hi = np.asarray([b[1] for b in bounds])
        gaps = np.maximum(np.maximum(lo - self._xs, self._xs - hi), 0.0)
        spans = np.maximum(np.abs(lo - self._xs), np.abs(hi - self._xs))
        sp_gap = gaps.max(axis=1) if gaps.shape[1] else np.zeros(len(self._ts))
        sp_span = spans.max(axis=1) if spans.shape[1] else np.zeros(len(self._ts))
        t_gap = np.maximum(np.maximum(tlo - self._ts, self._ts - thi), 0.0)
        t_span = np.maximum(np.abs(tlo - self._ts), np.abs(thi - self._ts))
        return np.maximum(sp_gap, t_gap ** inv), np.maximum(sp_span, t_span ** inv)

    def dist_box_gap_span(self, box: Box, p: float) -> tuple[float, float]:
        """(inf over box of dist, an upper bound on sup over box of dist)."""
        gaps, spans = self._gap_span_arrays(box, p)
        return float(min(gaps)), float(min(spans))

    def _box_range_single(self, z: Point, box: Box, p: float) -> tuple[float, float]:
        bounds, (tlo, thi) = box
        *zx, zt = z
        inf_sp = max((_axis_gap(lo, hi, x) for (lo, hi), x in zip(bounds, zx)),
                     default=0.0)
        sup_sp = max((_axis_span(lo, hi, x) for (lo, hi), x in zip(bounds, zx)),
                     default=0.0)
        inv = 1.0 / p
        return (max(inf_sp, _axis_gap(tlo, thi, zt) ** inv),
                max(sup_sp, _axis_span(tlo, thi, zt) ** inv))

    def dist_box_range(self, box: Box, p: float) -> tuple[Interval, Interval]:
        inf, sup_hi = self.dist_box_gap_span(box, p)
        # lower witness for the sup: sampled box points
        sup_lo = max(self.distance(pt, p).lo for pt in _box_probe_points(box))
        sup_lo = min(sup_lo, sup_hi)
        return Interval.point(inf), Interval(sup_lo, sup_hi)

    def sup_is_exact(self) -> bool:
        return len(self.points) == 1

    def meets_box(self, box: Box) -> Freeness:
        bounds, (tlo, thi) = box
        lo = np.asarray([b[0] for b in bounds])
        hi = np.asarray([b[1] for b in bounds])
        inside = (self._ts >= tlo) & (self._ts < thi)
        if self._xs.shape[1]:
            inside &= ((self._xs >= lo) & (self._xs < hi)).all(axis=1)
        return Freeness.NONEMPTY if bool(inside.any()) else Freeness.EMPTY

    def to_json(self) -> dict:
        from .serialize import number_str
        return {"type": "points",
                "coords": [[number_str(c) for c in z] for z in self.points]}


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of closed axis-aligned space-time boxes.

    Each box is ``(((xlo, xhi), ...), (tlo, thi))`` with closed faces.
    """

    boxes: tuple[Box, ...]

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("a closed-set model must be nonempty")
        for bounds, (tlo, thi) in self.boxes:
            for lo, hi in bounds:
                if lo > hi:
                    raise ValueError("degenerate spatial bounds")
            if tlo > thi:
                raise ValueError("degenerate temporal bounds")

    @property
    def is_null(self) -> bool:
        return all(
            any(lo == hi for lo, hi in bounds) or tlo == thi
            for bounds, (tlo, thi) in self.boxes
        )

    def _dist_to_box(self, b: Box, pt: Sequence[float], p: float) -> float:
        bounds, (tlo, thi) = b
        *x, t = pt
        sp = max((_axis_gap(lo, hi, v) for (lo, hi), v in zip(bounds, x)), default=0.0)
        return max(sp, _axis_gap(tlo, thi, t) ** (1.0 / p))

    def distance(self, pt: Sequence[float], p: float) -> Interval:
        return Interval.point(min(self._dist_to_box(b, pt, p) for b in self.boxes))

    def _box_range_single(self, b: Box, box: Box, p: float) -> tuple[float, float]:
        (ebounds, (etlo, ethi)) = b
        (qbounds, (qtlo, qthi)) = box
        inf_sp = max((_interval_gap(qlo, qhi, elo, ehi)
                      for (qlo, qhi), (elo, ehi) in zip(qbounds, ebounds)), default=0.0)
        sup_sp = max((_interval_span(qlo, qhi, elo, ehi)
                      for (qlo, qhi), (elo, ehi) in zip(qbounds, ebounds)), default=0.0)
        inf_t = _interval_gap(qtlo, qthi, etlo, ethi)
        sup_t = _interval_span(qtlo, qthi, etlo, ethi)
        inv = 1.0 / p
        return (max(inf_sp, inf_t ** inv), max(sup_sp, sup_t ** inv))

    def dist_box_range(self, box: Box, p: float) -> tuple[Interval, Interval]:
        singles = [self._box_range_single(b, box, p) for b in self.boxes]
        inf = min(s[0] for s in singles)
        sup_hi = min(s[1] for s in singles)
        sup_lo = max(self.distance(pt, p).lo for pt in _box_probe_points(box))
        sup_lo = min(sup_lo, sup_hi)
        return Interval.point(inf), Interval(sup_lo, sup_hi)

    def dist_box_gap_span(self, box: Box, p: float) -> tuple[float, float]:
        singles = [self._box_range_single(b, box, p) for b in self.boxes]
        return min(s[0] for s in singles), min(s[1] for s in singles)

    def sup_is_exact(self) -> bool:
        return len(self.boxes) == 1

    def meets_box(self, box: Box) -> Freeness:
        qbounds, (qtlo, qthi) = box
        for ebounds, (etlo, ethi) in self.boxes:
            spatial_ok = all(
                _halfopen_meets_closed(qlo, qhi, elo, ehi)
                for (qlo, qhi), (elo, ehi) in zip(qbounds, ebounds))
            if spatial_ok and _halfopen_meets_closed(qtlo, qthi, etlo, ethi):
                return Freeness.NONEMPTY
        return Freeness.EMPTY

    def to_json(self) -> dict:
        from .serialize import number_str
        return {"type": "boxes",
                "boxes": [{
                    "spatial": [[number_str(lo), number_str(hi)] for lo, hi in bounds],
                    "temporal": [number_str(tlo), number_str(thi)],
                } for bounds, (tlo, thi) in self.boxes]}


@dataclass(frozen=True)
class HalfSpaceTime:
    """Temporal half space ``{t >= t0}`` (future) or ``{t <= t0}`` (past)."""

    t0: float
    future: bool = True

    @property
    def is_null(self) -> bool:
        return False

    def distance(self, pt: Sequence[float], p: float) -> Interval:
        t = pt[-1]
        gap = max(0.0, self.t0 - t) if self.future else max(0.0, t - self.t0)
        return Interval.point(gap ** (1.0 / p))

    def dist_box_range(self, box: Box, p: float) -> tuple[Interval, Interval]:
        _, (tlo, thi) = box
        inv = 1.0 / p
        if self.future:
            inf_g, sup_g = max(0.0, self.t0 - thi), max(0.0, self.t0 - tlo)
        else:
            inf_g, sup_g = max(0.0, tlo - self.t0), max(0.0, thi - self.t0)
        return Interval.point(inf_g ** inv), Interval.point(sup_g ** inv)

    def sup_is_exact(self) -> bool:
        return True

    def meets_box(self, box: Box) -> Freeness:
        _, (tlo, thi) = box
        hit = self.t0 < thi if self.future else self.t0 >= tlo
        return Freeness.NONEMPTY if hit else Freeness.EMPTY

    def to_json(self) -> dict:
        from .serialize import number_str
        return {"type": "halfspace", "t0": number_str(self.t0),
                "direction": "future" if self.future else "past"}


@dataclass(frozen=True)
class SpatialHyperplane:
    """Hyperplane ``{x_axis = value}`` extended over all times."""

    axis: int
    value: float

    @property
    def is_null(self) -> bool:
        return True

    def distance(self, pt: Sequence[float], p: float) -> Interval:
        return Interval.point(abs(pt[self.axis] - self.value))

    def dist_box_range(self, box: Box, p: float) -> tuple[Interval, Interval]:
        bounds, _ = box
        lo, hi = bounds[self.axis]
        return (Interval.point(_axis_gap(lo, hi, self.value)),
                Interval.point(_axis_span(lo, hi, self.value)))

    def sup_is_exact(self) -> bool:
        return True

    def meets_box(self, box: Box) -> Freeness:
        bounds, _ = box
        lo, hi = bounds[self.axis]
        return Freeness.NONEMPTY if lo <= self.value < hi else Freeness.EMPTY

    def to_json(self) -> dict:
        from .serialize import number_str
        return {"type": "hyperplane", "axis": self.axis, "value": number_str(self.value)}


@dataclass(frozen=True)
class IFSMap:
    """Contraction ``x -> ratio*x + shift`` with temporal scale ``ratio^p``."""

    ratio: float
    shift: tuple[float, ...]
    t_shift: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("IFS ratio must lie in (0, 1)")


@dataclass(frozen=True)
class IFSFractal:
    """Attractor of contracting affine maps with parabolic time scaling.

    ``spatial_only=True`` models a product ``(spatial attractor) x R_t``,
    e.g. the 1/3-Cantor set crossed with the time axis.  Queries refine
    cylinder bounding boxes down to ``depth_cap`` and report three-valued
    freeness; distance brackets widen instead of failing silently.
    """

    maps: tuple[IFSMap, ...]
    p: float
    depth_cap: int = 24
    spatial_only: bool = True

    def __post_init__(self):
        if not self.maps:
            raise ValueError("a closed-set model must be nonempty")

    @property
    def is_null(self) -> bool:
        # strictly contracting with at least spatial codimension in the product
        return True

    @property
    def n(self) -> int:
        return len(self.maps[0].shift)

    def _root_box(self) -> tuple[tuple[float, float], ...]:
        """Per-axis interval invariant under the union of the maps."""
        rmax = max(m.ratio for m in self.maps)
        bound = max(max(abs(s) for s in m.shift) for m in self.maps) / (1.0 - rmax) + 1.0
        box = [(-bound, bound)] * self.n
        for _ in range(200):
            nxt = []
            for j in range(self.n):
                lo = min(m.ratio * box[j][0] + m.shift[j] for m in self.maps)
                hi = max(m.ratio * box[j][1] + m.shift[j] for m in self.maps)
                nxt.append((lo, hi))
            if nxt == box:
                break
            box = nxt
        return tuple(box)

    def _apply(self, m: IFSMap, box: tuple[tuple[float, float], ...]):
        return tuple((m.ratio * lo + m.shift[j], m.ratio * hi + m.shift[j])
                     for j, (lo, hi) in enumerate(box))

    def _witness(self, word: tuple[int, ...]) -> tuple[float, ...]:
        """An exact attractor point: image of the first map's fixed point."""
        m0 = self.maps[0]
        pt = tuple(s / (1.0 - m0.ratio) for s in m0.shift)
        for idx in reversed(word):
            m = self.maps[idx]
            pt = tuple(m.ratio * v + m.shift[j] for j, v in enumerate(pt))
        return pt

    def _spatial_gap(self, bounds, cell) -> float:
        return max((_interval_gap(qlo, qhi, clo, chi)
                    for (qlo, qhi), (clo, chi) in zip(bounds, cell)), default=0.0)

    def distance(self, pt: Sequence[float], p: float,
                 tol: float = 1e-12) -> Interval:
        if not self.spatial_only:
            raise NotImplementedError("space-time IFS distance is box-driven only")
        x = tuple(pt[:-1])
        best_hi = math.inf
        frontier = [((), self._root_box())]
        for depth in range(self.depth_cap + 1):
            nxt = []
            best_lo = math.inf
            for word, cell in frontier:
                gap = max((_axis_gap(lo, hi, v) for (lo, hi), v in zip(cell, x)),
                          default=0.0)
                diam = max(hi - lo for lo, hi in cell) if cell else 0.0
                best_lo = min(best_lo, gap)
                w = self._witness(word)
                best_hi = min(best_hi, max((abs(a - b) for a, b in zip(w, x)), default=0.0))
                best_hi = min(best_hi, gap + diam)
                nxt.append((word, cell, gap))
            if best_hi - best_lo <= tol * max(1.0, best_hi) or depth == self.depth_cap:
                return Interval(min(best_lo, best_hi), best_hi)
            cutoff = best_hi
            frontier = [
                ((*word, i), self._apply(m, cell))
                for word, cell, gap in nxt if gap <= cutoff
                for i, m in enumerate(self.maps)
            ]
        return Interval(min(best_lo, best_hi), best_hi)

    def dist_box_range(self, box: Box, p: float) -> tuple[Interval, Interval]:
        if not self.spatial_only:
            raise NotImplementedError("space-time IFS ranges are box-driven only")
        bounds, _ = box
        # inf: gap to the deepest refinement that still might matter
        frontier = [self._root_box()]
        inf_lo, inf_hi = 0.0, math.inf
        for depth in range(self.depth_cap + 1):
            gaps = [self._spatial_gap(bounds, cell) for cell in frontier]
            diam = max(max(hi - lo for lo, hi in cell) for cell in frontier)
            inf_lo = min(gaps)
            inf_hi = min(g + diam for g in gaps)
            if inf_hi - inf_lo <= 1e-12 * max(1.0, inf_hi) or depth == self.depth_cap:
                break
            cutoff = inf_hi
            frontier = [self._apply(m, cell)
                        for cell, g in zip(frontier, gaps) if g <= cutoff
                        for m in self.maps]
        # sup: coarse two-sided bound from probe points and the root box
        sup_lo = max(self.distance(pt, p).lo for pt in _box_probe_points(box))
        root = self._root_box()
        sup_hi = max(
            max((_axis_span(qlo, qhi, c) for (qlo, qhi), c in
                 zip(bounds, ((rl + rh) / 2 for rl, rh in root))), default=0.0),
            sup_lo)
        sup_hi += max(rh - rl for rl, rh in root) / 2
        return Interval(inf_lo, inf_hi), Interval(sup_lo, sup_hi)

    def sup_is_exact(self) -> bool:
        return False

    def meets_box(self, box: Box, node_budget: int = 50000) -> Freeness:
        bounds, _ = box
        if any(hi <= lo for lo, hi in bounds):
            return Freeness.EMPTY
        stack = [((), self._root_box())]
        depth_limited = False
        visited = 0
        while stack:
            visited += 1
            if visited > node_budget:
                return Freeness.UNKNOWN
            word, cell = stack.pop()
            # open overlap test per axis: [qlo, qhi) against closed cell
            if not all(_halfopen_meets_closed(qlo, qhi, clo, chi)
                       for (qlo, qhi), (clo, chi) in zip(bounds, cell)):
                continue
            w = self._witness(word)
            if all(qlo <= v < qhi for (qlo, qhi), v in zip(bounds, w)):
                return Freeness.NONEMPTY
            if len(word) >= self.depth_cap:
                depth_limited = True
                continue
            for i, m in enumerate(self.maps):
                stack.append(((*word, i), self._apply(m, cell)))
        return Freeness.UNKNOWN if depth_limited else Freeness.EMPTY

    def to_json(self) -> dict:
        from .serialize import number_str
        return {"type": "ifs", "p": number_str(self.p),
                "spatial_only": self.spatial_only, "depth_cap": self.depth_cap,
                "maps": [{"ratio": number_str(m.ratio),
                          "shift": [number_str(s) for s in m.shift],
                          "t_shift": number_str(m.t_shift)} for m in self.maps]}


ClosedSetModel = PointCloud | BoxUnion | HalfSpaceTime | SpatialHyperplane | IFSFractal


def _box_probe_points(box: Box) -> list[Point]:
    """Corners and center of a box (closure), used as sup-distance witnesses."""
    bounds, (tlo, thi) = box
    pts: list[Point] = []
    n = len(bounds)
    for mask in range(1 << n):
        x = tuple(bounds[j][1] if mask & (1 << j) else bounds[j][0] for j in range(n))
        pts.append((*x, tlo))
        pts.append((*x, thi))
    center = tuple(0.5 * (lo + hi) for lo, hi in bounds) + (0.5 * (tlo + thi),)
    pts.append(center)
    return pts


# ---------------------------------------------------------------------------
# public oracles
# ---------------------------------------------------------------------------


def distance_to_set(pt: Sequence[float], model: ClosedSetModel, p: float,
                    tol: float = 1e-12) -> Interval:
    """Certified bracket on dist_p(pt, E); zero width except for fractal
    models, which refine until ``tol`` or their depth cap (the wide bracket
    then carries the loss, never a silent guess)."""
    point = tuple(float(v) for v in pt)
    if isinstance(model, IFSFractal):
        return model.distance(point, p, tol=tol)
    return model.distance(point, p)


def rectangle_free(model: ClosedSetModel, rect: ParabolicRectangle, p: float) -> Freeness:
    """EMPTY iff the half-open body of ``rect`` misses E."""
    return model.meets_box(rect.box(p))


def sup_distance_bracket(model: ClosedSetModel, box: Box, p: float,
                         tol: float = 1e-9, max_cells: int = 20000) -> tuple[Interval, bool]:
    """Certified bracket on ``sup`` of dist_p(., E) over a box.

    Exact (up to rounding) whenever the model's box formula is exact;
    otherwise branch-and-bound on halved boxes, splitting the parabolically
    longest axis.  Returns ``(bracket, converged)``.
    """
    inf_iv, sup_iv = model.dist_box_range(box, p)
    if model.sup_is_exact():
        return sup_iv, True
    if sup_iv.width <= tol:
        return sup_iv, True

    counter = 0
    heap: list[tuple[float, int, Box]] = []
    best_lo = sup_iv.lo

    def push(b: Box):
        nonlocal counter
        _, s = model.dist_box_range(b, p)
        nonlocal best_lo
        best_lo = max(best_lo, s.lo)
        heapq.heappush(heap, (-s.hi, counter, b))
        counter += 1

    push(box)
    processed = 0
    while heap and processed < max_cells:
        neg_hi, _, cell = heapq.heappop(heap)
        hi = -neg_hi
        if hi <= best_lo + tol:
            heapq.heappush(heap, (neg_hi, counter, cell))
            break
        for half in _split_box(cell, p):
            push(half)
        processed += 1
    sup_hi = max((-h for h, _, _ in heap), default=best_lo)
    sup_hi = max(sup_hi, best_lo)
    converged = sup_hi - best_lo <= tol
    return Interval(best_lo, sup_hi), converged


def _split_box(box: Box, p: float) -> tuple[Box, Box]:
    bounds, (tlo, thi) = box
    widths = [hi - lo for lo, hi in bounds]
    t_eff = (thi - tlo) ** (1.0 / p)
    if widths and max(widths) >= t_eff:
        j = widths.index(max(widths))
        lo, hi = bounds[j]
        mid = 0.5 * (lo + hi)
        left = tuple((mid, hi) if i == j else b for i, b in enumerate(bounds))
        right = tuple((lo, mid) if i == j else b for i, b in enumerate(bounds))
        return (right, (tlo, thi)), (left, (tlo, thi))
    mid = 0.5 * (tlo + thi)
    return (bounds, (tlo, mid)), (bounds, (mid, thi))


# ---------------------------------------------------------------------------
# fixtures and JSON
# ---------------------------------------------------------------------------


def single_point(n: int = 1, at: Optional[Point] = None) -> PointCloud:
    return PointCloud((at if at is not None else (0.0,) * n + (0.0,),))


def integer_grid(n: int = 1, spatial_extent: int = 8, time_depth: int = 8,
                 spacing: float = 1.0, offset: float = 0.0) -> PointCloud:
    """Grid ``{(z*spacing + offset, -(m*spacing^p-ish)) : z, m integers}``, truncated."""
    pts: list[Point] = []
    rng = range(-spatial_extent, spatial_extent + 1)
    coords = [rng] * n
    import itertools
    for z in itertools.product(*coords):
        for m in range(0, time_depth + 1):
            pts.append(tuple(v * spacing + offset for v in z) + (-(m * spacing) + offset,))
    return PointCloud(tuple(pts))


def spatial_hyperplane(axis: int = 0, value: float = 0.0) -> SpatialHyperplane:
    return SpatialHyperplane(axis, value)


def temporal_halfspace(t0: float = 0.0, future: bool = True) -> HalfSpaceTime:
    return HalfSpaceTime(t0, future)


def cantor_times_time(p: float = 2.0, depth_cap: int = 24) -> IFSFractal:
    """Middle-thirds Cantor set on the first axis crossed with the time axis."""
    return IFSFractal(
        maps=(IFSMap(ratio=1 / 3, shift=(0.0,)), IFSMap(ratio=1 / 3, shift=(2 / 3,))),
        p=p, depth_cap=depth_cap, spatial_only=True)


def set_to_json(model: ClosedSetModel, p: Optional[float] = None) -> dict:
    obj = model.to_json()
    if p is not None and "p" not in obj:
        from .serialize import number_str
        obj["p"] = number_str(p)
    return obj


def set_from_json(obj: dict) -> tuple[ClosedSetModel, Optional[float]]:
    from .serialize import parse_number
    kind = obj.get("type")
    p = parse_number(obj["p"]) if "p" in obj else None
    if kind == "points":
        pts = tuple(tuple(float(parse_number(c)) for c in row) for row in obj["coords"])
        return PointCloud(pts), p
    if kind == "boxes":
        boxes = []
        for b in obj["boxes"]:
            bounds = tuple((float(parse_number(lo)), float(parse_number(hi)))
                           for lo, hi in b["spatial"])
            tlo, thi = (float(parse_number(v)) for v in b["temporal"])
            boxes.append((bounds, (tlo, thi)))
        return BoxUnion(tuple(boxes)), p
    if kind == "halfspace":
        return HalfSpaceTime(float(parse_number(obj["t0"])),
                             obj.get("direction", "future") == "future"), p
    if kind == "hyperplane":
        return SpatialHyperplane(int(obj["axis"]), float(parse_number(obj["value"]))), p
    if kind == "ifs":
        maps = tuple(IFSMap(float(parse_number(m["ratio"])),
                            tuple(float(parse_number(s)) for s in m["shift"]),
                            float(parse_number(m.get("t_shift", "0"))))
                     for m in obj["maps"])
        return IFSFractal(maps, float(p if p is not None else 2.0),
                          int(obj.get("depth_cap", 24)),
                          bool(obj.get("spatial_only", True))), p
    raise ValueError(f"unknown set model type: {kind!r}")
