"""Maximal free dyadic subrectangles, admissible collections, and porosity scans.

Hole measures are exact rationals in units of the lattice root's measure,
so admissibility thresholds compare exactly.  Searches are breadth first
with pruning at free rectangles; depth caps always surface in the result
instead of silently truncating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .geometry import DyadicAddress, Root
from .intervals import Interval
from .sampling import SamplerConfig, draw_roots, run_indexed
from .sets import ClosedSetModel, Freeness, rectangle_free, sup_distance_bracket


@dataclass(frozen=True)
class HoleResult:
    """A largest E-free dyadic subrectangle found under the depth cap.

    ``measure`` is |hole| / |lattice root| (zero when nothing was found);
    with ``unknown_present`` the measure is only a certified lower bound.
    """

    address: Optional[DyadicAddress]
    measure: Fraction
    side: Fraction
    depth_cap_hit: bool = False
    unknown_present: bool = False


@dataclass(frozen=True)
class CollectionReport:
    """Pairwise disjoint dyadic rectangles plus exact coverage bookkeeping."""

    base: DyadicAddress
    rectangles: tuple[DyadicAddress, ...]
    total_measure: Fraction       # in units of |lattice root|
    covered_fraction: Fraction    # total relative to |base|
    depth_cap_hit: bool = False
    unknown_present: bool = False


@dataclass(frozen=True)
class PorosityReport:
    delta: Fraction
    theta: float
    depth_cap: int
    samples: tuple[dict, ...]
    empirical_c: Fraction
    witness_index: int
    depth_cap_hit: bool
    unknown_present: bool


def _freeness(model: ClosedSetModel, addr: DyadicAddress) -> Freeness:
    return rectangle_free(model, addr.realize(), addr.root.geom.p)


def maximal_hole(model: ClosedSetModel, root_addr: DyadicAddress,
                 depth_cap: int) -> HoleResult:
    """Breadth-first search for a free rectangle of maximal spatial side.

    Ties are broken deterministically by (temporal index, spatial indices).
    Subtrees of free rectangles are pruned; UNKNOWN rectangles are treated
    as non-free and descended into, which keeps the result a certified
    lower bound.
    """
    if depth_cap < 0:
        raise ValueError("depth_cap must be nonnegative")
    frontier = [root_addr]
    unknown_present = False
    for _rel in range(depth_cap + 1):
        best: Optional[DyadicAddress] = None
        nxt: list[DyadicAddress] = []
        for addr in frontier:
            state = _freeness(model, addr)
            if state is Freeness.EMPTY:
                if best is None or (addr.temporal, addr.spatial) < (best.temporal, best.spatial):
                    best = addr
            else:
                if state is Freeness.UNKNOWN:
                    unknown_present = True
                nxt.append(addr)
        if best is not None:
            return HoleResult(best, best.measure_fraction(), best.l_x(),
                              depth_cap_hit=False, unknown_present=unknown_present)
        frontier = [child for addr in nxt for child in addr.iter_children()] \
            if _rel < depth_cap else nxt
    return HoleResult(None, Fraction(0), Fraction(0),
                      depth_cap_hit=bool(frontier), unknown_present=unknown_present)


def free_collection(model: ClosedSetModel, root_addr: DyadicAddress,
                    depth_cap: int) -> CollectionReport:
    """Maximal E-free dyadic subrectangles: free rectangles whose parent is not free."""
    return _maximal_free(model, root_addr, depth_cap)


def _maximal_free(model: ClosedSetModel, root_addr: DyadicAddress,
                  depth_cap: int) -> CollectionReport:
    members: list[DyadicAddress] = []
    unknown_present = False
    cap_hit = False
    frontier = [root_addr]
    for rel in range(depth_cap + 1):
        nxt: list[DyadicAddress] = []
        for addr in frontier:
            state = _freeness(model, addr)
            if state is Freeness.EMPTY:
                members.append(addr)
            else:
                if state is Freeness.UNKNOWN:
                    unknown_present = True
                nxt.append(addr)
        if rel < depth_cap:
            frontier = [child for addr in nxt for child in addr.iter_children()]
        else:
            cap_hit = bool(nxt)
    total = sum((m.measure_fraction() for m in members), Fraction(0))
    members.sort(key=lambda a: (a.level, a.temporal, a.spatial))
    return CollectionReport(
        base=root_addr,
        rectangles=tuple(members),
        total_measure=total,
        covered_fraction=total / root_addr.measure_fraction(),
        depth_cap_hit=cap_hit,
        unknown_present=unknown_present,
    )


def hole_of_translate(model: ClosedSetModel, base: DyadicAddress, theta,
                      depth_cap: int) -> HoleResult:
    """Maximal hole of the base rectangle translated by ``theta`` own lengths.

    Integer translations stay inside the extended lattice and are exact;
    real translations anchor a fresh lattice at the shifted rectangle.
    """
    if float(theta) == int(theta):
        return maximal_hole(model, base.translated(int(theta)), depth_cap)
    root = base.root
    geom = root.geom
    if base.level == 0:
        shifted = root.translated(float(theta) + base.temporal)
        return maximal_hole(model, shifted.address(), depth_cap)
    # non-integer translation of a deeper cell: anchor a lattice at the cell
    intervals = base.spatial_intervals()
    center = tuple((lo + hi) / 2 for lo, hi in intervals)
    rect = base.realize()
    lt = rect.l_t(geom.p)
    gamma = min(Fraction(float(base.gamma())), Fraction(1, 2))
    sub = Root(geom, center, rect.top_time + float(theta) * lt, base.l_x(), gamma)
    inner = maximal_hole(model, sub.address(), depth_cap)
    scale = base.measure_fraction()
    return HoleResult(inner.address, inner.measure * scale, inner.side,
                      inner.depth_cap_hit, inner.unknown_present)


def admissible_collection(model: ClosedSetModel, root_addr: DyadicAddress,
                          delta: Fraction, theta, depth_cap: int,
                          hole: Optional[HoleResult] = None) -> CollectionReport:
    """Maximal free rectangles with |P| >= delta * |M(R^theta)|.

    Because all rectangles on one level share a measure, the threshold is a
    pure level cutoff; the search never descends past it, which makes the
    reported coverage exact whenever the cutoff is within the cap.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if hole is None:
        hole = hole_of_translate(model, root_addr, theta, depth_cap)
    if hole.measure == 0:
        report = _maximal_free(model, root_addr, depth_cap)
        return CollectionReport(
            base=report.base, rectangles=report.rectangles,
            total_measure=report.total_measure,
            covered_fraction=report.covered_fraction,
            depth_cap_hit=True,  # a deeper hole could still set a threshold
            unknown_present=report.unknown_present or hole.unknown_present,
        )
    threshold = delta * hole.measure
    root = root_addr.root
    cutoff = root_addr.level
    while root.measure_fraction_at(cutoff + 1) >= threshold:
        cutoff += 1
        if cutoff - root_addr.level > depth_cap + 64:
            break
    effective = min(depth_cap, cutoff - root_addr.level)
    report = _maximal_free(model, root_addr, effective)
    return CollectionReport(
        base=report.base,
        rectangles=report.rectangles,
        total_measure=report.total_measure,
        covered_fraction=report.covered_fraction,
        depth_cap_hit=(cutoff - root_addr.level) > depth_cap or hole.depth_cap_hit,
        unknown_present=report.unknown_present or hole.unknown_present,
    )


def complementary_collection(model: ClosedSetModel, root_addr: DyadicAddress,
                             delta: Fraction, theta, depth_cap: int,
                             admissible: Optional[CollectionReport] = None
                             ) -> CollectionReport:
    """Maximal dyadic rectangles disjoint from the admissible union whose
    parent meets it."""
    if admissible is None:
        admissible = admissible_collection(model, root_addr, delta, theta, depth_cap)
    member_keys = {m.key() for m in admissible.rectangles}
    ancestors: set = set()
    for m in admissible.rectangles:
        for lvl in range(root_addr.level, m.level):
            ancestors.add(m.ancestor(lvl).key())
    out: list[DyadicAddress] = []
    if not member_keys or root_addr.key() not in ancestors:
        # admissible union empty, or the base itself is admissible: no complement
        return CollectionReport(root_addr, (), Fraction(0), Fraction(0),
                                admissible.depth_cap_hit, admissible.unknown_present)
    stack = [root_addr]
    while stack:
        addr = stack.pop()
        for child in addr.iter_children():
            key = child.key()
            if key in member_keys:
                continue
            if key in ancestors:
                stack.append(child)
            else:
                out.append(child)
    total = sum((m.measure_fraction() for m in out), Fraction(0))
    out.sort(key=lambda a: (a.level, a.temporal, a.spatial))
    return CollectionReport(
        base=root_addr,
        rectangles=tuple(out),
        total_measure=total,
        covered_fraction=total / root_addr.measure_fraction(),
        depth_cap_hit=admissible.depth_cap_hit,
        unknown_present=admissible.unknown_present,
    )


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def _root_descriptor(root: Root) -> dict:
    from .serialize import number_str
    return {
        "center": [number_str(c) for c in root.center],
        "top_time": number_str(root.top_time),
        "side": number_str(root.side),
        "gamma0": number_str(root.gamma0),
    }


def porosity_curve(model: ClosedSetModel, roots: Sequence[Root],
                   deltas: Sequence[Fraction], theta, depth_cap: int,
                   threads: int = 1) -> list[PorosityReport]:
    """Covered fractions per root for each delta; one report per delta.

    The per-root hole and free collection are computed once and shared by
    every delta; results are reduced in sample order so the reports do not
    depend on the worker count.
    """
    deltas = [Fraction(d) for d in deltas]
    if not deltas or any(not 0 < d < 1 for d in deltas):
        raise ValueError("deltas must lie in (0, 1)")

    def per_root(root: Root):
        base = root.address()
        hole = hole_of_translate(model, base, theta, depth_cap)
        per_delta = {}
        for d in sorted(set(deltas)):
            per_delta[d] = admissible_collection(model, base, d, theta, depth_cap,
                                                 hole=hole)
        return root, hole, per_delta

    computed = run_indexed(list(roots), per_root, threads)
    reports = []
    for d in deltas:
        samples = []
        cap_hit = False
        unknown = False
        for root, hole, per_delta in computed:
            rep = per_delta[d]
            cap_hit |= rep.depth_cap_hit
            unknown |= rep.unknown_present
            samples.append({
                "root": _root_descriptor(root),
                "covered": rep.covered_fraction,
                "hole": hole.measure,
                "depth_cap_hit": rep.depth_cap_hit,
            })
        values = [s["covered"] for s in samples]
        witness = min(range(len(values)), key=lambda i: (values[i], i))
        reports.append(PorosityReport(
            delta=d, theta=float(theta), depth_cap=depth_cap,
            samples=tuple(samples), empirical_c=values[witness],
            witness_index=witness, depth_cap_hit=cap_hit, unknown_present=unknown))
    return reports


def porosity_scan(model: ClosedSetModel, geom, config: SamplerConfig,
                  delta: Fraction, theta, depth_cap: int,
                  threads: int = 1) -> PorosityReport:
    roots = draw_roots(geom, config)
    return porosity_curve(model, roots, [Fraction(delta)], theta, depth_cap,
                          threads=threads)[0]


def hole_esssup_bracket(model: ClosedSetModel, addr: DyadicAddress,
                        tol: float = 1e-9, max_cells: int = 20000
                        ) -> tuple[Interval, bool]:
    """Bracket on the essential sup of dist_p(., E) over the rectangle.

    The distance function is continuous, so the essential sup equals the
    sup over the closure; exact for single-formula models, branch-and-bound
    otherwise with a flagged wide bracket at the cell cap.
    """
    rect = addr.realize()
    p = addr.root.geom.p
    return sup_distance_bracket(model, rect.box(p), p, tol=tol, max_cells=max_cells)
