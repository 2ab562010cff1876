"""Exact construction and navigation of parabolic dyadic space-time lattices.

A lattice is anchored at a root rectangle ``Q(x, L) x [t - L^p, t - g0*L^p)``.
Each refinement step splits every spatial edge into ``2^d`` parts and the
temporal edge into ``k`` parts, where ``k`` alternates between
``floor(2^(d*p))`` and ``ceil(2^(d*p))`` so that the per-level truncation
parameter stays inside ``[0, 1/2]``.

All address arithmetic is exact: temporal positions are integer counts of
level slabs (slab width is ``l_t(root) / K_i`` with ``K_i`` the product of
the per-level division counts), spatial positions are integer cell indices,
and realized bounds are ``fractions.Fraction`` multiples of the root's side
and temporal length.  ``2^(d*p)`` itself is evaluated with mpmath at a
configurable precision; the division-count branch refuses to choose when
the truncation parameter is too close to the branch threshold to certify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import mpmath

RationalLike = Fraction | int

LOG2_9 = math.log2(9.0)


class AmbiguousBranchError(ValueError):
    """Truncation parameter indistinguishable from the division-count threshold."""


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# global parameters
# ---------------------------------------------------------------------------


class Geometry:
    """Global lattice parameters: dimension n, exponent p > 1, division rate d.

    The division rate must satisfy ``d*p >= log2(9)``; ``d = 4`` works for
    every ``p > 1``.  Derived constants ``k_floor <= 2^(d*p) <= k_ceil`` are
    computed once at ``precision_bits`` bits.
    """

    def __init__(self, n: int, p: float, d: Optional[int] = None,
                 precision_bits: int = 128):
        if n < 1 or int(n) != n:
            raise ValueError(f"spatial dimension must be a positive integer, got {n}")
        p = float(p)
        if not p > 1.0:
            raise ValueError(f"parabolic exponent must exceed 1, got {p}")
        if precision_bits < 16:
            raise ValueError("precision_bits too small for certified branching")
        if d is None:
            d = max(1, math.ceil(LOG2_9 / p))
            while d * p < LOG2_9:  # guard the float ceil at the boundary
                d += 1
        if d < 1 or int(d) != d:
            raise ValueError(f"division rate must be a positive integer, got {d}")
        if d * p < LOG2_9:
            raise ValueError(
                f"division rate too small: d*p = {d * p:.6g} < log2(9) = {LOG2_9:.6g}")

        self.n = int(n)
        self.p = p
        self.d = int(d)
        self.precision_bits = int(precision_bits)

        with mpmath.workprec(self.precision_bits):
            self._two_dp = mpmath.power(2, mpmath.mpf(self.d) * mpmath.mpf(self.p))
            self.k_floor = int(mpmath.floor(self._two_dp))
            self.k_ceil = int(mpmath.ceil(self._two_dp))
        # ceil(2^dp) <= 2*2^dp holds whenever 2^dp >= 1
        assert self.k_floor <= self.k_ceil <= 2 * self.k_floor

    @property
    def two_dp(self) -> mpmath.mpf:
        """``2^(d*p)`` at the working precision."""
        return self._two_dp

    @property
    def dp_is_integral(self) -> bool:
        return self.k_floor == self.k_ceil

    @property
    def spatial_children(self) -> int:
        return (1 << self.d) ** self.n

    def two_dp_fraction(self) -> Optional[Fraction]:
        """Exact value of ``2^(d*p)`` when it is an integer, else None."""
        return Fraction(self.k_floor) if self.dp_is_integral else None

    def division_count(self, gamma: "mpmath.mpf | Fraction") -> int:
        """Number of temporal subdivisions for a rectangle with truncation gamma.

        ``ceil`` below the threshold ``1 - (2^dp + 1)/2^(dp+1)``, ``floor``
        above; refuses when gamma cannot be certified on either side.
        """
        if self.dp_is_integral:
            return self.k_floor
        with mpmath.workprec(self.precision_bits):
            g = mpmath.mpf(gamma.numerator) / gamma.denominator \
                if isinstance(gamma, Fraction) else mpmath.mpf(gamma)
            threshold = 1 - (self._two_dp + 1) / (2 * self._two_dp)
            tol = mpmath.power(2, -(self.precision_bits // 2))
            if abs(g - threshold) < tol:
                raise AmbiguousBranchError(
                    f"truncation parameter {mpmath.nstr(g, 25)} within 2^-{self.precision_bits // 2} "
                    "of the division threshold; refusing to pick a branch")
            return self.k_ceil if g <= threshold else self.k_floor

    def __repr__(self) -> str:
        return f"Geometry(n={self.n}, p={self.p}, d={self.d})"


def new_geometry(n: int, p: float, d: Optional[int] = None,
                 precision_bits: int = 128) -> Geometry:
    return Geometry(n, p, d, precision_bits=precision_bits)


# ---------------------------------------------------------------------------
# stopping parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StoppingParams:
    """Forward time-lag and search-translation bounds ``(theta0, phi, Phi)``.

    Instances are validated against a geometry with ``check_parameters``
    before use; ``default_parameters`` returns the canonical choice
    ``(4, 2, k_ceil - 1)``.
    """

    theta0: int
    phi: int
    Phi: int

    def __post_init__(self):
        for name, v in (("theta0", self.theta0), ("phi", self.phi), ("Phi", self.Phi)):
            if int(v) != v or v < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {v}")

    def theta_range(self) -> range:
        """Integer search translations ``[phi - theta0, Phi - theta0]``."""
        return range(self.phi - self.theta0, self.Phi - self.theta0 + 1)


def _ceil_mpf(x: mpmath.mpf) -> int:
    return int(mpmath.ceil(x))


def check_parameters(theta0: int, phi: int, Phi: int, geom: Geometry) -> bool:
    """Evaluate the five admissibility inequalities for (theta0, phi, Phi)."""
    if min(theta0, phi, Phi) < 2:
        return False
    with mpmath.workprec(geom.precision_bits):
        two_dp = geom.two_dp
        c2 = _ceil_mpf(2 * mpmath.mpf(theta0) / (two_dp - 1))
        c4 = _ceil_mpf(4 * mpmath.mpf(theta0) / (two_dp - 1))
    conds = (
        phi <= Phi - theta0 - c2,
        phi <= theta0 <= Phi,
        Phi >= geom.k_ceil - 1,
        phi <= geom.k_floor - 1 - theta0 - c2,
        phi - theta0 <= -c4,
    )
    return all(conds)


def default_parameters(geom: Geometry) -> StoppingParams:
    params = StoppingParams(theta0=4, phi=2, Phi=geom.k_ceil - 1)
    if not check_parameters(params.theta0, params.phi, params.Phi, geom):
        raise ValueError(
            f"default stopping parameters fail the admissibility conditions for {geom}")
    return params


# ---------------------------------------------------------------------------
# continuous rectangles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParabolicRectangle:
    """Half-open space-time box ``Q(center, side) x [top - side^p, top - gamma*side^p)``.

    ``gamma`` only shapes the temporal extent; the body is half open on
    every upper face.
    """

    center: tuple[float, ...]
    top_time: float
    side: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("side must be positive")
        if not 0.0 <= self.gamma <= 0.5:
            raise ValueError(f"gamma must lie in [0, 1/2], got {self.gamma}")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def l_x(self) -> float:
        return self.side

    def l_t(self, p: float) -> float:
        return (1.0 - self.gamma) * self.side ** p

    def t_lo(self, p: float) -> float:
        return self.top_time - self.side ** p

    def t_hi(self, p: float) -> float:
        return self.top_time - self.gamma * self.side ** p

    def spatial_bounds(self) -> tuple[tuple[float, float], ...]:
        h = 0.5 * self.side
        return tuple((c - h, c + h) for c in self.center)

    def box(self, p: float) -> tuple[tuple[tuple[float, float], ...], tuple[float, float]]:
        return self.spatial_bounds(), (self.t_lo(p), self.t_hi(p))

    def measure(self, p: float) -> float:
        return self.side ** self.n * self.l_t(p)

    def center_point(self, p: float) -> tuple[float, ...]:
        return self.center + (0.5 * (self.t_lo(p) + self.t_hi(p)),)

    def contains(self, point: Sequence[float], p: float) -> bool:
        *x, t = point
        if len(x) != self.n:
            raise ValueError("point dimension mismatch")
        for (lo, hi), xi in zip(self.spatial_bounds(), x):
            if not lo <= xi < hi:
                return False
        return self.t_lo(p) <= t < self.t_hi(p)

    def parabolic_radius(self, p: float) -> float:
        """Max parabolic distance from the center to a point of the closure."""
        return max(0.5 * self.side, (0.5 * self.l_t(p)) ** (1.0 / p))

    def diam_p(self, p: float) -> float:
        return max(self.side, self.l_t(p) ** (1.0 / p))


def translate(rect: ParabolicRectangle, theta: float, p: float) -> ParabolicRectangle:
    """Shift a rectangle forward in time by ``theta`` temporal side lengths."""
    return ParabolicRectangle(
        center=rect.center,
        top_time=rect.top_time + theta * rect.l_t(p),
        side=rect.side,
        gamma=rect.gamma,
    )


def plus_theta(gamma: float) -> float:
    """Translation that realizes the upper rectangle of the A1 pair: (1+g)/(1-g)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    return (1.0 + gamma) / (1.0 - gamma)


# ---------------------------------------------------------------------------
# lattice roots
# ---------------------------------------------------------------------------


class Root:
    """Root rectangle of a lattice plus its truncation/division recursion.

    ``center`` and ``side`` are exact rationals so that realized spatial
    bounds are exact.  ``top_time`` may be a rational or a float (absolute
    times are only consumed by distance oracles); temporal bookkeeping
    within the time strip is exact regardless.
    """

    def __init__(self, geom: Geometry, center: Sequence[RationalLike],
                 top_time, side: RationalLike, gamma0: RationalLike = 0):
        center = tuple(_to_fraction(c) for c in center)
        if len(center) != geom.n:
            raise ValueError(f"center must have {geom.n} coordinates")
        side = _to_fraction(side)
        if side <= 0:
            raise ValueError("side must be positive")
        gamma0 = _to_fraction(gamma0)
        if not 0 <= gamma0 <= Fraction(1, 2):
            raise ValueError(f"gamma0 must lie in [0, 1/2], got {gamma0}")

        self.geom = geom
        self.center = center
        self.top_time = top_time if isinstance(top_time, Fraction) else float(top_time)
        self.side = side
        self.gamma0 = gamma0

        # per-level cache: gamma_i (mpf), k_i, cumulative slab count K_i
        self._gammas: list = [self._gamma0_mpf()]
        self._ks: list[int] = []
        self._K: list[int] = [1]

    def _gamma0_mpf(self):
        with mpmath.workprec(self.geom.precision_bits):
            return mpmath.mpf(self.gamma0.numerator) / self.gamma0.denominator

    # -- recursion ----------------------------------------------------------

    def ensure_depth(self, depth: int) -> None:
        geom = self.geom
        with mpmath.workprec(geom.precision_bits):
            while len(self._ks) < depth:
                gamma = self._gammas[-1]
                k = geom.division_count(gamma)
                nxt = 1 - (1 - gamma) * geom.two_dp / k
                if nxt < 0 or nxt > mpmath.mpf(1) / 2:
                    # Proposition-level invariant; numerically unreachable at
                    # the working precision unless inputs were corrupted.
                    raise ArithmeticError(
                        f"truncation parameter left [0, 1/2] at level {len(self._ks) + 1}")
                self._ks.append(k)
                self._K.append(self._K[-1] * k)
                self._gammas.append(nxt)

    def gamma_at(self, level: int) -> mpmath.mpf:
        self.ensure_depth(level)
        return self._gammas[level]

    def k_at(self, level: int) -> int:
        """Temporal division count applied to a level-``level`` rectangle."""
        self.ensure_depth(level + 1)
        return self._ks[level]

    def slab_count(self, level: int) -> int:
        """K_level: number of level slabs per root temporal length."""
        self.ensure_depth(level)
        return self._K[level]

    # -- root body ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.geom.n

    def l_t_fraction_of(self, level: int) -> Fraction:
        """l_t at ``level`` in units of l_t(root), exact."""
        return Fraction(1, self.slab_count(level))

    def l_x_at(self, level: int) -> Fraction:
        return self.side / (1 << (self.geom.d * level))

    def measure_fraction_at(self, level: int) -> Fraction:
        """|P| / |root| for any level-``level`` rectangle, exact."""
        return Fraction(1, (1 << (self.geom.d * self.geom.n * level)) * self.slab_count(level))

    def top_time_float(self) -> float:
        return float(self.top_time)

    def l_t_root_float(self) -> float:
        return float(1 - self.gamma0) * float(self.side) ** self.geom.p

    def t_lo_float(self) -> float:
        return self.top_time_float() - float(self.side) ** self.geom.p

    def rectangle(self) -> ParabolicRectangle:
        return ParabolicRectangle(
            center=tuple(float(c) for c in self.center),
            top_time=self.top_time_float(),
            side=float(self.side),
            gamma=float(self.gamma0),
        )

    def address(self, level: int = 0, spatial: Optional[tuple[int, ...]] = None,
                temporal: int = 0) -> "DyadicAddress":
        if spatial is None:
            spatial = (0,) * self.geom.n
        return DyadicAddress(self, level, tuple(spatial), temporal)

    def translated(self, theta) -> "Root":
        """Fresh lattice anchored at the root shifted by ``theta * l_t(root)``.

        Used for non-integer translations; integer translations stay inside
        this root's extended lattice via ``DyadicAddress.translated``.
        """
        if isinstance(theta, (int, Fraction)) and isinstance(self.top_time, Fraction) \
                and float(self.geom.p).is_integer():
            lt = (1 - self.gamma0) * self.side ** int(self.geom.p)
            return Root(self.geom, self.center, self.top_time + Fraction(theta) * lt,
                        self.side, self.gamma0)
        return Root(self.geom, self.center,
                    self.top_time_float() + float(theta) * self.l_t_root_float(),
                    self.side, self.gamma0)

    def __repr__(self) -> str:
        return (f"Root(n={self.geom.n}, p={self.geom.p}, d={self.geom.d}, "
                f"center={tuple(map(str, self.center))}, top={self.top_time}, "
                f"side={self.side}, gamma0={self.gamma0})")


# ---------------------------------------------------------------------------
# dyadic addresses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicAddress:
    """Exact handle for a rectangle in the extended lattice of a root.

    ``spatial[j]`` indexes the level cell along axis j inside the root cube
    (so it lies in ``[0, 2^(d*level))``); ``temporal`` counts level slabs
    from the root's lower face and may be any integer (the lattice extends
    over the whole time strip).
    """

    root: Root
    level: int
    spatial: tuple[int, ...]
    temporal: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if len(self.spatial) != self.root.geom.n:
            raise ValueError("spatial index dimension mismatch")
        cells = 1 << (self.root.geom.d * self.level)
        for s in self.spatial:
            if not 0 <= s < cells:
                raise ValueError(
                    f"spatial index {s} outside [0, {cells}) at level {self.level}; "
                    "the extended lattice is temporal-only")

    # -- identity ------------------------------------------------------------

    def key(self) -> tuple[int, tuple[int, ...], int]:
        return (self.level, self.spatial, self.temporal)

    # -- navigation -----------------------------------------------------------

    def children(self) -> list["DyadicAddress"]:
        """All level+1 cells partitioning this one, spatial-major then temporal."""
        geom = self.root.geom
        k = self.root.k_at(self.level)
        split = 1 << geom.d
        bases = tuple(s * split for s in self.spatial)
        t_base = self.temporal * k
        out = []
        for combo in _spatial_offsets(geom.n, split):
            spatial = tuple(b + o for b, o in zip(bases, combo))
            for j in range(k):
                out.append(DyadicAddress(self.root, self.level + 1, spatial, t_base + j))
        return out

    def iter_children(self) -> Iterator["DyadicAddress"]:
        geom = self.root.geom
        k = self.root.k_at(self.level)
        split = 1 << geom.d
        bases = tuple(s * split for s in self.spatial)
        t_base = self.temporal * k
        for combo in _spatial_offsets(geom.n, split):
            spatial = tuple(b + o for b, o in zip(bases, combo))
            for j in range(k):
                yield DyadicAddress(self.root, self.level + 1, spatial, t_base + j)

    def parent(self) -> "DyadicAddress":
        if self.level == 0:
            raise ValueError("level-0 rectangle has no parent")
        d = self.root.geom.d
        k = self.root.k_at(self.level - 1)
        return DyadicAddress(
            self.root, self.level - 1,
            tuple(s >> d for s in self.spatial),
            self.temporal // k,  # floor division: valid across the whole strip
        )

    def forward_parent(self, params: StoppingParams) -> "DyadicAddress":
        """Dyadic parent translated ``theta0`` parent slabs forward in time."""
        up = self.parent()
        return DyadicAddress(up.root, up.level, up.spatial, up.temporal + params.theta0)

    def forward_ancestor(self, steps: int, params: StoppingParams) -> "DyadicAddress":
        addr = self
        for _ in range(steps):
            addr = addr.forward_parent(params)
        return addr

    def ancestor(self, level: int) -> "DyadicAddress":
        if level > self.level:
            raise ValueError("ancestor level exceeds address level")
        if level == self.level:
            return self
        d = self.root.geom.d
        shift = d * (self.level - level)
        ratio = self.root.slab_count(self.level) // self.root.slab_count(level)
        return DyadicAddress(
            self.root, level,
            tuple(s >> shift for s in self.spatial),
            self.temporal // ratio,
        )

    def translated(self, theta: int) -> "DyadicAddress":
        """Integer time translation by ``theta`` OWN temporal side lengths."""
        if int(theta) != theta:
            raise ValueError("address translation requires an integer theta")
        return DyadicAddress(self.root, self.level, self.spatial, self.temporal + int(theta))

    # -- relations -------------------------------------------------------------

    def contains_address(self, other: "DyadicAddress") -> bool:
        if other.level < self.level:
            return False
        return other.ancestor(self.level).key() == self.key()

    def intersects(self, other: "DyadicAddress") -> bool:
        """Exact body intersection test; lattice bodies are nested or disjoint."""
        if self.level <= other.level:
            return other.ancestor(self.level).key() == self.key()
        return self.ancestor(other.level).key() == other.key()

    # -- exact realization -------------------------------------------------------

    def measure_fraction(self) -> Fraction:
        """|P| in units of |root|, exact."""
        return self.root.measure_fraction_at(self.level)

    def l_x(self) -> Fraction:
        return self.root.l_x_at(self.level)

    def temporal_offsets(self) -> tuple[Fraction, Fraction]:
        """Exact [low, high) face offsets from the root lower face, in l_t(root) units."""
        K = self.root.slab_count(self.level)
        return Fraction(self.temporal, K), Fraction(self.temporal + 1, K)

    def lower_face_offset(self) -> Fraction:
        K = self.root.slab_count(self.level)
        return Fraction(self.temporal, K)

    def spatial_intervals(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Exact half-open spatial intervals in absolute coordinates."""
        w = self.root.l_x_at(self.level)
        out = []
        for c, s in zip(self.root.center, self.spatial):
            origin = c - self.root.side / 2
            out.append((origin + s * w, origin + (s + 1) * w))
        return tuple(out)

    def realize(self) -> ParabolicRectangle:
        """Float rectangle for distance/measure queries."""
        root = self.root
        geom = root.geom
        w = float(root.l_x_at(self.level))
        centers = []
        for c, s in zip(root.center, self.spatial):
            origin = float(c - root.side / 2)
            centers.append(origin + (s + 0.5) * w)
        lo, _hi = self.temporal_offsets()
        t_lo = root.t_lo_float() + float(lo) * root.l_t_root_float()
        gamma = float(self.gamma())
        return ParabolicRectangle(
            center=tuple(centers),
            top_time=t_lo + w ** geom.p,
            side=w,
            gamma=min(max(gamma, 0.0), 0.5),
        )

    def gamma(self) -> mpmath.mpf:
        return self.root.gamma_at(self.level)

    def __repr__(self) -> str:
        return f"Addr(level={self.level}, spatial={self.spatial}, temporal={self.temporal})"


def _spatial_offsets(n: int, split: int) -> Iterator[tuple[int, ...]]:
    if n == 1:
        for i in range(split):
            yield (i,)
        return
    if n == 2:
        for i in range(split):
            for j in range(split):
                yield (i, j)
        return
    import itertools
    yield from itertools.product(range(split), repeat=n)


# ---------------------------------------------------------------------------
# op-style wrappers and dumps
# ---------------------------------------------------------------------------


def gamma_sequence(geom: Geometry, gamma0, depth: int) -> list[tuple[float, int]]:
    """Truncation recursion: entry ``i`` is ``(gamma_{i+1}, k_i)``, the new
    truncation parameter and the division count that produced it."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    root = Root(geom, (Fraction(0),) * geom.n, Fraction(0), Fraction(1), gamma0)
    root.ensure_depth(depth)
    return [(float(root.gamma_at(i + 1)), root.k_at(i)) for i in range(depth)]


def children(addr: DyadicAddress) -> list[DyadicAddress]:
    return addr.children()


def parent(addr: DyadicAddress) -> DyadicAddress:
    return addr.parent()


def forward_parent(addr: DyadicAddress, params: StoppingParams) -> DyadicAddress:
    return addr.forward_parent(params)


def realize(addr: DyadicAddress) -> ParabolicRectangle:
    return addr.realize()


def chain_gap_bound(geom: Geometry, theta0: int) -> mpmath.mpf:
    """Strict upper bound ``2*theta0*2^dp/(2^dp - 1)`` on lower-face chain gaps,
    in units of the ancestor's temporal length."""
    with mpmath.workprec(geom.precision_bits):
        return 2 * mpmath.mpf(theta0) * geom.two_dp / (geom.two_dp - 1)


def lattice_dump(root: Root, depth: int, temporal_window: Optional[range] = None) -> list[dict]:
    """JSON-ready listing of every address down to ``depth``.

    Spatial bounds and slab offsets are exact fraction strings; absolute
    times are decimal strings (exact only when the root's time data is).
    """
    from .serialize import fraction_str, number_str

    rows = []
    stack: list[DyadicAddress] = [root.address()]
    if temporal_window is not None:
        base = [DyadicAddress(root, 0, (0,) * root.geom.n, t) for t in temporal_window]
        stack = base
    while stack:
        addr = stack.pop()
        lo, hi = addr.temporal_offsets()
        rect = addr.realize()
        rows.append({
            "level": addr.level,
            "spatial": list(addr.spatial),
            "temporal": addr.temporal,
            "l_x": fraction_str(addr.l_x()),
            "l_t": fraction_str(addr.root.l_t_fraction_of(addr.level)) + "*l_t(root)",
            "t_lo": number_str(rect.t_lo(root.geom.p)),
            "t_hi": number_str(rect.t_hi(root.geom.p)),
        })
        if addr.level < depth:
            stack.extend(reversed(addr.children()))
    rows.sort(key=lambda r: (r["level"], r["temporal"], tuple(r["spatial"])))
    return rows
