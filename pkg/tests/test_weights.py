import math
import random
from fractions import Fraction

import pytest

from parporo.geometry import ParabolicRectangle, Root, new_geometry, translate
from parporo.sampling import SamplerConfig
from parporo.sets import (BoxUnion, HalfSpaceTime, PointCloud, SpatialHyperplane,
                          single_point)
from oracles import halton_array
from parporo.weights import (WeightSpec, a1_ratio, a1_scan, annular_constant,
                             average_weight, essinf_weight, integrate_weight)


def unit_rect():
    return ParabolicRectangle(center=(0.0,), top_time=0.0, side=1.0)


SPEC = WeightSpec(beta=1 / 6, n=1, p=2.0)  # q = 1/2


def test_weight_spec_exponent():
    assert SPEC.q == pytest.approx(0.5)
    assert SPEC.integrable_near_null_sets
    assert not WeightSpec(beta=0.5, n=1, p=2.0).integrable_near_null_sets
    with pytest.raises(ValueError):
        WeightSpec(beta=-0.1, n=1, p=2.0)


def test_hyperplane_closed_form_integral(hyperplane):
    res = integrate_weight(hyperplane, unit_rect(), SPEC, tol=1e-7)
    assert res.converged and not res.diverged
    expected = 2.0 * math.sqrt(2.0)  # 2 * int_0^{1/2} x^{-1/2} dx
    assert res.value.width <= 1e-6
    assert res.value.lo <= expected <= res.value.hi
    avg, _ = average_weight(hyperplane, unit_rect(), SPEC, tol=1e-7)
    assert avg.mid == pytest.approx(expected, abs=1e-6)


def test_free_rect_bracket_monotonicity():
    # rectangle at distance D from a point: |R| (D+diam)^{-q} <= I <= |R| D^{-q}
    E = single_point(1, at=(4.0, 0.0))
    rect = unit_rect()
    res = integrate_weight(E, rect, SPEC, tol=1e-6)
    p = 2.0
    d_inf = 3.5  # nearest point of the closure: x = 1/2
    diam = rect.diam_p(p)
    measure = rect.measure(p)
    assert res.value.hi <= measure * d_inf ** -SPEC.q + 1e-9
    assert res.value.lo >= measure * (d_inf + diam) ** -SPEC.q - 1e-9


def test_essinf_hyperplane(hyperplane):
    upper = translate(unit_rect(), 2.0, 2.0)
    iv, ok = essinf_weight(hyperplane, upper, SPEC)
    assert ok
    assert iv.lo == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert iv.width <= 1e-12


def test_essinf_far_point():
    E = single_point(1, at=(10.0, 0.0))
    iv, ok = essinf_weight(E, unit_rect(), SPEC)
    assert ok
    # sup dist in [9.5, 10.5+] => essinf w within the matching bracket
    assert 10.0 ** -0.5 * 0.9 <= iv.lo <= iv.hi <= 9.0 ** -0.5


def test_a1_ratio_hyperplane_anchor(unit_root, hyperplane):
    out = a1_ratio(hyperplane, unit_root, 2.0, SPEC, tol=1e-7)
    assert not out.unbounded and out.converged
    assert out.ratio.lo <= 2.0 <= out.ratio.hi
    assert out.ratio.width <= 1e-6
    # time-independent weight: any positive translation gives the same ratio
    out5 = a1_ratio(hyperplane, unit_root, 5.0, SPEC, tol=1e-7)
    assert out5.ratio.mid == pytest.approx(2.0, abs=1e-6)


def test_a1_ratio_far_set_near_one(geom12):
    root = Root(geom12, (Fraction(0),), Fraction(0), Fraction(1), Fraction(0))
    E = single_point(1, at=(60.0, 0.0))
    out = a1_ratio(E, root, 2.0, SPEC, tol=1e-6)
    assert not out.unbounded
    assert out.ratio.lo <= 1.0 + 0.05
    assert 0.9 <= out.ratio.mid <= 1.1


def test_bracket_soundness_quasi_monte_carlo():
    # a million-point low-discrepancy estimate lands inside every bracket
    import numpy as np
    rng = random.Random(77)
    p = 2.0
    N = 10 ** 6
    u = halton_array(N, 2)
    v = halton_array(N, 3)
    for trial in range(100):
        npts = rng.randint(1, 4)
        pts = tuple((rng.uniform(-1.5, 1.5), rng.uniform(-2.0, 1.0))
                    for _ in range(npts))
        E = PointCloud(pts)
        q = rng.uniform(0.2, 0.9)
        spec = WeightSpec(beta=q / 3.0, n=1, p=p)
        rect = ParabolicRectangle(center=(rng.uniform(-1, 1),),
                                  top_time=rng.uniform(-1, 1),
                                  side=rng.choice([0.5, 1.0]))
        res = integrate_weight(E, rect, spec, tol=1e-2, max_cells=4000)
        xlo, xhi = rect.spatial_bounds()[0]
        tlo, thi = rect.t_lo(p), rect.t_hi(p)
        x = xlo + u * (xhi - xlo)
        t = tlo + v * (thi - tlo)
        d = np.full(N, np.inf)
        for zx, zt in pts:
            d = np.minimum(d, np.maximum(np.abs(x - zx), np.abs(t - zt) ** 0.5))
        w = np.where(d > 0, d ** -spec.q, 0.0)
        estimate = float(w.mean()) * rect.measure(p)
        assert res.value.lo - 1e-9 <= estimate <= res.value.hi + 1e-9, (
            trial, estimate, res.value)


def test_refinement_monotonicity(hyperplane):
    E = PointCloud(((0.2, -0.3), (-0.4, 0.1)))
    rect = unit_rect()
    spec = WeightSpec(beta=0.15, n=1, p=2.0)
    prev = None
    for tol in (1e-1, 5e-2, 2.5e-2, 1.25e-2):
        res = integrate_weight(E, rect, spec, tol=tol, max_cells=20000)
        if prev is not None:
            assert res.value.width <= prev + 1e-12
        prev = res.value.width


def test_annular_constant_value():
    assert annular_constant(1, 2.0, 1 / 6) == pytest.approx(10.2426, abs=1e-3)
    with pytest.raises(ValueError):
        annular_constant(1, 2.0, 0.5)


def test_annular_bound_on_free_rectangles():
    rng = random.Random(123)
    alpha = 1 / 6
    C = annular_constant(1, 2.0, alpha)
    spec = WeightSpec(beta=alpha, n=1, p=2.0)
    for _ in range(30):
        side = rng.choice([0.5, 1.0, 2.0])
        rect = ParabolicRectangle(center=(rng.uniform(-2, 2),),
                                  top_time=rng.uniform(-2, 2), side=side)
        kind = rng.random()
        if kind < 0.4:
            # E touching the lower-left corner region, rectangle stays free
            E = single_point(1, at=(rect.spatial_bounds()[0][0],
                                    rect.t_lo(2.0) - 1e-9))
        elif kind < 0.7:
            E = SpatialHyperplane(0, rect.spatial_bounds()[0][0])
        else:
            E = HalfSpaceTime(rect.t_lo(2.0), future=False)
        res = integrate_weight(E, rect, spec, tol=1e-3, max_cells=20000)
        assert math.isfinite(res.value.hi)
        assert res.value.hi <= C * rect.measure(2.0) ** (1 - alpha) * (1 + 1e-9)


def test_divergent_exponent_flags(unit_root, hyperplane):
    hot = WeightSpec(beta=0.5, n=1, p=2.0)  # q = 3/2 >= 1 across the plane
    res = integrate_weight(hyperplane, unit_rect(), hot, tol=1e-3)
    assert res.diverged
    assert math.isinf(res.value.hi)
    assert res.value.lo > 0


def test_positive_measure_overlap_diverges():
    E = HalfSpaceTime(-0.5, future=True)
    res = integrate_weight(E, unit_rect(), SPEC, tol=1e-3)
    assert res.diverged and math.isinf(res.value.hi)


def test_a1_scan_deterministic(geom12, hyperplane):
    config = SamplerConfig(seed=3, samples=6)
    rep1 = a1_scan(hyperplane, geom12, config, 2.0, SPEC, tol=1e-3)
    rep4 = a1_scan(hyperplane, geom12, config, 2.0, SPEC, tol=1e-3, threads=4)
    assert rep1.sup_ratio.lo == rep4.sup_ratio.lo
    assert rep1.sup_ratio.hi == rep4.sup_ratio.hi
    assert rep1.witness_index == rep4.witness_index
    assert math.isfinite(rep1.sup_ratio.hi)
    assert not rep1.any_unbounded


def test_a1_scan_flags_divergence(geom12, hyperplane):
    hot = WeightSpec(beta=0.5, n=1, p=2.0)
    rep = a1_scan(hyperplane, geom12, SamplerConfig(seed=5, samples=8), 2.0, hot,
                  tol=1e-2)
    assert rep.any_unbounded  # some sampled rectangle crosses the plane
