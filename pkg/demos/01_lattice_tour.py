"""A walking tour of the parabolic dyadic lattice.

Builds the canonical unit root Q(0,1) x [-1, 0), subdivides it, and shows
how the truncation parameter, the temporal division counts, and the exact
slab bookkeeping fit together -- first for p = 2 (where 2^(d*p) is an
integer and everything is rational), then for p = 1.1 (where the division
counts alternate between floor and ceiling).
"""

from fractions import Fraction

from parporo import Root, gamma_sequence, new_geometry
from parporo.geometry import DyadicAddress, StoppingParams

# --- the integer case: p = 2, d = 2, so temporal edges split into 16 -------

geom = new_geometry(n=1, p=2.0)
print(f"geometry: {geom}, divisions per level: spatial 2^{geom.d}, "
      f"temporal in [{geom.k_floor}, {geom.k_ceil}]")

root = Root(geom, center=(Fraction(0),), top_time=Fraction(0),
            side=Fraction(1), gamma0=Fraction(0))
addr = root.address()
kids = addr.children()
print(f"first layer: {len(kids)} children "
      f"(4 spatial columns x 16 temporal slabs)")

child = kids[17]
rect = child.realize()
print(f"child #17: spatial index {child.spatial}, slab {child.temporal}")
print(f"  l_x = {child.l_x()}  (exact fraction of the root side)")
print(f"  slab = [{child.temporal_offsets()[0]}, {child.temporal_offsets()[1]})"
      f" in units of l_t(root)")
print(f"  realized time span = [{rect.t_lo(2.0):.6f}, {rect.t_hi(2.0):.6f})")
print(f"  measure = {child.measure_fraction()} of |root|")

# parents invert children exactly, and the forward parent shifts in time
params = StoppingParams(theta0=4, phi=2, Phi=15)
fp = child.forward_parent(params)
print(f"forward parent: level {fp.level}, slab {fp.temporal} "
      f"(the dyadic parent pushed {params.theta0} parent slabs up)")

# the extended lattice covers the whole time strip with integer slabs
below = DyadicAddress(root, 1, (0,), -5)
print(f"slab -5 lives in the root translate {below.parent().temporal} "
      "(floor division keeps the strip aligned)")

# --- the fractional case: p = 1.1, d = 4 ------------------------------------

geom2 = new_geometry(n=1, p=1.1, d=4)
print(f"\nfractional case: 2^(d*p) = 2^4.4 ~ 21.11, so k alternates "
      f"between {geom2.k_floor} and {geom2.k_ceil}")
for i, (gamma, k) in enumerate(gamma_sequence(geom2, 0, 6)):
    print(f"  level {i + 1}: k_{i} = {k}, truncation gamma_{i + 1} = {gamma:.6f}")
print("every truncation parameter stays inside [0, 1/2], as it must.")
