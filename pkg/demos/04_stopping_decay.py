"""The stopping-time machinery on a two-scale point grid.

The layered fixture blocks one spatial column at the level-2 scale except
for a single free slab row, so rectangles buried under the blocked region
need two forward-parent steps before a translated ancestor exposes a hole
of threshold size.  That populates both S_1 and S_2, makes the forward-
parent nesting law non-vacuous, and produces a real decay ratio to compare
against lambda = 1 - 1/(2^(d n) ceil(2^(d p))) = 63/64.
"""

import json
from fractions import Fraction
from pathlib import Path

from parporo import Root, new_geometry
from parporo.chains import (decay_check, stopping_partition,
                            verify_disjoint_from_admissible, verify_nesting)
from parporo.geometry import default_parameters
from parporo.porosity import (admissible_collection, complementary_collection,
                              hole_of_translate)
from parporo.sets import set_from_json

fixture = Path(__file__).resolve().parent.parent / "fixtures" / "layered.json"
E, _ = set_from_json(json.loads(fixture.read_text()))

geom = new_geometry(1, 2.0)
params = default_parameters(geom)
root = Root(geom, (Fraction(0),), Fraction(0), Fraction(1), Fraction(0))
base = root.address()
cap, delta = 4, Fraction(1, 64)

adm = admissible_collection(E, base, delta, params.Phi, cap)
comp = complementary_collection(E, base, delta, params.Phi, cap, admissible=adm)
hole = hole_of_translate(E, base, params.Phi, cap)
lam = delta * hole.measure
print(f"hole of the Phi-translate: {hole.measure}; threshold Lambda = {lam}")
print(f"admissible rectangles: {len(adm.rectangles)}; "
      f"complementary bases: {len(comp.rectangles)}")

part = stopping_partition(E, base, comp.rectangles, lam, params, cap)
for k in sorted(part.groups):
    print(f"  S_{k}: {len(part.groups[k]):>3} rectangles, "
          f"union measure {part.union_measures[k]}")

nest_ok, _ = verify_nesting(part)
disj_ok, _ = verify_disjoint_from_admissible(part, adm)
decay = decay_check(part, geom)
print(f"forward parents of S_2 land in S_1: {nest_ok}")
print(f"no chain element meets the admissible union: {disj_ok}")
print(f"decay: ratios {dict((k, str(v)) for k, v in decay.ratios.items())} "
      f"against lambda = {decay.lam} -> {'ok' if decay.passed else 'violated'}")
print(f"tightest per-step rate observed: {decay.lambda_hat:.4f}")
