import json
from fractions import Fraction
from pathlib import Path

import pytest

from parporo.geometry import Geometry, Root, new_geometry
from parporo.sets import set_from_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str):
    model, _p = set_from_json(json.loads((FIXTURES / f"{name}.json").read_text()))
    return model


@pytest.fixture(scope="session")
def geom12() -> Geometry:
    """n=1, p=2, d=2: the workhorse geometry (2^dp = 16 exactly)."""
    return new_geometry(1, 2.0)


@pytest.fixture(scope="session")
def unit_root(geom12) -> Root:
    """Q(0,1) x [-1, 0), no truncation."""
    return Root(geom12, (Fraction(0),), Fraction(0), Fraction(1), Fraction(0))


@pytest.fixture(scope="session")
def hyperplane():
    return load_fixture("hyperplane")


@pytest.fixture(scope="session")
def origin_point():
    return load_fixture("point")


@pytest.fixture(scope="session")
def halfspace():
    return load_fixture("halfspace")


@pytest.fixture(scope="session")
def coarse_grid():
    return load_fixture("grid")


@pytest.fixture(scope="session")
def layered_grid():
    return load_fixture("layered")


@pytest.fixture(scope="session")
def cantor_set():
    return load_fixture("cantor")
