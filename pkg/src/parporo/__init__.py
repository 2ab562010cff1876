"""Parabolic dyadic lattices, weak-porosity scans, and distance-weight
verification at desk scale.

Modules:

* ``geometry``    -- exact parabolic dyadic lattice over a root rectangle
* ``sets``        -- closed-set models with certified distance oracles
* ``porosity``    -- maximal holes, admissible collections, coverage scans
* ``weights``     -- certified weight integration and ratio scans
* ``chains``      -- stopping times, decay checks, doubling chains
* ``improvement`` -- tower partitions, exponent fits, the harness
* ``cli``         -- the ``parporo`` command-line front end
"""

from .geometry import (DyadicAddress, Geometry, ParabolicRectangle, Root,
                       StoppingParams, check_parameters, default_parameters,
                       gamma_sequence, new_geometry, translate)
from .intervals import Interval
from .sets import (BoxUnion, Freeness, HalfSpaceTime, IFSFractal, IFSMap,
                   PointCloud, SpatialHyperplane, distance_to_set,
                   parabolic_distance, rectangle_free)

__all__ = [
    "DyadicAddress", "Geometry", "ParabolicRectangle", "Root", "StoppingParams",
    "check_parameters", "default_parameters", "gamma_sequence", "new_geometry",
    "translate", "Interval", "BoxUnion", "Freeness", "HalfSpaceTime",
    "IFSFractal", "IFSMap", "PointCloud", "SpatialHyperplane",
    "distance_to_set", "parabolic_distance", "rectangle_free",
]

__version__ = "0.1.0"
