"""
Online unit clustering and unit covering under the L-infinity norm.

The lab runs online algorithms against hard instances and adaptive
adversaries and compares them with the exact offline optimum:

from unitlab import Greedy, exact_opt, gen_S1
points = gen_S1(2, 6)
greedy = Greedy(2)
for p in points:
    greedy.insert(p)
ratio = greedy.count / exact_opt(points).size

Every algorithm implements the OnlineAlgorithm protocol: ``insert`` returns
the id of the cluster that took the point and whether it had to be opened.
Wrap an algorithm in OnlineAudit to have the online rules checked after
every insert.

The adversaries live in clustering_game and covering_game, and the harness
services behind the ``unitlab`` command live in lab.
"""

__version__ = "0.3.1"

from .algorithms import (
    ALGORITHMS,
    Centered,
    Cluster,
    ClusterId,
    CoverCube,
    FirstFitCoverer,
    Greedy,
    Grid,
    OnlineAudit,
    make_algorithm,
)
from .errors import LabError
from .geometry import Box, LatticePoint, Point
from .instances import barycentric_instance, diagonal_pairs_instance, gen_S1, generate
from .oracle import exact_opt
from .reweigh import ReweighingClusterer, ReweighingCoverer
from .rng import RngStream

__all__ = [
    "ALGORITHMS",
    "Box",
    "Centered",
    "Cluster",
    "ClusterId",
    "CoverCube",
    "FirstFitCoverer",
    "Greedy",
    "Grid",
    "LabError",
    "LatticePoint",
    "OnlineAudit",
    "Point",
    "ReweighingClusterer",
    "ReweighingCoverer",
    "RngStream",
    "barycentric_instance",
    "diagonal_pairs_instance",
    "exact_opt",
    "gen_S1",
    "generate",
    "make_algorithm",
]
