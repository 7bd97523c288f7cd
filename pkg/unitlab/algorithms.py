"""Deterministic online algorithms for unit clustering and unit covering.

Clustering algorithms keep mutable point groups whose bounding boxes may
grow, as long as they stay within L-infinity diameter 1. Covering algorithms
place closed unit cubes that never move once placed. Both report every
assignment as ``(ClusterId, opened)``, and neither may ever move a point or
merge two clusters.
"""

import importlib
import itertools
import logging
import math
from collections import Counter
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Type

from attr import define

from .errors import DimensionMismatchError, ProtocolViolation, UnknownFamilyError
from .geometry import AnyPoint, Box, Point, as_point, bounding_box, box_contains, box_extend
from .rng import RngStream
from .types import OnlineAlgorithm

LOG = logging.getLogger(__name__)

_HALF = Fraction(1, 2)

CellKey = Tuple[int, ...]


@define(frozen=True, order=True)
class ClusterId:
    """Identity of a cluster: its creation index."""

    index: int

    def __str__(self) -> str:
        return str(self.index)


@define(eq=False)
class Cluster:
    id: ClusterId
    members: List[Point]
    bbox: Box

    @classmethod
    def open(cls, cid: ClusterId, p: Point) -> "Cluster":
        return cls(cid, [p], Box.around(p))

    def fits(self, p: AnyPoint) -> bool:
        """Whether ``p`` can join without the diameter exceeding 1."""
        return box_extend(self.bbox, p).max_extent() <= 1

    def add(self, p: Point) -> None:
        self.members.append(p)
        self.bbox = box_extend(self.bbox, p)


@define(frozen=True)
class CoverCube:
    id: ClusterId
    cube: Box


def floor_key(p: AnyPoint) -> CellKey:
    return tuple(math.floor(c) for c in p)


class OnlineBase:
    name = ""
    covering = False

    def __init__(self, d: int) -> None:
        if d < 1:
            raise ValueError(f"dimension must be positive, got {d}")
        self.d = d
        self._clusters: List[Cluster] = []

    @property
    def clusters(self) -> Sequence[Cluster]:
        return self._clusters

    @property
    def count(self) -> int:
        return len(self._clusters)

    def _point(self, point: AnyPoint) -> Point:
        p = as_point(point)
        if p.d != self.d:
            raise DimensionMismatchError(f"{self.name} runs in dimension {self.d}, got a {p.d}-dimensional point")
        return p

    def _open(self, p: Point) -> ClusterId:
        cid = ClusterId(len(self._clusters))
        self._clusters.append(Cluster.open(cid, p))
        LOG.debug("%s opened cluster %s for %s", self.name, cid, p)
        return cid

    def _join(self, cid: ClusterId, p: Point) -> None:
        self._clusters[cid.index].add(p)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} d={self.d} clusters={self.count}>"


class Grid(OnlineBase):
    """Algorithm Grid: one cluster per half-open cell ``prod [i_j, i_j + 1)``.

    The closed cells double as the placed cubes, so Grid also runs as a
    covering algorithm.
    """

    name = "grid"
    covering = True

    def __init__(self, d: int) -> None:
        super().__init__(d)
        self._cells: Dict[CellKey, ClusterId] = {}
        self._cubes: List[CoverCube] = []

    @property
    def cubes(self) -> Sequence[CoverCube]:
        return self._cubes

    def insert(self, point: AnyPoint) -> Tuple[ClusterId, bool]:
        p = self._point(point)
        key = floor_key(p)
        cid = self._cells.get(key)
        if cid is not None:
            self._join(cid, p)
            return cid, False
        cid = self._open(p)
        self._cells[key] = cid
        self._cubes.append(CoverCube(cid, Box.unit_cube(key)))
        return cid, True


class Greedy(OnlineBase):
    """Algorithm Greedy: join the oldest cluster that still fits, else open one.

    With ``tie_break`` set, a uniformly random fitting cluster is joined
    instead of the oldest.
    """

    name = "greedy"

    def __init__(self, d: int, tie_break: Optional[RngStream] = None) -> None:
        super().__init__(d)
        self._tie_break = tie_break
        # keyed by the cell of each cluster's first member, which never changes
        self._index: Dict[CellKey, List[ClusterId]] = {}

    def _nearby(self, p: Point) -> List[ClusterId]:
        base = floor_key(p)
        found: List[ClusterId] = []
        for key in itertools.product(*((b - 1, b, b + 1) for b in base)):
            found.extend(self._index.get(key, ()))
        found.sort()
        return found

    def insert(self, point: AnyPoint) -> Tuple[ClusterId, bool]:
        p = self._point(point)
        fitting = [cid for cid in self._nearby(p) if self._clusters[cid.index].fits(p)]
        if fitting:
            cid = fitting[0] if self._tie_break is None else self._tie_break.choice(fitting)
            self._join(cid, p)
            return cid, False
        cid = self._open(p)
        self._index.setdefault(floor_key(p), []).append(cid)
        return cid, True


class CoveringBase(OnlineBase):
    covering = True

    def __init__(self, d: int) -> None:
        super().__init__(d)
        self._cubes: List[CoverCube] = []
        self._cube_index: Dict[CellKey, List[ClusterId]] = {}

    @property
    def cubes(self) -> Sequence[CoverCube]:
        return self._cubes

    def oldest_covering(self, p: AnyPoint) -> Optional[ClusterId]:
        """The oldest placed cube containing ``p``, if any."""
        # a cube holds p only if floor(lo_j) is floor(p_j) - 1 or floor(p_j)
        best: Optional[ClusterId] = None
        for key in itertools.product(*((b - 1, b) for b in floor_key(p))):
            for cid in self._cube_index.get(key, ()):
                if (best is None or cid < best) and box_contains(self._cubes[cid.index].cube, p):
                    best = cid
        return best

    def _cube_for(self, p: Point) -> Box:
        raise NotImplementedError

    def insert(self, point: AnyPoint) -> Tuple[ClusterId, bool]:
        p = self._point(point)
        cid = self.oldest_covering(p)
        if cid is not None:
            self._join(cid, p)
            return cid, False
        cube = self._cube_for(p)
        cid = self._open(p)
        self._cubes.append(CoverCube(cid, cube))
        self._cube_index.setdefault(floor_key(cube.lo), []).append(cid)
        return cid, True


class Centered(CoveringBase):
    """Algorithm Centered: a new unit cube centered at each uncovered point."""

    name = "centered"

    def _cube_for(self, p: Point) -> Box:
        return Box(tuple(c - _HALF for c in p), tuple(c + _HALF for c in p))


class FirstFitCoverer(CoveringBase):
    """Reuse the oldest cube holding the point, else place its closed grid cell."""

    name = "firstfit"

    def _cube_for(self, p: Point) -> Box:
        return Box.unit_cube(floor_key(p))


def grid_insert(state: Grid, p: AnyPoint) -> Tuple[ClusterId, bool]:
    return state.insert(p)


def greedy_insert(state: Greedy, p: AnyPoint) -> Tuple[ClusterId, bool]:
    return state.insert(p)


def centered_insert(state: Centered, p: AnyPoint) -> Tuple[ClusterId, bool]:
    return state.insert(p)


class OnlineAudit:
    """Wraps an online algorithm and enforces the rules of the online model.

    After every insert the touched cluster must hold the point within
    diameter 1, ids must be dense, the cluster count must never drop, and
    placed cubes must never move. :meth:`verify` re-checks every assignment
    made so far.
    """

    def __init__(self, algorithm: OnlineAlgorithm) -> None:
        self.algorithm = algorithm
        self._assignments: List[Tuple[Point, ClusterId]] = []
        self._cubes: Dict[ClusterId, Box] = {}

    @property
    def name(self) -> str:
        return self.algorithm.name

    @property
    def d(self) -> int:
        return self.algorithm.d

    @property
    def covering(self) -> bool:
        return self.algorithm.covering

    @property
    def clusters(self) -> Sequence[Cluster]:
        return self.algorithm.clusters

    @property
    def count(self) -> int:
        return self.algorithm.count

    @property
    def cubes(self) -> Sequence[CoverCube]:
        return getattr(self.algorithm, "cubes")

    @property
    def assignments(self) -> Sequence[Tuple[Point, ClusterId]]:
        return self._assignments

    def _fail(self, message: str) -> None:
        LOG.debug("online rule broken by %s: %s", self.name, message)
        raise ProtocolViolation(f"{self.name}: {message}")

    def insert(self, point: AnyPoint) -> Tuple[ClusterId, bool]:
        p = as_point(point)
        before = self.algorithm.count
        cid, opened = self.algorithm.insert(p)
        after = self.algorithm.count
        if opened and (cid.index != before or after != before + 1):
            self._fail(f"opened cluster {cid} but count went {before} -> {after}")
        if not opened and (after != before or not 0 <= cid.index < before):
            self._fail(f"reused cluster {cid} but count went {before} -> {after}")
        cluster = self.algorithm.clusters[cid.index]
        if cluster.id != cid or not cluster.members or cluster.members[-1] != p:
            self._fail(f"point {p} is not the newest member of cluster {cid}")
        if not box_contains(cluster.bbox, p) or cluster.bbox.max_extent() > 1:
            self._fail(f"cluster {cid} has box {cluster.bbox} after adding {p}")
        if self.algorithm.covering:
            self._check_cube(cid, p)
        self._assignments.append((p, cid))
        return cid, opened

    def _check_cube(self, cid: ClusterId, p: Point) -> None:
        cubes = self.cubes
        if len(cubes) != self.algorithm.count:
            self._fail(f"{len(cubes)} cubes for {self.algorithm.count} clusters")
        cube = cubes[cid.index].cube
        placed = self._cubes.setdefault(cid, cube)
        if placed != cube:
            self._fail(f"cube {cid} moved from {placed} to {cube}")
        if not cube.is_unit() or not box_contains(cube, p):
            self._fail(f"cube {cid} = {cube} does not cover {p}")

    def verify(self) -> None:
        """Re-check every cluster and every past assignment."""
        members: Dict[ClusterId, Counter] = {}
        for cluster in self.algorithm.clusters:
            if cluster.bbox != bounding_box(cluster.members):
                self._fail(f"cluster {cluster.id} box is not the bounding box of its members")
            if cluster.bbox.max_extent() > 1:
                self._fail(f"cluster {cluster.id} has diameter {cluster.bbox.max_extent()}")
            members[cluster.id] = Counter(cluster.members)
        if self.algorithm.covering:
            for cover in self.cubes:
                if self._cubes.get(cover.id, cover.cube) != cover.cube:
                    self._fail(f"cube {cover.id} moved")
                for p in self.algorithm.clusters[cover.id.index].members:
                    if not box_contains(cover.cube, p):
                        self._fail(f"cube {cover.id} no longer covers {p}")
        expected: Dict[ClusterId, Counter] = {}
        for p, cid in self._assignments:
            expected.setdefault(cid, Counter())[p] += 1
        for cid, wanted in expected.items():
            have = members.get(cid, Counter())
            if any(have[p] < k for p, k in wanted.items()):
                self._fail(f"cluster {cid} lost a point assigned to it")


# name -> dotted import path, resolved lazily
ALGORITHMS: Mapping[str, str] = {
    "grid": "unitlab.algorithms.Grid",
    "greedy": "unitlab.algorithms.Greedy",
    "centered": "unitlab.algorithms.Centered",
    "firstfit": "unitlab.algorithms.FirstFitCoverer",
    "reweigh": "unitlab.reweigh.ReweighingCoverer",
    "reweigh-cluster": "unitlab.reweigh.ReweighingClusterer",
    "malicious": "unitlab.covering_game.MaliciousCoverer",
}


def algorithm_class(name: str) -> Type:
    try:
        path = ALGORITHMS[name]
    except KeyError:
        raise UnknownFamilyError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None
    module_name, var_name = path.rsplit(".", 1)
    return getattr(importlib.import_module(module_name), var_name)


def make_algorithm(name: str, d: int, rng: Optional[RngStream] = None) -> OnlineAlgorithm:
    """Build a fresh algorithm by name.

    Only randomized algorithms consume ``rng``; a missing stream defaults to
    seed 0.
    """
    cls = algorithm_class(name)
    if getattr(cls, "randomized", False):
        return cls(d, rng if rng is not None else RngStream(0))
    return cls(d)
