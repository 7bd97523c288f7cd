"""Offline optima for unit covering and unit clustering under L-infinity.

Offline the two problems coincide: a set has diameter at most 1 exactly when
it fits in a closed unit cube. :func:`exact_opt` therefore solves a set cover
over canonical cubes, i.e. cubes whose lower corner takes, in every
dimension, the coordinate of some input point.
"""

import bisect
import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from attr import define

from .errors import DimensionMismatchError, OracleLimitError, UnknownFamilyError
from .geometry import AnyPoint, Box, Point, box_contains, common_denominator

LOG = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 64
DEFAULT_MAX_CANDIDATES = 50000

Scaled = Tuple[int, ...]


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


@define(frozen=True)
class CoverSolution:
    """Closed unit cubes plus, per input point, the index of a cube covering it."""

    cubes: Tuple[Box, ...]
    assignment: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.cubes)

    def is_valid(self, points: Sequence[AnyPoint]) -> bool:
        if len(points) != len(self.assignment):
            return False
        if not all(cube.is_unit() for cube in self.cubes):
            return False
        return all(box_contains(self.cubes[k], p) for p, k in zip(points, self.assignment))


@define(frozen=True)
class CanonicalCubeSet:
    """Undominated canonical cubes over the distinct input points.

    Coordinates are scaled by ``scale`` to integers; bit ``i`` of
    ``masks[k]`` says whether cube ``k`` covers ``points[i]``.
    """

    scale: int
    points: Tuple[Scaled, ...]
    corners: Tuple[Scaled, ...]
    masks: Tuple[int, ...]

    @property
    def candidates(self) -> List[Point]:
        return [self.corner_point(k) for k in range(len(self.corners))]

    def corner_point(self, k: int) -> Point:
        return Point(Fraction(c, self.scale) for c in self.corners[k])

    def cube(self, k: int) -> Box:
        return Box.unit_cube(self.corner_point(k))


def _dimension(points: Sequence[AnyPoint]) -> int:
    d = points[0].d
    for p in points:
        if p.d != d:
            raise DimensionMismatchError(f"mixed dimensions {d} and {p.d}")
    return d


def _scaled(p: AnyPoint, scale: int) -> Scaled:
    return tuple(int(Fraction(c) * scale) for c in p)


def build_candidates(
    points: Sequence[AnyPoint],
    max_points: int = DEFAULT_MAX_POINTS,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> CanonicalCubeSet:
    """Canonical candidate cubes with duplicate and dominated coverage removed.

    Raises:
        OracleLimitError: too many distinct points or candidate cubes.
    """
    if not points:
        return CanonicalCubeSet(1, (), (), ())
    d = _dimension(points)
    scale = common_denominator(points)
    distinct = sorted({_scaled(p, scale) for p in points})
    if len(distinct) > max_points:
        raise OracleLimitError(f"{len(distinct)} distinct points exceed the oracle limit of {max_points}")

    axes = [sorted({q[j] for q in distinct}) for j in range(d)]
    corners = set()
    for q in distinct:
        per_dim = []
        for j, values in enumerate(axes):
            lo = bisect.bisect_left(values, q[j] - scale)
            hi = bisect.bisect_right(values, q[j])
            per_dim.append(values[lo:hi])
        corners.update(itertools.product(*per_dim))
        if len(corners) > max_candidates:
            raise OracleLimitError(f"more than {max_candidates} candidate cubes")

    by_mask: Dict[int, Scaled] = {}
    for corner in sorted(corners):
        mask = 0
        for i, q in enumerate(distinct):
            if all(c <= x <= c + scale for c, x in zip(corner, q)):
                mask |= 1 << i
        by_mask.setdefault(mask, corner)

    kept: List[Tuple[int, Scaled]] = []
    for mask, corner in sorted(by_mask.items(), key=lambda item: (-_popcount(item[0]), item[1])):
        if not any(mask & other == mask for other, _ in kept):
            kept.append((mask, corner))
    LOG.debug("%s points, %s canonical cubes, %s undominated", len(distinct), len(corners), len(kept))
    return CanonicalCubeSet(
        scale=scale,
        points=tuple(distinct),
        corners=tuple(corner for _, corner in kept),
        masks=tuple(mask for mask, _ in kept),
    )


class _CoverSearch:
    """Branch-and-bound minimum set cover over a canonical cube set."""

    def __init__(self, cset: CanonicalCubeSet) -> None:
        self.cset = cset
        n = len(cset.points)
        self.full = (1 << n) - 1
        self.covers = [[k for k, mask in enumerate(cset.masks) if mask >> i & 1] for i in range(n)]
        self.conflicts = [0] * n
        for i, p in enumerate(cset.points):
            for k, q in enumerate(cset.points):
                if max(abs(a - b) for a, b in zip(p, q)) <= cset.scale:
                    self.conflicts[i] |= 1 << k
        self.best: List[int] = self._greedy_cover()
        self.nodes = 0

    def _greedy_cover(self) -> List[int]:
        masks = self.cset.masks
        uncovered, chosen = self.full, []
        while uncovered:
            k = max(range(len(masks)), key=lambda k: (_popcount(masks[k] & uncovered), -k))
            chosen.append(k)
            uncovered &= ~masks[k]
        return chosen

    def lower_bound(self, uncovered: int) -> int:
        """Size of a greedy set of uncovered points pairwise more than 1 apart."""
        count, blocked, rest = 0, 0, uncovered
        while rest:
            low = rest & -rest
            rest ^= low
            if not blocked & low:
                count += 1
                blocked |= self.conflicts[low.bit_length() - 1]
        return count

    def _branch_point(self, uncovered: int) -> int:
        best_i, best_len, rest = -1, math.inf, uncovered
        while rest:
            low = rest & -rest
            rest ^= low
            i = low.bit_length() - 1
            if len(self.covers[i]) < best_len:
                best_i, best_len = i, len(self.covers[i])
        return best_i

    def search(self, uncovered: int, chosen: List[int]) -> None:
        self.nodes += 1
        if not uncovered:
            if len(chosen) < len(self.best):
                self.best = list(chosen)
            return
        if len(chosen) + self.lower_bound(uncovered) >= len(self.best):
            return
        masks, corners = self.cset.masks, self.cset.corners
        i = self._branch_point(uncovered)
        options = sorted(self.covers[i], key=lambda k: (-_popcount(masks[k] & uncovered), corners[k]))
        for k in options:
            chosen.append(k)
            self.search(uncovered & ~masks[k], chosen)
            chosen.pop()

    def run(self) -> List[int]:
        self.search(self.full, [])
        LOG.debug("cover search visited %s nodes, optimum %s", self.nodes, len(self.best))
        return self.best


def exact_opt(
    points: Sequence[AnyPoint],
    max_points: int = DEFAULT_MAX_POINTS,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> CoverSolution:
    """A minimum-cardinality set of closed unit cubes covering ``points``.

    Raises:
        OracleLimitError: the instance exceeds ``max_points`` distinct points
            or ``max_candidates`` canonical cubes. The oracle never falls back
            to an approximation.
    """
    cset = build_candidates(points, max_points, max_candidates)
    if not cset.points:
        return CoverSolution((), ())
    chosen = sorted(_CoverSearch(cset).run(), key=lambda k: cset.corners[k])
    cubes = tuple(cset.cube(k) for k in chosen)
    assignment = []
    for p in points:
        q = _scaled(p, cset.scale)
        assignment.append(
            next(
                pos
                for pos, k in enumerate(chosen)
                if all(c <= x <= c + cset.scale for c, x in zip(cset.corners[k], q))
            )
        )
    return CoverSolution(cubes, tuple(assignment))


def _odd_corner(y: Fraction) -> Optional[int]:
    """Lower end of the odd-cornered unit interval holding ``y``, if any."""
    if y.denominator == 1:
        value = y.numerator
        return value if value % 2 else value - 1
    low = math.floor(y)
    return low if low % 2 else None


def grid_shift_solution(points: Sequence[AnyPoint], tau: Sequence[int]) -> Optional[CoverSolution]:
    """Cluster ``points`` by the odd-cornered unit cubes translated by ``tau``.

    Returns None when some point lies in no translated cube.
    """
    shift = tuple(int(t) for t in tau)
    # per axis: coordinate value -> lower corner of its shifted interval
    seen: List[Dict[Union[int, Fraction], int]] = [{} for _ in shift]
    corners: List[Scaled] = []
    for p in points:
        if p.d != len(shift):
            raise DimensionMismatchError(f"shift of dimension {len(shift)} for a {p.d}-dimensional point")
        corner = []
        for axis, c, t in zip(seen, p, shift):
            a = axis.get(c)
            if a is None:
                low = _odd_corner(Fraction(c) - t)
                if low is None:
                    return None
                a = axis[c] = low + t
            corner.append(a)
        corners.append(tuple(corner))
    distinct = sorted(set(corners))
    index = {corner: k for k, corner in enumerate(distinct)}
    return CoverSolution(
        tuple(Box.unit_cube(corner) for corner in distinct),
        tuple(index[corner] for corner in corners),
    )


def opt_upper_via_shifts(points: Sequence[AnyPoint]) -> Union[int, float]:
    """Best size over all ``2**d`` shifted odd-corner solutions; inf if none covers."""
    if not points:
        return 0
    d = _dimension(points)
    best: Union[int, float] = math.inf
    for tau in itertools.product((0, 1), repeat=d):
        solution = grid_shift_solution(points, tau)
        if solution is not None:
            best = min(best, solution.size)
    return best


def structured_opt(kind: str, d: int, param: int = 0) -> int:
    """Closed-form optimum of a generated instance family.

    ``param`` is K for ``s1`` and ``barycentric`` and n for ``diagonal``.
    """
    if kind == "s1":
        if param < 2 or param % 2:
            raise ValueError(f"K must be even and at least 2, got {param}")
        return (param // 2) ** d
    if kind == "barycentric":
        if param < 4 or param % 4:
            raise ValueError(f"K must be a positive multiple of 4, got {param}")
        return (param // 4 + 1) ** d + (param // 4) ** d
    if kind == "diagonal":
        # the single pair (1,0), (0,1) fits in [0,1]^2
        return 1 if param == 1 else 2
    if kind in ("grid-tight", "covering-game"):
        return 1
    raise UnknownFamilyError(f"no closed-form optimum for {kind!r}")


STRUCTURED_KINDS = ("s1", "barycentric", "diagonal", "grid-tight", "covering-game")
