"""The cube game: an adaptive adversary forcing ``2**d`` cubes for one unit cube of points.

Alice keeps a cube ``Q_i`` of side ``x_i = 1 - 2 * 4**-i`` and presents an
uncovered vertex of it; Bob must cover it with a new unit cube ``U_i``. Alice
then grows ``Q_i`` into ``Q_{i+1}``, anchored at the single vertex that ``U_i``
covers deeply (if any), so that every other uncovered vertex stays uncovered.
All presented points end up inside ``Q_{2**d}``, whose side is below 1.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from attr import define, field

from .algorithms import CoveringBase, OnlineAudit
from .errors import InvariantViolation, ProtocolViolation
from .geometry import Box, Point, bounding_box, box_contains, dist_to_boundary
from .oracle import exact_opt
from .rng import RngStream
from .types import Coverer, OnlineAlgorithm, VertexAware

LOG = logging.getLogger(__name__)

_HALF = Fraction(1, 2)

EventSink = Callable[[Dict[str, Any]], None]

VERDICTS = ("invariant_I", "invariant_II", "lemma_deep", "lemma_uncovered", "side_gap")


def x_sequence(i: int) -> Fraction:
    """Side of Alice's cube in step ``i``: 1/2, 7/8, 31/32, ..."""
    if i < 1:
        raise ValueError(f"steps start at 1, got {i}")
    return 1 - 2 * Fraction(1, 4**i)


def deeply_covered(v: Point, cube: Box, i: int) -> bool:
    """Whether ``cube`` covers ``v`` at boundary distance above ``(1 - x_i) / 2``."""
    if not cube.is_unit():
        raise ValueError(f"{cube} is not a unit cube")
    if not box_contains(cube, v):
        return False
    return dist_to_boundary(cube, v) > (1 - x_sequence(i)) / 2


def _bits(cube: Box, v: Point) -> List[int]:
    return [1 if c == high else 0 for c, high in zip(v, cube.hi)]


def _grow(cube: Box, anchor: Point, side: Fraction) -> Box:
    """The cube of the given side containing ``cube`` with ``anchor`` as a vertex."""
    lo, hi = [], []
    for a, low in zip(anchor, cube.lo):
        if a == low:
            lo.append(a)
            hi.append(a + side)
        else:
            lo.append(a - side)
            hi.append(a)
    return Box(lo, hi)


@define
class CubeGameState:
    d: int
    cube: Box
    step: int = 0
    points: List[Point] = field(factory=list)
    cubes: List[Box] = field(factory=list)
    uncovered: List[Point] = field(factory=list)


@define(frozen=True)
class CoveringStep:
    step: int
    cube: Box
    point: Point
    bob_cube: Box
    uncovered: int
    deep: int
    anchor: Optional[Point]
    verdicts: Dict[str, bool]


@define
class CoveringGameReport:
    d: int
    alg: str
    steps: List[CoveringStep]
    points: List[Point]
    alg_count: int
    opt: int
    completed: bool
    failures: Dict[str, int]

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.alg_count, self.opt)

    @property
    def ok(self) -> bool:
        return self.completed and not any(self.failures.values())


def _placed(audit: OnlineAudit) -> List[Box]:
    return [cover.cube for cover in audit.cubes]


def covering_game_run(
    d: int,
    bob: OnlineAlgorithm,
    strict: bool = True,
    on_event: Optional[EventSink] = None,
) -> CoveringGameReport:
    """Play all ``2**d`` steps of the cube game against a covering algorithm.

    In strict mode any failed invariant or lemma check raises
    InvariantViolation. Otherwise failures are counted and the game ends
    early once Q_i has no uncovered vertex left.

    Raises:
        ProtocolViolation: Bob breaks the online rules or leaves a point uncovered.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if not bob.covering or not isinstance(bob, Coverer):
        raise ValueError(f"{bob.name} is not a covering algorithm")
    audit = bob if isinstance(bob, OnlineAudit) else OnlineAudit(bob)
    inner = audit.algorithm
    total = 2**d
    state = CubeGameState(d, Box((0,) * d, (x_sequence(1),) * d))
    failures = {name: 0 for name in VERDICTS}
    steps: List[CoveringStep] = []
    completed = True

    def judge(verdicts: Dict[str, bool], step: int) -> None:
        for name, ok in verdicts.items():
            if not ok:
                failures[name] += 1
                LOG.debug("step %s: %s failed against %s", step, name, audit.name)
                if strict:
                    raise InvariantViolation(f"{name} failed in step {step} against {audit.name}")

    for i in range(1, total + 1):
        state.step = i
        placed = _placed(audit)
        state.uncovered = [v for v in state.cube.vertices() if not any(box_contains(u, v) for u in placed)]
        before = {
            "invariant_I": all(box_contains(state.cube, p) for p in state.points),
            "invariant_II": len(state.uncovered) >= total - i + 1,
        }
        judge(before, i)
        if not state.uncovered:
            completed = False
            break
        if isinstance(inner, VertexAware):
            inner.observe(state.cube, list(state.uncovered), i)

        p = state.uncovered[0]
        cid, opened = audit.insert(p)
        if not opened:
            raise ProtocolViolation(f"{audit.name} reused cube {cid} for uncovered vertex {p}")
        bob_cube = audit.cubes[cid.index].cube
        state.points.append(p)
        state.cubes.append(bob_cube)

        verdicts = dict(before)
        deep: List[Point] = []
        anchor: Optional[Point] = None
        if i < total:
            deep = [v for v in state.uncovered if deeply_covered(v, bob_cube, i)]
            anchor = deep[0] if deep else p
            grown = _grow(state.cube, anchor, x_sequence(i + 1))
            after = placed + [bob_cube]
            verdicts["lemma_deep"] = len(deep) <= 1
            verdicts["lemma_uncovered"] = all(
                not any(box_contains(u, grown.vertex(_bits(state.cube, v))) for u in after)
                for v in state.uncovered
                if v != anchor and v not in deep
            )
            verdicts["side_gap"] = x_sequence(i + 1) - x_sequence(i) > (1 - x_sequence(i)) / 2
        steps.append(CoveringStep(i, state.cube, p, bob_cube, len(state.uncovered), len(deep), anchor, verdicts))
        if on_event is not None:
            on_event(
                {
                    "step": i,
                    "point": [str(c) for c in p],
                    "cluster": cid.index,
                    "opened": opened,
                    "cube": [str(c) for c in bob_cube.lo],
                    "deep": len(deep),
                    "anchor": None if anchor is None else [str(c) for c in anchor],
                }
            )
        judge({k: v for k, v in verdicts.items() if k not in before}, i)
        if anchor is not None:
            state.cube = grown

    audit.verify()
    opt = 1 if bounding_box(state.points).max_extent() <= 1 else exact_opt(state.points).size
    LOG.debug("cube game d=%s vs %s: %s cubes, opt %s", d, audit.name, audit.count, opt)
    return CoveringGameReport(
        d=d,
        alg=audit.name,
        steps=steps,
        points=list(state.points),
        alg_count=audit.count,
        opt=opt,
        completed=completed,
        failures=failures,
    )


class MaliciousCoverer(CoveringBase):
    """A randomized Bob that tries to cover as many of Alice's vertices deeply as it can.

    It sees Alice's cube before every move and, among a few aimed and random
    unit cubes through the presented point, keeps the one deeply covering the
    most uncovered vertices.
    """

    name = "malicious"
    randomized = True

    def __init__(self, d: int, rng: RngStream, tries: int = 8) -> None:
        super().__init__(d)
        self.rng = rng
        self.tries = tries
        self._uncovered: List[Point] = []
        self._step = 1

    def observe(self, cube: Box, uncovered: List[Point], step: int) -> None:
        self._uncovered = uncovered
        self._step = step

    def _aimed(self, p: Point, target: Point) -> Box:
        # center on target, clamped so the cube still holds p
        lo = [min(max(t - _HALF, c - 1), c) for t, c in zip(target, p)]
        return Box.unit_cube(lo)

    def _random(self, p: Point) -> Box:
        resolution = 2 ** (2 * self._step + 3)
        return Box.unit_cube([c - Fraction(self.rng.below(resolution + 1), resolution) for c in p])

    def _score(self, cube: Box) -> int:
        return sum(1 for v in self._uncovered if deeply_covered(v, cube, self._step))

    def _cube_for(self, p: Point) -> Box:
        candidates = [self._aimed(p, v) for v in self._uncovered]
        candidates.extend(self._random(p) for _ in range(self.tries))
        best = candidates[0]
        best_score = self._score(best)
        for cube in candidates[1:]:
            score = self._score(cube)
            if score > best_score:
                best, best_score = cube, score
        return best
