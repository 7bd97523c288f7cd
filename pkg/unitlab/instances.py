"""Hard-instance generators.

All generators are deterministic apart from :func:`random_lattice_instance`,
which draws from the stream it is handed. Point lists come back in
presentation order.
"""

import itertools
import logging
from fractions import Fraction
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from attr import define

from .errors import UnknownFamilyError
from .geometry import AnyPoint, LatticePoint, Point, parse_instance
from .rng import RngStream

LOG = logging.getLogger(__name__)

_HALF = Fraction(1, 2)


def gen_S1(d: int, K: int) -> List[LatticePoint]:  # pylint: disable=invalid-name
    """All points of ``{1..K}^d`` in lexicographic order."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if K < 2 or K % 2:
        raise ValueError(f"K must be even and at least 2, got {K}")
    return [LatticePoint(c) for c in itertools.product(range(1, K + 1), repeat=d)]


def diagonal_pairs_instance(n: int) -> List[Point]:
    """The planar pairs ``(1 + i/n, i/n), (i/n, 1 + i/n)`` for ``i < n``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    points = []
    for i in range(n):
        t = Fraction(i, n)
        points.append(Point((1 + t, t)))
        points.append(Point((t, 1 + t)))
    return points


def grid_tight_instance(d: int) -> List[Point]:
    """``2**d`` points inside one unit cube, each in its own grid cell."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    return [Point(c) for c in itertools.product((_HALF, Fraction(1)), repeat=d)]


def random_lattice_instance(d: int, n: int, span: int, rng: RngStream) -> List[LatticePoint]:
    """``n`` lattice points drawn uniformly from ``{0..span-1}^d``, repeats allowed."""
    if span < 1:
        raise ValueError(f"span must be positive, got {span}")
    return [LatticePoint([rng.below(span) for _ in range(d)]) for _ in range(n)]


def fig1_instance() -> List[Point]:
    """A planar instance on which Grid opens 11 clusters while 6 suffice."""
    text = resources.files("unitlab").joinpath("data").joinpath("fig1_grid.txt").read_text(encoding="utf-8")
    return parse_instance(text)


@define(frozen=True)
class BarycentricInstance:
    """Lattice construction that forces Greedy into pairwise clusters.

    ``A`` and ``C`` are the points with all coordinates congruent to 0 and to
    2 mod 4 in ``[0, K]``; ``B`` and ``D`` are their translates by
    ``{0,1}^d``. Each point of ``D`` is matched with the unique point of ``B``
    at distance at most 1.
    """

    d: int
    K: int
    A: Tuple[LatticePoint, ...]
    B: Tuple[LatticePoint, ...]
    C: Tuple[LatticePoint, ...]
    D: Tuple[LatticePoint, ...]
    pairs: Tuple[Tuple[LatticePoint, LatticePoint], ...]
    leftovers: Tuple[LatticePoint, ...]

    @property
    def opt(self) -> int:
        return len(self.A) + len(self.C)

    def points(self) -> List[LatticePoint]:
        """Matched pairs by ``v`` (``u`` first), then unmatched ``B`` points."""
        order = [x for u, v in self.pairs for x in (u, v)]
        order.extend(self.leftovers)
        return order


def _translates(base: Sequence[Tuple[int, ...]], d: int) -> List[LatticePoint]:
    offsets = list(itertools.product((0, 1), repeat=d))
    return sorted(LatticePoint(tuple(x + o for x, o in zip(p, off))) for p in base for off in offsets)


def barycentric_instance(d: int, K: int) -> BarycentricInstance:  # pylint: disable=invalid-name
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if K < 4 or K % 4:
        raise ValueError(f"K must be a positive multiple of 4, got {K}")
    a_base = list(itertools.product(range(0, K + 1, 4), repeat=d))
    c_base = list(itertools.product(range(2, K, 4), repeat=d))
    b_points = _translates(a_base, d)
    d_points = _translates(c_base, d)
    b_set = set(b_points)
    pairs = []
    for v in d_points:
        # v_j = 2 mod 4 pairs down, v_j = 3 mod 4 pairs up
        u = LatticePoint(tuple(c - 1 if c % 4 == 2 else c + 1 for c in v))
        if u not in b_set:
            raise AssertionError(f"partner {u} of {v} is not in B")
        pairs.append((u, v))
    matched = {u for u, _ in pairs}
    leftovers = tuple(p for p in b_points if p not in matched)
    LOG.debug("barycentric d=%s K=%s: %s pairs, %s leftovers", d, K, len(pairs), len(leftovers))
    return BarycentricInstance(
        d=d,
        K=K,
        A=tuple(LatticePoint(a) for a in a_base),
        B=tuple(b_points),
        C=tuple(LatticePoint(c) for c in c_base),
        D=tuple(d_points),
        pairs=tuple(pairs),
        leftovers=leftovers,
    )


def _span_for(d: int, n: int) -> int:
    side = 1
    while side**d < n:
        side += 1
    return 2 * side


def _planar(family: str, d: int) -> None:
    if d != 2:
        raise ValueError(f"family {family!r} is planar, got d={d}")


def _s1(d: int, k: int, _rng: RngStream) -> Sequence[AnyPoint]:
    return gen_S1(d, k)


def _barycentric(d: int, k: int, _rng: RngStream) -> Sequence[AnyPoint]:
    return barycentric_instance(d, k).points()


def _diagonal(d: int, n: int, _rng: RngStream) -> Sequence[AnyPoint]:
    _planar("diagonal", d)
    return diagonal_pairs_instance(n)


def _grid_tight(d: int, _param: int, _rng: RngStream) -> Sequence[AnyPoint]:
    return grid_tight_instance(d)


def _random(d: int, n: int, rng: RngStream) -> Sequence[AnyPoint]:
    return random_lattice_instance(d, n, _span_for(d, n), rng)


def _fig1(d: int, _param: int, _rng: RngStream) -> Sequence[AnyPoint]:
    _planar("fig1", d)
    return fig1_instance()


_GENERATORS: Dict[str, Callable[[int, int, RngStream], Sequence[AnyPoint]]] = {
    "s1": _s1,
    "barycentric": _barycentric,
    "diagonal": _diagonal,
    "grid-tight": _grid_tight,
    "random": _random,
    "fig1": _fig1,
}

FAMILIES = tuple(_GENERATORS)


def generate(family: str, d: int, param: int = 0, seed: Optional[int] = None) -> List[AnyPoint]:
    """Build an instance of a named family.

    ``param`` is K for ``s1`` and ``barycentric`` and n for ``diagonal`` and
    ``random``; the other families ignore it.
    """
    try:
        generator = _GENERATORS[family]
    except KeyError:
        raise UnknownFamilyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    return list(generator(d, param, RngStream(seed or 0)))
