"""Exact points, boxes and L-infinity predicates.

Every coordinate is a :class:`fractions.Fraction`; nothing in the lab ever
touches floating point. Boxes are closed on both sides, so a unit cube is a
box whose extent is exactly 1 in every dimension.
"""

import itertools
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from attr import define, field

from .errors import DimensionMismatchError, InstanceFormatError, NotLatticeError

LOG = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[int, str, Fraction]


def rational(value: RationalLike) -> Fraction:
    """Coerce an int, a Fraction or a "p/q" string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    return Fraction(value)


def _rational_tuple(values: Iterable[RationalLike]) -> Tuple[Fraction, ...]:
    return tuple(rational(v) for v in values)


def _lattice_coord(value: RationalLike) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    frac = rational(value)
    if frac.denominator != 1:
        raise NotLatticeError(f"coordinate {frac} is not an integer")
    return frac.numerator


def _lattice_tuple(values: Iterable[RationalLike]) -> Tuple[int, ...]:
    return tuple(_lattice_coord(v) for v in values)


def _non_empty(_instance: object, attribute: object, value: Tuple) -> None:
    if not value:
        raise ValueError("points need at least one coordinate")


@define(frozen=True, order=True)
class Point:
    """A d-dimensional point with exact rational coordinates."""

    coords: Tuple[Fraction, ...] = field(converter=_rational_tuple, validator=_non_empty)

    @classmethod
    def of(cls, *coords: RationalLike) -> "Point":
        return cls(coords)

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def is_lattice(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def to_point(self) -> "Point":
        return self

    def to_lattice(self) -> "LatticePoint":
        """Convert to a lattice point, failing with NotLatticeError off Z^d."""
        return LatticePoint(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.coords)

    def __getitem__(self, j: int) -> Fraction:
        return self.coords[j]

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@define(frozen=True, order=True)
class LatticePoint:
    """A point of Z^d."""

    coords: Tuple[int, ...] = field(converter=_lattice_tuple, validator=_non_empty)

    @classmethod
    def of(cls, *coords: int) -> "LatticePoint":
        return cls(coords)

    @property
    def d(self) -> int:
        return len(self.coords)

    def to_point(self) -> Point:
        return Point(self.coords)

    def to_lattice(self) -> "LatticePoint":
        return self

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __getitem__(self, j: int) -> int:
        return self.coords[j]

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


AnyPoint = Union[Point, LatticePoint]


def as_point(p: Union[AnyPoint, Sequence[RationalLike]]) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, LatticePoint):
        return p.to_point()
    return Point(p)


@define(frozen=True)
class Box:
    """A closed axis-aligned box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``."""

    lo: Tuple[Fraction, ...] = field(converter=_rational_tuple, validator=_non_empty)
    hi: Tuple[Fraction, ...] = field(converter=_rational_tuple)

    def __attrs_post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise DimensionMismatchError(f"lo has {len(self.lo)} coordinates, hi has {len(self.hi)}")
        for j, (low, high) in enumerate(zip(self.lo, self.hi)):
            if low > high:
                raise ValueError(f"empty box: lo[{j}]={low} > hi[{j}]={high}")

    @classmethod
    def unit_cube(cls, corner: Union[AnyPoint, Sequence[RationalLike]]) -> "Box":
        """The unit cube whose lower corner is ``corner``."""
        lo = as_point(corner).coords
        return cls(lo, tuple(c + 1 for c in lo))

    @classmethod
    def around(cls, p: AnyPoint) -> "Box":
        """The degenerate box holding the single point ``p``."""
        coords = as_point(p).coords
        return cls(coords, coords)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def corner(self) -> Point:
        return Point(self.lo)

    def extent(self, j: int) -> Fraction:
        return self.hi[j] - self.lo[j]

    def extents(self) -> Tuple[Fraction, ...]:
        return tuple(high - low for low, high in zip(self.lo, self.hi))

    def max_extent(self) -> Fraction:
        return max(self.extents())

    def is_unit(self) -> bool:
        return all(e == 1 for e in self.extents())

    def vertex(self, bits: Sequence[int]) -> Point:
        """The vertex taking ``hi`` where ``bits`` is 1 and ``lo`` where it is 0."""
        if len(bits) != self.d:
            raise DimensionMismatchError(f"{len(bits)} bits for a {self.d}-dimensional box")
        return Point(high if b else low for b, low, high in zip(bits, self.lo, self.hi))

    def vertices(self) -> List[Point]:
        """All distinct vertices, in lexicographic order."""
        axes = [sorted({low, high}) for low, high in zip(self.lo, self.hi)]
        return [Point(coords) for coords in itertools.product(*axes)]

    def __str__(self) -> str:
        return "[" + ", ".join(f"{low}..{high}" for low, high in zip(self.lo, self.hi)) + "]"


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatchError(f"dimension {a} does not match dimension {b}")


def linf_dist(p: AnyPoint, q: AnyPoint) -> Fraction:
    """Exact L-infinity distance between two points."""
    _check_dims(p.d, q.d)
    return Fraction(max(abs(a - b) for a, b in zip(p, q)))


def box_extend(b: Box, p: AnyPoint) -> Box:
    """The smallest box containing both ``b`` and ``p``."""
    _check_dims(b.d, p.d)
    if box_contains(b, p):
        return b
    return Box(
        tuple(min(low, c) for low, c in zip(b.lo, p)),
        tuple(max(high, c) for high, c in zip(b.hi, p)),
    )


def box_contains(b: Box, p: AnyPoint) -> bool:
    _check_dims(b.d, p.d)
    return all(low <= c <= high for low, c, high in zip(b.lo, p, b.hi))


def dist_to_boundary(b: Box, p: AnyPoint) -> Fraction:
    """Distance from a contained point to the boundary of ``b``.

    Raises:
        ValueError: ``p`` lies outside ``b``.
    """
    if not box_contains(b, p):
        raise ValueError(f"point {p} lies outside box {b}")
    return Fraction(min(min(c - low, high - c) for low, c, high in zip(b.lo, p, b.hi)))


def bounding_box(points: Iterable[AnyPoint]) -> Box:
    it = iter(points)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("bounding box of no points") from None
    box = Box.around(first)
    for p in it:
        box = box_extend(box, p)
    return box


def common_denominator(points: Iterable[AnyPoint]) -> int:
    den = 1
    for p in points:
        for c in p:
            den = math.lcm(den, Fraction(c).denominator)
    return den


def format_instance(points: Sequence[AnyPoint], d: Optional[int] = None) -> str:
    """Render points in the ``d n den`` text format.

    ``d`` is only needed when ``points`` is empty.
    """
    if points:
        d = points[0].d
        for p in points:
            _check_dims(d, p.d)
    elif d is None:
        raise ValueError("dimension is required for an empty instance")
    den = common_denominator(points)
    lines = [f"{d} {len(points)} {den}"]
    for p in points:
        lines.append(" ".join(str(int(Fraction(c) * den)) for c in p))
    return "\n".join(lines) + "\n"


def _ints(line: str, lineno: int) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise InstanceFormatError(f"line {lineno}: expected integers, got {line!r}") from None


def parse_instance(text: str) -> List[Point]:
    """Parse the ``d n den`` text format into exact points."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise InstanceFormatError("line 1: missing header")
    header = _ints(lines[0], 1)
    if len(header) != 3:
        raise InstanceFormatError(f"line 1: header needs 3 integers, got {len(header)}")
    d, n, den = header
    if d < 1 or n < 0 or den < 1:
        raise InstanceFormatError(f"line 1: invalid header d={d} n={n} den={den}")
    if len(lines) - 1 != n:
        raise InstanceFormatError(f"header announces {n} points, file has {len(lines) - 1}")
    points = []
    for lineno, line in enumerate(lines[1:], start=2):
        values = _ints(line, lineno)
        if len(values) != d:
            raise InstanceFormatError(f"line {lineno}: expected {d} coordinates, got {len(values)}")
        points.append(Point(Fraction(v, den) for v in values))
    LOG.debug("parsed %s points in dimension %s", n, d)
    return points


def read_instance(path: Union[str, Path]) -> List[Point]:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_instance(path: Union[str, Path], points: Sequence[AnyPoint], d: Optional[int] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_instance(points, d))
