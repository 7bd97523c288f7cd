from typing import TYPE_CHECKING, List, Sequence, Tuple

from typing_extensions import Protocol, runtime_checkable

if TYPE_CHECKING:
    from .algorithms import Cluster, ClusterId, CoverCube
    from .geometry import AnyPoint, Box, Point


@runtime_checkable
class OnlineAlgorithm(Protocol):
    """An online clustering or covering algorithm.

    ``insert`` assigns each arriving point irrevocably and reports whether a
    new cluster had to be opened for it.
    """

    name: str
    d: int
    covering: bool

    def insert(self, point: "AnyPoint") -> Tuple["ClusterId", bool]: ...

    @property
    def clusters(self) -> Sequence["Cluster"]: ...

    @property
    def count(self) -> int: ...


@runtime_checkable
class Coverer(OnlineAlgorithm, Protocol):
    """A covering algorithm: every cluster is a unit cube fixed when placed."""

    @property
    def cubes(self) -> Sequence["CoverCube"]: ...


@runtime_checkable
class VertexAware(Protocol):
    """A coverer that wants to see the adversary's cube before each move."""

    def observe(self, cube: "Box", uncovered: List["Point"], step: int) -> None: ...
