"""The perturbed-lattice adversary for online unit clustering.

The game runs ``d // 2`` rounds. Round 1 presents the lattice ``{1..K}^d``;
every later round presents the same lattice perturbed by ``±eps`` in the
coordinates marked by a signature. After each round but the last the
adversary perturbs one more coordinate, choosing it so that as many big
clusters as possible can never grow again.
"""

import itertools
import logging
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from attr import Factory, define, field

from .algorithms import Cluster, OnlineAudit
from .errors import InvariantViolation, OracleLimitError
from .geometry import Box, LatticePoint, Point, RationalLike, rational
from .instances import gen_S1
from .oracle import DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_POINTS, exact_opt, grid_shift_solution
from .rng import RngStream
from .types import OnlineAlgorithm

LOG = logging.getLogger(__name__)

_HALF = Fraction(1, 2)

EventSink = Callable[[Dict[str, Any]], None]

MODES = ("det", "oblivious")

VERDICTS = ("signature", "shift_coverage", "certified_expiry", "final_cover", "expired_bound")


def _signs(_instance: object, _attribute: object, value: Tuple[int, ...]) -> None:
    if any(s not in (-1, 0, 1) for s in value):
        raise ValueError(f"signature entries must be -1, 0 or 1, got {value}")


def _bits(_instance: object, _attribute: object, value: Tuple[int, ...]) -> None:
    if any(t not in (0, 1) for t in value):
        raise ValueError(f"shift entries must be 0 or 1, got {value}")


@define(frozen=True)
class Signature:
    """Which coordinates are perturbed (``±1``) and in which direction."""

    entries: Tuple[int, ...] = field(converter=tuple, validator=_signs)

    @classmethod
    def null(cls, d: int) -> "Signature":
        return cls((0,) * d)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def nonzeros(self) -> int:
        return sum(1 for s in self.entries if s)

    def zeros(self) -> List[int]:
        return [j for j, s in enumerate(self.entries) if not s]

    def with_entry(self, j: int, s: int) -> "Signature":
        if self.entries[j]:
            raise ValueError(f"coordinate {j} is already perturbed in {self.entries}")
        return Signature(self.entries[:j] + (s,) + self.entries[j + 1 :])

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, j: int) -> int:
        return self.entries[j]


@define(frozen=True)
class ShiftVector:
    """A translation in ``{0,1}^d`` of the odd-cornered unit cubes."""

    entries: Tuple[int, ...] = field(converter=tuple, validator=_bits)

    @classmethod
    def all(cls, d: int) -> List["ShiftVector"]:
        return [cls(t) for t in itertools.product((0, 1), repeat=d)]

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def perturb_point(p: LatticePoint, sigma: Signature, eps: RationalLike) -> Point:
    """Move each coordinate of ``p`` by ``eps`` as ``sigma`` says.

    With ``-1`` odd coordinates move up and even ones down; ``+1`` does the
    reverse; ``0`` leaves the coordinate alone.
    """
    e = rational(eps)
    coords = []
    for c, s in zip(p, sigma):
        if not s:
            coords.append(Fraction(c))
        elif (s < 0) == (c % 2 == 1):
            coords.append(c + e)
        else:
            coords.append(c - e)
    return Point(coords)


def observation1_check(sigma: Signature, tau: ShiftVector) -> bool:
    """Whether the odd cubes shifted by ``tau`` cover every point perturbed by ``sigma``."""
    if len(sigma) != len(tau):
        raise ValueError(f"signature of dimension {len(sigma)} against shift of dimension {len(tau)}")
    return all(s == 0 or (s < 0 and t == 0) or (s > 0 and t == 1) for s, t in zip(sigma, tau))


@define(frozen=True)
class Classification:
    cluster: int
    projection: int
    big: bool
    s: int


def classify_clusters(
    clusters: Sequence[Cluster],
    sigma: Signature,
    i: int,
    rho: RationalLike,
    round_members: Mapping[int, Sequence[Point]],
) -> Dict[int, Classification]:
    """Split the clusters touched in round ``i`` into small and big ones.

    ``round_members`` maps a cluster index to its members from this round;
    clusters missing from it are left out. A cluster is small when its
    round members project onto the unperturbed coordinates in at most
    ``2**(d-i) / rho`` points. ``s`` counts the unperturbed coordinates in
    which the whole cluster has extent exactly 1.
    """
    free = sigma.zeros()
    threshold = Fraction(2 ** (sigma.d - i)) / rational(rho)
    result: Dict[int, Classification] = {}
    for index, members in sorted(round_members.items()):
        if not members:
            continue
        projection = len({tuple(p[j] for j in free) for p in members})
        bbox = clusters[index].bbox
        s = sum(1 for j in free if bbox.extent(j) == 1)
        result[index] = Classification(index, projection, projection > threshold, s)
    return result


def certified_expiry(bbox: Box, j: int, s: int) -> bool:
    """Whether perturbing coordinate ``j`` with sign ``s`` shuts the box out for good.

    True when the box spans exactly ``[m, m+1]`` in ``j`` for an integer ``m``
    and the sign pushes both ``m`` and ``m+1`` outward: ``+1`` for odd ``m``,
    ``-1`` for even ``m``.
    """
    lo, hi = bbox.lo[j], bbox.hi[j]
    if hi - lo != 1 or Fraction(lo).denominator != 1:
        return False
    odd = int(lo) % 2 == 1
    return s == (1 if odd else -1)


@define
class RoundRecord:
    round: int
    signature: Signature
    points: int
    clusters: int
    touched: int
    small: int
    big: int
    certified: int = 0
    choice: Optional[Tuple[int, int]] = None
    expired: int = 0


@define
class ClusterGameState:
    d: int
    K: int
    rho: Fraction
    eps: Fraction
    mode: str
    rng: RngStream
    round: int = 1
    signature: Signature = field(default=Factory(lambda self: Signature.null(self.d), takes_self=True))
    records: List[RoundRecord] = field(factory=list)
    # round -> cluster indices certified to expire at its end
    certified: Dict[int, List[int]] = field(factory=dict)

    @property
    def rounds(self) -> int:
        return self.d // 2


def clustering_game_step(
    state: ClusterGameState,
    clusters: Sequence[Cluster],
    classes: Mapping[int, Classification],
) -> Signature:
    """Perturb one more coordinate and return the next signature.

    Deterministic mode picks the ``(j, s)`` that certifies the most big
    clusters, preferring smaller ``j`` and then ``s = -1``; oblivious mode
    draws ``j`` and ``s`` uniformly. Either way the certified clusters are
    recorded for the current round.
    """
    zeros = state.signature.zeros()
    if not zeros:
        raise ValueError(f"no unperturbed coordinate left in {state.signature.entries}")
    big = [clusters[c.cluster] for c in classes.values() if c.big]

    def certified_by(j: int, s: int) -> List[int]:
        return [cluster.id.index for cluster in big if certified_expiry(cluster.bbox, j, s)]

    if state.mode == "det":
        # max keeps the first maximum: smallest j, then s = -1
        j, s = max(((k, t) for k in zeros for t in (-1, 1)), key=lambda kt: len(certified_by(*kt)))
    else:
        j = state.rng.choice(zeros)
        s = 1 if state.rng.coin() else -1
    ids = certified_by(j, s)
    state.certified[state.round] = ids
    if state.records and state.records[-1].round == state.round:
        state.records[-1].certified = len(ids)
        state.records[-1].choice = (j, s)
    LOG.debug("round %s: perturb coordinate %s by %+d, %s big clusters certified", state.round, j, s, len(ids))
    return state.signature.with_entry(j, s)


@define
class ClusteringGameReport:
    d: int
    K: int
    alg: str
    mode: str
    rho: Fraction
    eps: Fraction
    rounds: List[RoundRecord]
    points: List[Point]
    signature: Signature
    alg_count: int
    expired: int
    opt_exact: Optional[int]
    opt_lower: int
    opt_upper: int
    shift: ShiftVector
    failures: Dict[str, int] = field(factory=lambda: dict.fromkeys(VERDICTS, 0))

    @property
    def opt(self) -> int:
        return self.opt_exact if self.opt_exact is not None else self.opt_upper

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.alg_count, self.opt)


def _shift_mismatch(points: Sequence[Point], sigma: Signature) -> Optional[ShiftVector]:
    """The first shift whose brute-force coverage disagrees with the signature predicate."""
    for tau in ShiftVector.all(sigma.d):
        if (grid_shift_solution(points, tau) is not None) != observation1_check(sigma, tau):
            return tau
    return None


def clustering_game_run(
    d: int,
    K: int,  # pylint: disable=invalid-name
    opponent: OnlineAlgorithm,
    rho: Optional[RationalLike] = None,
    eps: RationalLike = Fraction(1, 4),
    mode: str = "det",
    seed: int = 0,
    on_event: Optional[EventSink] = None,
    max_points: int = DEFAULT_MAX_POINTS,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    strict: bool = True,
) -> ClusteringGameReport:
    """Play all rounds against ``opponent`` and verify the bookkeeping.

    ``rho`` defaults to ``d``. ``seed`` only drives the oblivious choices.
    With ``strict=False`` failed checks are counted in ``report.failures``
    under the names in :data:`VERDICTS` instead of raising.

    Raises:
        ProtocolViolation: the opponent breaks the online rules.
        InvariantViolation: a round or end-of-game check fails in strict mode.
    """
    if d < 2:
        raise ValueError(f"the clustering game needs d >= 2, got {d}")
    if K < 4 or K % 2:
        raise ValueError(f"K must be even and at least 4, got {K}")
    e = rational(eps)
    if not 0 < e < _HALF:
        raise ValueError(f"eps must lie in (0, 1/2), got {e}")
    r = rational(d if rho is None else rho)
    if r <= 0:
        raise ValueError(f"rho must be positive, got {r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")

    audit = opponent if isinstance(opponent, OnlineAudit) else OnlineAudit(opponent)
    state = ClusterGameState(d=d, K=K, rho=r, eps=e, mode=mode, rng=RngStream(seed))
    lattice = gen_S1(d, K)
    presented: List[Point] = []
    last_round: Dict[int, int] = {}
    failures = dict.fromkeys(VERDICTS, 0)

    def judge(name: str, ok: bool, message: str) -> None:
        if ok:
            return
        failures[name] += 1
        LOG.debug("%s failed against %s: %s", name, audit.name, message)
        if strict:
            raise InvariantViolation(message)

    for i in range(1, state.rounds + 1):
        state.round = i
        sigma = state.signature
        judge("signature", sigma.nonzeros == i - 1, f"round {i} starts with signature {sigma.entries}")
        batch = [perturb_point(q, sigma, e) for q in lattice]
        members: Dict[int, List[Point]] = {}
        for k, p in enumerate(batch):
            cid, opened = audit.insert(p)
            members.setdefault(cid.index, []).append(p)
            last_round[cid.index] = i
            if on_event is not None:
                on_event(
                    {
                        "round": i,
                        "step": k,
                        "point": [str(c) for c in p],
                        "cluster": cid.index,
                        "opened": opened,
                    }
                )
        presented.extend(batch)
        mismatch = _shift_mismatch(batch, sigma)
        judge(
            "shift_coverage",
            mismatch is None,
            f"shift {mismatch and mismatch.entries} disagrees with signature {sigma.entries} in round {i}",
        )

        classes = classify_clusters(audit.clusters, sigma, i, r, members)
        big = sum(1 for c in classes.values() if c.big)
        state.records.append(
            RoundRecord(
                round=i,
                signature=sigma,
                points=len(batch),
                clusters=audit.count,
                touched=len(classes),
                small=len(classes) - big,
                big=big,
            )
        )
        LOG.debug("round %s vs %s: %s clusters, %s touched, %s big", i, audit.name, audit.count, len(classes), big)
        if i < state.rounds:
            state.signature = clustering_game_step(state, audit.clusters, classes)
            judge("signature", state.signature.nonzeros == i, f"signature {state.signature.entries} after round {i}")
            if on_event is not None:
                record = state.records[-1]
                on_event(
                    {
                        "round": i,
                        "choice": list(record.choice or ()),
                        "certified": record.certified,
                        "small": record.small,
                        "big": record.big,
                    }
                )

    audit.verify()
    for i, ids in state.certified.items():
        for index in ids:
            judge(
                "certified_expiry",
                last_round[index] == i,
                f"cluster {index} certified in round {i} grew in round {last_round[index]}",
            )
    for record in state.records:
        record.expired = sum(1 for last in last_round.values() if last == record.round)
    expired = sum(record.expired for record in state.records)
    judge("expired_bound", audit.count >= expired, f"{expired} expired clusters but only {audit.count} opened")

    # only shifts compatible with the final signature can cover the last round
    best: Optional[Tuple[int, ShiftVector]] = None
    for tau in ShiftVector.all(d):
        if not observation1_check(state.signature, tau):
            continue
        solution = grid_shift_solution(presented, tau)
        if solution is not None and (best is None or solution.size < best[0]):
            best = (solution.size, tau)
    judge("final_cover", best is not None, f"no shift covers the final point set of signature {state.signature.entries}")
    if best is None:
        # one cube per point always covers
        best = (len(presented), ShiftVector((0,) * d))

    opt_exact: Optional[int] = None
    try:
        opt_exact = exact_opt(presented, max_points, max_candidates).size
    except OracleLimitError as err:
        LOG.debug("clustering game d=%s K=%s: %s", d, K, err)
    report = ClusteringGameReport(
        d=d,
        K=K,
        alg=audit.name,
        mode=mode,
        rho=r,
        eps=e,
        rounds=state.records,
        points=presented,
        signature=state.signature,
        alg_count=audit.count,
        expired=expired,
        opt_exact=opt_exact,
        opt_lower=(K // 2) ** d,
        opt_upper=best[0],
        shift=best[1],
        failures=failures,
    )
    LOG.debug("clustering game d=%s K=%s vs %s: ratio %s", d, K, audit.name, report.ratio)
    return report


def rounds_summary(report: ClusteringGameReport) -> List[Dict[str, Union[int, str]]]:
    """One flat row per round, for logs and tables."""
    return [
        {
            "round": r.round,
            "signature": " ".join(str(s) for s in r.signature),
            "points": r.points,
            "clusters": r.clusters,
            "small": r.small,
            "big": r.big,
            "certified": r.certified,
            "expired": r.expired,
        }
        for r in report.rounds
    ]
