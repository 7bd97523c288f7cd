"""Harness services, wired through a minject registry.

Build a registry from the merged config and ask it for the service you need::

    registry = minject.initialize(load_config())
    simulator = registry[Simulator]
    result = simulator.run("greedy", points)

Every service reads its settings lazily from the registry config, so tests
can hand in a plain dict holding only the keys they care about.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

from attr import define, field

import minject
from minject import inject

from .algorithms import OnlineAudit, make_algorithm
from .clustering_game import clustering_game_run, rounds_summary
from .covering_game import covering_game_run
from .geometry import AnyPoint, Box
from .oracle import (
    DEFAULT_MAX_CANDIDATES,
    DEFAULT_MAX_POINTS,
    STRUCTURED_KINDS,
    CoverSolution,
    exact_opt,
    structured_opt,
)
from .reports import DuelSummary, RunReport
from .reweigh import ReweighingCoverer
from .rng import RngStream, derive_seed
from .types import Coverer, OnlineAlgorithm, VertexAware

LOG = logging.getLogger(__name__)

ADVERSARIES = ("clustering", "covering")

EventSink = Callable[[Dict[str, Any]], None]


@minject.define
class OracleService:
    """Resolves OPT: a closed form when the family has one, else the exact oracle."""

    max_points: int = minject.field(binding=inject.nested_config("oracle.max_points", DEFAULT_MAX_POINTS))
    max_candidates: int = minject.field(binding=inject.nested_config("oracle.max_candidates", DEFAULT_MAX_CANDIDATES))

    def solve(self, points: Sequence[AnyPoint]) -> CoverSolution:
        return exact_opt(points, self.max_points, self.max_candidates)

    def opt(self, points: Sequence[AnyPoint], family: Optional[str] = None, param: int = 0) -> int:
        """OPT of ``points``.

        Raises:
            OracleLimitError: no closed form applies and the instance is too
                large for the exact oracle.
        """
        if family in STRUCTURED_KINDS and points:
            value = structured_opt(family, points[0].d, param)
            LOG.info("OPT=%s from the %s formula", value, family)
            return value
        value = self.solve(points).size
        LOG.info("OPT=%s from the exact oracle over %s points", value, len(points))
        return value


@define
class Simulation:
    report: RunReport
    transcript: List[str]


def transcript_line(i: int, tag: str, cid: int, opened: bool, lo: Sequence[Fraction]) -> str:
    return " ".join([str(i), tag, str(cid), "1" if opened else "0"] + [str(c) for c in lo])


@minject.define
class Simulator:
    """Runs one online algorithm over an instance, in presentation order."""

    oracle: OracleService = minject.field(binding=inject.reference(OracleService))
    audit: bool = minject.field(binding=inject.nested_config("simulate.audit", True))

    def _touched(self, algorithm: OnlineAlgorithm, index: int) -> Box:
        if algorithm.covering and isinstance(algorithm, Coverer):
            return algorithm.cubes[index].cube
        return algorithm.clusters[index].bbox

    def run(
        self,
        alg: str,
        points: Sequence[AnyPoint],
        seed: int = 0,
        family: str = "file",
        param: int = 0,
        use_formula: bool = False,
    ) -> Simulation:
        if not points:
            raise ValueError("cannot simulate an empty instance")
        if use_formula and family not in STRUCTURED_KINDS:
            raise ValueError(f"no closed-form optimum for family {family!r}")
        d = points[0].d
        inner = make_algorithm(alg, d, RngStream(seed))
        algorithm: OnlineAlgorithm = OnlineAudit(inner) if self.audit else inner
        transcript = []
        for i, p in enumerate(points, start=1):
            cid, opened = algorithm.insert(p)
            tag = f"b{inner.last_branch}" if isinstance(inner, ReweighingCoverer) else alg
            transcript.append(transcript_line(i, tag, cid.index, opened, self._touched(algorithm, cid.index).lo))
        if isinstance(algorithm, OnlineAudit):
            algorithm.verify()
        opt = self.oracle.opt(points, family if use_formula else None, param)
        verdicts = {"alg_ge_opt": algorithm.count >= opt}
        if isinstance(inner, ReweighingCoverer):
            verdicts.update(inner.invariants(opt))
        report = RunReport(family, d, param, alg, seed, algorithm.count, opt, verdicts)
        LOG.info("%s on %s points: %s clusters, OPT %s", alg, len(points), report.alg_count, opt)
        return Simulation(report, transcript)


@define(frozen=True)
class TrialSpec:
    """Everything one duel trial needs; picklable for worker processes."""

    adversary: str
    alg: str
    d: int
    K: int
    seed: int
    rho: Optional[str]
    eps: str
    mode: str
    strict: Optional[bool]
    max_points: int
    max_candidates: int
    log: bool


@define
class TrialResult:
    report: RunReport
    failures: Dict[str, int]
    events: List[Dict[str, Any]] = field(factory=list)


def play_trial(spec: TrialSpec) -> TrialResult:
    """Run a single duel trial. Module level so worker processes can import it."""
    events: List[Dict[str, Any]] = []
    sink = events.append if spec.log else None
    streams = RngStream(spec.seed)
    bob = make_algorithm(spec.alg, spec.d, streams.spawn(0))
    if spec.adversary == "covering":
        strict = spec.strict if spec.strict is not None else not isinstance(bob, VertexAware)
        game = covering_game_run(spec.d, bob, strict=strict, on_event=sink)
        report = RunReport(
            "covering-game",
            spec.d,
            0,
            spec.alg,
            spec.seed,
            game.alg_count,
            game.opt,
            {name: count == 0 for name, count in game.failures.items()},
        )
        return TrialResult(report, dict(game.failures), events)
    result = clustering_game_run(
        spec.d,
        spec.K,
        bob,
        rho=spec.rho,
        eps=spec.eps,
        mode=spec.mode,
        seed=streams.spawn(1).seed,
        on_event=sink,
        max_points=spec.max_points,
        max_candidates=spec.max_candidates,
        strict=spec.strict is not False,
    )
    report = RunReport(
        "clustering-game",
        spec.d,
        spec.K,
        spec.alg,
        spec.seed,
        result.alg_count,
        result.opt,
        {name: count == 0 for name, count in result.failures.items()},
        rounds_summary(result),
    )
    return TrialResult(report, dict(result.failures), events)


@define
class DuelResult:
    reports: List[RunReport]
    summary: DuelSummary


@minject.define
class DuelRunner:
    """Plays repeated adversary games, optionally across worker processes."""

    oracle: OracleService = minject.field(binding=inject.reference(OracleService))
    workers: int = minject.field(binding=inject.nested_config("duel.workers", 1))
    master_seed: int = minject.field(binding=inject.nested_config("duel.master_seed", 0))
    epsilon: str = minject.field(binding=inject.nested_config("clustering_game.epsilon", "1/4"))
    rho: Optional[str] = minject.field(binding=inject.nested_config("clustering_game.rho", None))
    mode: str = minject.field(binding=inject.nested_config("clustering_game.mode", "det"))

    def specs(
        self,
        adversary: str,
        alg: str,
        d: int,
        K: int = 4,  # pylint: disable=invalid-name
        trials: int = 1,
        seed: Optional[int] = None,
        rho: Optional[str] = None,
        eps: Optional[str] = None,
        mode: Optional[str] = None,
        strict: Optional[bool] = None,
        log: bool = False,
    ) -> List[TrialSpec]:
        if adversary not in ADVERSARIES:
            raise ValueError(f"unknown adversary {adversary!r}; choose from {', '.join(ADVERSARIES)}")
        if trials < 1:
            raise ValueError(f"trials must be positive, got {trials}")
        master = self.master_seed if seed is None else seed
        chosen_rho = rho if rho is not None else self.rho
        return [
            TrialSpec(
                adversary=adversary,
                alg=alg,
                d=d,
                K=K,
                seed=derive_seed(master, trial),
                rho=None if chosen_rho is None else str(chosen_rho),
                eps=str(eps if eps is not None else self.epsilon),
                mode=mode if mode is not None else self.mode,
                strict=strict,
                max_points=self.oracle.max_points,
                max_candidates=self.oracle.max_candidates,
                log=log,
            )
            for trial in range(trials)
        ]

    def _results(self, specs: List[TrialSpec]) -> Iterator[TrialResult]:
        if self.workers <= 1 or len(specs) == 1:
            return map(play_trial, specs)
        LOG.info("running %s trials on %s workers", len(specs), self.workers)
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            # map yields in submission order
            return iter(list(pool.map(play_trial, specs)))

    def run(self, specs: List[TrialSpec], on_event: Optional[EventSink] = None) -> DuelResult:
        summary = DuelSummary()
        reports = []
        for trial, result in enumerate(self._results(specs)):
            reports.append(result.report)
            summary.add(result.report.ratio, result.failures)
            if on_event is not None:
                for event in result.events:
                    on_event({"trial": trial, **event})
                if result.report.rounds:
                    on_event({"trial": trial, "rounds": list(result.report.rounds)})
            LOG.info("trial %s: %s/%s", trial, result.report.alg_count, result.report.opt)
        return DuelResult(reports, summary)
