import unittest
from fractions import Fraction

import pytest

import minject
from unitlab.clustering_game import VERDICTS
from unitlab.config import load_config
from unitlab.errors import OracleLimitError, UnknownFamilyError
from unitlab.instances import diagonal_pairs_instance, fig1_instance, gen_S1
from unitlab.lab import (
    DuelRunner,
    OracleService,
    Simulator,
    TrialSpec,
    play_trial,
    transcript_line,
)
from unitlab.oracle import DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_POINTS


@pytest.fixture(name="registry")
def fixture_registry() -> minject.Registry:
    return minject.initialize(load_config())


def _spec(adversary: str, alg: str, d: int, **kwargs) -> TrialSpec:
    fields = {
        "adversary": adversary,
        "alg": alg,
        "d": d,
        "K": 4,
        "seed": 0,
        "rho": None,
        "eps": "1/4",
        "mode": "det",
        "strict": None,
        "max_points": DEFAULT_MAX_POINTS,
        "max_candidates": DEFAULT_MAX_CANDIDATES,
        "log": False,
    }
    fields.update(kwargs)
    return TrialSpec(**fields)


class OracleServiceTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self.oracle = minject.initialize({"oracle": {"max_points": 20}})[OracleService]

    def test_formula_or_oracle(self) -> None:
        self.assertEqual(2, self.oracle.opt(diagonal_pairs_instance(5), "diagonal", 5))
        self.assertEqual(6, self.oracle.opt(fig1_instance(), "fig1"))
        self.assertEqual(6, self.oracle.opt(fig1_instance()))

    def test_limit_comes_from_config(self) -> None:
        with self.assertRaises(OracleLimitError):
            self.oracle.opt(gen_S1(2, 6))
        self.assertEqual(9, self.oracle.opt(gen_S1(2, 6), "s1", 6))


def test_transcript_line() -> None:
    assert transcript_line(3, "b4", 1, True, (Fraction(1, 2), Fraction(0))) == "3 b4 1 1 1/2 0"


def test_simulate_greedy_on_diagonal(registry: minject.Registry) -> None:
    result = registry[Simulator].run("greedy", diagonal_pairs_instance(5), family="diagonal", param=5, use_formula=True)
    report = result.report
    assert (report.alg_count, report.opt, report.ratio) == (5, 2, Fraction(5, 2))
    assert report.verdicts == {"alg_ge_opt": True}
    assert result.transcript[:2] == ["1 greedy 0 1 1 0", "2 greedy 0 0 0 0"]
    assert len(result.transcript) == 10


def test_simulate_rejects_formula_without_family(registry: minject.Registry) -> None:
    with pytest.raises(ValueError, match="closed-form"):
        registry[Simulator].run("grid", fig1_instance(), use_formula=True)


def test_simulate_uses_exact_oracle_by_default(registry: minject.Registry) -> None:
    report = registry[Simulator].run("grid", fig1_instance()).report
    assert (report.alg_count, report.opt, report.family) == (11, 6, "file")


def test_simulate_reweigh(registry: minject.Registry) -> None:
    result = registry[Simulator].run("reweigh", gen_S1(2, 4), seed=3)
    assert result.transcript[0].split()[1] == "b4"
    assert {"weight_cap", "coverage", "step4_bound", "alg_bound"} <= set(result.report.verdicts)
    assert result.report.ok
    again = registry[Simulator].run("reweigh", gen_S1(2, 4), seed=3)
    assert again.transcript == result.transcript


def test_simulate_rejects_bad_input(registry: minject.Registry) -> None:
    with pytest.raises(ValueError):
        registry[Simulator].run("greedy", [])
    with pytest.raises(UnknownFamilyError):
        registry[Simulator].run("nearest", gen_S1(1, 2))


class PlayTrialTestCase(unittest.TestCase):
    def test_covering(self) -> None:
        result = play_trial(_spec("covering", "centered", 2, log=True))
        self.assertEqual(("covering-game", 4, 1), (result.report.family, result.report.alg_count, result.report.opt))
        self.assertTrue(result.report.ok)
        self.assertFalse(any(result.failures.values()))
        self.assertEqual([1, 2, 3, 4], [event["step"] for event in result.events])

    def test_clustering(self) -> None:
        result = play_trial(_spec("clustering", "grid", 2))
        report = result.report
        self.assertEqual(("clustering-game", 4, 16, 4), (report.family, report.param, report.alg_count, report.opt))
        self.assertEqual([], result.events)
        self.assertEqual(set(VERDICTS), set(report.verdicts))
        self.assertTrue(report.ok)
        self.assertEqual(dict.fromkeys(VERDICTS, 0), result.failures)
        self.assertEqual([16], [row["expired"] for row in report.rounds])

    def test_lenient_clustering_records_clean_run(self) -> None:
        result = play_trial(_spec("clustering", "greedy", 2, strict=False))
        self.assertTrue(result.report.ok)
        self.assertFalse(any(result.failures.values()))

    @pytest.mark.slow
    def test_clustering_d4_k8_grid(self) -> None:
        report = play_trial(_spec("clustering", "grid", 4, K=8)).report
        self.assertEqual(2, len(report.rounds))
        self.assertEqual([4096, 4096], [row["points"] for row in report.rounds])
        self.assertEqual([1, 2], [row["round"] for row in report.rounds])
        self.assertLessEqual(sum(row["expired"] for row in report.rounds), report.alg_count)
        self.assertTrue(report.ok)
        self.assertEqual(Fraction(report.alg_count, report.opt), report.ratio)

    def test_randomized_trials_replay(self) -> None:
        spec = _spec("covering", "malicious", 2, seed=77, strict=False)
        self.assertEqual(play_trial(spec).report, play_trial(spec).report)


class DuelRunnerTestCase(unittest.TestCase):
    def test_specs(self) -> None:
        runner = minject.initialize(load_config(overrides={"duel": {"master_seed": 4}}))[DuelRunner]
        specs = runner.specs("clustering", "greedy", 2, trials=3, rho="1/2")
        self.assertEqual(3, len({spec.seed for spec in specs}))
        self.assertEqual(specs, runner.specs("clustering", "greedy", 2, trials=3, seed=4, rho="1/2"))
        self.assertEqual(("1/2", "1/4", "det"), (specs[0].rho, specs[0].eps, specs[0].mode))
        with self.assertRaises(ValueError):
            runner.specs("packing", "greedy", 2)
        with self.assertRaises(ValueError):
            runner.specs("covering", "centered", 2, trials=0)

    def test_run_folds_in_order(self) -> None:
        runner = minject.initialize(load_config())[DuelRunner]
        events = []
        result = runner.run(runner.specs("covering", "centered", 2, trials=2, log=True), on_event=events.append)
        self.assertEqual(2, result.summary.trials)
        self.assertEqual(Fraction(4), result.summary.mean)
        self.assertEqual([0] * 4 + [1] * 4, [event["trial"] for event in events])
        self.assertEqual(["covering-game"] * 2, [report.family for report in result.reports])

    def test_workers_match_sequential(self) -> None:
        sequential = minject.initialize(load_config())[DuelRunner]
        parallel = minject.initialize(load_config(overrides={"duel": {"workers": 2}}))[DuelRunner]
        specs = sequential.specs("covering", "malicious", 2, trials=3, strict=False)
        self.assertEqual(sequential.run(specs).reports, parallel.run(specs).reports)
