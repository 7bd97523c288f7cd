import math
import unittest
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tests.test_lab_helpers import P, brute_force_opt
from unitlab.errors import DimensionMismatchError, OracleLimitError, UnknownFamilyError
from unitlab.geometry import Box, Point
from unitlab.instances import diagonal_pairs_instance, gen_S1, generate, grid_tight_instance, random_lattice_instance
from unitlab.oracle import (
    CoverSolution,
    build_candidates,
    exact_opt,
    grid_shift_solution,
    opt_upper_via_shifts,
    structured_opt,
)
from unitlab.rng import RngStream


class CandidateTestCase(unittest.TestCase):
    def test_dominated_cubes_are_dropped(self) -> None:
        cset = build_candidates([P(0), P(1)])
        self.assertEqual([P(0)], cset.candidates)
        self.assertEqual((0b11,), cset.masks)
        self.assertEqual(Box((0,), (1,)), cset.cube(0))

    def test_duplicates_collapse(self) -> None:
        cset = build_candidates([P("1/2"), P("1/2"), P("1/2")])
        self.assertEqual(((1,),), cset.points)
        self.assertEqual(2, cset.scale)

    def test_limits(self) -> None:
        with self.assertRaises(OracleLimitError):
            build_candidates(gen_S1(2, 4), max_points=15)
        with self.assertRaises(OracleLimitError):
            build_candidates(gen_S1(2, 4), max_candidates=3)
        with self.assertRaises(DimensionMismatchError):
            build_candidates([P(0), P(0, 0)])


class ExactOptTestCase(unittest.TestCase):
    def test_empty(self) -> None:
        self.assertEqual(CoverSolution((), ()), exact_opt([]))

    def test_s1(self) -> None:
        points = gen_S1(2, 4)
        solution = exact_opt(points)
        self.assertEqual(4, solution.size)
        self.assertTrue(solution.is_valid(points))
        self.assertEqual(sorted(c.lo for c in solution.cubes), [c.lo for c in solution.cubes])

    def test_known_instances(self) -> None:
        self.assertEqual(2, exact_opt(diagonal_pairs_instance(5)).size)
        self.assertEqual(1, exact_opt(grid_tight_instance(3)).size)
        self.assertEqual(2, exact_opt([P(0), P("1/2"), P("3/2"), P("7/4")]).size)

    def test_invalid_solutions(self) -> None:
        solution = exact_opt([P(0)])
        self.assertFalse(solution.is_valid([P(0), P(1)]))
        self.assertFalse(CoverSolution((Box.unit_cube((0,)),), (0,)).is_valid([P(2)]))
        self.assertFalse(CoverSolution((Box((0,), (2,)),), (0,)).is_valid([P(1)]))

    def test_too_large(self) -> None:
        with self.assertRaises(OracleLimitError):
            exact_opt(gen_S1(2, 10))


class ShiftedSolutionTestCase(unittest.TestCase):
    def test_s1_shifts(self) -> None:
        points = gen_S1(2, 6)
        self.assertEqual(9, grid_shift_solution(points, (0, 0)).size)
        self.assertEqual(12, grid_shift_solution(points, (1, 0)).size)
        self.assertEqual(16, grid_shift_solution(points, (1, 1)).size)
        self.assertEqual(9, opt_upper_via_shifts(points))

    def test_cells_are_odd_cornered(self) -> None:
        solution = grid_shift_solution([P(2, 1), P(1, 2)], (0, 0))
        self.assertEqual((Box.unit_cube((1, 1)),), solution.cubes)
        self.assertEqual((0, 0), solution.assignment)
        shifted = grid_shift_solution([P(2, 1)], (1, 0))
        self.assertEqual((Box.unit_cube((2, 1)),), shifted.cubes)

    def test_gap_between_cells(self) -> None:
        # 5/4 - 1 lies in the open gap (0, 1)
        self.assertIsNone(grid_shift_solution([P("5/4", 1)], (1, 0)))
        self.assertEqual(1, grid_shift_solution([P("5/4", 1)], (0, 0)).size)
        # each shift leaves one of the two points in a gap
        self.assertEqual(math.inf, opt_upper_via_shifts([P("1/4"), P("5/4")]))

    def test_empty_and_mismatch(self) -> None:
        self.assertEqual(0, opt_upper_via_shifts([]))
        with self.assertRaises(DimensionMismatchError):
            grid_shift_solution([P(1, 1)], (0,))


class StructuredOptTestCase(unittest.TestCase):
    def test_formulas(self) -> None:
        self.assertEqual(4, structured_opt("s1", 2, 4))
        self.assertEqual(27, structured_opt("s1", 3, 6))
        self.assertEqual(25, structured_opt("barycentric", 2, 12))
        self.assertEqual(1, structured_opt("diagonal", 2, 1))
        self.assertEqual(2, structured_opt("diagonal", 2, 5))
        self.assertEqual(1, structured_opt("grid-tight", 4))
        self.assertEqual(1, structured_opt("covering-game", 3))

    def test_errors(self) -> None:
        with self.assertRaises(ValueError):
            structured_opt("s1", 2, 5)
        with self.assertRaises(ValueError):
            structured_opt("barycentric", 2, 6)
        with self.assertRaises(UnknownFamilyError):
            structured_opt("fig1", 2)


def _points(d: int):
    quarter = st.integers(min_value=0, max_value=8).map(lambda k: Fraction(k, 4))
    return st.lists(st.lists(quarter, min_size=d, max_size=d).map(Point), min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 2]).flatmap(_points))
def test_matches_brute_force(points) -> None:
    solution = exact_opt(points)
    assert solution.is_valid(points)
    assert solution.size == brute_force_opt(points)


@pytest.mark.parametrize(("d", "K"), [(1, 6), (2, 4), (3, 2)], ids=["d1", "d2", "d3"])
def test_s1_formula_matches_oracle(d: int, K: int) -> None:
    assert exact_opt(gen_S1(d, K)).size == structured_opt("s1", d, K)


@pytest.mark.parametrize(
    ("family", "d", "param"),
    [
        ("s1", 2, 4),
        ("s1", 2, 6),
        ("s1", 2, 8),
        ("s1", 3, 4),
        ("diagonal", 2, 1),
        ("diagonal", 2, 10),
        ("diagonal", 2, 30),
        ("grid-tight", 3, 0),
        ("barycentric", 2, 4),
    ],
    ids=["s1-d2-K4", "s1-d2-K6", "s1-d2-K8", "s1-d3-K4", "diag-1", "diag-10", "diag-30", "tight-d3", "bary-d2-K4"],
)
def test_families_match_their_formula(family: str, d: int, param: int) -> None:
    assert exact_opt(generate(family, d, param)).size == structured_opt(family, d, param)


@pytest.mark.slow
def test_barycentric_d3_matches_formula() -> None:
    points = generate("barycentric", 3, 4)
    assert exact_opt(points, max_points=len(points)).size == structured_opt("barycentric", 3, 4) == 9


def _cp_sat_opt(points) -> int:
    cp_model = pytest.importorskip("ortools.sat.python.cp_model")
    cset = build_candidates(points, max_points=len(points))
    model = cp_model.CpModel()
    chosen = [model.NewBoolVar(f"cube_{k}") for k in range(len(cset.masks))]
    for i in range(len(cset.points)):
        model.Add(sum(var for var, mask in zip(chosen, cset.masks) if mask >> i & 1) >= 1)
    model.Minimize(sum(chosen))
    solver = cp_model.CpSolver()
    solver.parameters.num_search_workers = 1
    assert solver.Solve(model) == cp_model.OPTIMAL
    return round(solver.ObjectiveValue())


@pytest.mark.parametrize("seed", range(10), ids=[f"seed{s}" for s in range(10)])
def test_search_agrees_with_cp_sat(seed: int) -> None:
    d = 2 + seed % 2
    points = random_lattice_instance(d, 25, 4, RngStream(seed))
    assert exact_opt(points).size == _cp_sat_opt(points)


def test_search_agrees_with_cp_sat_on_barycentric() -> None:
    points = generate("barycentric", 2, 8)
    assert exact_opt(points).size == _cp_sat_opt(points) == 13
