from fractions import Fraction

import minject

from unitlab import Greedy, exact_opt, gen_S1
from unitlab.algorithms import Centered
from unitlab.config import load_config
from unitlab.covering_game import covering_game_run
from unitlab.lab import Simulator

if __name__ == "__main__":
    points = gen_S1(2, 6)
    greedy = Greedy(2)
    for p in points:
        greedy.insert(p)
    assert greedy.count == 9, "greedy keeps the odd cells of the lattice"
    assert exact_opt(points).size == 9, "the odd cells are optimal"

    registry = minject.initialize(load_config(overrides={"oracle": {"max_points": 40}}))
    result = registry[Simulator].run("grid", points)
    assert result.report.ratio == 4, "grid opens one cluster per lattice point"

    game = covering_game_run(3, Centered(3))
    assert game.ratio == Fraction(8), "the cube game forces 2**d cubes"

    print("quick start example tests passed!")
