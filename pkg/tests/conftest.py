from __future__ import annotations

import random
from fractions import Fraction

import pytest

from gamehedge import Butterfly, GameSpec, MoveSpace, PiecewiseLinear


@pytest.fixture
def trinomial() -> MoveSpace:
    return MoveSpace.from_moves([-1, 1, 2])


@pytest.fixture
def butterfly() -> Butterfly:
    return Butterfly(-0.5, 0.5, 1.5)


def random_move_space(rng: random.Random, max_moves: int = 3,
                      allow_zero: bool = True) -> MoveSpace:
    """Small random move space with rational moves (shared test helper)."""
    k = rng.randint(2, max_moves)
    n_neg = 1 if k == 2 else rng.randint(1, k - 1)

    def distinct(count: int) -> list[Fraction]:
        out: set[Fraction] = set()
        while len(out) < count:
            out.add(Fraction(rng.randint(1, 6), rng.randint(1, 4)))
        return sorted(out)

    negatives = [-a for a in distinct(n_neg)]
    positives = distinct(k - n_neg)
    if allow_zero and rng.random() < 0.2:
        positives[0] = Fraction(0)
    return MoveSpace.from_moves(negatives + positives)


def random_piecewise(rng: random.Random, max_points: int = 4) -> PiecewiseLinear:
    count = rng.randint(1, max_points)
    xs: set[Fraction] = set()
    while len(xs) < count:
        xs.add(Fraction(rng.randint(-24, 24), 8))
    points = tuple((float(x), rng.uniform(-2.0, 2.0)) for x in sorted(xs))
    return PiecewiseLinear(points, rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))


def random_game(rng: random.Random, max_rounds: int = 3, max_moves: int = 3) -> GameSpec:
    moves = random_move_space(rng, max_moves=max_moves)
    rounds = rng.randint(1, max_rounds)
    scale = 1.0 if rng.random() < 0.5 else rounds ** -0.5
    return GameSpec(moves, rounds, scale)
