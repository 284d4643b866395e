"""Closed-form one-step prices.

The one-step upper price of values v over a move space is the maximum over
(negative, positive) pairs of the two-point expectation

    (a_pos * v(a_neg) - a_neg * v(a_pos)) / (a_pos - a_neg)

and the lower price is the corresponding minimum.  The maximizing (resp.
minimizing) pair carries the extremal zero-mean measure and the optimal
one-step position.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from .model import MoveSpace, RiskNeutralNode, Side


def _best_pair(
    moves: MoveSpace, values: Mapping[Fraction, float], side: Side
) -> tuple[float, tuple[int, int], RiskNeutralNode]:
    missing = [a for a in moves.members if a not in values]
    if missing:
        raise ValueError(f"values missing for moves: {missing}")
    upper = side is Side.UPPER
    best: float | None = None
    best_pair = (0, 0)
    best_node: RiskNeutralNode | None = None
    for i, j in moves.pairs():
        node = RiskNeutralNode.from_pair(moves, i, j)
        a_neg, a_pos = moves.pair_moves(i, j)
        price = float(node.prob_neg) * values[a_neg] + float(node.prob_pos) * values[a_pos]
        if best is None or (price > best if upper else price < best):
            best, best_pair, best_node = price, (i, j), node
    assert best is not None and best_node is not None
    return best, best_pair, best_node


def upper_price_step(
    moves: MoveSpace, values: Mapping[Fraction, float]
) -> tuple[float, tuple[int, int], RiskNeutralNode]:
    """One-step upper price; returns (price, argmax pair, its measure)."""
    return _best_pair(moves, values, Side.UPPER)


def lower_price_step(
    moves: MoveSpace, values: Mapping[Fraction, float]
) -> tuple[float, tuple[int, int], RiskNeutralNode]:
    """One-step lower price; returns (price, argmin pair, its measure)."""
    return _best_pair(moves, values, Side.LOWER)


def step_price(moves: MoveSpace, values: Mapping[Fraction, float], side: Side) -> float:
    return _best_pair(moves, values, side)[0]


def clamp_position(
    alpha: float, slope: float, moves_values: Iterable[tuple[float, float]], side: Side
) -> float:
    """Project a candidate position into the band that replicates from alpha.

    Superreplication (UPPER) needs alpha + M*a >= v(a) at every move, i.e.
    M >= (v(a) - alpha)/a for positive moves and <= it for negative ones;
    subreplication (LOWER) swaps the directions.  The extremal pair's chord
    slope always lies in this band when the pair is the unique optimum, but
    ties (guaranteed when the smallest positive move is 0, where every pair
    prices to v(0)) can hand back a chord that violates a move outside the
    pair, so the slope is clamped against every move.
    """
    lo, hi = -math.inf, math.inf
    upper = side is Side.UPPER
    for a, v in moves_values:
        if a == 0.0:
            continue
        quotient = (v - alpha) / a
        if (a > 0.0) == upper:
            lo = max(lo, quotient)
        else:
            hi = min(hi, quotient)
    return min(max(slope, lo), hi)


def step_strategy(
    moves: MoveSpace, values: Mapping[Fraction, float], side: Side
) -> tuple[float, float, RiskNeutralNode]:
    """One-step price plus a replicating position.

    The position is the extremal pair's chord slope
    M = (v(a_pos) - v(a_neg)) / (a_pos - a_neg), clamped so that with the
    price alpha it satisfies alpha + M*a >= v(a) (<= for LOWER) at every
    move a, binding on the extremal pair (or on the clamping move).
    """
    price, (i, j), node = _best_pair(moves, values, side)
    a_neg, a_pos = moves.pair_moves(i, j)
    slope = (values[a_pos] - values[a_neg]) / float(a_pos - a_neg)
    slope = clamp_position(price, slope, ((float(a), values[a]) for a in moves.members), side)
    return price, slope, node
