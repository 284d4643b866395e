"""Backward induction over the move lattice or the full move tree.

European payoffs collapse onto the lattice of exact partial sums, so the
state count per round grows polynomially; path-dependent payoffs price on
the full k^N tree behind an explicit size budget.  A pruned variant
re-selects the extremal pair only every q rounds and inherits it in
between, trading exactness for fewer distinct decisions.

All exact sums are tracked as integers on a common-denominator rescaling of
the moves (one-step weights do not change under a positive rescaling), and
are converted back to Fractions in the returned node keys.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .model import (
    BudgetError,
    GameSpec,
    MoveSpace,
    Payoff,
    PriceResult,
    RiskNeutralNode,
    Side,
    evaluate_payoff,
    is_path_dependent,
    payoff_value_on_path,
)
from .singlestep import clamp_position


@dataclass(frozen=True)
class LatticeLevel:
    """Reachable exact sums at one round, with their node values."""

    round: int
    states: dict[Fraction, float]


@dataclass(frozen=True)
class PruneSchedule:
    """Re-optimize the pair at rounds n with n % period == 0."""

    period: int

    def __post_init__(self) -> None:
        if self.period < 1:
            raise ValueError("prune period must be >= 1")


class _Pair(NamedTuple):
    i: int
    j: int
    d_neg: int          # negative move on the integer lattice
    d_pos: int          # positive move on the integer lattice
    w_neg: float
    w_pos: float
    span: float         # float(a_pos - a_neg)
    node: RiskNeutralNode


def _integer_lattice(moves: MoveSpace) -> tuple[int, list[_Pair]]:
    denom = math.lcm(*(a.denominator for a in moves.members))
    table = []
    for i, j in moves.pairs():
        node = RiskNeutralNode.from_pair(moves, i, j)
        a_neg, a_pos = moves.pair_moves(i, j)
        table.append(
            _Pair(
                i,
                j,
                int(a_neg * denom),
                int(a_pos * denom),
                float(node.prob_neg),
                float(node.prob_pos),
                float(a_pos - a_neg),
                node,
            )
        )
    return denom, table


def _reachable_sums(deltas: list[int], rounds: int) -> list[list[int]]:
    levels: list[list[int]] = [[0]]
    current = {0}
    for _ in range(rounds):
        current = {s + d for s in current for d in deltas}
        levels.append(sorted(current))
    return levels


def price_european(game: GameSpec, payoff: Payoff, side: Side) -> PriceResult:
    """Exact hedging price of a European payoff on the collapsed lattice."""
    if is_path_dependent(payoff):
        raise ValueError("use price_path_dependent for path-dependent payoffs")
    moves, rounds, scale = game.moves, game.rounds, game.payoff_scale
    denom, pairs = _integer_lattice(moves)
    deltas = sorted({p.d_neg for p in pairs} | {p.d_pos for p in pairs})
    levels = _reachable_sums(deltas, rounds)

    upper = side is Side.UPPER
    strategy: dict[tuple, float] = {}
    measure: dict[tuple, RiskNeutralNode] = {}
    node_values: dict[tuple, float] = {}
    member_deltas = [(int(a * denom), float(a)) for a in moves.members]

    values = {s: evaluate_payoff(payoff, scale * (s / denom)) for s in levels[rounds]}
    for s in levels[rounds]:
        node_values[(rounds, Fraction(s, denom))] = values[s]

    for n in range(rounds - 1, -1, -1):
        nxt = values
        values = {}
        for s in levels[n]:
            best = None
            best_pair = None
            for p in pairs:
                v = p.w_neg * nxt[s + p.d_neg] + p.w_pos * nxt[s + p.d_pos]
                if best is None or (v > best if upper else v < best):
                    best, best_pair = v, p
            assert best is not None and best_pair is not None
            values[s] = best
            key = (n, Fraction(s, denom))
            node_values[key] = best
            slope = (nxt[s + best_pair.d_pos] - nxt[s + best_pair.d_neg]) / best_pair.span
            strategy[key] = clamp_position(
                best, slope, ((fa, nxt[s + d]) for d, fa in member_deltas), side
            )
            measure[key] = best_pair.node

    return PriceResult(
        price=values[0],
        side=side,
        strategy=strategy,
        measure=measure,
        node_values=node_values,
        key_kind="lattice",
    )


def price_path_dependent(
    game: GameSpec, payoff: Payoff, side: Side, budget: int = 10**7
) -> PriceResult:
    """Hedging price on the full move tree (works for any payoff).

    Node keys are the move prefixes themselves.  Raises BudgetError when the
    tree would have more than ``budget`` leaves.
    """
    moves, rounds, scale = game.moves, game.rounds, game.payoff_scale
    k = moves.size
    leaves = k**rounds
    if leaves > budget:
        raise BudgetError(f"{leaves} leaves exceed the budget of {budget}")
    members = moves.members
    member_floats = [float(a) for a in members]
    _, pairs = _integer_lattice(moves)
    n_neg = moves.n_negative
    # index of each pair's moves in the ascending member order
    child_idx = [(n_neg - 1 - p.i, n_neg + p.j) for p in pairs]

    upper = side is Side.UPPER
    strategy: dict[tuple, float] = {}
    measure: dict[tuple, RiskNeutralNode] = {}
    node_values: dict[tuple, float] = {}

    values = [
        payoff_value_on_path(payoff, scale, path)
        for path in itertools.product(members, repeat=rounds)
    ]
    for path, v in zip(itertools.product(members, repeat=rounds), values):
        node_values[path] = v

    for n in range(rounds - 1, -1, -1):
        parent_values = []
        for idx, path in enumerate(itertools.product(members, repeat=n)):
            base = idx * k
            best = None
            best_pair = None
            best_ci = (0, 0)
            for p, ci in zip(pairs, child_idx):
                v = p.w_neg * values[base + ci[0]] + p.w_pos * values[base + ci[1]]
                if best is None or (v > best if upper else v < best):
                    best, best_pair, best_ci = v, p, ci
            assert best is not None and best_pair is not None
            parent_values.append(best)
            node_values[path] = best
            slope = (values[base + best_ci[1]] - values[base + best_ci[0]]) / best_pair.span
            strategy[path] = clamp_position(
                best, slope, zip(member_floats, values[base:base + k]), side
            )
            measure[path] = best_pair.node
        values = parent_values

    return PriceResult(
        price=values[0],
        side=side,
        strategy=strategy,
        measure=measure,
        node_values=node_values,
        key_kind="path",
    )


def price_pruned(game: GameSpec, payoff: Payoff, schedule: PruneSchedule) -> PriceResult:
    """Upper price with pair re-selection only at rounds n % period == 0.

    Between re-selection rounds the inherited pair is kept, so the state is
    (exact sum, inherited pair); at re-selection rounds the value does not
    depend on the inherited pair and the state collapses to (sum, None).
    period=1 reproduces the exact price; period=rounds prices every pair's
    binomial sub-model and takes the best.
    """
    if is_path_dependent(payoff):
        raise ValueError("pruned induction only applies to European payoffs")
    moves, rounds, scale = game.moves, game.rounds, game.payoff_scale
    q = schedule.period
    denom, pairs = _integer_lattice(moves)
    by_ij = {(p.i, p.j): p for p in pairs}

    def child_tag(n_next: int, pair_key: tuple[int, int]) -> tuple[int, int] | None:
        return None if (n_next % q == 0 or n_next == rounds) else pair_key

    # forward pass: reachable (sum, inherited pair) states per round
    states: list[set[tuple[int, tuple[int, int] | None]]] = [{(0, None)}]
    for n in range(rounds):
        nxt: set[tuple[int, tuple[int, int] | None]] = set()
        for s, tag in states[n]:
            options = pairs if n % q == 0 else [by_ij[tag]]
            for p in options:
                t = child_tag(n + 1, (p.i, p.j))
                nxt.add((s + p.d_neg, t))
                nxt.add((s + p.d_pos, t))
        states.append(nxt)

    strategy: dict[tuple, float] = {}
    measure: dict[tuple, RiskNeutralNode] = {}
    node_values: dict[tuple, float] = {}

    values: dict[tuple[int, tuple[int, int] | None], float] = {}
    for s, tag in states[rounds]:
        v = evaluate_payoff(payoff, scale * (s / denom))
        values[(s, tag)] = v
        node_values[(rounds, Fraction(s, denom), tag)] = v

    for n in range(rounds - 1, -1, -1):
        nxt = values
        values = {}
        for s, tag in sorted(states[n], key=lambda st: (st[0], st[1] or (-1, -1))):
            options = pairs if n % q == 0 else [by_ij[tag]]
            best = None
            best_pair = None
            for p in options:
                t = child_tag(n + 1, (p.i, p.j))
                v = p.w_neg * nxt[(s + p.d_neg, t)] + p.w_pos * nxt[(s + p.d_pos, t)]
                if best is None or v > best:
                    best, best_pair = v, p
            assert best is not None and best_pair is not None
            values[(s, tag)] = best
            key = (n, Fraction(s, denom), tag)
            node_values[key] = best
            t = child_tag(n + 1, (best_pair.i, best_pair.j))
            ups = nxt[(s + best_pair.d_pos, t)]
            downs = nxt[(s + best_pair.d_neg, t)]
            strategy[key] = (ups - downs) / best_pair.span
            measure[key] = best_pair.node

    return PriceResult(
        price=values[(0, None)],
        side=Side.UPPER,
        strategy=strategy,
        measure=measure,
        node_values=node_values,
        key_kind="pruned",
        prune_period=q,
    )


def extract_measure(result: PriceResult, game: GameSpec) -> dict[tuple, Fraction]:
    """Exact probabilities of the supported paths of the extremal measure.

    Zero-probability branches (the negative side of a pair whose positive
    move is 0) are omitted, so the keys are exactly the support and the
    probabilities sum to 1 exactly.
    """
    moves, rounds = game.moves, game.rounds
    out: dict[tuple, Fraction] = {}
    # stack entries: (path, exact sum, round, probability, inherited tag)
    stack: list[tuple[tuple, Fraction, int, Fraction, tuple | None]] = [
        ((), Fraction(0), 0, Fraction(1), None)
    ]
    q = result.prune_period
    while stack:
        path, s, n, prob, tag = stack.pop()
        if n == rounds:
            out[path] = prob
            continue
        if result.key_kind == "path":
            key: tuple = path
        elif result.key_kind == "pruned":
            key = (n, s, tag)
        else:
            key = (n, s)
        node = result.measure[key]
        i, j = node.pair
        a_neg, a_pos = moves.pair_moves(i, j)
        if result.key_kind == "pruned":
            assert q is not None
            child = None if ((n + 1) % q == 0 or n + 1 == rounds) else (i, j)
        else:
            child = None
        if node.prob_neg > 0:
            stack.append((path + (a_neg,), s + a_neg, n + 1, prob * node.prob_neg, child))
        if node.prob_pos > 0:
            stack.append((path + (a_pos,), s + a_pos, n + 1, prob * node.prob_pos, child))
    return out


def levels_from_result(result: PriceResult, game: GameSpec) -> list[LatticeLevel]:
    """Group a lattice result's node values into per-round levels."""
    if result.key_kind != "lattice":
        raise ValueError("levels are only defined for lattice-keyed results")
    levels = [LatticeLevel(n, {}) for n in range(game.rounds + 1)]
    for (n, s), v in result.node_values.items():
        levels[n].states[s] = v
    return levels
