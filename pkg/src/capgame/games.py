"""Finite normal-form games and their capacity extensions.

Payoff tensors are row-major with player 1's strategy the slowest axis, so
``payoffs[i].ravel()`` lines up with the product ground set used by
:func:`capgame.monad.tensor_n`.  The tensor is taken in the game's player
order; the nested tensor is not symmetric in its slots, so this order is
part of the definition of the payoffs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import Capacity, GroundSet, same_ground
from .errors import IndexOutOfRange, ValidationError
from .integrals import LOGIT, PsiMap, RealFunction, choquet, get_psi, sugeno_psi
from .monad import tensor_n


@dataclass(frozen=True, eq=False)
class Game:
    strategy_sets: tuple
    payoffs: tuple

    def __post_init__(self):
        sets = tuple(self.strategy_sets)
        if not sets:
            raise ValidationError("a game needs at least one player")
        shape = tuple(g.size for g in sets)
        payoffs = []
        for i, p in enumerate(self.payoffs):
            arr = np.array(p, dtype=float)
            if arr.shape != shape:
                raise ValidationError(
                    f"payoff tensor of player {i + 1} has shape {arr.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"payoff tensor of player {i + 1} has non-finite entries")
            arr.setflags(write=False)
            payoffs.append(arr)
        if len(payoffs) != len(sets):
            raise ValidationError(f"{len(sets)} players but {len(payoffs)} payoff tensors")
        object.__setattr__(self, "strategy_sets", sets)
        object.__setattr__(self, "payoffs", tuple(payoffs))

    @property
    def n_players(self) -> int:
        return len(self.strategy_sets)

    @property
    def shape(self) -> tuple:
        return tuple(g.size for g in self.strategy_sets)

    def payoff_function(self, i: int) -> RealFunction:
        """Player ``i``'s payoff as a function on the product ground set."""
        from .capacity import product_ground

        return RealFunction(product_ground(self.strategy_sets), self.payoffs[i].ravel())


def bimatrix(a, b, rows=None, cols=None) -> Game:
    a = np.asarray(a, dtype=float)
    rows = rows or [f"r{j}" for j in range(a.shape[0])]
    cols = cols or [f"c{j}" for j in range(a.shape[1])]
    return Game((GroundSet(rows), GroundSet(cols)), (a, b))


def payoff(game: Game, profile: Sequence[int]) -> tuple:
    """Payoff vector at a pure strategy tuple (0-based indices)."""
    profile = tuple(int(x) for x in profile)
    if len(profile) != game.n_players:
        raise IndexOutOfRange(f"profile has {len(profile)} entries for {game.n_players} players")
    for x, g in zip(profile, game.strategy_sets):
        g.check_index(x)
    return tuple(float(p[profile]) for p in game.payoffs)


def pure_nash(game: Game) -> list[tuple]:
    """All pure Nash points in lexicographic order of strategy tuples."""
    ok = np.ones(game.shape, dtype=bool)
    for i, p in enumerate(game.payoffs):
        ok &= p >= p.max(axis=i, keepdims=True)
    return [tuple(int(x) for x in idx) for idx in zip(*np.nonzero(ok))]


@dataclass(frozen=True)
class CapacityProfile:
    capacities: tuple

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(self.capacities))

    def check(self, game: Game) -> None:
        if len(self.capacities) != game.n_players:
            raise ValidationError(
                f"profile has {len(self.capacities)} capacities for {game.n_players} players"
            )
        for c, g in zip(self.capacities, game.strategy_sets):
            same_ground(g, c.ground)

    def replace(self, i: int, c: Capacity) -> "CapacityProfile":
        caps = list(self.capacities)
        caps[i] = c
        return CapacityProfile(tuple(caps))


def _as_profile(profile) -> CapacityProfile:
    return profile if isinstance(profile, CapacityProfile) else CapacityProfile(tuple(profile))


def sugeno_payoff(game: Game, i: int, profile, psi: PsiMap | str = LOGIT) -> float:
    """Sugeno expected payoff of player ``i``: psi-Sugeno of ``f_i`` against the tensor."""
    profile = _as_profile(profile)
    profile.check(game)
    joint = tensor_n(profile.capacities)
    return sugeno_psi(joint, RealFunction(joint.ground, game.payoffs[i].ravel()), get_psi(psi))


def choquet_payoff(game: Game, i: int, profile, psi=None) -> float:
    """Choquet expected payoff of player ``i`` against the same tensor; ``psi`` is ignored."""
    profile = _as_profile(profile)
    profile.check(game)
    joint = tensor_n(profile.capacities)
    return choquet(joint, RealFunction(joint.ground, game.payoffs[i].ravel()))


def bilinear_payoff(game: Game, i: int, weights: Sequence[Sequence[float]]) -> float:
    """Classical mixed-strategy expectation under independent probability weights."""
    total = 0.0
    for idx in itertools.product(*(range(n) for n in game.shape)):
        w = math.prod(weights[j][x] for j, x in enumerate(idx))
        total += w * float(game.payoffs[i][idx])
    return total


def random_game(shape: Sequence[int], rng: np.random.Generator, low: int = -5, high: int = 5) -> Game:
    """Integer-valued random game (exact floats, frequent ties)."""
    sets = tuple(GroundSet(tuple(f"s{j}" for j in range(n))) for n in shape)
    payoffs = tuple(rng.integers(low, high + 1, size=tuple(shape)).astype(float) for _ in shape)
    return Game(sets, payoffs)


PRISONERS_DILEMMA = bimatrix(
    [[-1, -3], [0, -2]], [[-1, 0], [-3, -2]], rows=["C", "D"], cols=["C", "D"]
)
MATCHING_PENNIES = bimatrix(
    [[1, -1], [-1, 1]], [[-1, 1], [1, -1]], rows=["H", "T"], cols=["H", "T"]
)
