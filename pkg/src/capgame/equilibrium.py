"""Grid discretization of capacity spaces and epsilon-Nash search.

Each player's strategy space is replaced by the finite set of capacities
with values in ``{0, 1/k, ..., 1}``.  A profile's epsilon is the largest
gain any single player can obtain by switching to another capacity of the
same grid; deviations outside the grid are not considered.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .capacity import Capacity, GroundSet, product_ground
from .errors import GridTooLarge, SearchTooLarge, ValidationError
from .games import CapacityProfile, Game, sugeno_payoff
from .integrals import LOGIT, PsiMap, get_psi, upper_levels
from .monad import tensor_value_table

GRID_LIMIT = 10**7
SEARCH_LIMIT = 10**8
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CapacityGrid:
    ground: GroundSet
    k: int
    capacities: tuple
    array: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.capacities)

    def __getitem__(self, i: int) -> Capacity:
        return self.capacities[i]

    def index(self, c: Capacity) -> int:
        lookup = self.__dict__.get("_lookup")
        if lookup is None:
            lookup = {cap.values: j for j, cap in enumerate(self.capacities)}
            object.__setattr__(self, "_lookup", lookup)
        try:
            return lookup[c.values]
        except KeyError:
            raise ValidationError("capacity is not a member of this grid")


def enumerate_capacities(ground: GroundSet, k: int, limit: int = GRID_LIMIT) -> CapacityGrid:
    """All capacities with values in ``{0, 1/k, ..., 1}``, lexicographic in the mask-ordered table."""
    if int(k) != k or k < 1:
        raise ValidationError(f"grid resolution k must be a positive integer, got {k!r}")
    k = int(k)
    n_sub = ground.n_subsets
    full = ground.full
    inner = list(range(1, full))
    subs = {m: [m ^ (1 << b) for b in range(ground.size) if m >> b & 1] for m in inner}
    units = [0] * n_sub
    units[full] = k
    rows: list[tuple] = []

    def rec(pos: int) -> None:
        if pos == len(inner):
            if len(rows) >= limit:
                raise GridTooLarge(
                    f"more than {limit} grid capacities on a {ground.size}-set at k={k}"
                )
            rows.append(tuple(units))
            return
        m = inner[pos]
        lo = max(units[s] for s in subs[m])
        for u in range(lo, k + 1):
            units[m] = u
            rec(pos + 1)
        units[m] = 0

    rec(0)
    arr = np.array(rows, dtype=float) / k
    arr.setflags(write=False)
    caps = tuple(Capacity._trusted(ground, tuple(float(x) for x in row)) for row in arr)
    return CapacityGrid(ground, k, caps, arr)


def _player_tables(arrays, sizes, payoffs, psi_name):
    psi = get_psi(psi_name)
    levels = [upper_levels(p) for p in payoffs]
    masks = sorted({m for lev in levels for _, m in lev})
    where = {m: a for a, m in enumerate(masks)}
    tensor = tensor_value_table(arrays, sizes, masks)
    tables = []
    for lev in levels:
        acc = None
        for v, m in lev:
            term = np.minimum(v, psi.eval_array(tensor[where[m]]))
            acc = term if acc is None else np.maximum(acc, term)
        tables.append(acc)
    return tables


def payoff_tables(game: Game, grids: Sequence[CapacityGrid], psi: PsiMap | str = LOGIT, workers: int = 1) -> list:
    """``tables[i][j_1, ..., j_n]`` is player ``i``'s Sugeno payoff at grid profile ``(j_1, ..., j_n)``.

    The first player's grid is split into contiguous blocks, one per task;
    blocks are concatenated in order, so the result does not depend on
    ``workers``.
    """
    psi = get_psi(psi)
    product_ground(game.strategy_sets)
    counts = [len(g) for g in grids]
    evaluations = math.prod(counts) * game.n_players
    if evaluations > SEARCH_LIMIT:
        raise SearchTooLarge(
            f"{evaluations} payoff evaluations exceed the limit {SEARCH_LIMIT}; lower k"
        )
    arrays = [g.array for g in grids]
    sizes = [g.ground.size for g in grids]
    payoffs = [tuple(p.ravel().tolist()) for p in game.payoffs]
    workers = max(1, int(workers))
    if workers == 1 or counts[0] < 2:
        return _player_tables(arrays, sizes, payoffs, psi.name)
    bounds = np.linspace(0, counts[0], min(workers, counts[0]) + 1).astype(int)
    jobs = [
        ([arrays[0][lo:hi]] + arrays[1:], sizes, payoffs, psi.name)
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_player_tables, *zip(*jobs)))
    return [np.concatenate([p[i] for p in parts], axis=0) for i in range(game.n_players)]


def profile_epsilons(tables: Sequence[np.ndarray]) -> np.ndarray:
    """Largest unilateral gain at every profile."""
    eps = None
    for i, t in enumerate(tables):
        gain = t.max(axis=i, keepdims=True) - t
        eps = gain if eps is None else np.maximum(eps, gain)
    return eps


@dataclass(frozen=True)
class GridSearch:
    game: Game
    k: int
    psi: str
    grids: tuple
    tables: tuple
    epsilons: np.ndarray

    @property
    def min_epsilon(self) -> float:
        return float(self.epsilons.min())


def grid_size(ground: GroundSet, k: int) -> int | None:
    """Closed-form grid size for grounds of at most two points, else None."""
    if ground.size == 1:
        return 1
    if ground.size == 2:
        return (k + 1) ** 2
    return None


def _search_grids(game: Game, k: int) -> tuple:
    """Enumerate every player's grid, refusing before the profile space exceeds the limit."""
    budget = SEARCH_LIMIT // game.n_players
    known = [grid_size(g, k) for g in game.strategy_sets]
    if math.prod(n for n in known if n is not None) > budget:
        raise SearchTooLarge(f"more than {SEARCH_LIMIT} payoff evaluations at k={k}; lower k")
    grids = []
    for g in game.strategy_sets:
        room = budget // max(1, math.prod(len(x) for x in grids))
        try:
            grids.append(enumerate_capacities(g, k, min(GRID_LIMIT, room)))
        except GridTooLarge:
            if room < GRID_LIMIT:
                raise SearchTooLarge(f"more than {SEARCH_LIMIT} payoff evaluations at k={k}; lower k")
            raise
    return tuple(grids)


def grid_search(game: Game, k: int, psi: PsiMap | str = LOGIT, workers: int = 1) -> GridSearch:
    psi = get_psi(psi)
    if int(k) != k or k < 1:
        raise ValidationError(f"grid resolution k must be a positive integer, got {k!r}")
    grids = _search_grids(game, int(k))
    tables = tuple(payoff_tables(game, grids, psi, workers))
    return GridSearch(game, k, psi.name, grids, tables, profile_epsilons(tables))


@dataclass(frozen=True)
class EquilibriumReport:
    indices: tuple
    capacities: tuple
    epsilon: float
    payoffs: tuple
    psi: str
    k: int


def reports_from(search: GridSearch, epsilon: float) -> list[EquilibriumReport]:
    out = []
    for idx in zip(*np.nonzero(search.epsilons <= epsilon)):
        idx = tuple(int(x) for x in idx)
        out.append(
            EquilibriumReport(
                indices=idx,
                capacities=tuple(g[j] for g, j in zip(search.grids, idx)),
                epsilon=float(search.epsilons[idx]),
                payoffs=tuple(float(t[idx]) for t in search.tables),
                psi=search.psi,
                k=search.k,
            )
        )
    return out


def find_epsilon_equilibria(
    game: Game, k: int, epsilon: float = 0.0, psi: PsiMap | str = LOGIT, workers: int = 1
) -> list[EquilibriumReport]:
    """Every grid profile whose epsilon is at most ``epsilon``, in index order."""
    if not epsilon >= 0:
        raise ValidationError(f"epsilon must be nonnegative, got {epsilon!r}")
    return reports_from(grid_search(game, k, psi, workers), epsilon)


def recompute_epsilon(game: Game, report: EquilibriumReport, grids: Sequence[CapacityGrid]) -> float:
    """Epsilon of a report recomputed profile by profile with the scalar payoff path."""
    profile = CapacityProfile(report.capacities)
    worst = 0.0
    for i in range(game.n_players):
        own = sugeno_payoff(game, i, profile, report.psi)
        best = max(sugeno_payoff(game, i, profile.replace(i, d), report.psi) for d in grids[i])
        worst = max(worst, best - own)
    return worst


def best_response_values(game: Game, i: int, profile, grid: CapacityGrid, psi: PsiMap | str = LOGIT) -> np.ndarray:
    """Player ``i``'s payoff for every grid capacity, opponents fixed by ``profile``."""
    psi = get_psi(psi)
    caps = profile.capacities if isinstance(profile, CapacityProfile) else tuple(profile)
    arrays = [
        grid.array if j == i else np.array([c.values], dtype=float) for j, c in enumerate(caps)
    ]
    sizes = [g.size for g in game.strategy_sets]
    payoffs = [tuple(game.payoffs[i].ravel().tolist())]
    (table,) = _player_tables(arrays, sizes, payoffs, psi.name)
    return table.reshape(len(grid))


def best_response_set(game: Game, i: int, profile, grid: CapacityGrid, psi: PsiMap | str = LOGIT) -> list[int]:
    """Indices of all grid capacities attaining player ``i``'s best payoff (ties within 1e-12)."""
    vals = best_response_values(game, i, profile, grid, psi)
    return [int(j) for j in np.nonzero(vals >= vals.max() - TIE_TOL)[0]]


@dataclass(frozen=True)
class DynamicsStep:
    iteration: int
    player: int
    previous: int
    chosen: int
    payoff: float


@dataclass(frozen=True)
class DynamicsTrace:
    steps: tuple
    outcome: str
    profile: tuple
    epsilon: float
    cycle_start: int | None = None


def best_response_dynamics(
    game: Game,
    k: int,
    start: Sequence[int],
    max_iter: int = 100,
    psi: PsiMap | str = LOGIT,
) -> DynamicsTrace:
    """Sequential best responses over the grid.

    A player whose current capacity is already a best response keeps it;
    otherwise it moves to the best response with the smallest grid index.
    Stops at a grid profile with epsilon 0 (``"fixed-point"``), at the first
    repeated profile between sweeps (``"cycle"``) or after ``max_iter``
    sweeps (``"max-iter"``).
    """
    psi = get_psi(psi)
    grids = [enumerate_capacities(g, k) for g in game.strategy_sets]
    state = [int(s) for s in start]
    if len(state) != game.n_players:
        raise ValidationError(f"start profile needs {game.n_players} indices")
    for s, g in zip(state, grids):
        if not 0 <= s < len(g):
            raise ValidationError(f"start index {s} outside a grid of {len(g)} capacities")

    def caps():
        return [g[s] for g, s in zip(grids, state)]

    def epsilon():
        worst = 0.0
        for i, g in enumerate(grids):
            vals = best_response_values(game, i, caps(), g, psi)
            worst = max(worst, float(vals.max() - vals[state[i]]))
        return worst

    steps = []
    seen = {tuple(state): 0}
    for it in range(1, max_iter + 1):
        eps = epsilon()
        if eps <= TIE_TOL:
            return DynamicsTrace(tuple(steps), "fixed-point", tuple(state), eps)
        for i, g in enumerate(grids):
            vals = best_response_values(game, i, caps(), g, psi)
            best = vals.max()
            prev = state[i]
            if vals[prev] < best - TIE_TOL:
                state[i] = int(np.nonzero(vals >= best - TIE_TOL)[0][0])
            steps.append(DynamicsStep(it, i, prev, state[i], float(vals[state[i]])))
        key = tuple(state)
        if key in seen:
            eps = epsilon()
            outcome = "fixed-point" if eps <= TIE_TOL else "cycle"
            return DynamicsTrace(tuple(steps), outcome, key, eps, None if outcome == "fixed-point" else seen[key])
        seen[key] = it
    return DynamicsTrace(tuple(steps), "max-iter", tuple(state), epsilon())


@dataclass(frozen=True)
class RefinementRow:
    k: int
    min_epsilon: float
    minimizers: int
    wall_time: float


def refinement_study(game: Game, ks: Sequence[int], psi: PsiMap | str = LOGIT, workers: int = 1) -> list[RefinementRow]:
    rows = []
    for k in ks:
        t0 = time.perf_counter()
        search = grid_search(game, k, psi, workers)
        best = search.min_epsilon
        count = int(np.count_nonzero(search.epsilons <= best + TIE_TOL))
        rows.append(RefinementRow(int(k), best, count, time.perf_counter() - t0))
    return rows
