"""Finite abstract convexities and checkers for their separation and Helly properties.

Members of a convexity are subset masks over a :class:`GroundSet`.  These
checkers test definitions only.  On finite sets nothing here says anything
about fixed points or equilibria.

Linked subfamilies are taken among nonempty members: the empty set meets
nothing, so a family containing it is linked only when it is ``{empty}``,
and counting that one would make every convexity non-binary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .capacity import GroundSet, product_ground, same_ground
from .errors import (
    FamilyTooLarge,
    MissingSingleton,
    MissingTrivial,
    NotIntersectionStable,
)
from .integrals import RealFunction, upper_levels

FAMILY_LIMIT = 24


@dataclass(frozen=True)
class Convexity:
    ground: GroundSet
    family: frozenset

    def __post_init__(self):
        fam = frozenset(int(m) for m in self.family)
        object.__setattr__(self, "family", fam)
        for m in fam:
            self.ground.check_mask(m)
        if 0 not in fam or self.ground.full not in fam:
            raise MissingTrivial("a convexity must contain the empty set and the whole set")
        for i in range(self.ground.size):
            if 1 << i not in fam:
                raise MissingSingleton(f"singleton {{{self.ground.labels[i]}}} is not convex")
        members = sorted(fam)
        for a, b in itertools.combinations(members, 2):
            if a & b not in fam:
                raise NotIntersectionStable(
                    f"{self.ground.format(a)} & {self.ground.format(b)} = "
                    f"{self.ground.format(a & b)} is not a member",
                    first=a,
                    second=b,
                )

    def members(self) -> list[int]:
        return sorted(self.family)

    def nonempty(self) -> list[int]:
        return sorted(m for m in self.family if m)

    def __contains__(self, mask: int) -> bool:
        return mask in self.family


def make_convexity(ground: GroundSet, family: Iterable) -> Convexity:
    """Validate a family given as masks or label collections (nothing is added)."""
    masks = []
    for member in family:
        if isinstance(member, (int, np.integer)):
            masks.append(ground.check_mask(int(member)))
        else:
            masks.append(ground.mask(member))
    return Convexity(ground, frozenset(masks))


def closure(ground: GroundSet, generators: Iterable[int]) -> Convexity:
    """Smallest convexity containing ``generators``: add trivial sets and singletons, close under intersection."""
    fam = {0, ground.full} | {1 << i for i in range(ground.size)} | {int(g) for g in generators}
    frontier = list(fam)
    while frontier:
        new = []
        for a in frontier:
            for b in list(fam):
                c = a & b
                if c not in fam:
                    fam.add(c)
                    new.append(c)
        frontier = new
    return Convexity(ground, frozenset(fam))


def power_set_convexity(ground: GroundSet) -> Convexity:
    return Convexity(ground, frozenset(range(ground.n_subsets)))


def interval_convexity(ground: GroundSet) -> Convexity:
    """Contiguous runs ``{i, ..., j}`` of the ground order, plus the empty set."""
    n = ground.size
    fam = {0}
    for i in range(n):
        for j in range(i, n):
            fam.add(((1 << (j + 1)) - 1) ^ ((1 << i) - 1))
    return Convexity(ground, frozenset(fam))


def _screens(conv: Convexity, a: int, b: int) -> bool:
    """Some members S1, S2 cover the ground with ``a & S2 == 0`` and ``b & S1 == 0``."""
    full = conv.ground.full
    s1_options = [s for s in conv.family if s & b == 0]
    s2_options = [s for s in conv.family if s & a == 0]
    return any(s1 | s2 == full for s1 in s1_options for s2 in s2_options)


def is_T2(conv: Convexity) -> bool:
    n = conv.ground.size
    return all(
        _screens(conv, 1 << i, 1 << j) for i in range(n) for j in range(n) if i != j
    )


def is_T4(conv: Convexity) -> bool:
    members = conv.members()
    return all(_screens(conv, a, b) for a in members for b in members if a & b == 0)


def is_linked(family: Iterable[int]) -> bool:
    fam = list(family)
    return all(a & b for a, b in itertools.combinations(fam, 2)) and all(fam)


def _check_size(conv: Convexity, limit: int) -> None:
    if len(conv.family) > limit:
        raise FamilyTooLarge(
            f"family has {len(conv.family)} members; the exhaustive search is capped at {limit}"
        )


def binary_witness(conv: Convexity, limit: int = FAMILY_LIMIT) -> tuple | None:
    """A linked subfamily with empty intersection, or None if the convexity is binary.

    Any linked subfamily extends to a maximal one with a no larger
    intersection, so only maximal cliques of the meets-graph are checked.
    """
    _check_size(conv, limit)
    members = conv.nonempty()
    graph = nx.Graph()
    graph.add_nodes_from(members)
    graph.add_edges_from((a, b) for a, b in itertools.combinations(members, 2) if a & b)
    for clique in nx.find_cliques(graph):
        common = conv.ground.full
        for m in clique:
            common &= m
        if not common:
            return tuple(sorted(clique))
    return None


def is_binary(conv: Convexity, limit: int = FAMILY_LIMIT) -> bool:
    return binary_witness(conv, limit) is None


def _meet(masks, full):
    out = full
    for m in masks:
        out &= m
    return out


def helly_number(conv: Convexity, limit: int = FAMILY_LIMIT) -> int:
    """Smallest ``h >= 1`` such that pairwise-``h``-intersecting subfamilies always meet.

    Equals the size of the largest subfamily of nonempty members whose
    intersection is empty while every proper subfamily meets (1 if there
    is none).  Such a family has a private point per member, so its size is
    at most the ground size; sizes are searched from the top down.
    """
    _check_size(conv, limit)
    members = conv.nonempty()
    full = conv.ground.full
    for size in range(min(conv.ground.size, len(members)), 1, -1):
        for combo in itertools.combinations(members, size):
            if _meet(combo, full):
                continue
            if all(_meet(combo[:i] + combo[i + 1:], full) for i in range(size)):
                return size
    return 1


def hull(conv: Convexity, A: int) -> int:
    """Smallest member containing the mask ``A``."""
    conv.ground.check_mask(A)
    out = conv.ground.full
    for m in conv.family:
        if m & A == A:
            out &= m
    return out


def is_quasi_concave(f: RealFunction, conv: Convexity) -> bool:
    """Every upper level set ``{f >= v}`` is a member."""
    same_ground(f.ground, conv.ground)
    return all(mask in conv.family for _, mask in upper_levels(f.values))


def product_convexity(convexities: Sequence[Convexity]) -> Convexity:
    """All boxes ``C_1 x ... x C_n`` on the row-major product ground.

    The family is closed under intersection but not under union; a
    diagonal, for instance, is never a member.
    """
    ground = product_ground([c.ground for c in convexities])
    sizes = [c.ground.size for c in convexities]

    def box(masks):
        out = 0
        for idx, combo in enumerate(itertools.product(*(range(n) for n in sizes))):
            if all(m >> x & 1 for m, x in zip(masks, combo)):
                out |= 1 << idx
        return out

    fam = frozenset(box(ms) for ms in itertools.product(*(c.members() for c in convexities)))
    return Convexity(ground, fam)


def random_convexity(ground: GroundSet, rng: np.random.Generator, n_generators: int) -> Convexity:
    gens = rng.integers(1, ground.n_subsets, size=n_generators)
    return closure(ground, (int(g) for g in gens))


@dataclass(frozen=True)
class ImplicationCounts:
    samples: int
    binary_t2: int
    binary_t2_t4: int


def binary_t2_normality_study(
    ground_size: int, samples: int, rng: np.random.Generator, n_generators: int = 6, limit: int = FAMILY_LIMIT
) -> ImplicationCounts:
    """Count random convexities that are binary and T2, and how many of those are also T4.

    Convexities whose family exceeds ``limit`` are skipped, not counted;
    ``samples`` may therefore not be reached if nearly all draws are skipped.
    """
    ground = GroundSet.range(ground_size)
    seen = both = normal = 0
    for _ in range(100 * samples):
        if seen == samples:
            break
        conv = random_convexity(ground, rng, n_generators)
        if len(conv.family) > limit:
            continue
        seen += 1
        if is_T2(conv) and is_binary(conv, limit):
            both += 1
            normal += is_T4(conv)
    return ImplicationCounts(seen, both, normal)
