"""Capacities (normalized monotone set functions) on finite ground sets.

Subsets of a ground set are encoded as integer bit masks: bit ``i`` is set
iff the element with index ``i`` belongs to the subset.  A capacity stores
its values densely, ``values[mask]`` for every mask in ``range(2 ** size)``.

On a finite discrete space every subset is closed and open, so the upper
semicontinuity axiom of a capacity holds automatically and the extension of
a capacity to open sets is the identity.  Neither is checked or implemented
separately.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadWeights,
    GroundMismatch,
    GroundTooLarge,
    IndexOutOfRange,
    NotMonotone,
    NotNormalized,
    OutOfRange,
    ProductTooLarge,
    ValidationError,
)

DEFAULT_MAX_SUBSETS = 2**20
ADDITIVITY_TOL = 1e-12


def max_subsets() -> int:
    """Subset-lattice size guard; ``CAPGAME_MAX_SUBSETS`` overrides 2**20."""
    raw = os.environ.get("CAPGAME_MAX_SUBSETS")
    if raw is None:
        return DEFAULT_MAX_SUBSETS
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"CAPGAME_MAX_SUBSETS must be an integer, got {raw!r}")
    if value < 2:
        raise ValidationError("CAPGAME_MAX_SUBSETS must be at least 2")
    return value


def max_ground_size() -> int:
    return max_subsets().bit_length() - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits_of(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def submasks(mask: int):
    """Yield every submask of ``mask``, including ``mask`` and 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class GroundSet:
    """An ordered finite set of pure strategies (any hashable labels)."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValidationError("a ground set needs at least one element")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"ground set labels are not distinct: {labels!r}")
        limit = max_ground_size()
        if len(labels) > limit:
            raise GroundTooLarge(
                f"ground set of size {len(labels)} exceeds the limit {limit} "
                f"(2^{limit} subsets; raise CAPGAME_MAX_SUBSETS to override)"
            )
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def of(cls, *labels: Hashable) -> "GroundSet":
        return cls(labels)

    @classmethod
    def range(cls, n: int) -> "GroundSet":
        return cls(tuple(range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return (1 << len(self.labels)) - 1

    @property
    def n_subsets(self) -> int:
        return 1 << len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise IndexOutOfRange(f"{label!r} is not an element of {self.labels!r}")

    def mask(self, labels: Iterable[Hashable]) -> int:
        m = 0
        for lab in labels:
            m |= 1 << self.index(lab)
        return m

    def members(self, mask: int) -> tuple:
        return tuple(self.labels[i] for i in bits_of(mask))

    def check_mask(self, mask: int) -> int:
        if not 0 <= mask <= self.full:
            raise IndexOutOfRange(f"subset mask {mask} is not a subset of a {self.size}-set")
        return mask

    def check_index(self, i: int) -> int:
        if not 0 <= i < self.size:
            raise IndexOutOfRange(f"index {i} out of range for a ground set of size {self.size}")
        return i

    def format(self, mask: int) -> str:
        return "{" + ",".join(_fmt_label(x) for x in self.members(mask)) + "}"


def _fmt_label(label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(_fmt_label(x) for x in label) + ")"
    return str(label)


def product_ground(factors: Sequence[GroundSet]) -> GroundSet:
    """Cartesian product in row-major order (first factor slowest).

    Element ``(x_1, ..., x_n)`` has index ``((x_1 * n_2 + x_2) * n_3 + ...)``
    and its label is the tuple of factor labels.
    """
    total = math.prod(f.size for f in factors)
    limit = max_ground_size()
    if total > limit:
        raise ProductTooLarge(
            f"product ground set has {total} elements; at most {limit} are allowed "
            f"(2^{limit} subsets; raise CAPGAME_MAX_SUBSETS to override)"
        )
    return GroundSet(tuple(itertools.product(*(f.labels for f in factors))))


def _validate_values(ground: GroundSet, values: tuple) -> None:
    n_sub = ground.n_subsets
    if len(values) != n_sub:
        raise ValidationError(
            f"a capacity on a {ground.size}-set needs {n_sub} values, got {len(values)}"
        )
    for mask, v in enumerate(values):
        if not (0.0 <= v <= 1.0):
            raise OutOfRange(f"value {v!r} of {ground.format(mask)} is outside [0,1]")
    if values[0] != 0.0:
        raise NotNormalized(f"c(empty set) must be 0, got {values[0]!r}")
    if ground.size <= 8:
        for mask in range(1, n_sub):
            v = values[mask]
            m = mask
            while m:
                low = m & -m
                smaller = mask ^ low
                if values[smaller] > v:
                    raise _not_monotone(ground, values, smaller, mask)
                m ^= low
    else:
        arr = np.asarray(values)
        idx = np.arange(n_sub)
        for bit in range(ground.size):
            has = idx[(idx >> bit) & 1 == 1]
            bad = np.nonzero(arr[has ^ (1 << bit)] > arr[has])[0]
            if bad.size:
                larger = int(has[bad[0]])
                raise _not_monotone(ground, values, larger ^ (1 << bit), larger)
    if values[-1] != 1.0:
        raise NotNormalized(f"c(whole set) must be 1, got {values[-1]!r}")


def _not_monotone(ground, values, smaller, larger):
    return NotMonotone(
        f"monotonicity fails: c({ground.format(smaller)}) = {values[smaller]!r} > "
        f"c({ground.format(larger)}) = {values[larger]!r}",
        smaller=smaller,
        larger=larger,
    )


@dataclass(frozen=True)
class Capacity:
    """A normalized monotone set function, ``values[mask]`` per subset.

    Construction validates range, normalization and monotonicity; use
    :func:`make_capacity` to build one from a sparse table.
    """

    ground: GroundSet
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        _validate_values(self.ground, values)

    @classmethod
    def _trusted(cls, ground: GroundSet, values) -> "Capacity":
        # Skips validation; only for outputs that are valid by construction.
        obj = object.__new__(cls)
        object.__setattr__(obj, "ground", ground)
        object.__setattr__(obj, "values", tuple(values))
        return obj

    def __getitem__(self, mask: int) -> float:
        return self.values[mask]

    def value(self, subset) -> float:
        """Value on a subset given as a mask or as an iterable of labels."""
        if isinstance(subset, (int, np.integer)):
            return self.values[self.ground.check_mask(int(subset))]
        return self.values[self.ground.mask(subset)]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def table(self) -> dict:
        """Mapping from label tuples to values, in mask order."""
        return {self.ground.members(m): v for m, v in enumerate(self.values)}


def make_capacity(ground: GroundSet, values) -> Capacity:
    """Build a validated capacity.

    ``values`` is either a dense sequence indexed by mask or a mapping whose
    keys are masks or iterables of labels; a mapping must cover every
    subset.
    """
    if isinstance(values, Mapping):
        dense = [None] * ground.n_subsets
        for key, v in values.items():
            mask = ground.check_mask(int(key)) if isinstance(key, (int, np.integer)) else ground.mask(key)
            dense[mask] = v
        missing = [m for m, v in enumerate(dense) if v is None]
        if missing:
            raise ValidationError(
                f"capacity table is missing {len(missing)} subsets, e.g. {ground.format(missing[0])}"
            )
        values = dense
    try:
        values = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"capacity values must be numbers: {exc}")
    return Capacity(ground, values)


def dirac(ground: GroundSet, point: int) -> Capacity:
    """The unit of the capacity monad: 1 on sets containing ``point``, else 0."""
    bit = 1 << ground.check_index(point)
    return Capacity._trusted(ground, (1.0 if m & bit else 0.0 for m in range(ground.n_subsets)))


def complete_ignorance(ground: GroundSet) -> Capacity:
    """0 on every proper subset, 1 on the whole set."""
    full = ground.full
    return Capacity._trusted(ground, (1.0 if m == full else 0.0 for m in range(ground.n_subsets)))


def complete_confidence(ground: GroundSet) -> Capacity:
    """1 on every nonempty subset."""
    return Capacity._trusted(ground, (1.0 if m else 0.0 for m in range(ground.n_subsets)))


def from_probability(ground: GroundSet, weights: Sequence[float]) -> Capacity:
    weights = [float(w) for w in weights]
    if len(weights) != ground.size:
        raise BadWeights(f"expected {ground.size} weights, got {len(weights)}")
    if any(not math.isfinite(w) or w < 0 for w in weights):
        raise BadWeights(f"weights must be finite and nonnegative: {weights}")
    if abs(math.fsum(weights) - 1.0) > 1e-9:
        raise BadWeights(f"weights sum to {math.fsum(weights)!r}, not 1")
    values = [0.0] * ground.n_subsets
    for mask in range(1, ground.n_subsets):
        if mask == ground.full:
            values[mask] = 1.0
        else:
            values[mask] = min(1.0, math.fsum(weights[i] for i in bits_of(mask)))
    return Capacity(ground, values)


def preimage_table(mapping: Sequence[int], target: GroundSet) -> list[int]:
    """``table[F]`` is the source mask of the preimage of target mask ``F``."""
    fibers = [0] * target.size
    for i, y in enumerate(mapping):
        fibers[target.check_index(int(y))] |= 1 << i
    table = [0] * target.n_subsets
    for mask in range(1, target.n_subsets):
        low = mask & -mask
        table[mask] = table[mask ^ low] | fibers[low.bit_length() - 1]
    return table


def pushforward(c: Capacity, mapping: Sequence[int], target: GroundSet) -> Capacity:
    """Image of ``c`` under the map sending source index ``i`` to ``mapping[i]``."""
    if len(mapping) != c.ground.size:
        raise ValidationError(
            f"map must be defined on all {c.ground.size} source elements, got {len(mapping)}"
        )
    pre = preimage_table(mapping, target)
    return Capacity(target, (c.values[p] for p in pre))


def is_additive(c: Capacity, tol: float = ADDITIVITY_TOL) -> bool:
    """True iff ``c(F | G) == c(F) + c(G)`` for all disjoint F, G (within ``tol``)."""
    v = c.values
    if c.ground.size <= 10:
        for union in range(1, c.ground.n_subsets):
            for f in submasks(union):
                if abs(v[union] - v[f] - v[union ^ f]) > tol:
                    return False
        return True
    # Pairwise additivity is equivalent to every set summing its singletons.
    singles = [v[1 << i] for i in range(c.ground.size)]
    return all(
        abs(v[m] - math.fsum(singles[i] for i in bits_of(m))) <= tol * c.ground.size
        for m in range(c.ground.n_subsets)
    )


def same_ground(a: GroundSet, b: GroundSet) -> None:
    if a != b:
        raise GroundMismatch(f"ground sets differ: {a.labels!r} vs {b.labels!r}")


def leq(c1: Capacity, c2: Capacity) -> bool:
    """Setwise order: ``c1(F) <= c2(F)`` for every subset F."""
    same_ground(c1.ground, c2.ground)
    return all(a <= b for a, b in zip(c1.values, c2.values))


def random_capacity(ground: GroundSet, rng: np.random.Generator, k: int | None = None) -> Capacity:
    """Random capacity; grid-valued in ``{0, 1/k, ..., 1}`` when ``k`` is given.

    Subsets are visited in mask order and each draws uniformly, then is
    lifted to the largest value among its immediate subsets.
    """
    n_sub = ground.n_subsets
    full = ground.full
    if k is None:
        draws = rng.random(n_sub)
    else:
        units = rng.integers(0, k + 1, size=n_sub)
    values = [0.0] * n_sub
    for mask in range(1, n_sub):
        if mask == full:
            values[mask] = 1.0
            continue
        lower = 0.0
        m = mask
        while m:
            low = m & -m
            lower = max(lower, values[mask ^ low])
            m ^= low
        v = float(draws[mask]) if k is None else int(units[mask]) / k
        values[mask] = max(lower, v)
    return Capacity._trusted(ground, values)
