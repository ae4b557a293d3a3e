"""The capacity monad at finite scale.

A :class:`MetaCapacity` is a capacity on capacities with finite support: a
finite ``family`` of capacities on one ground set together with an
``outer`` capacity on the family's index set.  Repeated family members are
allowed; the object then stands for the image of ``outer`` under the map
``index -> family[index]``, and every formula below is invariant under
that identification.

Multiplication flattens a meta-capacity::

    mu(C)(F) = sup{t in [0,1] : outer({j : family[j](F) >= t}) >= t}

which is the classic Sugeno integral of ``j -> family[j](F)`` against
``outer``.  The tensor product is the one induced by the monad::

    (c1 (x) c2)(A) = sup{t : c1({x1 : c2(A_x1) >= t}) >= t}

with ``A_x1 = {x2 : (x1, x2) in A}``.  Both marginals of ``c1 (x) c2`` are
``c1`` and ``c2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import Capacity, GroundSet, max_ground_size, product_ground, same_ground
from .errors import ProductTooLarge, ValidationError
from .integrals import sugeno_classic_values, upper_levels

_INDEX_GROUNDS: dict[int, GroundSet] = {}


def index_ground(n: int) -> GroundSet:
    """Ground set ``{0, ..., n-1}`` used for the support of a meta-capacity."""
    g = _INDEX_GROUNDS.get(n)
    if g is None:
        g = _INDEX_GROUNDS[n] = GroundSet.range(n)
    return g


@dataclass(frozen=True)
class MetaCapacity:
    family: tuple
    outer: Capacity

    def __post_init__(self):
        family = tuple(self.family)
        object.__setattr__(self, "family", family)
        if not family:
            raise ValidationError("a meta-capacity needs a nonempty family")
        ground = family[0].ground
        for c in family[1:]:
            same_ground(ground, c.ground)
        if self.outer.ground.size != len(family):
            raise ValidationError(
                f"outer capacity lives on {self.outer.ground.size} points "
                f"but the family has {len(family)} members"
            )

    @property
    def ground(self) -> GroundSet:
        return self.family[0].ground


@dataclass(frozen=True)
class Tower:
    """A capacity on meta-capacities (finite support), the input of the associativity law."""

    family: tuple
    outer: Capacity

    def __post_init__(self):
        family = tuple(self.family)
        object.__setattr__(self, "family", family)
        if not family:
            raise ValidationError("a tower needs a nonempty family")
        for m in family[1:]:
            same_ground(family[0].ground, m.ground)
        if self.outer.ground.size != len(family):
            raise ValidationError("outer capacity size does not match the tower family")

    @property
    def ground(self) -> GroundSet:
        return self.family[0].ground


def mu(C: MetaCapacity, F: int) -> float:
    """Value of the flattened capacity on the subset mask ``F``."""
    return sugeno_classic_values(C.outer.values, [c.values[F] for c in C.family])


def mu_capacity(C: MetaCapacity) -> Capacity:
    """Flatten a meta-capacity into a capacity on the common ground set."""
    g = C.ground
    outer = C.outer.values
    fam = [c.values for c in C.family]
    return Capacity._trusted(
        g, (sugeno_classic_values(outer, [v[F] for v in fam]) for F in range(g.n_subsets))
    )


def dirac_meta(c: Capacity) -> MetaCapacity:
    """The unit at the level of capacities: all outer mass on ``c``."""
    return MetaCapacity((c,), Capacity._trusted(index_ground(1), (0.0, 1.0)))


def m_eta(c: Capacity) -> MetaCapacity:
    """Image of ``c`` under ``x -> dirac(x)``: the Diracs weighted by ``c`` itself."""
    from .capacity import dirac

    g = c.ground
    family = tuple(dirac(g, x) for x in range(g.size))
    return MetaCapacity(family, Capacity._trusted(index_ground(g.size), c.values))


def flatten_outer_first(T: Tower, flatten=mu_capacity) -> Capacity:
    """Multiply at the meta level first, then flatten the resulting meta-capacity.

    The families of the tower's members are concatenated; member ``j`` acts
    on a subset ``G`` of the concatenation through its own block of ``G``.
    """
    blocks = []
    offset = 0
    family = []
    for m in T.family:
        blocks.append((offset, len(m.family), m.outer.values))
        family.extend(m.family)
        offset += len(m.family)
    if offset > max_ground_size():
        raise ProductTooLarge(f"concatenated family of {offset} capacities is too large")
    outer_vals = []
    for G in range(1 << offset):
        section = [
            vals[(G >> start) & ((1 << size) - 1)] for start, size, vals in blocks
        ]
        outer_vals.append(sugeno_classic_values(T.outer.values, section))
    meta = MetaCapacity(tuple(family), Capacity._trusted(index_ground(offset), outer_vals))
    return flatten(meta)


def flatten_inner_first(T: Tower, flatten=mu_capacity) -> Capacity:
    """Flatten every member of the tower, then flatten the result."""
    inner = tuple(flatten(m) for m in T.family)
    return flatten(MetaCapacity(inner, T.outer))


def tensor2(c1: Capacity, c2: Capacity) -> Capacity:
    """Monad-induced tensor product on ``X1 x X2`` (row-major, ``X1`` slowest)."""
    ground = product_ground([c1.ground, c2.ground])
    return Capacity._trusted(ground, _tensor2_values(c1.values, c1.ground.size, c2.values, c2.ground.size))


def _tensor2_values(v1, n1, v2, n2):
    full2 = (1 << n2) - 1
    shifts = [x * n2 for x in range(n1)]
    out = []
    for A in range(1 << (n1 * n2)):
        out.append(sugeno_classic_values(v1, [v2[(A >> s) & full2] for s in shifts]))
    return out


def tensor_n(capacities: Sequence[Capacity]) -> Capacity:
    """Left fold of :func:`tensor2`; the result lives on the flat product ground."""
    capacities = list(capacities)
    if not capacities:
        raise ValidationError("tensor_n needs at least one capacity")
    if len(capacities) == 1:
        return capacities[0]
    ground = product_ground([c.ground for c in capacities])
    values = capacities[0].values
    size = capacities[0].ground.size
    for c in capacities[1:]:
        values = _tensor2_values(values, size, c.values, c.ground.size)
        size *= c.ground.size
    return Capacity._trusted(ground, values)


def tensor_value_table(grids: Sequence[np.ndarray], sizes: Sequence[int], masks: Sequence[int]) -> np.ndarray:
    """Tensor values for every profile drawn from per-factor capacity grids.

    ``grids[j]`` has shape ``(m_j, 2**sizes[j])``, one capacity per row.
    Returns an array of shape ``(len(masks), m_1, ..., m_n)`` whose entry
    ``[a, i_1, ..., i_n]`` is ``tensor_n(grid rows)(masks[a])``.

    Uses ``Sug(c, g) = max over nonempty B of min(c(B), min_{y in B} g(y))``
    for the classic Sugeno integral, which is monotone-equivalent to the
    level form and vectorizes over profiles.
    """
    grids = [np.asarray(g, dtype=float) for g in grids]
    if len(grids) == 1:
        return grids[0][:, list(masks)].T.copy()
    prefix_size = math.prod(sizes[:-1])
    last = grids[-1]
    s = sizes[-1]
    full_s = (1 << s) - 1
    prefix = tensor_value_table(grids[:-1], sizes[:-1], range(1, 1 << prefix_size))
    lead = prefix.shape[1:]
    out = np.empty((len(masks),) + lead + (last.shape[0],))
    n_b = 1 << prefix_size
    for a, A in enumerate(masks):
        cols = last[:, [(A >> (y * s)) & full_s for y in range(prefix_size)]]
        # h[B] = min over y in B of cols[:, y]
        h = np.empty((n_b, last.shape[0]))
        h[0] = np.inf
        acc = None
        for B in range(1, n_b):
            low = B & -B
            h[B] = np.minimum(h[B ^ low], cols[:, low.bit_length() - 1])
            term = np.minimum(prefix[B - 1][..., None], h[B])
            acc = term if acc is None else np.maximum(acc, term)
        out[a] = acc
    return out
