"""Executable checks of the capacity monad laws and the tensor marginal laws.

Unit and associativity laws, and the marginal laws of the tensor, are
expected to hold exactly: every value involved is produced by ``min`` and
``max`` of the inputs, with no arithmetic.  The representation law for the
psi-Sugeno integral is compared with an absolute tolerance.

Randomized suites draw trial ``t`` from ``SeedSequence(seed,
spawn_key=(t,))``, so a trial's instance does not depend on which worker
runs it or in which order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .capacity import Capacity, GroundSet, from_probability, is_additive, pushforward, random_capacity
from .errors import ValidationError
from .integrals import LOGIT, PsiMap, RealFunction, get_psi, sugeno_psi
from .monad import (
    MetaCapacity,
    Tower,
    dirac_meta,
    flatten_inner_first,
    flatten_outer_first,
    index_ground,
    m_eta,
    mu_capacity,
    tensor2,
)

TOWER_TOL = 1e-9
SUITES = ("unit", "assoc", "tower", "tensor", "tensor-assoc")


@dataclass(frozen=True)
class LawResult:
    instance: int
    law: str
    deviation: float
    passed: bool
    witness: str | None = None


def compare_capacities(expected: Capacity, got: Capacity, instance: int, law: str) -> LawResult:
    """Exact subset-by-subset comparison; the witness names the first differing subset."""
    if expected.ground != got.ground:
        return LawResult(instance, law, float("inf"), False, "ground sets differ")
    dev = 0.0
    witness = None
    for mask, (a, b) in enumerate(zip(expected.values, got.values)):
        if a != b:
            dev = max(dev, abs(a - b))
            if witness is None:
                witness = f"{expected.ground.format(mask)}: expected {a!r}, got {b!r}"
    return LawResult(instance, law, dev, witness is None, witness)


def check_unit_laws(
    sample: Iterable[Capacity], flatten: Callable = mu_capacity, start: int = 0
) -> list[LawResult]:
    """Both unit laws for every capacity in ``sample``.

    ``unit-left`` flattens the Dirac meta-capacity at ``c``; ``unit-right``
    flattens the image of ``c`` under ``x -> dirac(x)``.  Each must return
    ``c`` itself.
    """
    out = []
    for offset, c in enumerate(sample):
        i = start + offset
        out.append(compare_capacities(c, flatten(dirac_meta(c)), i, "unit-left"))
        out.append(compare_capacities(c, flatten(m_eta(c)), i, "unit-right"))
    return out


def check_assoc_law(tower: Tower, flatten: Callable = mu_capacity, instance: int = 0) -> LawResult:
    lhs = flatten_outer_first(tower, flatten)
    rhs = flatten_inner_first(tower, flatten)
    return compare_capacities(lhs, rhs, instance, "assoc")


def check_tower_law(
    phi: RealFunction, C: MetaCapacity, psi: PsiMap | str = LOGIT, instance: int = 0, tol: float = TOWER_TOL
) -> LawResult:
    """Integrating ``phi`` against the flattened capacity equals integrating
    ``c -> integral of phi against c`` against the outer capacity."""
    psi = get_psi(psi)
    lhs = sugeno_psi(mu_capacity(C), phi, psi)
    inner = RealFunction(index_ground(len(C.family)), [sugeno_psi(c, phi, psi) for c in C.family])
    rhs = sugeno_psi(C.outer, inner, psi)
    dev = abs(lhs - rhs)
    ok = dev <= tol
    return LawResult(instance, "tower", dev, ok, None if ok else f"lhs={lhs!r} rhs={rhs!r}")


def projections(g1: GroundSet, g2: GroundSet) -> tuple[list[int], list[int]]:
    n2 = g2.size
    idx = range(g1.size * n2)
    return [i // n2 for i in idx], [i % n2 for i in idx]


def check_marginal_laws(c1: Capacity, c2: Capacity, instance: int = 0) -> list[LawResult]:
    t = tensor2(c1, c2)
    p1, p2 = projections(c1.ground, c2.ground)
    return [
        compare_capacities(c1, pushforward(t, p1, c1.ground), instance, "marginal-1"),
        compare_capacities(c2, pushforward(t, p2, c2.ground), instance, "marginal-2"),
    ]


def probe_tensor_assoc(c1: Capacity, c2: Capacity, c3: Capacity, instance: int = 0) -> LawResult:
    """Compare the two bracketings of a triple tensor on the flat product."""
    left = tensor2(tensor2(c1, c2), c3)
    right = tensor2(c1, tensor2(c2, c3))
    # Both bracketings index X1 x X2 x X3 row-major; only the labels nest differently.
    right = Capacity._trusted(left.ground, right.values)
    return compare_capacities(left, right, instance, "tensor-assoc")


def non_additive_tensor_witness():
    """Two uniform probabilities on 2-sets whose tensor is not additive.

    Returns ``(c1, c2, tensor, cell, product_value)`` where ``cell`` is the
    mask of the single cell ``(a, x)``; the tensor gives it 0.5 while the
    product probability gives 0.25.
    """
    c1 = from_probability(GroundSet.of("a", "b"), [0.5, 0.5])
    c2 = from_probability(GroundSet.of("x", "y"), [0.5, 0.5])
    t = tensor2(c1, c2)
    assert not is_additive(t)
    return c1, c2, t, 1, 0.25


def random_meta(ground: GroundSet, rng: np.random.Generator, k: int | None, max_family: int) -> MetaCapacity:
    m = int(rng.integers(1, max_family + 1))
    family = tuple(random_capacity(ground, rng, k) for _ in range(m))
    return MetaCapacity(family, random_capacity(index_ground(m), rng, k))


def random_tower(ground: GroundSet, rng: np.random.Generator, k: int | None, max_family: int = 3) -> Tower:
    n = int(rng.integers(1, max_family + 1))
    members = tuple(random_meta(ground, rng, k, max_family) for _ in range(n))
    return Tower(members, random_capacity(index_ground(n), rng, k))


def trial_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))


def _labels(n: int, prefix: str) -> GroundSet:
    return GroundSet(tuple(f"{prefix}{i}" for i in range(n)))


def _trial(suite: str, t: int, seed: int, k: int, psi: str, enumerated: Sequence[Capacity]) -> list[LawResult]:
    if suite == "unit":
        if t < len(enumerated):
            return check_unit_laws([enumerated[t]], start=t)
        rng = trial_rng(seed, t)
        return check_unit_laws([random_capacity(_labels(3, "x"), rng, k)], start=t)
    rng = trial_rng(seed, t)
    if suite == "assoc":
        return [check_assoc_law(random_tower(_labels(2, "x"), rng, k), instance=t)]
    if suite == "tower":
        n = int(rng.integers(1, 4))
        g = _labels(n, "x")
        C = random_meta(g, rng, None, 4)
        phi = RealFunction(g, np.round(rng.normal(0.0, 2.0, size=n), 6))
        return [check_tower_law(phi, C, psi, instance=t)]
    if suite == "tensor":
        g1 = _labels(int(rng.integers(1, 4)), "x")
        g2 = _labels(int(rng.integers(1, 4)), "y")
        return check_marginal_laws(random_capacity(g1, rng, k), random_capacity(g2, rng, k), instance=t)
    if suite == "tensor-assoc":
        caps = [random_capacity(_labels(2, p), rng, k) for p in ("x", "y", "z")]
        return [probe_tensor_assoc(*caps, instance=t)]
    raise ValidationError(f"unknown law suite {suite!r}; choose one of {SUITES}")


def _run_range(suite, lo, hi, seed, k, psi):
    enumerated = _unit_enumeration(k) if suite == "unit" else ()
    out = []
    for t in range(lo, hi):
        out.extend(_trial(suite, t, seed, k, psi, enumerated))
    return out


def _unit_enumeration(k: int) -> tuple:
    from .equilibrium import enumerate_capacities

    return enumerate_capacities(_labels(2, "x"), k).capacities


def suite_size(suite: str, trials: int, k: int) -> int:
    """Number of instances: for ``unit`` the full |X|=2 grid precedes the random trials."""
    if suite == "unit":
        return (k + 1) ** 2 + trials
    return trials


def run_suite(
    suite: str, trials: int, seed: int = 0, k: int = 4, psi: PsiMap | str = LOGIT, workers: int = 1
) -> list[LawResult]:
    """Run a law suite; results are in instance order for any ``workers``."""
    if suite not in SUITES:
        raise ValidationError(f"unknown law suite {suite!r}; choose one of {SUITES}")
    if trials < 0 or k < 1:
        raise ValidationError("trials must be >= 0 and k >= 1")
    psi = get_psi(psi).name
    total = suite_size(suite, trials, k)
    workers = max(1, int(workers))
    if workers == 1 or total < 2:
        return _run_range(suite, 0, total, seed, k, psi)
    bounds = np.linspace(0, total, min(workers, total) + 1).astype(int)
    jobs = [(suite, int(lo), int(hi), seed, k, psi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_range, *zip(*jobs)))
    return [r for part in parts for r in part]
