import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capgame.capacity import (
    Capacity,
    GroundSet,
    complete_ignorance,
    dirac,
    from_probability,
    is_additive,
    make_capacity,
    pushforward,
    random_capacity,
)
from capgame.equilibrium import enumerate_capacities
from capgame.errors import ProductTooLarge, ValidationError
from capgame.integrals import LOGIT, SCALED_TAN, RealFunction, sugeno_classic_values
from capgame.laws import (
    check_assoc_law,
    check_marginal_laws,
    check_tower_law,
    check_unit_laws,
    non_additive_tensor_witness,
    probe_tensor_assoc,
    random_meta,
    random_tower,
    run_suite,
)
from capgame.monad import (
    MetaCapacity,
    Tower,
    dirac_meta,
    index_ground,
    m_eta,
    mu,
    mu_capacity,
    tensor2,
    tensor_n,
    tensor_value_table,
)

from conftest import capacities


def mu_by_scan(C, F, step=1e-4):
    """sup{t in [0,1] : outer({j : family[j](F) >= t}) >= t} on a t-grid."""
    best = 0.0
    for t in np.arange(0.0, 1.0 + step / 2, step):
        members = sum(1 << j for j, c in enumerate(C.family) if c.values[F] >= t)
        if C.outer.values[members] >= t:
            best = t
    return best


def tensor_by_definition(c1, c2, A):
    """sup{t : c1({x1 : c2(A_x1) >= t}) >= t} over the candidate values."""
    n2 = c2.ground.size
    section = [c2.values[(A >> (x * n2)) & ((1 << n2) - 1)] for x in range(c1.ground.size)]
    candidates = set(section) | set(c1.values) | {0.0}
    ok = []
    for t in candidates:
        support = sum(1 << x for x, s in enumerate(section) if s >= t)
        if c1.values[support] >= t:
            ok.append(t)
    return max(ok)


def corrupted_mu(C):
    """Takes the second-highest level instead of the highest: an off-by-one mutation."""
    g = C.ground
    vals = []
    for F in range(g.n_subsets):
        sections = [c.values[F] for c in C.family]
        levels = sorted(set(sections), reverse=True)
        cands = []
        mask = 0
        for v in levels:
            mask |= sum(1 << j for j, s in enumerate(sections) if s == v)
            cands.append(min(v, C.outer.values[mask]))
        vals.append(max(cands[1:]) if len(cands) > 1 else cands[0])
    return Capacity._trusted(g, vals)


# multiplication ------------------------------------------------------------


def test_mu_example(ab):
    c1 = make_capacity(ab, [0, 0.5, 0.5, 1])
    c2 = make_capacity(ab, [0, 0.9, 0.9, 1])
    outer = make_capacity(index_ground(2), [0, 0.7, 0.2, 1])
    C = MetaCapacity((c1, c2), outer)
    F = ab.mask(["a"])
    assert mu_by_scan(C, F) == pytest.approx(0.5, abs=1e-4)
    assert mu(C, F) == 0.5


def test_mu_under_ignorance_is_min(ab, rng):
    for _ in range(30):
        c1, c2 = random_capacity(ab, rng, 4), random_capacity(ab, rng, 4)
        C = MetaCapacity((c1, c2), complete_ignorance(index_ground(2)))
        for F in range(4):
            assert mu(C, F) == min(c1.values[F], c2.values[F])


def test_dirac_meta_flattens_to_itself(ab):
    c = make_capacity(ab, [0, 0.25, 0.5, 1])
    assert mu_capacity(dirac_meta(c)) == c


def test_m_eta_shape(ab):
    c = make_capacity(ab, [0, 0.25, 0.5, 1])
    M = m_eta(c)
    assert len(M.family) == ab.size
    assert M.family == (dirac(ab, 0), dirac(ab, 1))
    assert mu_capacity(M) == c
    # m_eta of a Dirac puts all outer mass on that Dirac
    D = m_eta(dirac(ab, 1))
    assert D.outer.values == dirac(index_ground(2), 1).values


def test_meta_validation(ab):
    with pytest.raises(ValidationError):
        MetaCapacity((), complete_ignorance(index_ground(1)))
    with pytest.raises(ValidationError):
        MetaCapacity((dirac(ab, 0),), complete_ignorance(index_ground(2)))
    with pytest.raises(Exception):
        MetaCapacity((dirac(ab, 0), dirac(GroundSet.of("x"), 0)), complete_ignorance(index_ground(2)))


def test_mu_matches_scan_random(rng):
    for _ in range(40):
        g = GroundSet.range(int(rng.integers(1, 4)))
        C = random_meta(g, rng, 8, 4)
        out = mu_capacity(C)
        Capacity(g, out.values)
        for F in range(g.n_subsets):
            assert abs(out.values[F] - mu_by_scan(C, F, 1 / 800)) <= 1 / 800


# laws ----------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_unit_laws_on_full_grid(k):
    grid = enumerate_capacities(GroundSet.of("a", "b"), k)
    results = check_unit_laws(grid.capacities)
    assert len(results) == 2 * (k + 1) ** 2
    assert all(r.passed and r.deviation == 0 for r in results)


def test_unit_laws_detect_mutation():
    grid = enumerate_capacities(GroundSet.of("a", "b"), 4)
    bad = [r for r in check_unit_laws(grid.capacities, flatten=corrupted_mu) if not r.passed]
    assert bad and bad[0].witness


def test_assoc_law_dirac_tower(ab):
    c = make_capacity(ab, [0, 0.25, 0.5, 1])
    tower = Tower((dirac_meta(c),), Capacity._trusted(index_ground(1), (0.0, 1.0)))
    assert check_assoc_law(tower).passed


def test_assoc_law_random_and_mutation(rng):
    g = GroundSet.of("a", "b")
    mutated = 0
    for i in range(300):
        tower = random_tower(g, rng, 4)
        assert check_assoc_law(tower, instance=i).passed
        mutated += not check_assoc_law(tower, flatten=corrupted_mu).passed
    assert mutated > 0


@pytest.mark.parametrize("psi", [LOGIT, SCALED_TAN])
def test_tower_law(psi, rng):
    for i in range(200):
        g = GroundSet.range(int(rng.integers(1, 4)))
        C = random_meta(g, rng, None, 4)
        phi = RealFunction(g, rng.normal(0, 2, size=g.size))
        r = check_tower_law(phi, C, psi, instance=i)
        assert r.passed and r.deviation <= 1e-9


def test_tower_law_dirac_and_constant(ab):
    from capgame.integrals import sugeno_psi

    c = make_capacity(ab, [0, 0.3, 0.8, 1])
    phi = RealFunction(ab, (-0.5, 2.0))
    assert check_tower_law(phi, dirac_meta(c)).deviation == 0
    assert mu_capacity(dirac_meta(c)) == c and sugeno_psi(c, phi) == sugeno_psi(mu_capacity(dirac_meta(c)), phi)
    const = RealFunction(ab, (1.25, 1.25))
    C = MetaCapacity((c, dirac(ab, 0)), make_capacity(index_ground(2), [0, 0.4, 0.1, 1]))
    assert check_tower_law(const, C).deviation == 0


# tensor --------------------------------------------------------------------


def test_tensor_of_diracs(ab):
    xy = GroundSet.of("x", "y", "z")
    t = tensor2(dirac(ab, 1), dirac(xy, 2))
    assert t == dirac(t.ground, 1 * 3 + 2)
    assert t.ground.labels[5] == ("b", "z")


def test_tensor_uniform_cell_example():
    c1, c2, t, cell, product = non_additive_tensor_witness()
    assert t.values[cell] == 0.5
    assert product == 0.25
    assert is_additive(c1) and is_additive(c2) and not is_additive(t)


@settings(max_examples=150)
@given(capacities(max_size=3), capacities(max_size=3))
def test_tensor_matches_definition(c1, c2):
    t = tensor2(c1, c2)
    Capacity(t.ground, t.values)
    for A in range(t.ground.n_subsets):
        assert t.values[A] == tensor_by_definition(c1, c2, A)


@settings(max_examples=150)
@given(capacities(max_size=3, grid=4), capacities(max_size=3, grid=4))
def test_marginal_laws(c1, c2):
    assert all(r.passed for r in check_marginal_laws(c1, c2))
    n2 = c2.ground.size
    t = tensor2(c1, c2)
    for A in range(c1.ground.n_subsets):
        rect = sum(1 << (x * n2 + y) for x in range(c1.ground.size) if A >> x & 1 for y in range(n2))
        assert t.values[rect] == c1.values[A]


def test_marginal_laws_detect_broken_tensor(ab, monkeypatch):
    import capgame.laws as laws

    c1 = make_capacity(ab, [0, 0.5, 0.25, 1])
    c2 = make_capacity(ab, [0, 0.75, 0.25, 1])
    monkeypatch.setattr(laws, "tensor2", lambda a, b: tensor2(b, a))
    assert not all(r.passed for r in laws.check_marginal_laws(c1, c2))


def test_tensor_n(ab, rng):
    c = make_capacity(ab, [0, 0.3, 0.6, 1])
    assert tensor_n([c]) is c
    caps = [random_capacity(GroundSet.range(2), rng, 4) for _ in range(3)]
    t = tensor_n(caps)
    assert t.ground.size == 8 and t.ground.labels[3] == (0, 1, 1)
    assert t.values == tensor2(tensor2(caps[0], caps[1]), caps[2]).values
    for i, c in enumerate(caps):
        proj = [idx >> (2 - i) & 1 for idx in range(8)]
        assert pushforward(t, proj, c.ground) == c
    ds = [dirac(GroundSet.range(2), x) for x in (1, 0, 1)]
    assert tensor_n(ds) == dirac(tensor_n(ds).ground, 0b101)
    with pytest.raises(ValidationError):
        tensor_n([])


def test_tensor_too_large():
    big = complete_ignorance(GroundSet.range(5))
    with pytest.raises(ProductTooLarge):
        tensor2(big, big)


def test_tensor_associativity_probe(rng):
    g = GroundSet.range(2)
    results = [probe_tensor_assoc(*(random_capacity(g, rng, 4) for _ in range(3)), instance=i) for i in range(200)]
    # Recorded outcome: both bracketings agree on every sampled instance.
    assert all(r.passed for r in results)


def test_tensor_of_additive_is_generally_not_additive(rng):
    g = GroundSet.range(2)
    found = 0
    for _ in range(50):
        w1, w2 = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
        t = tensor2(from_probability(g, w1 / w1.sum()), from_probability(g, w2 / w2.sum()))
        found += not is_additive(t)
    assert found > 0


@pytest.mark.parametrize("sizes", [(2,), (2, 2), (3, 2), (2, 2, 2), (1, 3)])
def test_vectorized_tensor_table(sizes, rng):
    grounds = [GroundSet.range(n) for n in sizes]
    grids = [[random_capacity(g, rng, 4) for _ in range(3)] for g in grounds]
    total = int(np.prod(sizes))
    masks = [0, (1 << total) - 1] + [int(m) for m in rng.integers(0, 1 << total, size=6)]
    table = tensor_value_table([np.array([c.values for c in gr]) for gr in grids], list(sizes), masks)
    for a, A in enumerate(masks):
        for idx in itertools.product(*(range(3) for _ in sizes)):
            joint = tensor_n([gr[i] for gr, i in zip(grids, idx)])
            assert table[(a,) + idx] == joint.values[A]


def test_run_suite_deterministic_and_green():
    for suite in ("unit", "assoc", "tower", "tensor", "tensor-assoc"):
        a = run_suite(suite, 20, seed=5, k=3)
        b = run_suite(suite, 20, seed=5, k=3)
        assert a == b
        assert all(r.passed for r in a)
    with pytest.raises(ValidationError):
        run_suite("nope", 3)


def test_run_suite_workers_match():
    assert run_suite("assoc", 12, seed=3, k=4, workers=3) == run_suite("assoc", 12, seed=3, k=4)
