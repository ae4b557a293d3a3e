import itertools

import numpy as np
import pytest

from capgame.capacity import GroundSet
from capgame.convexity import (
    Convexity,
    binary_t2_normality_study,
    binary_witness,
    closure,
    helly_number,
    hull,
    interval_convexity,
    is_binary,
    is_linked,
    is_quasi_concave,
    is_T2,
    is_T4,
    make_convexity,
    power_set_convexity,
    product_convexity,
)
from capgame.errors import (
    FamilyTooLarge,
    GroundMismatch,
    MissingSingleton,
    MissingTrivial,
    NotIntersectionStable,
)
from capgame.integrals import RealFunction


def helly_by_definition(conv):
    """Least h such that every subfamily whose h-subfamilies all meet has a common point."""
    members = conv.members()
    full = conv.ground.full

    def meet(ms):
        out = full
        for m in ms:
            out &= m
        return out

    subfamilies = [s for r in range(1, len(members) + 1) for s in itertools.combinations(members, r)]
    for h in range(1, len(members) + 1):
        ok = True
        for fam in subfamilies:
            if meet(fam):
                continue
            if all(meet(sub) for sub in itertools.combinations(fam, min(h, len(fam)))):
                ok = False
                break
        if ok:
            return h
    return len(members)


def binary_by_definition(conv):
    members = conv.nonempty()
    for r in range(2, len(members) + 1):
        for fam in itertools.combinations(members, r):
            if is_linked(fam):
                common = conv.ground.full
                for m in fam:
                    common &= m
                if not common:
                    return False
    return True


def t2_by_definition(conv):
    n, full = conv.ground.size, conv.ground.full
    for x1, x2 in itertools.permutations(range(n), 2):
        if not any(
            s1 | s2 == full and not s2 >> x1 & 1 and not s1 >> x2 & 1
            for s1 in conv.family
            for s2 in conv.family
        ):
            return False
    return True


THREE_SET_FAMILY = ["a", "b", "c", ["a", "b"], ["b", "c"], ["a", "c"], []]


def three_set_witness():
    g = GroundSet.of("a", "b", "c")
    return make_convexity(g, THREE_SET_FAMILY + [["a", "b", "c"]])


def test_power_set_valid_and_separated():
    conv = power_set_convexity(GroundSet.range(3))
    assert len(conv.family) == 8
    assert is_T2(conv) and is_T4(conv)
    assert not is_binary(conv)
    assert helly_number(conv) == helly_by_definition(conv) == 3


def test_intervals_on_four():
    g = GroundSet.range(4)
    fam = [[]] + [list(range(i, j + 1)) for i in range(4) for j in range(i, 4)]
    conv = make_convexity(g, fam)
    assert conv == interval_convexity(g)
    assert is_T2(conv) and is_T4(conv)
    assert hull(conv, g.mask([1, 3])) == g.mask([1, 2, 3])
    assert hull(conv, 0) == 0
    assert hull(conv, g.mask([2])) == g.mask([2])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_intervals_binary_and_helly(n):
    conv = interval_convexity(GroundSet.range(n))
    assert is_binary(conv)
    assert helly_number(conv) == (1 if n == 1 else 2)
    if n <= 4:
        assert binary_by_definition(conv)
        assert helly_number(conv) == helly_by_definition(conv)


def test_validation_errors():
    g = GroundSet.of("a", "b", "c")
    with pytest.raises(MissingTrivial):
        make_convexity(g, ["a", "b", "c", ["a", "b", "c"]])
    with pytest.raises(MissingSingleton):
        make_convexity(g, [[], "a", "b", ["a", "b", "c"]])
    g4 = GroundSet.of("a", "b", "c", "d")
    with pytest.raises(NotIntersectionStable) as info:
        make_convexity(g4, [[], "a", "b", "c", "d", "abc", "bcd", "abcd"])
    assert {info.value.first, info.value.second} == {g4.mask("abc"), g4.mask("bcd")}


def test_trivial_family_not_t2():
    g = GroundSet.of("a", "b", "c")
    conv = make_convexity(g, [[], "a", "b", "c", ["a", "b", "c"]])
    assert not is_T2(conv) and not t2_by_definition(conv)
    # disjoint singletons cannot be screened either
    assert is_T4(conv) is False
    assert is_binary(conv)


def test_three_set_witness_rejected():
    conv = three_set_witness()
    assert not is_binary(conv)
    w = binary_witness(conv)
    assert is_linked(w)
    common = conv.ground.full
    for m in w:
        common &= m
    assert common == 0
    assert helly_number(conv) >= 3
    assert helly_number(conv) == helly_by_definition(conv)


def test_boxes_on_square_binary():
    i2 = interval_convexity(GroundSet.range(2))
    boxes = product_convexity([i2, i2])
    assert len(boxes.family) == 10
    assert is_binary(boxes) and binary_by_definition(boxes)


def test_product_of_intervals_binary():
    prod = product_convexity([interval_convexity(GroundSet.range(2)), interval_convexity(GroundSet.range(3))])
    assert len(prod.family) == 1 + 3 * 6
    assert is_binary(prod)
    diagonal = prod.ground.mask([(0, 0), (1, 1)])
    assert diagonal not in prod


def test_random_closures_match_definitions(rng):
    for _ in range(60):
        g = GroundSet.range(int(rng.integers(2, 5)))
        conv = closure(g, [int(x) for x in rng.integers(1, g.n_subsets, size=3)])
        if len(conv.family) > 12:
            continue
        assert is_binary(conv) == binary_by_definition(conv)
        assert is_T2(conv) == t2_by_definition(conv)
        assert helly_number(conv) == helly_by_definition(conv)
        assert is_binary(conv) == (helly_number(conv) <= 2)


def test_family_limit():
    conv = power_set_convexity(GroundSet.range(5))
    with pytest.raises(FamilyTooLarge):
        is_binary(conv)
    with pytest.raises(FamilyTooLarge):
        helly_number(conv)
    assert is_binary(conv, limit=40) is False


def test_quasi_concave():
    g = GroundSet.range(5)
    conv = interval_convexity(g)
    assert is_quasi_concave(RealFunction(g, [2.0] * 5), conv)
    assert is_quasi_concave(RealFunction(g, [0, 1, 2, 3, 4]), conv)
    assert is_quasi_concave(RealFunction(g, [0, 3, 4, 1, 0]), conv)
    assert not is_quasi_concave(RealFunction(g, [3, 0, 0, 0, 3]), conv)
    with pytest.raises(GroundMismatch):
        is_quasi_concave(RealFunction(GroundSet.range(4), [0, 0, 0, 0]), conv)


def test_normality_study_counts(rng):
    counts = binary_t2_normality_study(4, 40, rng)
    assert counts.samples == 40
    assert 0 <= counts.binary_t2_t4 <= counts.binary_t2 <= counts.samples
