import numpy as np
import pytest
from hypothesis import strategies as st

from capgame.capacity import Capacity, GroundSet
from capgame.integrals import RealFunction


def lift_monotone(n, raw):
    """Turn arbitrary [0,1] draws into capacity values by lifting along the lattice."""
    full = (1 << n) - 1
    values = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        if mask == full:
            values[mask] = 1.0
            continue
        lower = max(values[mask ^ (1 << b)] for b in range(n) if mask >> b & 1)
        values[mask] = max(lower, raw[mask])
    return values


@st.composite
def capacities(draw, min_size=1, max_size=4, grid=None, ground=None):
    if ground is None:
        n = draw(st.integers(min_size, max_size))
        ground = GroundSet(tuple(f"x{i}" for i in range(n)))
    n = ground.size
    if grid is None:
        raw = draw(st.lists(st.floats(0, 1), min_size=1 << n, max_size=1 << n))
    else:
        units = draw(st.lists(st.integers(0, grid), min_size=1 << n, max_size=1 << n))
        raw = [u / grid for u in units]
    return Capacity(ground, lift_monotone(n, raw))


@st.composite
def functions(draw, ground, low=-10.0, high=10.0):
    vals = draw(
        st.lists(
            st.one_of(st.floats(low, high), st.integers(int(low), int(high)).map(float)),
            min_size=ground.size,
            max_size=ground.size,
        )
    )
    return RealFunction(ground, vals)


@st.composite
def capacity_and_function(draw, max_size=4, grid=None, low=-10.0, high=10.0):
    c = draw(capacities(max_size=max_size, grid=grid))
    return c, draw(functions(c.ground, low, high))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def ab():
    return GroundSet.of("a", "b")
