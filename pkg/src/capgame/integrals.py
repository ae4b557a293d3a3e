"""Choquet, classic Sugeno and psi-corrected Sugeno integrals.

All three are computed from the upper level sets of the integrand.  Ties
among equal function values are merged into a single level first, so the
capacity of a level is always the capacity of a genuine set ``{f >= v}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .capacity import Capacity, GroundSet, same_ground
from .errors import BadStep, ValidationError, ValueOutOfUnitInterval


@dataclass(frozen=True)
class RealFunction:
    """A real-valued function on a ground set, one value per element."""

    ground: GroundSet
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.ground.size:
            raise ValidationError(
                f"function needs {self.ground.size} values, got {len(values)}"
            )
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"function values must be finite: {values}")

    @classmethod
    def from_mapping(cls, ground: GroundSet, mapping) -> "RealFunction":
        missing = [lab for lab in ground.labels if lab not in mapping]
        if missing:
            raise ValidationError(f"function has no value for {missing!r}")
        extra = set(mapping) - set(ground.labels)
        if extra:
            raise ValidationError(f"function has values for unknown elements {sorted(map(str, extra))}")
        return cls(ground, tuple(mapping[lab] for lab in ground.labels))

    def __getitem__(self, i: int) -> float:
        return self.values[i]


@dataclass(frozen=True)
class PsiMap:
    """An increasing bijection ``(0,1) -> R`` with ``psi(0) = -inf`` and ``psi(1) = +inf``.

    The infinite endpoint values never leave the integrals: they only ever
    meet a finite payoff level inside a ``min``.
    """

    name: str
    _eval: Callable[[float], float]
    _inverse: Callable[[float], float]

    def __call__(self, s: float) -> float:
        return self.eval(s)

    def eval(self, s: float) -> float:
        if s <= 0.0:
            return -math.inf
        if s >= 1.0:
            return math.inf
        return self._eval(s)

    def inverse(self, t: float) -> float:
        if t == math.inf:
            return 1.0
        if t == -math.inf:
            return 0.0
        return self._inverse(t)

    def eval_array(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        low = s <= 0.0
        high = s >= 1.0
        mid = ~(low | high)
        out[low] = -np.inf
        out[high] = np.inf
        out[mid] = self._vec(s[mid])
        return out

    def _vec(self, s: np.ndarray) -> np.ndarray:
        if self.name == "logit":
            return np.log(s / (1.0 - s))
        if self.name == "tan":
            return np.tan(math.pi * (s - 0.5))
        return np.array([self._eval(float(x)) for x in s], dtype=float)


def _logit(s: float) -> float:
    return math.log(s / (1.0 - s))


def _expit(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


LOGIT = PsiMap("logit", _logit, _expit)
SCALED_TAN = PsiMap(
    "tan",
    lambda s: math.tan(math.pi * (s - 0.5)),
    lambda t: 0.5 + math.atan(t) / math.pi,
)
PSI_MAPS = {"logit": LOGIT, "tan": SCALED_TAN, "scaled-tangent": SCALED_TAN}


def get_psi(name: str | PsiMap) -> PsiMap:
    if isinstance(name, PsiMap):
        return name
    try:
        return PSI_MAPS[name]
    except KeyError:
        raise ValidationError(f"unknown psi map {name!r}; choose one of {sorted(PSI_MAPS)}")


def upper_levels(values: Sequence[float]) -> list[tuple[float, int]]:
    """Distinct values in decreasing order, each paired with the mask of ``{f >= v}``."""
    by_value: dict[float, int] = {}
    for i, v in enumerate(values):
        by_value[v] = by_value.get(v, 0) | (1 << i)
    out = []
    mask = 0
    for v in sorted(by_value, reverse=True):
        mask |= by_value[v]
        out.append((v, mask))
    return out


def _check(c: Capacity, f: RealFunction) -> None:
    same_ground(c.ground, f.ground)


def choquet(c: Capacity, f: RealFunction) -> float:
    """Layer-cake integral ``sum_j v_j * (c_j - c_{j+1})`` over increasing levels.

    Written as a sum of level values weighted by capacity increments so that
    a {0,1}-valued capacity returns a function value with no rounding.
    """
    _check(c, f)
    levels = upper_levels(f.values)
    terms = []
    above = 0.0
    for v, mask in levels:
        cap = c.values[mask]
        terms.append(v * (cap - above))
        above = cap
    return math.fsum(terms)


def sugeno_classic(c: Capacity, f: RealFunction) -> float:
    """``max_j min(v_j, c({f >= v_j}))`` for a function with values in [0,1]."""
    _check(c, f)
    if any(not 0.0 <= v <= 1.0 for v in f.values):
        raise ValueOutOfUnitInterval(f"classic Sugeno integrand must lie in [0,1]: {f.values}")
    return sugeno_classic_values(c.values, f.values)


def sugeno_classic_values(cap_values: Sequence[float], fvals: Sequence[float]) -> float:
    """Unchecked classic Sugeno integral over raw value tables."""
    return max(min(v, cap_values[mask]) for v, mask in upper_levels(fvals))


def sugeno_psi(c: Capacity, f: RealFunction, psi: PsiMap | str = LOGIT) -> float:
    """psi-corrected Sugeno integral ``max{t : c({f >= t}) >= psi^-1(t)}``.

    The admissible set of ``t`` is a finite union of intervals whose right
    ends are the levels ``v_j`` or ``psi(c_j)``; its maximum is
    ``max_j min(v_j, psi(c({f >= v_j})))``.
    """
    _check(c, f)
    return sugeno_psi_values(c.values, f.values, get_psi(psi))


def sugeno_psi_values(cap_values: Sequence[float], fvals: Sequence[float], psi: PsiMap) -> float:
    return max(min(v, psi.eval(cap_values[mask])) for v, mask in upper_levels(fvals))


def _mask_at_least(fvals: Sequence[float], t: float) -> int:
    m = 0
    for i, v in enumerate(fvals):
        if v >= t:
            m |= 1 << i
    return m


def sugeno_psi_oracle(c: Capacity, f: RealFunction, psi: PsiMap | str = LOGIT, step: float = 1e-5) -> float:
    """Largest point of the grid ``min f + j*step`` (plus ``max f``) in the admissible set.

    Evaluates the defining condition ``c({f >= t}) >= psi^-1(t)`` directly
    at grid points.  The condition is down-closed in ``t`` (the left side
    does not increase, the right side increases), so the largest admissible
    grid point is located by bisection over the grid index.
    """
    _check(c, f)
    if not (step > 0 and math.isfinite(step)):
        raise BadStep(f"step must be a positive finite number, got {step!r}")
    psi = get_psi(psi)
    lo_f, hi_f = min(f.values), max(f.values)

    def admissible(t: float) -> bool:
        return c.values[_mask_at_least(f.values, t)] >= psi.inverse(t)

    if admissible(hi_f):
        return hi_f
    # Grid index 0 is min f, always admissible because c(X) = 1 > psi^-1(t).
    lo, hi = 0, int(math.floor((hi_f - lo_f) / step))
    while lo_f + hi * step >= hi_f and hi > 0:
        hi -= 1
    if admissible(lo_f + hi * step):
        return lo_f + hi * step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if admissible(lo_f + mid * step):
            lo = mid
        else:
            hi = mid
    return lo_f + lo * step
