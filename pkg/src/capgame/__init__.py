"""Games in capacities with Sugeno and Choquet expected payoffs on finite strategy sets."""

from .capacity import (
    Capacity,
    GroundSet,
    complete_confidence,
    complete_ignorance,
    dirac,
    from_probability,
    is_additive,
    leq,
    make_capacity,
    pushforward,
)
from .games import CapacityProfile, Game, choquet_payoff, payoff, pure_nash, sugeno_payoff
from .integrals import LOGIT, SCALED_TAN, PsiMap, RealFunction, choquet, sugeno_classic, sugeno_psi
from .monad import MetaCapacity, Tower, m_eta, mu, mu_capacity, tensor2, tensor_n

__version__ = "0.1.0"
