"""Symbolic behavior strategies from ε-realization plans."""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence

from eps_field.field import EpsRat
from games.tree import BehaviorProfile, GameTree
from polytopes.sequence_form import Var, realization_to_behavior
from utils.logger import get_logger

logger = get_logger(__name__)

LCP = "lcp"
LP = "lp"


@dataclass
class SymbolicEquilibrium:
    """Behavior probabilities as rational functions in ε plus their limits."""
    behavior: Dict[str, Dict[str, EpsRat]]
    limit: Dict[str, Dict[str, Fraction]]
    provenance: str
    value: Optional[EpsRat] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def limit_profile(self) -> BehaviorProfile:
        return BehaviorProfile(self.limit)


def extract_behavior(game: GameTree, plans: Sequence[Mapping[Var, object]],
                     provenance: str = LCP, value: Optional[EpsRat] = None) -> SymbolicEquilibrium:
    """b(c; ε) = x_c(ε) / x_parent(ε), canonical, with the ε → 0 limit.

    Raises:
        ZeroParentWeight: a plan is not strictly positive on parent sequences.
    """
    behavior: Dict[str, Dict[str, EpsRat]] = {}
    for player, plan in enumerate(plans):
        local = realization_to_behavior(game, plan, player)
        for h, dist in local.items():
            behavior[h] = {a: p if isinstance(p, EpsRat) else EpsRat(p) for a, p in dist.items()}

    limit: Dict[str, Dict[str, Fraction]] = {}
    for h, dist in behavior.items():
        if sum(dist.values()) != 1:
            raise AssertionError(f"local strategy at {h} does not sum to 1")
        limit[h] = {a: p.limit_at_zero() for a, p in dist.items()}
    logger.debug("behavior extracted", infosets=len(behavior), provenance=provenance)
    return SymbolicEquilibrium(behavior, limit, provenance, value)


def evaluate_profile(symbolic: SymbolicEquilibrium, eps0) -> BehaviorProfile:
    """Exact numeric profile at ε = eps0."""
    eps0 = Fraction(eps0)
    return BehaviorProfile({
        h: {a: p.eval_at(eps0) for a, p in dist.items()}
        for h, dist in symbolic.behavior.items()
    })
