"""
Exact verification of quasi-proper, δ-almost quasi-proper and Nash conditions.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from equilibrium.extraction import SymbolicEquilibrium, evaluate_profile
from errors import NotFullyMixed
from games.tree import (
    BehaviorProfile,
    GameTree,
    best_response_value,
    chance_null_infosets,
    expected_payoff,
    k_values,
)
from utils.logger import get_logger

logger = get_logger(__name__)

EPS_QUASI_PROPER = "eps-quasi-proper"
DELTA_ALMOST = "delta-almost"
NASH = "nash"
STRATEGIC_PROPER = "strategic-proper"


@dataclass
class Violation:
    """``action`` is worse than ``better`` yet gets too much probability.

    For Nash checks only ``player`` is set and ``values`` holds
    (payoff, best-response payoff).
    """
    player: int
    infoset: Optional[str] = None
    action: Optional[str] = None
    better: Optional[str] = None
    values: Tuple[Any, ...] = ()

    def describe(self) -> str:
        if self.infoset is None:
            return f"player {self.player + 1} gains {self.values[1] - self.values[0]} by deviating"
        return (f"player {self.player + 1} at {self.infoset}: {self.action} (K={self.values[0]}) "
                f"vs {self.better} (K={self.values[1]})")


@dataclass
class VerificationReport:
    mode: str
    violations: List[Violation] = field(default_factory=list)
    eps: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    factor: int = 1
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.violations and self.error is None

    def as_fields(self) -> Dict[str, str]:
        """Flat fields for the result document."""
        fields = {
            "mode": self.mode,
            "pass": "true" if self.passed else "false",
            "violations": str(len(self.violations)),
        }
        if self.eps is not None:
            fields["eps"] = str(self.eps)
            fields["factor"] = str(self.factor)
        if self.delta is not None:
            fields["delta"] = str(self.delta)
        if self.error is not None:
            fields["error"] = self.error
        return fields


def _require_fully_mixed(profile: BehaviorProfile) -> None:
    if not profile.is_fully_mixed():
        raise NotFullyMixed("the profile assigns probability 0 to some action")


def _ratio_violations(game: GameTree, profile: BehaviorProfile, eps0: Fraction,
                      delta: Optional[Fraction], factor: int) -> List[Violation]:
    bound = eps0 * factor
    violations = []
    unreachable = chance_null_infosets(game)
    for player in range(game.players):
        for h in game.infosets_of(player):
            if h in unreachable:
                continue
            K = k_values(game, profile, h)
            local = profile[h]
            for c in game.infosets[h].actions:
                for better in game.infosets[h].actions:
                    if c == better:
                        continue
                    worse = K[c] + delta <= K[better] if delta is not None else K[c] < K[better]
                    if worse and local[c] > bound * local[better]:
                        violations.append(Violation(player, h, c, better, (K[c], K[better])))
    return violations


def verify_eps_quasi_proper(game: GameTree, profile: BehaviorProfile, eps0,
                            factor: int = 1) -> VerificationReport:
    """K(c) < K(c') ⇒ b(c) ≤ factor·ε₀·b(c') at every infoset.

    ``factor`` is 2 for solver output and 1 for user-supplied profiles.
    Infosets that chance never reaches hold vacuously.

    Raises:
        NotFullyMixed
    """
    _require_fully_mixed(profile)
    eps0 = Fraction(eps0)
    report = VerificationReport(EPS_QUASI_PROPER, _ratio_violations(game, profile, eps0, None, factor),
                                eps=eps0, factor=factor)
    logger.debug("quasi-proper check", eps=str(eps0), factor=factor, passed=report.passed,
                 violations=len(report.violations))
    return report


def verify_delta_almost(game: GameTree, profile: BehaviorProfile, eps0, delta,
                        factor: int = 1) -> VerificationReport:
    """K(c) + δ ≤ K(c') ⇒ b(c) ≤ factor·ε₀·b(c').

    Raises:
        NotFullyMixed
    """
    _require_fully_mixed(profile)
    if delta <= 0:
        raise ValueError("δ must be positive")
    eps0 = Fraction(eps0)
    delta = Fraction(delta)
    report = VerificationReport(DELTA_ALMOST, _ratio_violations(game, profile, eps0, delta, factor),
                                eps=eps0, delta=delta, factor=factor)
    logger.debug("delta-almost check", eps=str(eps0), delta=str(delta), passed=report.passed)
    return report


def verify_nash(game: GameTree, profile: BehaviorProfile) -> VerificationReport:
    """No player gains by a pure deviation (backward-induction best response)."""
    violations = []
    for player in range(game.players):
        payoff = expected_payoff(game, profile, player)
        best = best_response_value(game, profile, player)
        if best > payoff:
            violations.append(Violation(player, values=(payoff, best)))
    return VerificationReport(NASH, violations)


def strategic_payoffs(game: GameTree, profile: BehaviorProfile, player: int) -> Dict[str, Any]:
    """Payoff of each pure strategy of a one-infoset player against the rest of ``profile``."""
    infosets = game.infosets_of(player)
    if len(infosets) != 1:
        raise ValueError(f"player {player + 1} does not move exactly once")
    h = infosets[0]
    actions = game.infosets[h].actions
    return {
        c: expected_payoff(game, profile.with_local(h, {a: Fraction(int(a == c)) for a in actions}), player)
        for c in actions
    }


def verify_strategic_proper(game: GameTree, profile: BehaviorProfile, eps0,
                            delta=None, factor: int = 1) -> VerificationReport:
    """ε-proper (or δ-almost ε-proper) check of a simultaneous-move embedding.

    Every player has a single infoset; strategy payoffs come from direct
    expected-payoff evaluation rather than K values. ``factor`` scales ε₀
    as in verify_eps_quasi_proper.
    """
    _require_fully_mixed(profile)
    eps0 = Fraction(eps0)
    bound = eps0 * factor
    violations = []
    for player in range(game.players):
        if not game.infosets_of(player):
            continue
        h = game.infosets_of(player)[0]
        payoffs = strategic_payoffs(game, profile, player)
        for c, uc in payoffs.items():
            for better, ub in payoffs.items():
                worse = uc + delta <= ub if delta is not None else uc < ub
                if c != better and worse and profile.prob(h, c) > bound * profile.prob(h, better):
                    violations.append(Violation(player, h, c, better, (uc, ub)))
    return VerificationReport(STRATEGIC_PROPER, violations, eps=eps0, factor=factor,
                              delta=Fraction(delta) if delta is not None else None)


def verify_symbolic(game: GameTree, symbolic: SymbolicEquilibrium,
                    samples: Iterable, factor: int = 2) -> Dict[str, VerificationReport]:
    """Nash check of the limit plus the quasi-proper check at every sampled ε₀."""
    reports = {NASH: verify_nash(game, symbolic.limit_profile())}
    for eps0 in samples:
        eps0 = Fraction(eps0)
        reports[f"eps.{eps0}"] = _checked_sample(game, symbolic, eps0, factor)
    return reports


def _checked_sample(game: GameTree, symbolic: SymbolicEquilibrium, eps0: Fraction,
                    factor: int) -> VerificationReport:
    try:
        return verify_eps_quasi_proper(game, evaluate_profile(symbolic, eps0), eps0, factor)
    except (NotFullyMixed, ZeroDivisionError) as exc:
        # eps0 lies outside the range where the symbolic solution is a profile
        return VerificationReport(EPS_QUASI_PROPER, eps=eps0, factor=factor, error=str(exc))


def largest_passing_eps(game: GameTree, symbolic: SymbolicEquilibrium, samples: Iterable,
                        factor: int = 2) -> Optional[Fraction]:
    passing = [Fraction(e) for e in samples
               if _checked_sample(game, symbolic, Fraction(e), factor).passed]
    return max(passing) if passing else None
