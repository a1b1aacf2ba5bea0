"""
n-player path: floors, the δ-approximate selection operator P, the map
F_{ε,δ} and a damped fixed-point search with exact verification.

Iteration runs in floats (or snapped rationals); the final profile is always
produced and verified in exact arithmetic.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from config import get_settings
from equilibrium.verification import VerificationReport, verify_delta_almost
from errors import ContainmentViolated, InfeasibleFloor, NoConvergence, ParameterOutOfRange, Underflow
from games.tree import BehaviorProfile, GameTree, chance_null_infosets, k_value
from utils.logger import get_logger

logger = get_logger(__name__)

FLOAT = "float"
RATIONAL = "rational"

# Float comparisons against floors and ratio bounds.
_REL_TOL = 1e-9
# Denominator cap when snapping float iterates to rationals.
_SNAP_DENOMINATOR = 10 ** 12


class IterationConfig(BaseModel):
    damping: float = Field(default=0.5, gt=0, le=1)
    max_iters: int = Field(default=1000, ge=1)
    tolerance: float = Field(default=1e-8, gt=0)
    mode: Literal["float", "rational"] = FLOAT
    restarts: int = Field(default=8, ge=0)
    seed: int = 0

    @classmethod
    def from_settings(cls, **overrides) -> "IterationConfig":
        settings = get_settings()
        values = dict(damping=settings.damping, max_iters=settings.max_iters,
                      tolerance=settings.tolerance, restarts=settings.restarts, seed=settings.seed)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class FloorSpec:
    """Per-infoset floors η_{m}(ε), or η_{m}(ε²) when ``squared``."""
    eps: Any
    squared: bool = True

    def floor(self, m: int):
        return eta(m, self.eps * self.eps if self.squared else self.eps)


def eta(m: int, eps):
    """ε^m / m"""
    return eps ** m / m


def deltasel(x, y, z, delta):
    """x for z ≤ 0, y for z ≥ δ, linear in between."""
    if z <= 0:
        return x
    if z >= delta:
        return y
    t = z / delta
    return (1 - t) * x + t * y


def p_operator(x: Sequence, v: Sequence, delta, eps) -> List:
    """(P(x, v))_c = min over c' of deltasel(x_c, ε·x_{c'}, v_{c'} − v_c)."""
    m = len(x)
    return [min(deltasel(x[c], eps * x[j], v[j] - v[c], delta) for j in range(m)) for c in range(m)]


def _is_float(value) -> bool:
    return isinstance(value, (float, np.floating))


def _less(a, b) -> bool:
    """a < b, with a relative tolerance for floats."""
    if _is_float(a) or _is_float(b):
        return a < b - _REL_TOL * abs(b)
    return a < b


def iterate_p(v: Sequence, delta, eps, m: Optional[int] = None) -> List:
    """P applied 2m² times to the uniform vector.

    Raises:
        ParameterOutOfRange: ε > 1/m.
        ContainmentViolated: the normalized result has an entry below η_m(ε).
    """
    m = m if m is not None else len(v)
    uniform = 1.0 / m if _is_float(eps) else Fraction(1, m)
    if _less(uniform, eps):
        raise ParameterOutOfRange(f"ε = {eps} exceeds 1/m for m = {m}")
    y = [uniform] * m
    for _ in range(2 * m * m):
        y = p_operator(y, v, delta, eps)
    total = sum(y)
    floor = eta(m, eps)
    if any(_less(entry / total, floor) for entry in y):
        raise ContainmentViolated(f"iterate {y} leaves the η-simplex (η = {floor})")
    return y


def has_almost_proper_property(x: Sequence, v: Sequence, delta, eps) -> bool:
    """x_c ≤ ε·x_{c'} whenever v_c + δ ≤ v_{c'}."""
    m = len(x)
    for c in range(m):
        for j in range(m):
            if v[c] + delta <= v[j] and _less(eps * x[j], x[c]):
                return False
    return True


# ----------------------------------------------------------------------
# Retraction onto the floors
# ----------------------------------------------------------------------

def _retract_local(values: Sequence, floor) -> List:
    m = len(values)
    if m * floor >= 1:
        raise InfeasibleFloor(f"{m} floors of {floor} do not fit in a distribution")
    ordered = sorted(values, reverse=True)
    top = 0
    for k in range(1, m + 1):
        top = top + ordered[k - 1]
        t = (top + (m - k) * floor - 1) / k
        upper_ok = not _less(ordered[k - 1] - t, floor)
        lower_ok = k == m or not _less(floor, ordered[k] - t)
        if upper_ok and lower_ok:
            return [max(b - t, floor) for b in values]
    raise AssertionError("no breakpoint segment solves the retraction equation")


def retract_to_floor(game: GameTree, profile: BehaviorProfile, floors: FloorSpec) -> BehaviorProfile:
    """Per infoset, shift by t so that Σ max(b(c) − t, η) = 1.

    The identity on profiles that already respect the floors.

    Raises:
        InfeasibleFloor: m·η ≥ 1 at some infoset.
    """
    out = {}
    for h, info in game.infosets.items():
        values = [profile.prob(h, a) for a in info.actions]
        out[h] = dict(zip(info.actions, _retract_local(values, floors.floor(info.size))))
    return BehaviorProfile(out)


# ----------------------------------------------------------------------
# F_{ε,δ}
# ----------------------------------------------------------------------

def valuations(game: GameTree, profile: BehaviorProfile) -> Dict[str, List]:
    """(v_ih)_c = K_i^{h,c}(b) for every infoset.

    Infosets chance never reaches get a constant valuation, so F keeps them uniform.
    """
    unreachable = chance_null_infosets(game)
    return {h: [0] * info.size if h in unreachable else [k_value(game, profile, h, a) for a in info.actions]
            for h, info in game.infosets.items()}


def f_map(game: GameTree, profile: BehaviorProfile, eps, delta) -> BehaviorProfile:
    out = {}
    for h, v in valuations(game, profile).items():
        info = game.infosets[h]
        y = iterate_p(v, delta, eps, info.size)
        total = sum(y)
        out[h] = {a: y_c / total for a, y_c in zip(info.actions, y)}
    return BehaviorProfile(out)


def _flat(game: GameTree, profile: BehaviorProfile) -> np.ndarray:
    return np.array([float(profile.prob(h, a)) for h, info in game.infosets.items()
                     for a in info.actions])


def residual(game: GameTree, profile: BehaviorProfile, eps, delta) -> float:
    """‖b − F(b)‖_∞"""
    image = f_map(game, profile, eps, delta)
    return _distance(game, profile, image)


def _distance(game: GameTree, a: BehaviorProfile, b: BehaviorProfile) -> float:
    if not game.infosets:
        return 0.0
    return float(np.max(np.abs(_flat(game, a) - _flat(game, b))))


# ----------------------------------------------------------------------
# Search
# ----------------------------------------------------------------------

@dataclass
class SearchResult:
    profile: BehaviorProfile
    residual: float
    report: VerificationReport
    iterations: int
    restarts_used: int
    tolerance: float

    @property
    def converged(self) -> bool:
        return self.residual <= self.tolerance


def _to_mode(value, mode: str):
    return float(value) if mode == FLOAT else Fraction(value)


def _snap(game: GameTree, profile: BehaviorProfile) -> BehaviorProfile:
    """Nearest small-denominator rationals, renormalized per infoset."""
    out = {}
    for h, info in game.infosets.items():
        raw = [Fraction(profile.prob(h, a)).limit_denominator(_SNAP_DENOMINATOR) for a in info.actions]
        total = sum(raw)
        out[h] = {a: r / total for a, r in zip(info.actions, raw)}
    return BehaviorProfile(out)


def _starts(game: GameTree, config: IterationConfig) -> List[BehaviorProfile]:
    rng = np.random.default_rng(config.seed)
    starts = [BehaviorProfile({h: {a: 1.0 / info.size for a in info.actions}
                               for h, info in game.infosets.items()})]
    for _ in range(config.restarts):
        starts.append(BehaviorProfile({
            h: dict(zip(info.actions, rng.dirichlet(np.ones(info.size)).tolist()))
            for h, info in game.infosets.items()
        }))
    return starts


def _blend(game: GameTree, a: BehaviorProfile, b: BehaviorProfile, weight) -> BehaviorProfile:
    return BehaviorProfile({
        h: {c: (1 - weight) * a.prob(h, c) + weight * b.prob(h, c) for c in info.actions}
        for h, info in game.infosets.items()
    })


def check_parameters(game: GameTree, eps, delta) -> None:
    """Raises ParameterOutOfRange unless 0 < ε ≤ 1/m for every infoset and δ > 0."""
    largest = max((info.size for info in game.infosets.values()), default=1)
    if not 0 < eps <= Fraction(1, largest):
        raise ParameterOutOfRange(f"ε = {eps} must lie in (0, 1/{largest}] for this game")
    if delta <= 0:
        raise ParameterOutOfRange(f"δ = {delta} must be positive")


def fixed_point_search(game: GameTree, eps, delta, config: Optional[IterationConfig] = None,
                       strict: bool = False) -> SearchResult:
    """Damped iteration b ← retract((1 − λ)b + λF(b)) with random restarts.

    The best iterate is snapped to rationals, retracted and mapped once
    through exact F; that exact image is verified and returned.

    Raises:
        NoConvergence: only when ``strict`` and the residual stays above tolerance.
        ParameterOutOfRange: ε exceeds 1/m for the largest infoset, or δ ≤ 0.
    """
    config = config or IterationConfig.from_settings()
    eps_exact, delta_exact = Fraction(eps), Fraction(delta)
    check_parameters(game, eps_exact, delta_exact)
    eps_n, delta_n = _to_mode(eps_exact, config.mode), _to_mode(delta_exact, config.mode)
    floors = FloorSpec(eps_n)
    damping = _to_mode(Fraction(config.damping), config.mode)

    best: Tuple[float, Optional[BehaviorProfile]] = (float("inf"), None)
    iterations = 0
    restarts_used = 0
    for index, start in enumerate(_starts(game, config)):
        restarts_used = index
        if config.mode == RATIONAL:
            start = _snap(game, start)
        b = retract_to_floor(game, start, floors)
        for _ in range(config.max_iters):
            iterations += 1
            image = f_map(game, b, eps_n, delta_n)
            res = _distance(game, b, image)
            if res < best[0]:
                best = (res, b)
            if res <= config.tolerance:
                break
            # The undamped image is often already the fixed point.
            image_res = residual(game, image, eps_n, delta_n)
            if image_res < best[0]:
                best = (image_res, image)
            if image_res <= config.tolerance:
                break
            b = _blend(game, b, image, damping)
            if config.mode == RATIONAL:
                b = _snap(game, b)
            b = retract_to_floor(game, b, floors)
        logger.debug("search start finished", start=index, best_residual=best[0])
        if best[0] <= config.tolerance:
            break

    best_residual, best_profile = best
    exact_floors = FloorSpec(eps_exact)
    exact_start = retract_to_floor(game, _snap(game, best_profile), exact_floors)
    exact_image = f_map(game, exact_start, eps_exact, delta_exact)
    report = verify_delta_almost(game, exact_image, eps_exact, delta_exact)

    result = SearchResult(exact_image, best_residual, report, iterations, restarts_used,
                          config.tolerance)
    logger.info("fixed point search finished", residual=best_residual, iterations=iterations,
                restarts=restarts_used, verified=report.passed)
    if not result.converged:
        logger.warning("fixed point search did not reach tolerance", residual=best_residual,
                       tolerance=config.tolerance)
        if strict:
            raise NoConvergence(f"best residual {best_residual} above {config.tolerance}")
    return result


# ----------------------------------------------------------------------
# ε / δ schedule
# ----------------------------------------------------------------------

# Rationals beyond this many denominator bits are treated as out of range.
_MAX_RATIONAL_BITS = 1 << 16


def schedule_eps_delta(gamma, q1: int = 0, q2: int = 0, mode: str = RATIONAL) -> Tuple[Any, Any]:
    """ε = (γ/2)^(2^q1), δ = min(γ/2, ε)^(2^q2) by repeated squaring.

    Raises:
        ParameterOutOfRange: γ outside (0, 1] or a negative squaring count.
        Underflow: a value leaves the representable range of ``mode``.
    """
    gamma = Fraction(gamma)
    if not 0 < gamma <= 1:
        raise ParameterOutOfRange("γ must lie in (0, 1]")
    if q1 < 0 or q2 < 0:
        raise ParameterOutOfRange("squaring counts must be nonnegative")
    half = gamma / 2

    def square(value, times):
        for _ in range(times):
            value = value * value
            if mode == FLOAT and value < np.finfo(float).tiny:
                raise Underflow("value underflows double precision after squaring")
            if mode == RATIONAL and value.denominator.bit_length() > _MAX_RATIONAL_BITS:
                raise Underflow("rational value exceeds the supported size")
        return value

    start = float(half) if mode == FLOAT else half
    eps = square(start, q1)
    delta = square(min(start, eps), q2)
    return eps, delta
