"""
ε-permutahedra Π_ε(ρ, k, m): base vectors, the Rado facet system and the
comparator-network extended formulation.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from config import get_settings
from eps_field.field import EpsPoly
from errors import MassTooSmall, NetworkDoesNotSort, TooManyFacets
from utils.logger import get_logger

logger = get_logger(__name__)

FACET = "facet"
NETWORK = "network"
EQ = "=="
GE = ">="

Var = Hashable
Number = Union[int, Fraction]


@dataclass(frozen=True)
class PermSpec:
    """Π_ε(ρ, k, m).

    The mass is either a constant ``rho`` or, when ``mass_var`` is set, the
    value of that variable (a parent realization weight).
    """
    k: int
    m: int
    rho: EpsPoly = field(default_factory=EpsPoly.one)
    mass_var: Optional[Var] = None

    def __post_init__(self):
        if self.m < 1 or self.k < 0:
            raise ValueError(f"invalid permutahedron parameters k={self.k}, m={self.m}")


@dataclass(frozen=True)
class LinearConstraint:
    """Σ coeff·var (sense) rhs, rational coefficients and an ε-polynomial rhs."""
    coeffs: Tuple[Tuple[Var, Fraction], ...]
    sense: str
    rhs: EpsPoly

    def lhs_at(self, values: Mapping[Var, Number]) -> Fraction:
        return sum((c * values[v] for v, c in self.coeffs), Fraction(0))

    def holds_at(self, values: Mapping[Var, Number], eps0: Number) -> bool:
        lhs, rhs = self.lhs_at(values), self.rhs.evaluate(eps0)
        return lhs == rhs if self.sense == EQ else lhs >= rhs


@dataclass
class ConstraintBlock:
    spec: PermSpec
    primary: Tuple[Var, ...]
    wires: Tuple[Var, ...]
    constraints: List[LinearConstraint]
    provenance: str

    @property
    def equalities(self) -> List[LinearConstraint]:
        return [c for c in self.constraints if c.sense == EQ]

    @property
    def inequalities(self) -> List[LinearConstraint]:
        return [c for c in self.constraints if c.sense == GE]


@dataclass(frozen=True)
class ComparatorNetwork:
    """Gates (i, j), i < j; each gate puts the larger value on wire i."""
    wires: int
    gates: Tuple[Tuple[int, int], ...]

    def apply(self, values: Sequence) -> List:
        out = list(values)
        for i, j in self.gates:
            if out[i] < out[j]:
                out[i], out[j] = out[j], out[i]
        return out


# ----------------------------------------------------------------------
# Base vectors
# ----------------------------------------------------------------------

def tail_sum(k: int, m: int) -> EpsPoly:
    """ε^{k+1} + … + ε^{k+m−1}"""
    return EpsPoly([0] * (k + 1) + [1] * (m - 1)) if m > 1 else EpsPoly.zero()


def base_vector(rho, k: int, m: int, eps: Optional[Number] = None) -> List:
    """p_ε(ρ, k, m), symbolic when ``eps`` is None, numeric otherwise.

    Raises:
        MassTooSmall: ρ < ε^k.
    """
    if eps is None:
        rho = rho if isinstance(rho, EpsPoly) else EpsPoly.constant(rho)
        if (rho - EpsPoly.eps_power(k)).sign() < 0:
            raise MassTooSmall(f"mass {rho} is below ε^{k}")
        return [rho - tail_sum(k, m)] + [EpsPoly.eps_power(k + i) for i in range(1, m)]

    eps = Fraction(eps)
    rho = rho.evaluate(eps) if isinstance(rho, EpsPoly) else Fraction(rho)
    if rho < eps ** k:
        raise MassTooSmall(f"mass {rho} is below {eps}^{k}")
    tail = [eps ** (k + i) for i in range(1, m)]
    return [rho - sum(tail, Fraction(0))] + tail


def smallest_sum(k: int, m: int, size: int) -> EpsPoly:
    """Sum of the ``size`` smallest entries of p_ε(ρ, k, m), for size < m."""
    return EpsPoly([0] * (k + m - size) + [1] * size)


# ----------------------------------------------------------------------
# Constraint systems
# ----------------------------------------------------------------------

def _mass_constraint(spec: PermSpec, coeffs: List[Tuple[Var, Fraction]], offset: EpsPoly) -> LinearConstraint:
    """Σ coeffs = mass + offset, moving a variable mass to the left-hand side."""
    if spec.mass_var is None:
        return LinearConstraint(tuple(coeffs), EQ, spec.rho + offset)
    return LinearConstraint(tuple(coeffs) + ((spec.mass_var, Fraction(-1)),), EQ, offset)


def facet_system(spec: PermSpec, variables: Sequence[Var],
                 threshold: Optional[int] = None) -> ConstraintBlock:
    """Mass equality plus the 2^m − 2 subset inequalities.

    Raises:
        TooManyFacets: m exceeds the facet threshold.
    """
    threshold = threshold if threshold is not None else get_settings().facet_threshold
    if spec.m > threshold:
        raise TooManyFacets(f"m={spec.m} exceeds facet threshold {threshold}")
    if len(variables) != spec.m:
        raise ValueError("one variable per coordinate is required")

    one = Fraction(1)
    constraints = [_mass_constraint(spec, [(v, one) for v in variables], EpsPoly.zero())]
    for mask in range(1, 2 ** spec.m - 1):
        subset = [variables[i] for i in range(spec.m) if mask >> i & 1]
        constraints.append(
            LinearConstraint(tuple((v, one) for v in subset), GE,
                             smallest_sum(spec.k, spec.m, len(subset)))
        )
    return ConstraintBlock(spec, tuple(variables), (), constraints, FACET)


def _default_wire(stage: int, position: int) -> Var:
    return ("wire", stage, position)


def network_system(spec: PermSpec, variables: Sequence[Var],
                   net: Optional[ComparatorNetwork] = None,
                   wire_name=_default_wire) -> ConstraintBlock:
    """Extended formulation through a sorting network.

    Each gate with inputs (a, b) and outputs (u, v) adds u + v = a + b,
    u ≥ a, u ≥ b; the final wires are pinned to p_ε(ρ, k, m) in descending
    order. ``wire_name(stage, position)`` names the auxiliary variables.
    """
    net = net if net is not None else batcher_network(spec.m)
    if net.wires != spec.m:
        raise NetworkDoesNotSort(f"network has {net.wires} wires, expected {spec.m}")
    if spec.m <= 16 and not sorts_all_binary(net):
        raise NetworkDoesNotSort("network fails the zero-one test")

    one = Fraction(1)
    current = list(variables)
    wires: List[Var] = []
    constraints: List[LinearConstraint] = []
    for stage, (i, j) in enumerate(net.gates):
        a, b = current[i], current[j]
        u, v = wire_name(stage, i), wire_name(stage, j)
        wires.extend((u, v))
        zero = EpsPoly.zero()
        constraints.append(LinearConstraint(((u, one), (v, one), (a, -one), (b, -one)), EQ, zero))
        constraints.append(LinearConstraint(((u, one), (a, -one)), GE, zero))
        constraints.append(LinearConstraint(((u, one), (b, -one)), GE, zero))
        current[i], current[j] = u, v

    constraints.append(_mass_constraint(spec, [(current[0], one)], -tail_sum(spec.k, spec.m)))
    for position in range(1, spec.m):
        constraints.append(LinearConstraint(((current[position], one),), EQ,
                                            EpsPoly.eps_power(spec.k + position)))
    return ConstraintBlock(spec, tuple(variables), tuple(wires), constraints, NETWORK)


def block_for(spec: PermSpec, variables: Sequence[Var], threshold: Optional[int] = None,
              wire_name=_default_wire) -> ConstraintBlock:
    """Facet system up to the threshold, network system beyond it."""
    threshold = threshold if threshold is not None else get_settings().facet_threshold
    if spec.m <= threshold:
        return facet_system(spec, variables, threshold)
    return network_system(spec, variables, wire_name=wire_name)


# ----------------------------------------------------------------------
# Sorting networks
# ----------------------------------------------------------------------

def _merge(lo: int, hi: int, r: int) -> Iterator[Tuple[int, int]]:
    step = r * 2
    if step < hi - lo:
        yield from _merge(lo, hi, step)
        yield from _merge(lo + r, hi, step)
        for i in range(lo + r, hi - r, step):
            yield (i, i + r)
    else:
        yield (lo, lo + r)


def _sort(lo: int, hi: int) -> Iterator[Tuple[int, int]]:
    if hi - lo >= 1:
        mid = lo + (hi - lo) // 2
        yield from _sort(lo, mid)
        yield from _sort(mid + 1, hi)
        yield from _merge(lo, hi, 1)


def batcher_network(m: int) -> ComparatorNetwork:
    """Odd-even mergesort on m wires.

    Built for the next power of two; gates touching the padding wires are
    dropped (padding acts as −∞ and never moves).
    """
    if m < 1:
        raise ValueError("a network needs at least one wire")
    size = 1
    while size < m:
        size *= 2
    gates = tuple((i, j) for i, j in _sort(0, size - 1) if j < m)
    return ComparatorNetwork(m, gates)


def sorts_all_binary(net: ComparatorNetwork) -> bool:
    """Zero-one principle: the network sorts every 0/1 input descending."""
    for bits in product((0, 1), repeat=net.wires):
        out = net.apply(bits)
        if any(out[i] < out[i + 1] for i in range(net.wires - 1)):
            return False
    return True


# ----------------------------------------------------------------------
# Membership oracles
# ----------------------------------------------------------------------

def _numeric_mass(spec: PermSpec, eps0: Fraction, rho: Optional[Number]) -> Fraction:
    if spec.mass_var is not None:
        if rho is None:
            raise ValueError("a numeric mass is required for a variable-mass permutahedron")
        return Fraction(rho)
    return spec.rho.evaluate(eps0) if rho is None else Fraction(rho)


def membership(spec: PermSpec, x: Sequence[Number], eps0: Number,
               rho: Optional[Number] = None) -> bool:
    """Exact facet test at ε = eps0: x majorized by p_{eps0}(ρ, k, m)."""
    eps0 = Fraction(eps0)
    mass = _numeric_mass(spec, eps0, rho)
    alpha = base_vector(mass, spec.k, spec.m, eps0)
    xs = sorted(Fraction(v) for v in x)
    if sum(xs) != mass:
        return False
    smallest = sorted(alpha)
    running_x = running_alpha = Fraction(0)
    for size in range(1, spec.m):
        running_x += xs[size - 1]
        running_alpha += smallest[size - 1]
        if running_x < running_alpha:
            return False
    return True


def is_satisfied(block: ConstraintBlock, values: Mapping[Var, Number], eps0: Number) -> bool:
    """Evaluate every constraint of ``block`` at ε = eps0."""
    eps0 = Fraction(eps0)
    return all(c.holds_at(values, eps0) for c in block.constraints)


def network_membership(block: ConstraintBlock, x: Sequence[Number], eps0: Number,
                       rho: Optional[Number] = None) -> bool:
    """Is there a wire assignment completing x at ε = eps0? Decided by an exact LP."""
    from solvers.simplex import LpInstance, is_feasible

    eps0 = Fraction(eps0)
    fixed: Dict[Var, Fraction] = {v: Fraction(val) for v, val in zip(block.primary, x)}
    if block.spec.mass_var is not None:
        fixed[block.spec.mass_var] = _numeric_mass(block.spec, eps0, rho)
    if any(val < 0 for val in fixed.values()):
        return False

    index = {w: i for i, w in enumerate(block.wires)}
    rows, senses, rhs = [], [], []
    for c in block.constraints:
        row = [Fraction(0)] * len(block.wires)
        bound = c.rhs.evaluate(eps0)
        for var, coeff in c.coeffs:
            if var in index:
                row[index[var]] += coeff
            else:
                bound -= coeff * fixed[var]
        if not any(row):
            if (bound != 0) if c.sense == EQ else (bound > 0):
                return False
            continue
        rows.append(row)
        senses.append(c.sense)
        rhs.append(bound)
    if not rows:
        return True
    return is_feasible(LpInstance([Fraction(0)] * len(block.wires), rows, senses, rhs))
