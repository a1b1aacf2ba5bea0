"""
Exact two-phase simplex over the ordered ε-field.

The constraint matrix is rational; right-hand sides and objective
coefficients are ε-polynomials. Basis inverses stay rational, so every
tableau entry in the rhs column, the reduced-cost row and the objective is an
EpsPoly and all comparisons are exact.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from config import get_settings
from eps_field.field import EpsPoly
from errors import IterationLimit, LpInfeasible, LpUnbounded
from utils.logger import get_logger

logger = get_logger(__name__)

LE = "<="
GE = ">="
EQ = "=="


def _poly(value) -> EpsPoly:
    return value if isinstance(value, EpsPoly) else EpsPoly.constant(value)


@dataclass
class LpInstance:
    """maximize objective·x subject to rows·x (senses) rhs and x ≥ 0."""
    objective: List
    rows: List[List[Fraction]]
    senses: List[str]
    rhs: List
    names: Optional[List] = None

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass
class PivotStats:
    pivots: int = 0
    objective_history: List[EpsPoly] = field(default_factory=list)
    basis_history: List[Tuple[int, ...]] = field(default_factory=list)


@dataclass
class LpSolution:
    x: List[EpsPoly]
    objective: EpsPoly
    duals: List[EpsPoly]
    stats: PivotStats


class _Tableau:
    def __init__(self, lp: LpInstance, max_pivots: int):
        self.m = len(lp.rows)
        self.n = lp.num_vars
        self.max_pivots = max_pivots
        self.stats = PivotStats()

        inequality_rows = [i for i, s in enumerate(lp.senses) if s != EQ]
        self.slack_col = {i: self.n + k for k, i in enumerate(inequality_rows)}
        self.art_start = self.n + len(inequality_rows)
        self.width = self.art_start + self.m

        self.flip: List[int] = []
        self.T: List[List[Fraction]] = []
        self.rhs: List[EpsPoly] = []
        for i, (row, sense, b) in enumerate(zip(lp.rows, lp.senses, lp.rhs)):
            if sense not in (LE, GE, EQ):
                raise ValueError(f"unknown constraint sense {sense!r}")
            b = _poly(b)
            flip = -1 if b.sign() < 0 else 1
            full = [Fraction(v) * flip for v in row] + [Fraction(0)] * (self.width - self.n)
            if i in self.slack_col:
                full[self.slack_col[i]] = Fraction(flip if sense == LE else -flip)
            full[self.art_start + i] = Fraction(1)
            self.flip.append(flip)
            self.T.append(full)
            self.rhs.append(b * flip)
        self.basis = [self.art_start + i for i in range(self.m)]
        self.d: List[EpsPoly] = []
        self.obj = EpsPoly.zero()

    def is_artificial(self, col: int) -> bool:
        return col >= self.art_start

    def set_costs(self, costs: Sequence[EpsPoly]) -> None:
        """Reduced costs d_j = c_j − c_B·B⁻¹A_j and the objective value."""
        self.d = list(costs)
        self.obj = EpsPoly.zero()
        for i, b in enumerate(self.basis):
            cb = costs[b]
            if cb.is_zero:
                continue
            self.obj = self.obj + cb * self.rhs[i]
            row = self.T[i]
            for j in range(self.width):
                if row[j]:
                    self.d[j] = self.d[j] - cb * row[j]

    def pivot(self, r: int, c: int) -> None:
        self.stats.pivots += 1
        if self.stats.pivots > self.max_pivots:
            raise IterationLimit(f"simplex exceeded {self.max_pivots} pivots")
        piv = self.T[r][c]
        row = [v / piv for v in self.T[r]]
        self.T[r] = row
        self.rhs[r] = self.rhs[r] / piv
        support = [j for j, v in enumerate(row) if v]
        for i in range(self.m):
            f = self.T[i][c]
            if i == r or not f:
                continue
            target = self.T[i]
            for j in support:
                target[j] -= f * row[j]
            self.rhs[i] = self.rhs[i] - self.rhs[r] * f
        dc = self.d[c]
        if not dc.is_zero:
            for j in support:
                self.d[j] = self.d[j] - dc * row[j]
            self.obj = self.obj + dc * self.rhs[r]
        self.basis[r] = c

    def run(self) -> None:
        """Bland's rule: smallest improving column, ratio ties to the smallest basic index."""
        while True:
            entering = next((j for j in range(self.art_start) if self.d[j].sign() > 0), None)
            if entering is None:
                return
            candidates = [
                (self.rhs[i] / self.T[i][entering], self.basis[i], i)
                for i in range(self.m) if self.T[i][entering] > 0
            ]
            if not candidates:
                raise LpUnbounded(f"objective unbounded along column {entering}")
            _, _, r = min(candidates)
            self.pivot(r, entering)
            self.stats.objective_history.append(self.obj)
            self.stats.basis_history.append(tuple(sorted(self.basis)))

    def phase_one(self) -> bool:
        zero = EpsPoly.zero()
        minus_one = EpsPoly.constant(-1)
        self.set_costs([zero] * self.art_start + [minus_one] * self.m)
        self.stats.objective_history.append(self.obj)
        self.run()
        if self.obj.sign() < 0:
            return False
        # Drive zero-level artificials out; rows with no other support are redundant.
        for i in range(self.m):
            if not self.is_artificial(self.basis[i]):
                continue
            col = next((j for j in range(self.art_start) if self.T[i][j]), None)
            if col is not None:
                self.pivot(i, col)
        return True


def _max_pivots(max_pivots: Optional[int]) -> int:
    return max_pivots if max_pivots is not None else get_settings().simplex_max_pivots


def is_feasible(lp: LpInstance, max_pivots: Optional[int] = None) -> bool:
    """Phase one only."""
    return _Tableau(lp, _max_pivots(max_pivots)).phase_one()


def solve_lp(lp: LpInstance, max_pivots: Optional[int] = None) -> LpSolution:
    """Solve ``lp`` exactly.

    Returns:
        Primal values, objective, one dual per row (sign convention of a
        maximization: ≤ rows have nonnegative duals) and pivot statistics.

    Raises:
        LpInfeasible, LpUnbounded, IterationLimit
    """
    tab = _Tableau(lp, _max_pivots(max_pivots))
    if not tab.phase_one():
        raise LpInfeasible("phase one ended with positive infeasibility")
    phase_one_pivots = tab.stats.pivots

    zero = EpsPoly.zero()
    costs = [_poly(c) for c in lp.objective] + [zero] * (tab.width - tab.n)
    tab.set_costs(costs)
    tab.stats.objective_history = [tab.obj]
    tab.run()

    x = [EpsPoly.zero()] * tab.n
    for i, b in enumerate(tab.basis):
        if b < tab.n:
            x[b] = tab.rhs[i]
    duals = [-tab.d[tab.art_start + i] * tab.flip[i] for i in range(tab.m)]
    logger.debug("lp solved", rows=tab.m, cols=tab.n, phase_one_pivots=phase_one_pivots,
                 pivots=tab.stats.pivots)
    return LpSolution(x, tab.obj, duals, tab.stats)
