"""
Lemke's complementary pivoting over the ordered ε-field.

The tableau is [I | −M | −d | q]: the matrix part stays rational and only the
right-hand side carries ε, so every basic value is an EpsPoly.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

from config import get_settings
from eps_field.field import EpsPoly
from errors import IterationLimit, RayTermination
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class LcpInstance:
    """Find z ≥ 0 with w = Mz + q ≥ 0 and zᵀw = 0."""
    M: List[List[Fraction]]
    q: List[EpsPoly]
    tags: Optional[List[Any]] = None

    def __post_init__(self):
        n = len(self.q)
        if len(self.M) != n or any(len(row) != n for row in self.M):
            raise ValueError("M must be square with one row per entry of q")
        self.q = [v if isinstance(v, EpsPoly) else EpsPoly.constant(v) for v in self.q]

    @property
    def size(self) -> int:
        return len(self.q)


@dataclass
class LcpSolution:
    z: List[EpsPoly]
    w: List[EpsPoly]
    pivots: int
    basis_history: List[Tuple[int, ...]] = field(default_factory=list)


def complementary_values(lcp: LcpInstance, z: Sequence[EpsPoly]) -> List[EpsPoly]:
    """w = Mz + q"""
    w = []
    for row, qi in zip(lcp.M, lcp.q):
        value = qi
        for coeff, zj in zip(row, z):
            if coeff and not zj.is_zero:
                value = value + zj * coeff
        w.append(value)
    return w


def check_lcp_solution(lcp: LcpInstance, z: Sequence[EpsPoly]) -> bool:
    """Exact symbolic feasibility and complementarity check."""
    w = complementary_values(lcp, z)
    return (all(v.sign() >= 0 for v in z)
            and all(v.sign() >= 0 for v in w)
            and all((zi * wi).is_zero for zi, wi in zip(z, w)))


def lemke(lcp: LcpInstance, covering: Optional[Sequence[Fraction]] = None,
          max_pivots: Optional[int] = None) -> LcpSolution:
    """Solve ``lcp`` with covering vector ``covering`` (all ones by default).

    Ratio ties are broken lexicographically on (rhs, B⁻¹ row) / pivot entry.

    Raises:
        RayTermination: no blocking row for the entering column.
        IterationLimit: more than ``max_pivots`` pivots.
    """
    n = lcp.size
    d = [Fraction(v) for v in covering] if covering is not None else [Fraction(1)] * n
    if len(d) != n or any(v <= 0 for v in d):
        raise ValueError("covering vector must be positive with one entry per row")
    max_pivots = max_pivots if max_pivots is not None else get_settings().lemke_max_pivots

    if all(qi.sign() >= 0 for qi in lcp.q):
        return LcpSolution([EpsPoly.zero()] * n, list(lcp.q), 0)

    # Columns: w_0..w_{n-1}, z_0..z_{n-1}, z0 (artificial).
    z0 = 2 * n
    T: List[List[Fraction]] = []
    for i in range(n):
        row = [Fraction(0)] * (2 * n + 1)
        row[i] = Fraction(1)
        for j in range(n):
            row[n + j] = -Fraction(lcp.M[i][j])
        row[z0] = -d[i]
        T.append(row)
    rhs = list(lcp.q)
    basis = list(range(n))
    history: List[Tuple[int, ...]] = []
    pivots = 0

    def pivot(r: int, c: int) -> None:
        nonlocal pivots
        pivots += 1
        if pivots > max_pivots:
            raise IterationLimit(f"Lemke exceeded {max_pivots} pivots")
        piv = T[r][c]
        row = [v / piv for v in T[r]]
        T[r] = row
        rhs[r] = rhs[r] / piv
        support = [j for j, v in enumerate(row) if v]
        for i in range(n):
            f = T[i][c]
            if i == r or not f:
                continue
            target = T[i]
            for j in support:
                target[j] -= f * row[j]
            rhs[i] = rhs[i] - rhs[r] * f
        basis[r] = c
        history.append(tuple(sorted(basis)))

    # z0 enters at the lexicographic minimum of (q_i, e_i) / d_i.
    r = min(range(n), key=lambda i: [rhs[i] / d[i]] + [T[i][k] / d[i] for k in range(n)])
    leaving = basis[r]
    pivot(r, z0)

    while True:
        entering = leaving + n if leaving < n else leaving - n
        rows = [i for i in range(n) if T[i][entering] > 0]
        if not rows:
            certificate = {basis[i]: -T[i][entering] for i in range(n) if T[i][entering]}
            certificate[entering] = Fraction(1)
            logger.warning("lemke ray termination", pivots=pivots, entering=entering)
            raise RayTermination(f"secondary ray along column {entering}", certificate, pivots)
        r = min(rows, key=lambda i: [rhs[i] / T[i][entering]]
                + [T[i][k] / T[i][entering] for k in range(n)])
        leaving = basis[r]
        pivot(r, entering)
        if leaving == z0:
            break

    z = [EpsPoly.zero()] * n
    w = [EpsPoly.zero()] * n
    for i, b in enumerate(basis):
        if b < n:
            w[b] = rhs[i]
        elif b < 2 * n:
            z[b - n] = rhs[i]
    logger.debug("lemke finished", size=n, pivots=pivots)
    return LcpSolution(z, w, pivots, history)
