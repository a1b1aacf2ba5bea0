"""
Two-player assembly: the perturbed best-response LCP solved by Lemke and
the zero-sum LP solved by the exact simplex.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from eps_field.field import EpsPoly, EpsRat
from errors import NotZeroSum, WrongPlayerCount
from games.tree import GameTree
from polytopes.sequence_form import (
    PerturbedPolytope,
    SparseMatrix,
    Var,
    payoff_matrices,
    perturbed_constraints,
)
from solvers.lemke import LcpInstance, LcpSolution, check_lcp_solution, lemke
from solvers.simplex import EQ, GE, LE, LpInstance, LpSolution, solve_lp
from utils.logger import get_logger

logger = get_logger(__name__)

Plan = Dict[Var, EpsPoly]


def _require_two_players(game: GameTree) -> None:
    if game.players != 2:
        raise WrongPlayerCount(f"expected a two-player game, got {game.players} players")


def payoff_shift(game: GameTree) -> Tuple[Fraction, Fraction]:
    """max payoff + 1 per player, making every shifted leaf payoff negative."""
    leaves = [game.nodes[z].payoffs for z in game.leaves()]
    return tuple(max(u[p] for u in leaves) + 1 for p in range(2))


# ----------------------------------------------------------------------
# LCP
# ----------------------------------------------------------------------

@dataclass
class _Side:
    polytope: PerturbedPolytope
    variables: List[Var]
    equalities: list
    inequalities: list

    @property
    def width(self) -> int:
        return len(self.variables) + len(self.inequalities) + 2 * len(self.equalities)


def _side(polytope: PerturbedPolytope) -> _Side:
    return _Side(polytope, polytope.variables, polytope.equalities, polytope.inequalities)


def assemble_lcp(game: GameTree, polytopes: Tuple[PerturbedPolytope, PerturbedPolytope],
                 payoffs: Tuple[SparseMatrix, SparseMatrix]) -> LcpInstance:
    """Complementarity system of both players' best-response LPs.

    Per side the variables are [plan and wire variables, inequality duals,
    positive and negative parts of the equality duals]. With
    E x = e, F x ≥ f the rows are

        w_x  = −A'y − Eᵀu⁺ + Eᵀu⁻ − Fᵀv
        w_v  =  F x − f
        w_u⁺ =  E x − e
        w_u⁻ = −E x + e

    and symmetrically for player 2 with B'ᵀ. The constraint blocks are skew
    symmetric; ``payoffs`` must be the negatively shifted matrices.
    """
    _require_two_players(game)
    sides = [_side(polytopes[0]), _side(polytopes[1])]
    offsets = [0, sides[0].width]
    n = sides[0].width + sides[1].width

    M = [[Fraction(0)] * n for _ in range(n)]
    q = [EpsPoly.zero()] * n
    tags: List[Tuple] = [None] * n

    var_pos: List[Dict[Var, int]] = []
    for p, side in enumerate(sides):
        base = offsets[p]
        positions = {v: base + i for i, v in enumerate(side.variables)}
        var_pos.append(positions)
        for v, i in positions.items():
            tags[i] = ("plan" if v[0] == "seq" else "wire", v)

    for p, side in enumerate(sides):
        positions = var_pos[p]
        row0 = offsets[p] + len(side.variables)
        ineq_rows = range(row0, row0 + len(side.inequalities))
        up_rows = range(ineq_rows.stop, ineq_rows.stop + len(side.equalities))
        um_rows = range(up_rows.stop, up_rows.stop + len(side.equalities))

        for r, c in zip(ineq_rows, side.inequalities):
            tags[r] = ("ineq-dual", p)
            q[r] = -c.rhs
            for v, coeff in c.coeffs:
                M[r][positions[v]] += coeff
                M[positions[v]][r] -= coeff
        for rp, rm, c in zip(up_rows, um_rows, side.equalities):
            tags[rp] = ("eq-dual+", p)
            tags[rm] = ("eq-dual-", p)
            q[rp] = -c.rhs
            q[rm] = c.rhs
            for v, coeff in c.coeffs:
                col = positions[v]
                M[rp][col] += coeff
                M[rm][col] -= coeff
                M[col][rp] -= coeff
                M[col][rm] += coeff

    A, B = payoffs
    for (s1, s2), coeff in A.items():
        M[var_pos[0][s1]][var_pos[1][s2]] -= coeff
    for (s1, s2), coeff in B.items():
        M[var_pos[1][s2]][var_pos[0][s1]] -= coeff

    logger.debug("lcp assembled", size=n, side_1=sides[0].width, side_2=sides[1].width)
    return LcpInstance(M, q, tags)


@dataclass
class TwoPlayerSolution:
    plans: Tuple[Plan, Plan]
    lcp: LcpInstance
    result: LcpSolution
    polytopes: Tuple[PerturbedPolytope, PerturbedPolytope]


def solve_two_player(game: GameTree, threshold: Optional[int] = None,
                     max_pivots: Optional[int] = None) -> TwoPlayerSolution:
    """Perturbed sequence-form LCP solved by Lemke; returns both ε-plans."""
    _require_two_players(game)
    polytopes = (perturbed_constraints(game, 0, threshold), perturbed_constraints(game, 1, threshold))
    payoffs = payoff_matrices(game, shift=payoff_shift(game))
    lcp = assemble_lcp(game, polytopes, payoffs)
    result = lemke(lcp, max_pivots=max_pivots)
    if not check_lcp_solution(lcp, result.z):
        raise AssertionError("Lemke output fails the symbolic complementarity check")

    width = len(polytopes[0].variables) + len(polytopes[0].inequalities) + 2 * len(polytopes[0].equalities)
    plans = (
        {v: result.z[i] for i, v in enumerate(polytopes[0].variables)},
        {v: result.z[width + i] for i, v in enumerate(polytopes[1].variables)},
    )
    logger.info("two-player lcp solved", size=lcp.size, pivots=result.pivots)
    return TwoPlayerSolution(plans, lcp, result, polytopes)


# ----------------------------------------------------------------------
# Zero-sum LP
# ----------------------------------------------------------------------

def check_zero_sum(game: GameTree) -> None:
    _require_two_players(game)
    for z in game.leaves():
        u1, u2 = game.nodes[z].payoffs
        if u1 + u2 != 0:
            raise NotZeroSum(f"leaf {z} has payoffs ({u1}, {u2})")


@dataclass
class ZeroSumSolution:
    plans: Tuple[Plan, Plan]
    value: EpsRat
    lp: LpInstance
    result: LpSolution
    polytopes: Tuple[PerturbedPolytope, PerturbedPolytope]


def assemble_zero_sum_lp(polytopes: Tuple[PerturbedPolytope, PerturbedPolytope],
                         A: SparseMatrix) -> Tuple[LpInstance, Dict[str, object]]:
    """max e₂ᵀu + f₂ᵀv over (x, u⁺, u⁻, v).

    Constraints: player 1's polytope on x, and −Aᵀx + E₂ᵀu + F₂ᵀv ≤ 0 with one
    row per player-2 variable (whose duals form player 2's plan).
    The objective carries player 2's ε right-hand sides.
    """
    p1, p2 = polytopes
    x_vars = p1.variables
    y_vars = p2.variables
    eqs2, ineqs2 = p2.equalities, p2.inequalities
    nx, nu, nv = len(x_vars), len(eqs2), len(ineqs2)
    n = nx + 2 * nu + nv
    x_pos = {v: i for i, v in enumerate(x_vars)}
    y_row = {v: i for i, v in enumerate(y_vars)}

    objective: List = [EpsPoly.zero()] * n
    for k, c in enumerate(eqs2):
        objective[nx + k] = c.rhs
        objective[nx + nu + k] = -c.rhs
    for k, c in enumerate(ineqs2):
        objective[nx + 2 * nu + k] = c.rhs

    rows, senses, rhs = [], [], []
    for c in p1.constraints:
        row = [Fraction(0)] * n
        for v, coeff in c.coeffs:
            row[x_pos[v]] += coeff
        rows.append(row)
        senses.append(EQ if c.sense == EQ else GE)
        rhs.append(c.rhs)

    first_dual_row = len(rows)
    dual_rows = [[Fraction(0)] * n for _ in y_vars]
    for (s1, s2), coeff in A.items():
        dual_rows[y_row[s2]][x_pos[s1]] -= coeff
    for k, c in enumerate(eqs2):
        for v, coeff in c.coeffs:
            dual_rows[y_row[v]][nx + k] += coeff
            dual_rows[y_row[v]][nx + nu + k] -= coeff
    for k, c in enumerate(ineqs2):
        for v, coeff in c.coeffs:
            dual_rows[y_row[v]][nx + 2 * nu + k] += coeff
    rows.extend(dual_rows)
    senses.extend([LE] * len(dual_rows))
    rhs.extend([EpsPoly.zero()] * len(dual_rows))

    layout = {"nx": nx, "first_dual_row": first_dual_row}
    return LpInstance(objective, rows, senses, rhs), layout


def simplex_zero_sum(game: GameTree, threshold: Optional[int] = None,
                     max_pivots: Optional[int] = None) -> ZeroSumSolution:
    """Both ε-plans and the ε-value of a zero-sum game.

    Raises:
        NotZeroSum: u₂ ≠ −u₁ at some leaf.
    """
    check_zero_sum(game)
    polytopes = (perturbed_constraints(game, 0, threshold), perturbed_constraints(game, 1, threshold))
    A, _ = payoff_matrices(game)
    lp, layout = assemble_zero_sum_lp(polytopes, A)
    result = solve_lp(lp, max_pivots=max_pivots)

    x_vars = polytopes[0].variables
    y_vars = polytopes[1].variables
    first = layout["first_dual_row"]
    plans = (
        {v: result.x[i] for i, v in enumerate(x_vars)},
        {v: result.duals[first + i] for i, v in enumerate(y_vars)},
    )
    value = EpsRat(result.objective)
    logger.info("zero-sum lp solved", rows=len(lp.rows), cols=lp.num_vars,
                pivots=result.stats.pivots, value_limit=str(value.limit_at_zero()))
    return ZeroSumSolution(plans, value, lp, result, polytopes)
