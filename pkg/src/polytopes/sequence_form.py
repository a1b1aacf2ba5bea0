"""
Sequence form: sequences, payoff matrices, the perturbed strategy polytopes
and conversions between realization plans and behavior strategies.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

from config import get_settings
from eps_field.field import EpsPoly
from errors import WrongPlayerCount, ZeroParentWeight
from games.tree import GameTree, chance_weight, own_history, parent_sequence
from polytopes.permutahedron import EQ, ConstraintBlock, LinearConstraint, PermSpec, block_for
from utils.logger import get_logger

logger = get_logger(__name__)

Var = Tuple


def seq_var(player: int, infoset: Optional[str] = None, action: Optional[str] = None) -> Var:
    """Sequence variable; the empty sequence has no infoset and no action."""
    return ("seq", player, infoset, action)


def wire_var(player: int, infoset: str, stage: int, position: int) -> Var:
    return ("wire", player, infoset, stage, position)


@dataclass(frozen=True)
class SequenceIndex:
    player: int
    sequences: Tuple[Var, ...]
    parent: Dict[str, Var]
    action_of: Dict[Var, Tuple[str, str]]

    @property
    def empty(self) -> Var:
        return self.sequences[0]

    def position(self, seq: Var) -> int:
        return self.sequences.index(seq)


def build_sequences(game: GameTree, player: int) -> SequenceIndex:
    """Empty sequence first, then each infoset's actions in canonical order."""
    empty = seq_var(player)
    sequences = [empty]
    parent: Dict[str, Var] = {}
    action_of: Dict[Var, Tuple[str, str]] = {}
    for h in game.infosets_of(player):
        prev = parent_sequence(game, h)
        parent[h] = seq_var(player, *prev) if prev else empty
        for a in game.infosets[h].actions:
            seq = seq_var(player, h, a)
            sequences.append(seq)
            action_of[seq] = (h, a)
    return SequenceIndex(player, tuple(sequences), parent, action_of)


def leaf_sequence(game: GameTree, leaf: str, player: int) -> Var:
    """The player's last own (infoset, action) above ``leaf``."""
    history = game.own_history_at(leaf, player)
    return seq_var(player, *history[-1]) if history else seq_var(player)


SparseMatrix = Dict[Tuple[Var, Var], Fraction]


def payoff_matrices(game: GameTree, shift: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
                    ) -> Tuple[SparseMatrix, SparseMatrix]:
    """A, B keyed by (player-1 sequence, player-2 sequence).

    ``shift`` is subtracted from every leaf payoff before weighting.

    Raises:
        WrongPlayerCount: the game does not have exactly two players.
    """
    if game.players != 2:
        raise WrongPlayerCount(f"sequence-form matrices need 2 players, got {game.players}")
    A: SparseMatrix = {}
    B: SparseMatrix = {}
    for z in game.leaves():
        key = (leaf_sequence(game, z, 0), leaf_sequence(game, z, 1))
        weight = chance_weight(game, z)
        u1, u2 = game.nodes[z].payoffs
        A[key] = A.get(key, Fraction(0)) + (u1 - shift[0]) * weight
        B[key] = B.get(key, Fraction(0)) + (u2 - shift[1]) * weight
    return A, B


def bilinear_value(matrix: SparseMatrix, x: Mapping[Var, Any], y: Mapping[Var, Any]):
    """xᵀ·matrix·y over sparse entries."""
    return sum(coeff * x[s1] * y[s2] for (s1, s2), coeff in matrix.items())


# ----------------------------------------------------------------------
# Perturbed polytopes
# ----------------------------------------------------------------------

@dataclass
class PerturbedPolytope:
    """One permutahedron block per infoset plus the pinned empty sequence."""
    player: int
    index: SequenceIndex
    specs: Dict[str, PermSpec]
    blocks: Dict[str, ConstraintBlock]
    pin: LinearConstraint = field(init=False)

    def __post_init__(self):
        self.pin = LinearConstraint(((self.index.empty, Fraction(1)),), EQ, EpsPoly.one())

    @property
    def variables(self) -> List[Var]:
        wires = [w for block in self.blocks.values() for w in block.wires]
        return list(self.index.sequences) + wires

    @property
    def constraints(self) -> List[LinearConstraint]:
        return [self.pin] + [c for block in self.blocks.values() for c in block.constraints]

    @property
    def equalities(self) -> List[LinearConstraint]:
        return [c for c in self.constraints if c.sense == EQ]

    @property
    def inequalities(self) -> List[LinearConstraint]:
        return [c for c in self.constraints if c.sense != EQ]


def k_offset(game: GameTree, infoset: str) -> int:
    """Total action count of the owner's infosets before ``infoset``."""
    return sum(game.infosets[h].size for h, _ in own_history(game, infoset))


def perturbed_constraints(game: GameTree, player: int,
                          threshold: Optional[int] = None) -> PerturbedPolytope:
    """Π_ε(ρ_parent(h), k_h, m_h) for every infoset h of ``player``."""
    threshold = threshold if threshold is not None else get_settings().facet_threshold
    index = build_sequences(game, player)
    specs: Dict[str, PermSpec] = {}
    blocks: Dict[str, ConstraintBlock] = {}
    for h in game.infosets_of(player):
        info = game.infosets[h]
        parent = index.parent[h]
        k = k_offset(game, h)
        if parent == index.empty:
            spec = PermSpec(k=k, m=info.size, rho=EpsPoly.one())
        else:
            spec = PermSpec(k=k, m=info.size, mass_var=parent)
        variables = [seq_var(player, h, a) for a in info.actions]
        specs[h] = spec
        blocks[h] = block_for(spec, variables, threshold,
                              wire_name=lambda stage, pos, h=h: wire_var(player, h, stage, pos))
    logger.debug("perturbed polytope built", player=player, infosets=len(blocks))
    return PerturbedPolytope(player, index, specs, blocks)


# ----------------------------------------------------------------------
# Plans and behavior
# ----------------------------------------------------------------------

def behavior_to_realization(game: GameTree, behavior: Mapping[str, Mapping[str, Any]],
                            player: int) -> Dict[Var, Any]:
    """Multiply local probabilities down the owner's sequences."""
    index = build_sequences(game, player)
    plan: Dict[Var, Any] = {index.empty: Fraction(1)}
    for h in game.infosets_of(player):
        mass = plan[index.parent[h]]
        for a in game.infosets[h].actions:
            plan[seq_var(player, h, a)] = mass * behavior[h][a]
    return plan


def realization_to_behavior(game: GameTree, plan: Mapping[Var, Any],
                            player: int) -> Dict[str, Dict[str, Any]]:
    """b(c) = x(c) / x(parent sequence of h).

    EpsPoly plans give EpsRat behavior; rational plans give Fractions.

    Raises:
        ZeroParentWeight: some parent sequence has weight 0.
    """
    index = build_sequences(game, player)
    behavior: Dict[str, Dict[str, Any]] = {}
    for h in game.infosets_of(player):
        parent_weight = plan[index.parent[h]]
        if parent_weight == 0:
            raise ZeroParentWeight(f"parent sequence of {h} has weight 0")
        behavior[h] = {a: plan[seq_var(player, h, a)] / parent_weight
                       for a in game.infosets[h].actions}
    return behavior


def plan_is_valid(game: GameTree, plan: Mapping[Var, Any], player: int) -> bool:
    """Empty sequence 1, conservation at every infoset, nonnegative entries."""
    index = build_sequences(game, player)
    if plan[index.empty] != 1:
        return False
    if any(plan[s] < 0 for s in index.sequences):
        return False
    for h in game.infosets_of(player):
        total = sum(plan[seq_var(player, h, a)] for a in game.infosets[h].actions)
        if total != plan[index.parent[h]]:
            return False
    return True
