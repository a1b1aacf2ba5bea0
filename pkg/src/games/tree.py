"""
Extensive-form game model
Finite game trees of perfect recall, behavior profiles, reach probabilities,
payoffs and the conditional best-response valuations K_i^{h,c}.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from errors import (
    ActionNotInInfoset,
    BadChanceDistribution,
    BadPayoffVector,
    ConditionalOnNullSet,
    GameValidationError,
    ImperfectRecall,
    InconsistentInfoset,
    InvalidProfile,
    NotATree,
    NotFullyMixed,
)
from utils.logger import get_logger

logger = get_logger(__name__)

CHANCE = "chance"
DECISION = "decision"
LEAF = "leaf"

# (infoset-id, action) pairs of one player, root to node
OwnHistory = Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class Node:
    """A node of the game tree.

    ``actions`` keeps the file order of outgoing edges; ``children`` maps each
    action label to the child node id. Players are 0-based.
    """
    id: str
    kind: str
    actions: Tuple[str, ...] = ()
    children: Dict[str, str] = field(default_factory=dict)
    player: Optional[int] = None
    infoset: Optional[str] = None
    probs: Dict[str, Fraction] = field(default_factory=dict)
    payoffs: Tuple[Fraction, ...] = ()
    location: Optional[Tuple[int, int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.kind == LEAF


@dataclass(frozen=True)
class InfoSet:
    id: str
    player: int
    actions: Tuple[str, ...]
    members: Tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class RawGame:
    """Unchecked game as produced by the parser or built by hand."""
    players: int
    root: str
    nodes: Dict[str, Node]
    player_names: Tuple[str, ...] = ()


@dataclass(frozen=True)
class GameTree:
    """A validated game. Build it with :func:`validate`, never directly."""
    players: int
    root: str
    nodes: Dict[str, Node]
    infosets: Dict[str, InfoSet]
    player_infosets: Tuple[Tuple[str, ...], ...]
    player_names: Tuple[str, ...]
    preorder: Tuple[str, ...]
    parents: Dict[str, Tuple[str, str]]
    own_histories: Dict[str, Tuple[OwnHistory, ...]]

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def infosets_of(self, player: int) -> Tuple[str, ...]:
        return self.player_infosets[player]

    def leaves(self) -> List[str]:
        return [n for n in self.preorder if self.nodes[n].is_leaf]

    def path(self, node_id: str) -> List[Tuple[str, str]]:
        """Edges (parent-id, action) from the root down to ``node_id``."""
        edges = []
        while node_id in self.parents:
            parent, action = self.parents[node_id]
            edges.append((parent, action))
            node_id = parent
        edges.reverse()
        return edges

    def own_history_at(self, node_id: str, player: int) -> OwnHistory:
        return self.own_histories[node_id][player]


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------

def _fail(error_cls, message: str, subject: str, node: Optional[Node] = None):
    return error_cls(message, subject, node.location if node is not None else None)


def validate(raw: RawGame) -> GameTree:
    """Check tree shape, chance distributions, infosets and perfect recall.

    Returns:
        The checked GameTree with canonical infoset order and cached paths.
    """
    nodes = raw.nodes
    if raw.players < 1:
        raise GameValidationError("a game needs at least one player", "players")
    if raw.root not in nodes:
        raise _fail(NotATree, "root node is missing", raw.root)

    # Tree shape: walk from the root, every node visited exactly once.
    parents: Dict[str, Tuple[str, str]] = {}
    preorder: List[str] = []
    seen = set()
    stack = [raw.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            raise _fail(NotATree, "node reached twice", node_id, nodes.get(node_id))
        seen.add(node_id)
        preorder.append(node_id)
        node = nodes[node_id]
        _check_node(node, raw.players)
        for action in reversed(node.actions):
            child = node.children[action]
            if child not in nodes:
                raise _fail(NotATree, f"child {child!r} does not exist", node_id, node)
            if child == raw.root:
                raise _fail(NotATree, "edge back into the root", node_id, node)
            parents[child] = (node_id, action)
            stack.append(child)

    unreachable = sorted(set(nodes) - seen)
    if unreachable:
        raise _fail(NotATree, "node not reachable from the root", unreachable[0],
                    nodes[unreachable[0]])

    # Own histories per node, per player.
    own_histories: Dict[str, Tuple[OwnHistory, ...]] = {
        raw.root: tuple(() for _ in range(raw.players))
    }
    for node_id in preorder:
        node = nodes[node_id]
        for action in node.actions:
            histories = own_histories[node_id]
            if node.kind == DECISION:
                histories = tuple(
                    h + ((node.infoset, action),) if p == node.player else h
                    for p, h in enumerate(histories)
                )
            own_histories[node.children[action]] = histories

    # Information sets in canonical order (preorder of first member).
    members: Dict[str, List[str]] = {}
    for node_id in preorder:
        node = nodes[node_id]
        if node.kind == DECISION:
            members.setdefault(node.infoset, []).append(node_id)

    infosets: Dict[str, InfoSet] = {}
    per_player: List[List[str]] = [[] for _ in range(raw.players)]
    for infoset_id, member_ids in members.items():
        first = nodes[member_ids[0]]
        for member_id in member_ids[1:]:
            member = nodes[member_id]
            if member.player != first.player:
                raise _fail(InconsistentInfoset, "members owned by different players",
                            infoset_id, member)
            if member.actions != first.actions:
                raise _fail(InconsistentInfoset, "members with different action sets",
                            infoset_id, member)
            if own_histories[member_id][first.player] != own_histories[member_ids[0]][first.player]:
                raise _fail(ImperfectRecall, "members with different own histories",
                            infoset_id, member)
        for member_id in member_ids:
            if any(h == infoset_id for h, _ in own_histories[member_id][first.player]):
                raise _fail(ImperfectRecall, "information set revisited on one path",
                            infoset_id, nodes[member_id])
        infosets[infoset_id] = InfoSet(infoset_id, first.player, first.actions, tuple(member_ids))
        per_player[first.player].append(infoset_id)

    names = tuple(raw.player_names) or tuple(str(i + 1) for i in range(raw.players))
    game = GameTree(
        players=raw.players,
        root=raw.root,
        nodes=dict(nodes),
        infosets=infosets,
        player_infosets=tuple(tuple(p) for p in per_player),
        player_names=names,
        preorder=tuple(preorder),
        parents=parents,
        own_histories=own_histories,
    )
    logger.debug("game validated", players=game.players, nodes=len(nodes),
                 infosets=len(infosets))
    return game


def _check_node(node: Node, players: int) -> None:
    if len(set(node.actions)) != len(node.actions):
        raise _fail(NotATree, "duplicate action labels", node.id, node)
    if set(node.children) != set(node.actions):
        raise _fail(NotATree, "children do not match the action labels", node.id, node)

    if node.kind == LEAF:
        if node.actions:
            raise _fail(NotATree, "leaf with children", node.id, node)
        if len(node.payoffs) != players:
            raise _fail(BadPayoffVector,
                        f"payoff vector has {len(node.payoffs)} entries, expected {players}",
                        node.id, node)
    elif node.kind == CHANCE:
        if not node.actions:
            raise _fail(BadChanceDistribution, "chance node without outcomes", node.id, node)
        if set(node.probs) != set(node.actions):
            raise _fail(BadChanceDistribution, "probabilities do not match outcomes", node.id, node)
        if any(p < 0 for p in node.probs.values()):
            raise _fail(BadChanceDistribution, "negative probability", node.id, node)
        if sum(node.probs.values()) != 1:
            raise _fail(BadChanceDistribution,
                        f"probabilities sum to {sum(node.probs.values())}", node.id, node)
    elif node.kind == DECISION:
        if node.player is None or not 0 <= node.player < players:
            raise _fail(InconsistentInfoset, f"player {node.player} out of range", node.id, node)
        if node.infoset is None:
            raise _fail(InconsistentInfoset, "decision node without infoset", node.id, node)
        if not node.actions:
            raise _fail(InconsistentInfoset, "decision node without actions", node.infoset, node)
    else:
        raise _fail(NotATree, f"unknown node kind {node.kind!r}", node.id, node)


# ----------------------------------------------------------------------
# Behavior profiles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BehaviorProfile:
    """Local strategy per infoset: infoset-id -> action -> probability.

    Probabilities may be Fractions, EpsRat values or floats; all operations
    below are generic over the number type.
    """
    strategies: Mapping[str, Mapping[str, Any]]

    def __getitem__(self, infoset: str) -> Mapping[str, Any]:
        return self.strategies[infoset]

    def prob(self, infoset: str, action: str):
        return self.strategies[infoset][action]

    def is_fully_mixed(self) -> bool:
        return all(p > 0 for local in self.strategies.values() for p in local.values())

    def with_local(self, infoset: str, local: Mapping[str, Any]) -> "BehaviorProfile":
        updated = dict(self.strategies)
        updated[infoset] = dict(local)
        return BehaviorProfile(updated)

    def check(self, game: GameTree, exact: bool = True, tolerance: float = 1e-9) -> "BehaviorProfile":
        """Raise InvalidProfile unless every infoset has a distribution over its actions."""
        for infoset_id, infoset in game.infosets.items():
            local = self.strategies.get(infoset_id)
            if local is None:
                raise InvalidProfile(f"no local strategy for infoset {infoset_id}")
            if set(local) != set(infoset.actions):
                raise InvalidProfile(f"actions of infoset {infoset_id} do not match")
            if any(p < 0 for p in local.values()):
                raise InvalidProfile(f"negative probability at infoset {infoset_id}")
            total = sum(local.values())
            if exact and total != 1:
                raise InvalidProfile(f"local strategy at {infoset_id} sums to {total}")
            if not exact and abs(total - 1) > tolerance:
                raise InvalidProfile(f"local strategy at {infoset_id} sums to {total}")
        return self


def uniform_profile(game: GameTree) -> BehaviorProfile:
    return BehaviorProfile({
        h: {a: Fraction(1, infoset.size) for a in infoset.actions}
        for h, infoset in game.infosets.items()
    })


def pure_profile(game: GameTree, choice: Mapping[str, str]) -> BehaviorProfile:
    """Point masses on ``choice[h]`` for every infoset h."""
    return BehaviorProfile({
        h: {a: Fraction(int(a == choice[h])) for a in infoset.actions}
        for h, infoset in game.infosets.items()
    })


# ----------------------------------------------------------------------
# Reach probabilities and payoffs
# ----------------------------------------------------------------------

def _edge_prob(game: GameTree, profile: BehaviorProfile, node: Node, action: str):
    if node.kind == CHANCE:
        return node.probs[action]
    return profile.prob(node.infoset, action)


def reach_probabilities(game: GameTree, profile: BehaviorProfile) -> Dict[str, Any]:
    """ρ_b(v) for every node in one pass down the tree."""
    reach: Dict[str, Any] = {game.root: Fraction(1)}
    for node_id in game.preorder:
        node = game.nodes[node_id]
        for action in node.actions:
            reach[node.children[action]] = reach[node_id] * _edge_prob(game, profile, node, action)
    return reach


def reach_probability(game: GameTree, profile: BehaviorProfile, node_id: str):
    """Product of chance and behavior probabilities on the root path."""
    value = Fraction(1)
    for parent, action in game.path(node_id):
        value = value * _edge_prob(game, profile, game.nodes[parent], action)
    return value


def infoset_reach(game: GameTree, profile: BehaviorProfile, infoset: str):
    return sum(reach_probability(game, profile, v) for v in game.infosets[infoset].members)


def expected_payoff(game: GameTree, profile: BehaviorProfile, player: int,
                    infoset: Optional[str] = None):
    """U_i(b), or the conditional payoff U_ih(b) when ``infoset`` is given.

    Raises:
        ConditionalOnNullSet: the infoset is reached with probability 0.
    """
    if infoset is None:
        reach = reach_probabilities(game, profile)
        return sum(reach[z] * game.nodes[z].payoffs[player] for z in game.leaves())

    members = game.infosets[infoset].members
    total_reach = sum(reach_probability(game, profile, v) for v in members)
    if total_reach == 0:
        raise ConditionalOnNullSet(f"infoset {infoset} is reached with probability 0")
    value = 0
    for v in members:
        below = _subtree_payoff(game, profile, player, v)
        value = value + reach_probability(game, profile, v) * below
    return value / total_reach


def _subtree_payoff(game: GameTree, profile: BehaviorProfile, player: int, node_id: str):
    """Expected payoff of ``player`` from ``node_id`` onwards under ``profile``."""
    node = game.nodes[node_id]
    if node.is_leaf:
        return node.payoffs[player]
    return sum(_edge_prob(game, profile, node, a) * _subtree_payoff(game, profile, player, node.children[a])
               for a in node.actions)


def own_history(game: GameTree, infoset: str) -> OwnHistory:
    """Owner's (infoset, action) pairs before ``infoset`` (unique by perfect recall)."""
    info = game.infosets[infoset]
    return game.own_history_at(info.members[0], info.player)


def parent_sequence(game: GameTree, infoset: str) -> Optional[Tuple[str, str]]:
    history = own_history(game, infoset)
    return history[-1] if history else None


def following_infosets(game: GameTree, infoset: str) -> List[str]:
    """Infosets of the same owner that come after ``infoset``."""
    owner = game.infosets[infoset].player
    return [h for h in game.infosets_of(owner)
            if any(prev == infoset for prev, _ in own_history(game, h))]


def own_realization_weight(game: GameTree, profile: BehaviorProfile, infoset: str,
                           action: Optional[str] = None):
    """ρ_{b_i}(h), or ρ_{b_i}(c) = ρ_{b_i}(h)·b_i(c) when ``action`` is given."""
    weight = Fraction(1)
    for prev, prev_action in own_history(game, infoset):
        weight = weight * profile.prob(prev, prev_action)
    if action is not None:
        if action not in game.infosets[infoset].actions:
            raise ActionNotInInfoset(f"{action!r} is not an action of {infoset}")
        weight = weight * profile.prob(infoset, action)
    return weight


# ----------------------------------------------------------------------
# Conditional best-response valuations
# ----------------------------------------------------------------------

def _best_value(game: GameTree, profile: BehaviorProfile, player: int,
                starts: Iterable[Tuple[str, Any]]):
    """Weighted value of ``starts`` when ``player`` plays optimally below them.

    Chance and opponents follow ``profile``. Owner nodes are grouped by
    infoset so each infoset gets a single action.
    """
    total = 0
    pending: Dict[str, List[Tuple[str, Any]]] = {}
    stack = list(starts)
    while stack:
        node_id, weight = stack.pop()
        node = game.nodes[node_id]
        if node.is_leaf:
            total = total + weight * node.payoffs[player]
        elif node.kind == DECISION and node.player == player:
            pending.setdefault(node.infoset, []).append((node_id, weight))
        else:
            for action in node.actions:
                stack.append((node.children[action], weight * _edge_prob(game, profile, node, action)))

    for infoset_id, group in pending.items():
        actions = game.infosets[infoset_id].actions
        total = total + max(
            _best_value(game, profile, player,
                        [(game.nodes[v].children[a], w) for v, w in group])
            for a in actions
        )
    return total


def _others_weight(game: GameTree, profile: BehaviorProfile, node_id: str, player: int):
    weight = Fraction(1)
    for parent, action in game.path(node_id):
        node = game.nodes[parent]
        if node.kind == DECISION and node.player == player:
            continue
        weight = weight * _edge_prob(game, profile, node, action)
    return weight


def chance_weight(game: GameTree, node_id: str) -> Fraction:
    """Product of the chance probabilities on the root path."""
    weight = Fraction(1)
    for parent, action in game.path(node_id):
        node = game.nodes[parent]
        if node.kind == CHANCE:
            weight *= node.probs[action]
    return weight


def chance_null_infosets(game: GameTree) -> FrozenSet[str]:
    """Infosets that chance alone never reaches (a probability-0 edge above every member).

    No profile reaches them, so no belief and no K value exists there.
    """
    return frozenset(
        h for h, info in game.infosets.items()
        if all(chance_weight(game, v) == 0 for v in info.members)
    )


def k_value(game: GameTree, profile: BehaviorProfile, infoset: str, action: str):
    """K_i^{h,c}(b): best conditional payoff at h after committing to c.

    Beliefs over the members of h use chance and opponent weights only; the
    owner's own weight is the same on every member and cancels.

    Raises:
        NotFullyMixed: ``profile`` has a zero entry.
        ActionNotInInfoset: ``action`` is not available at ``infoset``.
    """
    if not profile.is_fully_mixed():
        raise NotFullyMixed("K values are defined for fully mixed profiles only")
    info = game.infosets[infoset]
    if action not in info.actions:
        raise ActionNotInInfoset(f"{action!r} is not an action of {infoset}")

    starts = []
    total_weight = 0
    for v in info.members:
        w = _others_weight(game, profile, v, info.player)
        total_weight = total_weight + w
        starts.append((game.nodes[v].children[action], w))
    if total_weight == 0:
        raise ConditionalOnNullSet(f"infoset {infoset} has zero belief weight")
    return _best_value(game, profile, info.player, starts) / total_weight


def k_values(game: GameTree, profile: BehaviorProfile, infoset: str) -> Dict[str, Any]:
    return {a: k_value(game, profile, infoset, a) for a in game.infosets[infoset].actions}


def best_response_value(game: GameTree, profile: BehaviorProfile, player: int):
    """Best payoff ``player`` can get against the rest of ``profile``."""
    return _best_value(game, profile, player, [(game.root, Fraction(1))])


def override_profile(game: GameTree, profile: BehaviorProfile, infoset: str,
                     continuation: BehaviorProfile, action: str) -> BehaviorProfile:
    """b with the owner switched to ``continuation`` after h and pure on ``action`` at h."""
    info = game.infosets[infoset]
    if action not in info.actions:
        raise ActionNotInInfoset(f"{action!r} is not an action of {infoset}")
    updated = dict(profile.strategies)
    for h in following_infosets(game, infoset):
        if h in continuation.strategies:
            updated[h] = dict(continuation[h])
    updated[infoset] = {a: Fraction(int(a == action)) for a in info.actions}
    return BehaviorProfile(updated)
