import random
from fractions import Fraction
from itertools import product

import pytest

from conftest import corpus_game, game_from_text
from errors import (
    ActionNotInInfoset,
    BadChanceDistribution,
    BadPayoffVector,
    ConditionalOnNullSet,
    ImperfectRecall,
    InconsistentInfoset,
    InvalidProfile,
    NotATree,
    NotFullyMixed,
)
from games.tree import (
    DECISION,
    LEAF,
    BehaviorProfile,
    Node,
    RawGame,
    best_response_value,
    chance_null_infosets,
    chance_weight,
    expected_payoff,
    following_infosets,
    infoset_reach,
    k_value,
    k_values,
    override_profile,
    own_history,
    own_realization_weight,
    pure_profile,
    reach_probabilities,
    uniform_profile,
    validate,
)


class TestValidation:
    def test_canonical_infoset_order(self, signaling):
        assert list(signaling.infosets) == ["S1", "ML", "MR", "S2"]
        assert signaling.infosets_of(0) == ("S1", "S2")
        assert signaling.infosets_of(1) == ("ML", "MR")
        assert signaling.infosets["ML"].members == ("/t1/l", "/t2/l")

    def test_bad_chance_distribution_has_location(self):
        text = """(game :players 1
  (chance
    (x 1/2 (leaf (0)))
    (y 1/3 (leaf (1)))))"""
        with pytest.raises(BadChanceDistribution) as info:
            game_from_text(text)
        assert info.value.subject == "/"
        assert info.value.location == (2, 3)

    def test_payoff_vector_length(self):
        with pytest.raises(BadPayoffVector):
            game_from_text("(game :players 2 (leaf (1)))")

    def test_infoset_with_different_actions(self):
        text = """(game :players 2
  (decision :player 1 :infoset A :actions (x y)
    (x (decision :player 2 :infoset B :actions (l r) (l (leaf (0 0))) (r (leaf (0 0)))))
    (y (decision :player 2 :infoset B :actions (l m) (l (leaf (0 0))) (m (leaf (0 0)))))))"""
        with pytest.raises(InconsistentInfoset) as info:
            game_from_text(text)
        assert info.value.subject == "B"

    def test_forgetting_own_action_is_imperfect_recall(self):
        text = """(game :players 1
  (decision :player 1 :infoset A :actions (x y)
    (x (decision :player 1 :infoset B :actions (l r) (l (leaf (1))) (r (leaf (0)))))
    (y (decision :player 1 :infoset B :actions (l r) (l (leaf (0))) (r (leaf (1)))))))"""
        with pytest.raises(ImperfectRecall):
            game_from_text(text)

    def test_node_reached_twice(self):
        nodes = {
            "r": Node("r", DECISION, ("a", "b"), {"a": "z", "b": "z"}, player=0, infoset="h"),
            "z": Node("z", LEAF, payoffs=(Fraction(0),)),
        }
        with pytest.raises(NotATree):
            validate(RawGame(1, "r", nodes))

    def test_unreachable_node(self):
        nodes = {
            "r": Node("r", LEAF, payoffs=(Fraction(0),)),
            "x": Node("x", LEAF, payoffs=(Fraction(1),)),
        }
        with pytest.raises(NotATree) as info:
            validate(RawGame(1, "r", nodes))
        assert info.value.subject == "x"


class TestPayoffs:
    def test_expected_payoff_one_shot(self, one_shot):
        assert expected_payoff(one_shot, uniform_profile(one_shot), 0) == 2

    def test_reach_probabilities(self, signaling):
        reach = reach_probabilities(signaling, uniform_profile(signaling))
        assert reach["/t1/l/u"] == Fraction(1, 8)
        assert infoset_reach(signaling, uniform_profile(signaling), "ML") == Fraction(1, 2)

    def test_conditional_payoff_on_null_set(self, signaling):
        profile = uniform_profile(signaling)
        profile = profile.with_local("S1", {"l": 0, "r": 1}).with_local("S2", {"l": 0, "r": 1})
        with pytest.raises(ConditionalOnNullSet):
            expected_payoff(signaling, profile, 1, infoset="ML")

    def test_best_response_value(self, one_shot, matching_pennies):
        assert best_response_value(one_shot, uniform_profile(one_shot), 0) == 3
        assert best_response_value(matching_pennies, uniform_profile(matching_pennies), 0) == 0


class TestKValues:
    def test_one_shot(self, one_shot):
        profile = uniform_profile(one_shot)
        assert k_value(one_shot, profile, "h", "a") == 3
        assert k_value(one_shot, profile, "h", "b") == 1

    def test_receiver_beliefs_use_chance_and_sender(self, signaling):
        profile = uniform_profile(signaling)
        assert k_values(signaling, profile, "ML") == {"u": 1, "d": Fraction(1, 2)}

    def test_sender(self, signaling):
        profile = uniform_profile(signaling)
        assert k_value(signaling, profile, "S1", "l") == 1
        assert k_value(signaling, profile, "S1", "r") == Fraction(1, 2)

    def test_owner_plays_best_after_committing(self):
        game = corpus_game("entry_deterrence.qpef")
        profile = uniform_profile(game)
        assert k_value(game, profile, "E", "in") == Fraction(1, 2)
        assert k_value(game, profile, "E", "out") == 0

    def test_infoset_behind_zero_probability_chance_edge(self):
        game = corpus_game("chance_dead_branch.qpef")
        assert chance_weight(game, "/dead") == 0
        assert chance_weight(game, "/live/r") == 1
        assert chance_null_infosets(game) == {"Z"}
        with pytest.raises(ConditionalOnNullSet):
            k_value(game, uniform_profile(game), "Z", "x")

    def test_requires_fully_mixed_profile(self, one_shot):
        with pytest.raises(NotFullyMixed):
            k_value(one_shot, pure_profile(one_shot, {"h": "a"}), "h", "a")

    def test_unknown_action(self, one_shot):
        with pytest.raises(ActionNotInInfoset):
            k_value(one_shot, uniform_profile(one_shot), "h", "c")


def random_game_text(rng):
    """P1 moves, chance may move, P2 moves unobserved, P1 may move again knowing only its own action."""
    first = [f"a{i}" for i in range(rng.randint(2, 3))]
    second = [f"b{j}" for j in range(rng.randint(2, 3))]
    again = {a: rng.random() < 0.6 for a in first}
    through_chance = {a: rng.random() < 0.4 for a in first}

    def leaf():
        return f"(leaf ({rng.randint(-5, 5)} {rng.randint(-5, 5)}))"

    def after_second(a):
        if not again[a]:
            return leaf()
        return f"(decision :player 1 :infoset X{a} :actions (c0 c1) (c0 {leaf()}) (c1 {leaf()}))"

    def second_mover(a):
        children = " ".join(f"({b} {after_second(a)})" for b in second)
        return f"(decision :player 2 :infoset Q :actions ({' '.join(second)}) {children})"

    def after_first(a):
        if not through_chance[a]:
            return second_mover(a)
        p = Fraction(rng.randint(1, 4), 5)
        return f"(chance (n {p} {second_mover(a)}) (s {1 - p} {second_mover(a)}))"

    children = " ".join(f"({a} {after_first(a)})" for a in first)
    return f"(game :players 2 (decision :player 1 :infoset R :actions ({' '.join(first)}) {children}))"


def random_profile(rng, game):
    strategies = {}
    for h, info in game.infosets.items():
        weights = [rng.randint(1, 5) for _ in info.actions]
        strategies[h] = {a: Fraction(w, sum(weights)) for a, w in zip(info.actions, weights)}
    return BehaviorProfile(strategies)


def brute_force_k(game, profile, infoset, action):
    """Max conditional payoff over every pure continuation of the owner."""
    owner = game.infosets[infoset].player
    followers = following_infosets(game, infoset)
    best = None
    for choice in product(*(game.infosets[f].actions for f in followers)):
        continuation = BehaviorProfile({
            f: {x: Fraction(int(x == c)) for x in game.infosets[f].actions}
            for f, c in zip(followers, choice)
        })
        trial = override_profile(game, profile, infoset, continuation, action)
        value = expected_payoff(game, trial, owner, infoset=infoset)
        best = value if best is None else max(best, value)
    return best


def test_k_values_match_brute_force():
    rng = random.Random(2024)
    for _ in range(50):
        game = game_from_text(random_game_text(rng))
        profile = random_profile(rng, game)
        for h, info in game.infosets.items():
            for a in info.actions:
                assert k_value(game, profile, h, a) == brute_force_k(game, profile, h, a)


class TestHistories:
    def test_own_history_and_followers(self):
        game = corpus_game("entry_deterrence.qpef")
        assert own_history(game, "F") == (("E", "in"),)
        assert following_infosets(game, "E") == ["F", "A"]
        profile = uniform_profile(game)
        assert own_realization_weight(game, profile, "A", "large") == Fraction(1, 4)


class TestProfiles:
    def test_check_rejects_bad_sum(self, one_shot):
        with pytest.raises(InvalidProfile):
            BehaviorProfile({"h": {"a": Fraction(1, 2), "b": Fraction(1, 3)}}).check(one_shot)

    def test_check_rejects_missing_infoset(self, signaling):
        with pytest.raises(InvalidProfile):
            BehaviorProfile({"S1": {"l": 1, "r": 0}}).check(signaling)

    def test_fully_mixed(self, one_shot):
        assert uniform_profile(one_shot).is_fully_mixed()
        assert not pure_profile(one_shot, {"h": "b"}).is_fully_mixed()
