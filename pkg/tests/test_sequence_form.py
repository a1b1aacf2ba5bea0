from fractions import Fraction

import pytest

from conftest import corpus_game
from eps_field.field import EpsPoly
from errors import WrongPlayerCount, ZeroParentWeight
from games.tree import expected_payoff, uniform_profile
from polytopes.permutahedron import is_satisfied
from polytopes.sequence_form import (
    behavior_to_realization,
    bilinear_value,
    build_sequences,
    k_offset,
    payoff_matrices,
    perturbed_constraints,
    plan_is_valid,
    realization_to_behavior,
    seq_var,
)


def test_sequences_in_canonical_order():
    game = corpus_game("entry_deterrence.qpef")
    index = build_sequences(game, 0)
    assert index.sequences == (
        seq_var(0),
        seq_var(0, "E", "out"), seq_var(0, "E", "in"),
        seq_var(0, "F", "small"), seq_var(0, "F", "large"),
        seq_var(0, "A", "small"), seq_var(0, "A", "large"),
    )
    assert index.parent["F"] == seq_var(0, "E", "in")
    assert index.parent["E"] == index.empty


def test_k_offset_counts_earlier_actions():
    game = corpus_game("entry_deterrence.qpef")
    assert k_offset(game, "E") == 0
    assert k_offset(game, "F") == 2


def test_payoff_matrices_reproduce_expected_payoffs(signaling):
    A, B = payoff_matrices(signaling)
    profile = uniform_profile(signaling)
    x = behavior_to_realization(signaling, profile.strategies, 0)
    y = behavior_to_realization(signaling, profile.strategies, 1)
    assert bilinear_value(A, x, y) == expected_payoff(signaling, profile, 0)
    assert bilinear_value(B, x, y) == expected_payoff(signaling, profile, 1)


def test_payoff_matrices_need_two_players(one_shot):
    with pytest.raises(WrongPlayerCount):
        payoff_matrices(one_shot)


def test_lone_infoset_plan():
    game = corpus_game("one_shot_3_1.qpef")
    plan = behavior_to_realization(game, {"h": {"a": Fraction(2, 3), "b": Fraction(1, 3)}}, 0)
    assert [plan[s] for s in build_sequences(game, 0).sequences] == [1, Fraction(2, 3), Fraction(1, 3)]
    assert plan_is_valid(game, plan, 0)


def test_realization_round_trip_and_zero_parent():
    game = corpus_game("entry_deterrence.qpef")
    behavior = uniform_profile(game).strategies
    plan = behavior_to_realization(game, behavior, 0)
    assert realization_to_behavior(game, plan, 0) == {h: behavior[h] for h in ("E", "F", "A")}
    plan[seq_var(0, "E", "in")] = Fraction(0)
    with pytest.raises(ZeroParentWeight):
        realization_to_behavior(game, plan, 0)


def test_invalid_plan_detected():
    game = corpus_game("entry_deterrence.qpef")
    plan = behavior_to_realization(game, uniform_profile(game).strategies, 0)
    plan[seq_var(0, "F", "small")] += Fraction(1, 10)
    assert not plan_is_valid(game, plan, 0)


class TestPerturbedPolytope:
    def test_first_infoset_has_constant_mass(self):
        game = corpus_game("entry_deterrence.qpef")
        polytope = perturbed_constraints(game, 0)
        assert polytope.specs["E"].k == 0
        assert polytope.specs["E"].rho == EpsPoly.one()
        assert polytope.specs["F"].mass_var == seq_var(0, "E", "in")
        assert polytope.specs["A"].k == 2

    def test_binary_actions_give_boxes(self):
        game = corpus_game("entry_deterrence.qpef")
        polytope = perturbed_constraints(game, 0)
        block = polytope.blocks["F"]
        bounds = sorted(c.rhs.valuation for c in block.inequalities)
        assert bounds == [3, 3]

    def test_perturbed_uniform_plan_is_feasible(self):
        game = corpus_game("entry_deterrence.qpef")
        polytope = perturbed_constraints(game, 0)
        plan = behavior_to_realization(game, uniform_profile(game).strategies, 0)
        eps0 = Fraction(1, 100)
        assert all(c.holds_at(plan, eps0) for c in polytope.constraints)
        for block in polytope.blocks.values():
            assert is_satisfied(block, plan, eps0)

    def test_network_blocks_above_threshold(self, myerson):
        polytope = perturbed_constraints(myerson, 0, threshold=2)
        assert polytope.blocks["R"].provenance == "network"
        assert len(polytope.variables) == 4 + len(polytope.blocks["R"].wires)
        assert polytope.equalities[0] is polytope.pin
