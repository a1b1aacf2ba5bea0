from fractions import Fraction

import pytest

from conftest import CORPUS, corpus_game, game_from_text
from eps_field.field import EpsPoly, EpsRat
from errors import InvalidProfile, NotATree, QpefSyntaxError
from games.qpef import (
    RESULT_HEADER,
    ResultDocument,
    emit_result,
    format_coefficients,
    parse,
    parse_coefficients,
    parse_profile,
    parse_rational,
    read_result,
    read_sexpr,
    serialize,
    serialize_profile,
)
from games.tree import uniform_profile

CORPUS_FILES = sorted(p.name for p in CORPUS.glob("*.qpef"))


class TestParse:
    def test_minimal_game(self):
        doc, game = parse("(game :players 1 (leaf (3)))")
        assert doc.players == 1
        assert game.nodes[game.root].payoffs == (3,)

    def test_decimal_probability_rejected(self):
        text = "(game :players 1 (chance (x 0.5 (leaf (0))) (y 1/2 (leaf (1)))))"
        with pytest.raises(QpefSyntaxError) as info:
            parse(text)
        assert info.value.line == 1
        assert "rational" in info.value.expected

    def test_zero_denominator_rejected(self):
        with pytest.raises(QpefSyntaxError):
            parse("(game :players 1 (leaf (1/0)))")

    def test_unclosed_list(self):
        with pytest.raises(QpefSyntaxError) as info:
            read_sexpr("(game :players 1\n  (leaf (3))")
        assert info.value.location == (1, 1)

    def test_unknown_node_kind(self):
        with pytest.raises(QpefSyntaxError) as info:
            parse("(game :players 1\n  (branch (3)))")
        assert info.value.location == (2, 4)
        assert info.value.found == "branch"

    def test_missing_player_option(self):
        with pytest.raises(QpefSyntaxError):
            parse("(game :players 1 (decision :infoset h :actions (a) (a (leaf (0)))))")

    def test_duplicate_node_id(self):
        text = """(game :players 1
  (decision :player 1 :infoset h :actions (a b)
    (a (leaf :id z (0)))
    (b (leaf :id z (1)))))"""
        with pytest.raises(QpefSyntaxError):
            parse(text)

    def test_missing_child_is_a_validation_error(self):
        text = "(game :players 1 (decision :player 1 :infoset h :actions (a b) (a (leaf (0)))))"
        with pytest.raises(NotATree) as info:
            parse(text)
        assert info.value.location is not None

    def test_comments_and_names(self):
        doc, game = parse('; header\n(game :players 2 :names ("row" "col") (leaf (1 -1)))')
        assert game.player_names == ("row", "col")

    @pytest.mark.parametrize("text", [
        "(game :players 1 (decision :player 1 :infoset h :actions (a a/b) (a (leaf (0))) (a/b (leaf (1)))))",
        "(game :players 1 (chance (x/y 1 (leaf (0)))))",
    ])
    def test_slash_in_labels_rejected(self, text):
        with pytest.raises(QpefSyntaxError) as info:
            parse(text)
        assert "'/'" in info.value.expected

    def test_escaped_quotes_in_names(self):
        _, game = parse(r'(game :players 2 :names ("say \"hi\"" "back\\slash") (leaf (1 2)))')
        assert game.player_names == ('say "hi"', "back\\slash")

    def test_parse_rational(self):
        assert parse_rational(read_sexpr("-3/6")) == Fraction(-1, 2)
        with pytest.raises(QpefSyntaxError):
            parse_rational(read_sexpr("1e3"))


class TestSerialize:
    @pytest.mark.parametrize("name", CORPUS_FILES)
    def test_serialize_is_a_fixed_point(self, name):
        game = corpus_game(name)
        text = serialize(game)
        again = game_from_text(text)
        assert serialize(again) == text
        assert again.infosets.keys() == game.infosets.keys()
        assert {z: again.nodes[z].payoffs for z in again.leaves()} == \
            {z: game.nodes[z].payoffs for z in game.leaves()}

    def test_names_with_quotes_survive_serialize(self):
        game = game_from_text(r'(game :players 2 :names ("say \"hi\"" "back\\slash") (leaf (0 0)))')
        text = serialize(game)
        assert r'"say \"hi\""' in text
        assert game_from_text(text).player_names == ('say "hi"', "back\\slash")

    def test_canonical_text(self):
        game = game_from_text("(game :players 1 (decision :player 1 :infoset h :actions (a b)"
                              " (b (leaf (1))) (a (leaf (6/2)))))")
        assert serialize(game) == (
            "(game :players 1\n"
            "  (decision :player 1 :infoset h :actions (a b)\n"
            "    (a (leaf (3)))\n"
            "    (b (leaf (1)))))\n"
        )


class TestProfiles:
    def test_profile_file(self, one_shot):
        profile = parse_profile((CORPUS / "proper_3_1.profile").read_text(), one_shot)
        assert profile.prob("h", "a") == Fraction(100, 101)

    def test_profile_must_sum_to_one(self, one_shot):
        with pytest.raises(InvalidProfile):
            parse_profile("(profile (h (a 1/2) (b 1/4)))", one_shot)

    def test_serialize_profile(self, signaling):
        text = serialize_profile(uniform_profile(signaling), signaling)
        assert text.splitlines()[1] == "  (S1 (l 1/2) (r 1/2))"
        assert parse_profile(text, signaling) == uniform_profile(signaling)


class TestResults:
    def test_coefficient_arrays(self):
        assert format_coefficients([1, Fraction(-1)]) == "[1, -1]"
        assert parse_coefficients("[1/2, 0, -3]") == [Fraction(1, 2), 0, -3]
        assert parse_coefficients("[]") == []

    def test_emit_sorted_keys(self):
        one_minus_eps = EpsRat(EpsPoly([1, -1]))
        doc = ResultDocument(
            mode="solve2p",
            behavior={"h": {"b": EpsRat(EpsPoly([0, 1])), "a": one_minus_eps}},
            limit={"h": {"a": Fraction(1), "b": Fraction(0)}},
            checks={"nash": {"pass": "true"}},
        )
        text = emit_result(doc)
        lines = text.splitlines()
        assert lines[0] == RESULT_HEADER
        assert lines[1:] == [
            "behavior.h.a.den = [1]",
            "behavior.h.a.num = [1, -1]",
            "behavior.h.b.den = [1]",
            "behavior.h.b.num = [0, 1]",
            "limit.h.a = 1",
            "limit.h.b = 0",
            "mode = solve2p",
            "verify.nash.pass = true",
        ]
        assert read_result(text)["behavior.h.a.num"] == "[1, -1]"

    def test_value_fields(self):
        doc = ResultDocument(mode="solve-zs", value=EpsRat(EpsPoly([0, 1]), EpsPoly([0, 1, 1])))
        entries = read_result(emit_result(doc))
        assert entries["value.num"] == "[1]"
        assert entries["value.den"] == "[1, 1]"
        assert entries["value.limit"] == "1"

    def test_read_result_requires_header(self):
        with pytest.raises(QpefSyntaxError):
            read_result("mode = verify\n")
