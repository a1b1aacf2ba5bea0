"""Shared fixtures: quiet logging, corpus loaders and small hand-built games."""
from fractions import Fraction
from pathlib import Path

import pytest

from config import get_settings
from games.qpef import load_game, parse
from utils.logger import setup_logging

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(autouse=True, scope="session")
def _quiet_logging():
    setup_logging(get_settings().model_copy(update={"log_level": "WARNING", "log_file": None}))


def corpus_path(name: str) -> Path:
    return CORPUS / name


def corpus_game(name: str):
    return load_game(corpus_path(name))


def game_from_text(text: str):
    return parse(text)[1]


@pytest.fixture
def corpus():
    """Loader for files under corpus/."""
    return corpus_game


ONE_SHOT_3_1 = """
(game :players 1
  (decision :player 1 :infoset h :actions (a b)
    (a (leaf (3)))
    (b (leaf (1)))))
"""


@pytest.fixture
def one_shot():
    return game_from_text(ONE_SHOT_3_1)


@pytest.fixture
def matching_pennies():
    return corpus_game("matching_pennies.qpef")


@pytest.fixture
def myerson():
    return corpus_game("myerson_3x3.qpef")


@pytest.fixture
def signaling():
    return corpus_game("signaling.qpef")


def F(text) -> Fraction:
    return Fraction(text)
