import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from olidstack import resources  # noqa: E402
from olidstack.preprocess import EmojiMap, default_preprocessor  # noqa: E402
from olidstack.segmentation import SegmentationModel  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

# One line per acceptance criterion, filled in by tests/test_acceptance.py.
ACCEPTANCE_LINES = []

LEXICON = {
    "a": 900, "an": 300, "and": 800, "ant": 20, "art": 60, "at": 500, "bat": 25,
    "cat": 80, "car": 120, "cart": 30, "ear": 40, "eat": 90, "hat": 35, "heart": 70,
    "he": 600, "her": 400, "here": 200, "in": 700, "is": 650, "it": 640, "on": 500,
    "one": 300, "star": 50, "tar": 10, "tea": 60, "team": 80, "the": 1000,
    "them": 150, "then": 180, "there": 250,
}
LEX_BIGRAMS = {
    ("the", "cat"): 40, ("the", "car"): 30, ("the", "team"): 25, ("at", "the"): 60,
    ("in", "the"): 80, ("he", "is"): 50, ("it", "is"): 90, ("a", "star"): 12,
    ("the", "art"): 9, ("then", "he"): 20, ("her", "heart"): 15,
}
LEX_TOTAL = 20000


@pytest.fixture(scope="session")
def lexicon_model():
    return SegmentationModel(LEXICON, LEX_BIGRAMS, LEX_TOTAL)


@pytest.fixture(scope="session")
def seg_model():
    return resources.segmentation_model()


@pytest.fixture(scope="session")
def emoji_map() -> EmojiMap:
    return resources.emoji_map()


@pytest.fixture(scope="session")
def pre():
    return default_preprocessor()


@pytest.fixture
def fixtures():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
