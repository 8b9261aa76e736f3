import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from olidstack.segmentation import (
    InputTooLong,
    SegmentationModel,
    score_words,
    segment,
    word_score,
)
from oracles import best_split, seq_score
from conftest import LEXICON, LEX_BIGRAMS, LEX_TOTAL


def test_word_score_known_unknown_and_bigram(lexicon_model):
    assert word_score(lexicon_model, "the") == math.log(1000 / LEX_TOTAL)
    assert word_score(lexicon_model, "zzzz") == math.log(10 / (LEX_TOTAL * 10 ** 4))
    assert word_score(lexicon_model, "cat", "the") == math.log(40 / 1000)
    # bigram unseen for this prev: unigram fallback
    assert word_score(lexicon_model, "cat", "zzz") == word_score(lexicon_model, "cat")
    assert word_score(lexicon_model, "cat", "her") == word_score(lexicon_model, "cat")


@pytest.mark.parametrize("hashtag, words", [
    ("trumptrain", ["trump", "train"]),
    ("VoteRedSaveAmerica", ["vote", "red", "save", "america"]),
    ("a", ["a"]),
])
def test_paper_hashtags_against_enumeration(seg_model, hashtag, words):
    oracle_score, oracle_words = best_split(
        seg_model.unigram_counts, seg_model.bigram_counts, seg_model.total, hashtag.lower())
    assert oracle_words == words
    assert segment(seg_model, hashtag) == words
    assert score_words(seg_model, words) == oracle_score


def test_rejects_long_and_bad_input(lexicon_model):
    with pytest.raises(InputTooLong):
        segment(lexicon_model, "a" * 251)
    assert segment(lexicon_model, "a" * 250)
    with pytest.raises(ValueError):
        segment(lexicon_model, "")
    with pytest.raises(ValueError):
        segment(lexicon_model, "two words")


def test_ties_prefer_fewer_words_then_earliest_split():
    # every split of "aaa" into known single letters / pairs scores identically
    # when counts are chosen so log-probabilities add up the same
    m = SegmentationModel({"a": 10, "aa": 1}, {}, 100)
    # "aa" alone: log(1/100); "a","a": 2*log(10/100) = log(1/100): tie -> fewer words
    assert segment(m, "aa") == ["aa"]
    # "aaa": ["a","aa"] and ["aa","a"] tie on score and length -> earliest split (offset 1)
    assert segment(m, "aaa") == ["a", "aa"]


lex_words = sorted(LEXICON)


@st.composite
def lexicon_strings(draw):
    parts = draw(st.lists(st.sampled_from(lex_words + ["x", "q", "zz"]), min_size=1, max_size=6))
    return "".join(parts)[:12]


@settings(max_examples=200, deadline=None)
@given(lexicon_strings())
def test_matches_exhaustive_enumeration(lexicon_model, s):
    got = segment(lexicon_model, s)
    assert "".join(got) == s
    best = best_split(LEXICON, LEX_BIGRAMS, LEX_TOTAL, s)[0]
    assert seq_score(LEXICON, LEX_BIGRAMS, LEX_TOTAL, got) == best


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="abcdefghij0123", min_size=1, max_size=30))
def test_concatenation_reproduces_input(lexicon_model, s):
    assert "".join(segment(lexicon_model, s.upper())) == s.lower()


@settings(max_examples=60, deadline=None)
@given(lexicon_strings())
def test_whole_string_wins_when_it_is_a_frequent_word(s):
    uni = dict(LEXICON)
    uni[s] = LEX_TOTAL
    m = SegmentationModel(uni, LEX_BIGRAMS, LEX_TOTAL * 2)
    assert segment(m, s) == [s]


def test_max_word_len_respected():
    m = SegmentationModel({"abcdef": 100}, {}, 1000, max_word_len=3)
    assert all(len(w) <= 3 for w in segment(m, "abcdef"))


def test_model_invariants():
    with pytest.raises(ValueError):
        SegmentationModel({"a": 0}, {}, 10)
    with pytest.raises(ValueError):
        SegmentationModel({"a": 100}, {}, 10)
    with pytest.raises(ValueError):
        SegmentationModel({"a": 1}, {}, 10, max_word_len=0)


def test_load_frequency_files(tmp_path):
    (tmp_path / "u.tsv").write_text("the\t50\ncat\t10\n", encoding="utf-8")
    (tmp_path / "b.tsv").write_text("the cat\t3\nthe cat\t2\n", encoding="utf-8")
    m = SegmentationModel.load(tmp_path / "u.tsv", tmp_path / "b.tsv")
    assert m.total == 60
    assert m.bigram_counts[("the", "cat")] == 5
    assert segment(m, "thecat") == ["the", "cat"]


def test_random_lexicon_strings_are_fast(lexicon_model):
    rng = random.Random(1)
    for _ in range(100):
        s = "".join(rng.choice(lex_words) for _ in range(40))[:240]
        assert "".join(segment(lexicon_model, s)) == s


def test_bigram_context_can_beat_best_prefix():
    # best path into "ab" is the single word, but only "b" unlocks the strong (b, c) bigram
    m = SegmentationModel({"ab": 100, "a": 50, "b": 50, "c": 1}, {("b", "c"): 50}, 1000)
    assert segment(m, "abc") == ["a", "b", "c"]
    assert best_split(m.unigram_counts, m.bigram_counts, m.total, "abc")[1] == ["a", "b", "c"]
