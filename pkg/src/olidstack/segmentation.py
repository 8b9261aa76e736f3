"""Hashtag word segmentation by maximum n-gram log-probability."""

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple

MAX_INPUT_LEN = 250


class InputTooLong(ValueError):
    pass


@dataclass(frozen=True)
class SegmentationModel:
    unigram_counts: Mapping[str, float]
    bigram_counts: Mapping[Tuple[str, str], float]
    total: float
    max_word_len: int = 24

    def __post_init__(self):
        if self.max_word_len < 1:
            raise ValueError("max_word_len must be >= 1")
        if self.total <= 0:
            raise ValueError("total must be positive")
        for table in (self.unigram_counts, self.bigram_counts):
            if any(c <= 0 for c in table.values()):
                raise ValueError("counts must be positive")
        if self.unigram_counts and self.total < max(self.unigram_counts.values()):
            raise ValueError("total is smaller than the largest unigram count")
        object.__setattr__(self, "unigram_counts", MappingProxyType(dict(self.unigram_counts)))
        object.__setattr__(self, "bigram_counts", MappingProxyType(dict(self.bigram_counts)))

    @classmethod
    def load(cls, unigram_path, bigram_path=None, total: Optional[float] = None,
             max_word_len: int = 24) -> "SegmentationModel":
        """Read ``word<TAB>count`` and ``word word<TAB>count`` files.

        ``total`` defaults to the sum of the unigram counts. A key listed
        more than once gets the sum of its counts.
        """
        unigrams: Dict[str, float] = {}
        for key, count in _read_counts(unigram_path):
            unigrams[key] = unigrams.get(key, 0.0) + count
        bigrams: Dict[Tuple[str, str], float] = {}
        if bigram_path is not None:
            for key, count in _read_counts(bigram_path):
                parts = key.split(" ")
                if len(parts) != 2:
                    raise ValueError(f"{bigram_path}: bad bigram {key!r}")
                pair = (parts[0], parts[1])
                bigrams[pair] = bigrams.get(pair, 0.0) + count
        if total is None:
            total = sum(unigrams.values())
        return cls(unigrams, bigrams, total, max_word_len)


def _read_counts(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            key, sep, count = line.rpartition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected '<key><TAB><count>'")
            yield key, float(count)


def word_score(model: SegmentationModel, word: str, prev: Optional[str] = None) -> float:
    """Natural-log score of ``word`` following ``prev``.

    Conditional bigram probability when the bigram is known, otherwise the
    unigram probability, otherwise a penalty that shrinks tenfold per
    character of the unknown word.
    """
    if prev is not None:
        bigram = model.bigram_counts.get((prev, word))
        if bigram is not None and prev in model.unigram_counts:
            return math.log(bigram / model.unigram_counts[prev])
    count = model.unigram_counts.get(word)
    if count is not None:
        return math.log(count / model.total)
    return math.log(10.0 / (model.total * 10.0 ** len(word)))


@dataclass
class _Path:
    score: float
    nwords: int
    splits: Tuple[int, ...] = field(default=())

    def beats(self, other: "_Path") -> bool:
        if self.score != other.score:
            return self.score > other.score
        if self.nwords != other.nwords:
            return self.nwords < other.nwords
        return self.splits < other.splits


def segment(model: SegmentationModel, s: str) -> List[str]:
    """Split ``s`` into the highest-scoring word sequence.

    Dynamic programming over (end, start-of-last-word) states, which is
    what the bigram context requires. Ties go to fewer words, then to the
    lexicographically smallest list of split offsets.
    """
    text = s.lower()
    if not text or not text.isalnum():
        raise ValueError(f"segment expects a non-empty alphanumeric string, got {s!r}")
    if len(text) > MAX_INPUT_LEN:
        raise InputTooLong(f"input of length {len(text)} exceeds {MAX_INPUT_LEN}")

    n = len(text)
    width = model.max_word_len
    # best[end][start]: best path covering text[:end] whose last word is text[start:end]
    best: List[Dict[int, _Path]] = [dict() for _ in range(n + 1)]
    for end in range(1, n + 1):
        for start in range(max(0, end - width), end):
            word = text[start:end]
            if start == 0:
                best[end][0] = _Path(word_score(model, word), 1)
                continue
            winner = None
            for prev_start, path in best[start].items():
                cand = _Path(
                    path.score + word_score(model, word, text[prev_start:start]),
                    path.nwords + 1,
                    path.splits + (start,),
                )
                if winner is None or cand.beats(winner):
                    winner = cand
            if winner is not None:
                best[end][start] = winner

    final = None
    for path in best[n].values():
        if final is None or path.beats(final):
            final = path
    bounds = (0,) + final.splits + (n,)
    return [text[a:b] for a, b in zip(bounds, bounds[1:])]


def score_words(model: SegmentationModel, words: List[str]) -> float:
    total = 0.0
    prev = None
    for w in words:
        total += word_score(model, w, prev)
        prev = w
    return total
