"""Shipped data files: emoji descriptions, emoticons, word frequency lists.

The frequency lists are the top 50k unigrams and top 100k bigrams of a
web-scale English corpus; ``CORPUS_TOTAL`` is that corpus's token total,
which the unknown-word penalty needs (the truncated lists sum to less).
"""

from functools import lru_cache
from importlib import resources as _res

CORPUS_TOTAL = 1024908267229


def path(name):
    return _res.files(__name__).joinpath(name)


@lru_cache(maxsize=None)
def emoji_map():
    from ..preprocess import EmojiMap

    return EmojiMap.load(path("emoji_map.tsv"))


@lru_cache(maxsize=None)
def segmentation_model():
    from ..segmentation import SegmentationModel

    return SegmentationModel.load(path("unigrams.tsv"), path("bigrams.tsv"), total=CORPUS_TOTAL)
