"""Synthetic token-stream corpora with controllable label signal."""

import numpy as np

from olidstack.preprocess import TokenStream

FILLER = ["the", "a", "is", "of", "and", "to", "it", "that", "this", "was", "on", "for"]


def corpus(n, classes=("NOT", "OFF"), signal=0.8, seed=0, prefix="t"):
    """``n`` streams; each carries its class cue word with probability ``signal``."""
    rng = np.random.default_rng(seed)
    streams, labels = [], []
    for i in range(n):
        lab = classes[i % len(classes)]
        words = list(rng.choice(FILLER, size=int(rng.integers(4, 10))))
        if rng.random() < signal:
            cue = f"cue{lab.lower()}"
        else:
            cue = f"cue{classes[int(rng.integers(len(classes)))].lower()}"
        words.insert(int(rng.integers(len(words) + 1)), cue)
        streams.append(TokenStream(tuple(words), f"{prefix}{i:04d}"))
        labels.append(lab)
    return streams, labels
