"""Regenerate the shipped resource files under src/olidstack/resources.

Needs the ``emoji`` and ``wordsegment`` packages importable (only at build
time; the library reads the generated TSVs)::

    python scripts/build_resources.py --unigrams 50000 --bigrams 100000
"""

import argparse
import re
from collections import Counter
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "olidstack" / "resources"


def describe(shortcode):
    words = re.sub(r"[\W_]+", " ", shortcode.strip(":")).lower().split()
    return " ".join(words)


def build_emoji_map(path):
    import emoji

    rows = []
    for key, data in emoji.EMOJI_DATA.items():
        desc = describe(data["en"])
        if desc:
            rows.append((key, desc))
    rows.sort()
    with open(path, "w", encoding="utf-8") as fh:
        for key, desc in rows:
            fh.write(f"{key}\t{desc}\n")
    return len(rows)


def top_counts(src, n, keep=lambda key: True):
    # the source lists repeat some keys (case variants folded together): add them up
    totals = Counter()
    with open(src, encoding="utf-8") as fh:
        for line in fh:
            key, count = line.rstrip("\n").split("\t")
            if keep(key):
                totals[key] += int(count)
    rows = sorted(totals.items(), key=lambda r: (-r[1], r[0]))
    return rows[:n]


def write_counts(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for key, count in rows:
            fh.write(f"{key}\t{count}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--unigrams", type=int, default=50000)
    ap.add_argument("--bigrams", type=int, default=100000)
    args = ap.parse_args()

    import wordsegment

    data_dir = Path(wordsegment.__file__).parent
    print("emoji entries:", build_emoji_map(OUT / "emoji_map.tsv"))
    uni = top_counts(data_dir / "unigrams.txt", args.unigrams)
    write_counts(OUT / "unigrams.tsv", uni)
    vocab = {w for w, _ in uni}

    def both_known(key):
        a, b = key.split(" ")
        return a in vocab and b in vocab

    bi = top_counts(data_dir / "bigrams.txt", args.bigrams, both_known)
    write_counts(OUT / "bigrams.tsv", bi)
    print("unigrams:", len(uni), "bigrams:", len(bi))


if __name__ == "__main__":
    main()
