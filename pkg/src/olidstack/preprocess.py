"""Tweet normalization: emoji textualization, tokenization, hashtag
expansion, @USER run truncation and URL placeholder rewriting."""

import re
import unicodedata
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import resources
from .segmentation import InputTooLong, SegmentationModel, segment

USER = "@USER"
MAX_USER_RUN = 3


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("tweet id must be non-empty")


@dataclass(frozen=True)
class TokenStream:
    tokens: Tuple[str, ...]
    source_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r}")

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)


class EmojiMap:
    """Emoji codepoint sequence -> lowercase description words.

    Matching is longest-key-first, so ``👍🏻`` wins over ``👍`` when both
    are present.
    """

    def __init__(self, entries: Dict[str, Sequence[str]]):
        clean = {}
        for key, words in entries.items():
            if not key:
                raise ValueError("empty emoji key")
            words = tuple(words)
            if not words or any(not w.isalnum() for w in words):
                raise ValueError(f"bad description for {key!r}: {words!r}")
            clean[key] = words
        self.entries = clean
        self._replacement = {k: " ".join(v) for k, v in clean.items()}
        if clean:
            keys = sorted(clean, key=lambda k: (-len(k), k))
            self._pattern = re.compile("|".join(map(re.escape, keys)))
        else:
            self._pattern = None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    @classmethod
    def load(cls, path) -> "EmojiMap":
        entries = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    key, desc = line.split("\t")
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: expected 'emoji<TAB>words'") from None
                entries[key] = desc.split()
        return cls(entries)


def load_emoticons(path) -> frozenset:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def replace_emoji(text: str, emoji_map: EmojiMap) -> str:
    if emoji_map._pattern is None or not text:
        return text
    out = []
    pos = 0
    for m in emoji_map._pattern.finditer(text):
        start, end = m.span()
        out.append(text[pos:start])
        desc = emoji_map._replacement[m.group()]
        before = next((piece[-1] for piece in reversed(out) if piece), "")
        if before and not before.isspace():
            desc = " " + desc
        if end < len(text) and not text[end].isspace():
            desc = desc + " "
        out.append(desc)
        pos = end
    out.append(text[pos:])
    return "".join(out)


def dedup_placeholders(tokens: Sequence[str], limit: int = MAX_USER_RUN) -> List[str]:
    out = []
    run = 0
    for tok in tokens:
        run = run + 1 if tok == USER else 0
        if run <= limit:
            out.append(tok)
    return out


def replace_url(tokens: Sequence[str]) -> List[str]:
    return ["http" if tok == "URL" else tok for tok in tokens]


# --- tokenizer -------------------------------------------------------------

_ZWJ = "‍"


def _is_extender(ch: str) -> bool:
    cp = ord(ch)
    return (
        unicodedata.category(ch) in ("Mn", "Me", "Mc")
        or cp in (0xFE0E, 0xFE0F)
        or 0x1F3FB <= cp <= 0x1F3FF
        or 0xE0020 <= cp <= 0xE007F
    )


def _units(chunk: str) -> List[str]:
    """Split a chunk into base characters with their modifiers attached."""
    units: List[str] = []
    i, n = 0, len(chunk)
    while i < n:
        j = i + 1
        while j < n:
            if _is_extender(chunk[j]):
                j += 1
            elif chunk[j] == _ZWJ:
                j += 2 if j + 1 < n else 1
            else:
                break
        units.append(chunk[i:min(j, n)])
        i = j
    return units


def _is_word(unit: str) -> bool:
    return unit[0].isalnum() or unit[0] == "_"


def _is_symbol(unit: str) -> bool:
    return unicodedata.category(unit[0]) == "So"


class TweetTokenizer:
    """Whitespace split, then punctuation peeling from both ends of each chunk.

    Kept whole: ``@USER`` and other mentions, hashtags, emoticons from a
    fixed list, and word-internal punctuation such as contraction
    apostrophes. Runs of dots come off as a single token. Symbol
    characters (emoji not covered by the emoji map) always stand alone.
    Case is preserved.
    """

    def __init__(self, emoticons: Iterable[str]):
        self.emoticons = frozenset(emoticons)
        by_len = sorted(self.emoticons, key=lambda e: (-len(e), e))
        # only peel emoticons whose word-side edge is punctuation
        self._prefixes = [e for e in by_len if not _is_word(e[-1])]
        self._suffixes = [e for e in by_len if not _is_word(e[0])]

    def __call__(self, text: str) -> List[str]:
        return self.tokenize(text)

    def tokenize(self, text: str) -> List[str]:
        tokens: List[str] = []
        for chunk in text.split():
            if chunk in self.emoticons or chunk == USER:
                tokens.append(chunk)
                continue
            piece: List[str] = []
            for unit in _units(chunk):
                if _is_symbol(unit):
                    if piece:
                        tokens.extend(self._peel("".join(piece)))
                        piece = []
                    tokens.append(unit)
                else:
                    piece.append(unit)
            if piece:
                tokens.extend(self._peel("".join(piece)))
        return tokens

    def _protected_start(self, s: str) -> bool:
        return len(s) > 1 and s[0] in "#@" and _is_word(s[1])

    def _peel(self, s: str) -> List[str]:
        lead: List[str] = []
        while s and s not in self.emoticons and not self._protected_start(s):
            emo = next((e for e in self._prefixes if s.startswith(e)), None)
            if emo is not None:
                lead.append(emo)
                s = s[len(emo):]
                continue
            first = _units(s)[0]
            if _is_word(first):
                break
            if first == ".":
                first = s[: len(s) - len(s.lstrip("."))]
            lead.append(first)
            s = s[len(first):]

        trail: List[str] = []
        while s and s not in self.emoticons:
            emo = next((e for e in self._suffixes if s.endswith(e) and len(e) < len(s)), None)
            if emo is not None:
                trail.append(emo)
                s = s[: -len(emo)]
                continue
            last = _units(s)[-1]
            if _is_word(last) or len(last) == len(s):
                break
            if last == ".":
                last = s[len(s.rstrip(".")):]
                if len(last) == len(s):
                    break
            trail.append(last)
            s = s[: -len(last)]

        return lead + ([s] if s else []) + trail[::-1]


_default_tokenizer: Optional[TweetTokenizer] = None


def tokenize(text: str) -> List[str]:
    """Tokenize with the shipped emoticon list."""
    global _default_tokenizer
    if _default_tokenizer is None:
        _default_tokenizer = TweetTokenizer(load_emoticons(resources.path("emoticons.txt")))
    return _default_tokenizer.tokenize(text)


def expand_hashtags(tokens: Sequence[str], seg: SegmentationModel) -> List[str]:
    out: List[str] = []
    for tok in tokens:
        if not tok.startswith("#"):
            out.append(tok)
            continue
        body = "".join(ch for ch in tok if ch.isalnum())
        if not body:
            continue
        try:
            out.extend(segment(seg, body))
        except InputTooLong:
            out.append(body.lower())
    return out


class Preprocessor:
    """The full normalization pipeline bound to its resources.

    Resources are loaded once and never mutated, so one instance can be
    shared freely.
    """

    def __init__(self, emoji_map: EmojiMap, seg: SegmentationModel,
                 tokenizer: Optional[TweetTokenizer] = None):
        self.emoji_map = emoji_map
        self.seg = seg
        if tokenizer is None:
            tokenizer = TweetTokenizer(load_emoticons(resources.path("emoticons.txt")))
        self.tokenizer = tokenizer

    @classmethod
    def from_paths(cls, emoji_map=None, emoticons=None, unigrams=None, bigrams=None):
        emap = EmojiMap.load(emoji_map) if emoji_map else resources.emoji_map()
        if unigrams or bigrams:
            seg = SegmentationModel.load(
                unigrams or resources.path("unigrams.tsv"),
                bigrams or resources.path("bigrams.tsv"),
                total=None if unigrams else resources.CORPUS_TOTAL,
            )
        else:
            seg = resources.segmentation_model()
        tok = TweetTokenizer(load_emoticons(emoticons)) if emoticons else None
        return cls(emap, seg, tok)

    def tokens(self, text: str) -> List[str]:
        toks = self.tokenizer.tokenize(replace_emoji(text, self.emoji_map))
        toks = expand_hashtags(toks, self.seg)
        toks = dedup_placeholders(toks)
        return replace_url(toks)

    def __call__(self, tweet: Tweet) -> TokenStream:
        return TokenStream(tuple(self.tokens(tweet.text)), tweet.id)


def preprocess(tweet: Tweet, emoji_map: EmojiMap, seg: SegmentationModel) -> TokenStream:
    return Preprocessor(emoji_map, seg, _shared_tokenizer())(tweet)


def _shared_tokenizer() -> TweetTokenizer:
    tokenize("")
    return _default_tokenizer


_default_preprocessor: Optional[Preprocessor] = None


def default_preprocessor() -> Preprocessor:
    global _default_preprocessor
    if _default_preprocessor is None:
        _default_preprocessor = Preprocessor(
            resources.emoji_map(), resources.segmentation_model(), _shared_tokenizer())
    return _default_preprocessor
