"""Tokenization, sentence splitting, term vectors and lexicon lookup."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .stemmer import stem

log = logging.getLogger(__name__)

__all__ = [
    "LEXICON_LABELS",
    "EMOTIONS",
    "Lexicon",
    "LexiconSet",
    "TermVector",
    "build_vector",
    "cosine",
    "lexicon_count",
    "load_lexicon",
    "load_lexicons",
    "parse_lexicon",
    "split_sentences",
    "stem",
    "tokenize",
    "tokenize_spans",
]

EMOTIONS = ("joy", "sadness", "anger", "fear", "surprise", "anticipation", "trust", "disgust")

LEXICON_LABELS = frozenset(
    {"Positiv", "Negativ", "Strong", "Weak", "Active", "Passive", "positive", "negative"}
    | set(EMOTIONS)
    | {"relevant", "recent", "extreme", "comparative"}
)

# WordNet part-of-speech codes: adjective, adjective satellite, adverb.
_ADJ_ADV = frozenset("asr")

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

TermVector = Counter  # word type -> frequency


def tokenize_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens of ``text`` with their character offsets."""
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, keep single-letter tokens."""
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]


_ABBREVIATIONS = frozenset(
    """al e.g eg i.e ie etc fig figs eq eqs vs cf dr mr mrs ms prof no nos vol
    pp p sec sect ref refs approx resp ch chap ed eds univ dept inc ltd co jr sr st""".split()
)
_BOUNDARY_RE = re.compile(r"[.!?][\"')\]]*\s+(?=[\"'(\[]?[A-Z0-9])")


def split_sentences(text: str) -> list[str]:
    """Rule-based splitter: terminal punctuation followed by whitespace and
    an upper-case letter or digit, unless the preceding word is a known
    abbreviation or a single-letter initial."""
    sentences = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        if text[m.start()] == ".":
            prev = text[start : m.start()].split()
            last = prev[-1].lower().lstrip("([\"'") if prev else ""
            if last in _ABBREVIATIONS or (len(last) == 1 and last.isalpha()):
                continue
        piece = text[start : m.end()].strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def build_vector(tokens: Iterable[str]) -> TermVector:
    """Stemmed term-frequency vector.  Stop words are kept."""
    return Counter(stem(t.lower()) for t in tokens if t)


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    if dot == 0:
        return 0.0
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return min(1.0, dot / (na * nb))


@dataclass(frozen=True)
class Lexicon:
    """Word -> label set mapping with case-insensitive lookup.

    ``pos`` holds WordNet part-of-speech codes per word when the source file
    carried them; with ``pos_filter`` set only words having an adjective or
    adverb sense are counted.
    """

    name: str
    entries: Mapping[str, frozenset[str]]
    pos_filter: bool = False
    pos: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @property
    def labels(self) -> frozenset[str]:
        out: set[str] = set()
        for labels in self.entries.values():
            out |= labels
        return frozenset(out)

    def lookup(self, word: str) -> frozenset[str]:
        word = word.lower()
        labels = self.entries.get(word)
        if labels is None:
            return frozenset()
        if self.pos_filter and self.pos and not (self.pos.get(word, frozenset()) & _ADJ_ADV):
            return frozenset()
        return labels

    def merged(self, other: "Lexicon") -> "Lexicon":
        entries = dict(self.entries)
        for word, labels in other.entries.items():
            entries[word] = entries.get(word, frozenset()) | labels
        pos = dict(self.pos)
        pos.update(other.pos)
        return Lexicon(self.name, entries, self.pos_filter or other.pos_filter, pos)


def lexicon_count(context: Sequence[str], lexicon: Lexicon, label: str | Iterable[str]) -> int:
    """Number of tokens in ``context`` whose entry carries ``label``.

    ``label`` may be a collection, in which case a token counts once if it
    carries any of the labels.
    """
    wanted = frozenset([label]) if isinstance(label, str) else frozenset(label)
    unknown = wanted - LEXICON_LABELS
    if unknown:
        raise ValueError(f"unknown lexicon label(s) {sorted(unknown)}; allowed: {sorted(LEXICON_LABELS)}")
    return sum(1 for tok in context if lexicon.lookup(tok) & wanted)


def parse_lexicon(lines: Iterable[str], name: str, pos_filter: bool = False) -> Lexicon:
    """Parse ``word<TAB>label[,label...][<TAB>pos]`` lines; ``#`` starts a comment."""
    entries: dict[str, set[str]] = {}
    pos: dict[str, set[str]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].rstrip("\r\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise ValueError(f"{name}:{lineno}: expected word<TAB>labels")
        word = cols[0].strip().lower()
        labels = {x.strip() for x in cols[1].split(",") if x.strip()}
        bad = labels - LEXICON_LABELS
        if bad:
            raise ValueError(f"{name}:{lineno}: unknown label(s) {sorted(bad)}")
        entries.setdefault(word, set()).update(labels)
        if len(cols) > 2 and cols[2].strip():
            pos.setdefault(word, set()).update(x.strip() for x in cols[2].split(",") if x.strip())
    if pos_filter and not pos:
        log.warning("lexicon %s has no part-of-speech column; adjective/adverb filter not applied", name)
    return Lexicon(
        name,
        {w: frozenset(v) for w, v in entries.items()},
        pos_filter,
        {w: frozenset(v) for w, v in pos.items()},
    )


def load_lexicon(path: str | Path, name: str | None = None, pos_filter: bool = False) -> Lexicon:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh, name or path.stem, pos_filter)


BUILTIN_LISTS = ("relevant", "recent", "extreme", "comparative")
EXTERNAL_LEXICONS = {"gi": True, "wn": True, "emotion": False}  # name -> adjective/adverb filter


def _builtin(name: str) -> Lexicon:
    text = resources.files("citeinfluence").joinpath("lexicons", f"{name}.tsv").read_text("utf-8")
    return parse_lexicon(text.splitlines(), name)


@dataclass(frozen=True)
class LexiconSet:
    """Lexicons used by the context features; ``None`` marks a missing resource."""

    relevant: Lexicon
    recent: Lexicon
    extreme: Lexicon
    comparative: Lexicon
    gi: Lexicon | None = None
    wn: Lexicon | None = None
    emotion: Lexicon | None = None

    @classmethod
    def builtin(cls) -> "LexiconSet":
        return cls(*(_builtin(n) for n in BUILTIN_LISTS))

    def get(self, name: str) -> Lexicon | None:
        return getattr(self, name)


def load_lexicons(lexicon_dir: str | Path | None = None) -> LexiconSet:
    """Builtin short lists, extended by ``<name>.tsv`` files found in
    ``lexicon_dir``; ``gi.tsv``, ``wn.tsv`` and ``emotion.tsv`` enable the
    General Inquirer, WordNet-extended and emotion features."""
    lists = {n: _builtin(n) for n in BUILTIN_LISTS}
    external: dict[str, Lexicon | None] = dict.fromkeys(EXTERNAL_LEXICONS)
    if lexicon_dir is not None:
        d = Path(lexicon_dir)
        if not d.is_dir():
            raise FileNotFoundError(f"lexicon directory not found: {d}")
        for n in BUILTIN_LISTS:
            p = d / f"{n}.tsv"
            if p.exists():
                lists[n] = lists[n].merged(load_lexicon(p, n))
        for n, pos_filter in EXTERNAL_LEXICONS.items():
            p = d / f"{n}.tsv"
            if p.exists():
                external[n] = load_lexicon(p, n, pos_filter)
    for n, lex in external.items():
        if lex is None:
            log.warning("lexicon '%s' not found; dependent features disabled", n)
    return LexiconSet(**lists, **external)
