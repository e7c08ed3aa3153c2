"""The 38 paper-reference features and per-paper contextual normalization."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import AnnotatedPaper, MentionSite, Reference
from .textproc import EMOTIONS, LexiconSet, TermVector, build_vector, cosine, lexicon_count, tokenize

log = logging.getLogger(__name__)

FEATURE_NAMES: tuple[str, ...] = (
    "countsInPaper_whole", "countsInPaper_secNum", "countsInPaper_related",
    "countsInPaper_intro", "countsInPaper_core",
    "sim_titleTitle", "sim_titleCore", "sim_titleIntro", "sim_titleConcl", "sim_titleAbstr",
    "sim_contextTitle", "sim_contextIntro", "sim_contextConcl", "sim_contextAbstr",
    "contextMeta_authorMentioned", "contextMeta_appearAlone", "contextMeta_appearFirst",
    "contextLex_relevant", "contextLex_recent", "contextLex_extreme", "contextLex_comparative",
    "contextLexOsg_wnPotency", "contextLexOsg_wnEvaluative", "contextLexOsg_wnActivity",
    "contextLexOsg_giPotency", "contextLexOsg_giEvaluative", "contextLexOsg_giActivity",
    "contextLexEmo_emo", "contextLexEmo_polarity",
    "posInSent_begin", "posInSent_end",
    "posInPaper_stdVar", "posInPaper_mean", "posInPaper_last", "posInPaper_first",
    "aux_citeCount", "aux_selfCite", "aux_yearDiff",
)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}
BINARY_FEATURES = frozenset({"aux_selfCite"})

# Finer-grained splits used only by the correlation analysis.
POLARITY_SPLIT = ("contextLexEmo_positive", "contextLexEmo_negative")
EMOTION_SPLIT = tuple(f"contextLexEmo_{e}" for e in EMOTIONS)
YEAR_BUCKETS: tuple[tuple[int, int | None], ...] = tuple((y, y) for y in range(11)) + ((11, 20), (21, 30), (31, None))
EXTRA_NAMES = POLARITY_SPLIT + EMOTION_SPLIT + ("aux_yearDiff_raw",)

NON_CORE = frozenset({"introduction", "related", "acknowledgment", "conclusion", "future", "reference"})

# (feature, lexicon attribute, label or labels)
_LEXICAL = (
    ("contextLex_relevant", "relevant", "relevant"),
    ("contextLex_recent", "recent", "recent"),
    ("contextLex_extreme", "extreme", "extreme"),
    ("contextLex_comparative", "comparative", "comparative"),
    ("contextLexOsg_wnPotency", "wn", "Strong"),
    ("contextLexOsg_wnEvaluative", "wn", "Positiv"),
    ("contextLexOsg_wnActivity", "wn", "Active"),
    ("contextLexOsg_giPotency", "gi", "Strong"),
    ("contextLexOsg_giEvaluative", "gi", "Positiv"),
    ("contextLexOsg_giActivity", "gi", "Active"),
    ("contextLexEmo_emo", "emotion", EMOTIONS),
    ("contextLexEmo_polarity", "emotion", ("positive", "negative")),
)
_EXTRA_LEXICAL = (
    ("contextLexEmo_positive", "positive"),
    ("contextLexEmo_negative", "negative"),
) + tuple((f"contextLexEmo_{e}", e) for e in EMOTIONS)

CONTEXT_WINDOW = 5


def disabled_features(lexicons: LexiconSet) -> frozenset[str]:
    return frozenset(name for name, lex, _ in _LEXICAL if lexicons.get(lex) is None)


@dataclass(frozen=True)
class PairKey:
    paper_id: str
    ref_index: int


class _PaperText:
    """Term vectors of the citing paper's parts, built once per paper."""

    def __init__(self, paper: AnnotatedPaper):
        self.paper = paper
        self.body = paper.body_sentences()
        self.n_sentences = len(self.body)
        labels = {s.label for s in paper.sections}
        self.title = build_vector(paper.section_tokens(["title"]))
        self.abstract = build_vector(paper.section_tokens(["abstract"]))
        self.intro = build_vector(paper.section_tokens(["introduction"]))
        self.concl = build_vector(paper.section_tokens(["conclusion"]))
        self.core = build_vector(paper.section_tokens(labels - NON_CORE))
        # token positions covered by any citation marker, per sentence
        self.marker_cover: dict[int, set[int]] = {}
        for m in paper.mentions:
            self.marker_cover.setdefault(m.sentence_index, set()).update(range(*m.token_span))

    def context_vector(self, m: MentionSite) -> TermVector:
        tokens = self.body[m.sentence_index][1]
        cover = self.marker_cover.get(m.sentence_index, ())
        return build_vector(t for i, t in enumerate(tokens) if i not in cover)

    def window(self, m: MentionSite) -> list[str]:
        tokens = self.body[m.sentence_index][1]
        a, b = m.token_span
        return list(tokens[max(0, a - CONTEXT_WINDOW) : a]) + list(tokens[b : b + CONTEXT_WINDOW])


def count_features(paper: AnnotatedPaper, ref: Reference) -> dict[str, float]:
    sites = paper.mentions_of(ref.ref_index)
    secs = [m.section for m in sites]
    return {
        "countsInPaper_whole": float(len(sites)),
        "countsInPaper_secNum": float(len(set(secs))),
        "countsInPaper_related": float(secs.count("related")),
        "countsInPaper_intro": float(secs.count("introduction")),
        "countsInPaper_core": float(sum(1 for s in secs if s not in NON_CORE)),
    }


def title_similarity_features(paper: AnnotatedPaper, ref: Reference, text: _PaperText | None = None) -> dict[str, float]:
    text = text or _PaperText(paper)
    v = build_vector(tokenize(ref.title))
    return {
        "sim_titleTitle": cosine(v, text.title),
        "sim_titleCore": cosine(v, text.core),
        "sim_titleIntro": cosine(v, text.intro),
        "sim_titleConcl": cosine(v, text.concl),
        "sim_titleAbstr": cosine(v, text.abstract),
    }


def context_similarity_features(paper: AnnotatedPaper, ref: Reference, text: _PaperText | None = None) -> dict[str, float]:
    """Cosine of each mention's sentence (citation markers removed) against
    the citing paper's title, introduction, conclusion and abstract,
    averaged over mentions."""
    text = text or _PaperText(paper)
    sites = paper.mentions_of(ref.ref_index)
    out = dict.fromkeys(("sim_contextTitle", "sim_contextIntro", "sim_contextConcl", "sim_contextAbstr"), 0.0)
    if not sites:
        return out
    for m in sites:
        v = text.context_vector(m)
        out["sim_contextTitle"] += cosine(v, text.title)
        out["sim_contextIntro"] += cosine(v, text.intro)
        out["sim_contextConcl"] += cosine(v, text.concl)
        out["sim_contextAbstr"] += cosine(v, text.abstract)
    return {k: v / len(sites) for k, v in out.items()}


def context_meta_features(sites: Sequence[MentionSite]) -> dict[str, float]:
    n = len(sites)
    if n == 0:
        return {"contextMeta_authorMentioned": 0.0, "contextMeta_appearAlone": 0.0, "contextMeta_appearFirst": 0.0}
    return {
        "contextMeta_authorMentioned": sum(m.author_name_in_context for m in sites) / n,
        "contextMeta_appearAlone": sum(m.appears_alone for m in sites) / n,
        "contextMeta_appearFirst": sum(m.appears_first_in_group for m in sites) / n,
    }


def context_lexical_features(
    paper: AnnotatedPaper,
    ref: Reference,
    lexicons: LexiconSet,
    text: _PaperText | None = None,
    extras: dict[str, float] | None = None,
) -> dict[str, float]:
    """Lexicon hits in a five-token window either side of each mention
    (clipped at the sentence boundary), averaged over mentions."""
    text = text or _PaperText(paper)
    sites = paper.mentions_of(ref.ref_index)
    out = {name: 0.0 for name, _, _ in _LEXICAL}
    extra = {name: 0.0 for name, _ in _EXTRA_LEXICAL}
    emo = lexicons.get("emotion")
    for m in sites:
        window = text.window(m)
        for name, lex_name, label in _LEXICAL:
            lex = lexicons.get(lex_name)
            if lex is not None:
                out[name] += lexicon_count(window, lex, label)
        if emo is not None:
            for name, label in _EXTRA_LEXICAL:
                extra[name] += lexicon_count(window, emo, label)
    if sites:
        out = {k: v / len(sites) for k, v in out.items()}
        extra = {k: v / len(sites) for k, v in extra.items()}
    if extras is not None:
        extras.update(extra)
    return out


def _at_sentence_end(m: MentionSite, n_tokens: int) -> bool:
    return m.token_span[1] >= n_tokens


def position_features(paper: AnnotatedPaper, ref: Reference, text: _PaperText | None = None) -> dict[str, float]:
    """Where mentions sit in their sentence and in the paper.

    Paper positions are ``sentence_index / n_sentences``; ``posInPaper_stdVar``
    is the population variance of those positions.
    """
    text = text or _PaperText(paper)
    sites = paper.mentions_of(ref.ref_index)
    names = ("posInSent_begin", "posInSent_end", "posInPaper_stdVar", "posInPaper_mean", "posInPaper_last", "posInPaper_first")
    if not sites or text.n_sentences == 0:
        return dict.fromkeys(names, 0.0)
    n = len(sites)
    begin = sum(1 for m in sites if m.token_span[0] == 0) / n
    end = sum(1 for m in sites if _at_sentence_end(m, len(text.body[m.sentence_index][1]))) / n
    pos = np.array([m.sentence_index / text.n_sentences for m in sites])
    return {
        "posInSent_begin": begin,
        "posInSent_end": end,
        "posInPaper_stdVar": float(pos.var()),
        "posInPaper_mean": float(pos.mean()),
        "posInPaper_last": float(pos.max()),
        "posInPaper_first": float(pos.min()),
    }


def misc_features(paper: AnnotatedPaper, ref: Reference) -> dict[str, float]:
    if ref.year is None:
        log.warning("paper %s ref %d: no publication year; aux_yearDiff set to 0", paper.paper_id, ref.ref_index)
        diff = 0
    else:
        diff = max(0, paper.year - ref.year)
    return {
        "aux_citeCount": float(ref.global_cite_count),
        "aux_selfCite": 1.0 if ref.self_cite else 0.0,
        "aux_yearDiff": float(diff),
    }


def raw_paper_features(paper: AnnotatedPaper, lexicons: LexiconSet) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized (n_refs x 38) feature matrix plus the extras matrix."""
    text = _PaperText(paper)
    rows, extra_rows = [], []
    for ref in paper.references:
        extra: dict[str, float] = {}
        f: dict[str, float] = {}
        f.update(count_features(paper, ref))
        f.update(title_similarity_features(paper, ref, text))
        f.update(context_similarity_features(paper, ref, text))
        f.update(context_meta_features(paper.mentions_of(ref.ref_index)))
        f.update(context_lexical_features(paper, ref, lexicons, text, extra))
        f.update(position_features(paper, ref, text))
        f.update(misc_features(paper, ref))
        rows.append([f[n] for n in FEATURE_NAMES])
        extra["aux_yearDiff_raw"] = f["aux_yearDiff"]
        extra_rows.append([extra[n] for n in EXTRA_NAMES])
    return (
        np.array(rows, dtype=float).reshape(-1, len(FEATURE_NAMES)),
        np.array(extra_rows, dtype=float).reshape(-1, len(EXTRA_NAMES)),
    )


def contextual_normalize(values: np.ndarray, names: Sequence[str] = FEATURE_NAMES) -> np.ndarray:
    """Divide each non-binary column by its maximum over one paper's references.

    Columns whose maximum is zero become zero; binary columns pass through.
    """
    values = np.asarray(values, dtype=float)
    out = values.copy()
    if values.shape[0] == 0:
        return out
    for j, name in enumerate(names):
        if name in BINARY_FEATURES or name == "aux_yearDiff_raw":
            continue
        mx = values[:, j].max()
        out[:, j] = values[:, j] / mx if mx > 0 else 0.0
    return out


@dataclass
class FeatureTable:
    """Feature vectors for every paper-reference pair of a corpus."""

    keys: list[PairKey]
    values: np.ndarray  # (n_pairs, 38)
    labels: np.ndarray  # 1, 0, or -1 when unlabelled
    names: tuple[str, ...] = FEATURE_NAMES
    extras: np.ndarray | None = None
    disabled: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.keys)

    def column(self, name: str) -> np.ndarray:
        if name in self.names:
            return self.values[:, self.names.index(name)]
        if self.extras is not None and name in EXTRA_NAMES:
            return self.extras[:, EXTRA_NAMES.index(name)]
        raise KeyError(name)

    def matrix(self, features: Sequence[str]) -> np.ndarray:
        unknown = [f for f in features if f not in self.names]
        if unknown:
            raise KeyError(f"unknown feature(s): {', '.join(unknown)}")
        return self.values[:, [self.names.index(f) for f in features]]

    def paper_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for k in self.keys:
            seen.setdefault(k.paper_id, None)
        return list(seen)

    def groups(self) -> dict[str, np.ndarray]:
        """Row indexes per paper, in first-appearance order."""
        out: dict[str, list[int]] = {}
        for i, k in enumerate(self.keys):
            out.setdefault(k.paper_id, []).append(i)
        return {p: np.array(ix, dtype=int) for p, ix in out.items()}

    def subset(self, rows: np.ndarray) -> "FeatureTable":
        rows = np.asarray(rows, dtype=int)
        return FeatureTable(
            [self.keys[i] for i in rows],
            self.values[rows],
            self.labels[rows],
            self.names,
            None if self.extras is None else self.extras[rows],
            self.disabled,
        )


def _paper_rows(args):
    paper, lexicons, normalize = args
    raw, extra = raw_paper_features(paper, lexicons)
    if normalize:
        raw = contextual_normalize(raw)
        extra = contextual_normalize(extra, EXTRA_NAMES)
    return raw, extra


def extract_features(
    papers: Sequence[AnnotatedPaper],
    lexicons: LexiconSet | None = None,
    normalize: bool = True,
    jobs: int = 1,
) -> FeatureTable:
    """Feature table for every paper-reference pair, normalized per paper.

    ``jobs > 1`` spreads papers over worker processes; results are
    reassembled in corpus order so the table does not depend on ``jobs``.
    """
    lexicons = lexicons or LexiconSet.builtin()
    work = [(p, lexicons, normalize) for p in papers]
    if jobs > 1 and len(papers) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_paper_rows, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        parts = [_paper_rows(w) for w in work]
    keys = [PairKey(p.paper_id, r.ref_index) for p in papers for r in p.references]
    labels = np.array(
        [-1 if r.gold_label is None else int(r.gold_label) for p in papers for r in p.references], dtype=int
    )
    values = np.vstack([v for v, _ in parts]) if parts else np.zeros((0, len(FEATURE_NAMES)))
    extras = np.vstack([e for _, e in parts]) if parts else np.zeros((0, len(EXTRA_NAMES)))
    return FeatureTable(keys, values, labels, FEATURE_NAMES, extras, disabled_features(lexicons))


# --- correlation analysis ---------------------------------------------------

@dataclass(frozen=True)
class Correlation:
    feature: str
    r: float
    degenerate: bool = False  # zero variance in feature or labels; r reported as 0


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, bool]:
    """Pearson r and a degeneracy flag (zero variance gives ``(0.0, True)``)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 2:
        return 0.0, True
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 1e-300 or syy <= 1e-300:
        return 0.0, True
    return float(dx @ dy / math.sqrt(sxx * syy)), False


def year_bucket_name(lo: int, hi: int | None) -> str:
    if hi is None:
        return f"aux_yearDiff_{lo}+"
    return f"aux_yearDiff_{lo}" if lo == hi else f"aux_yearDiff_{lo}-{hi}"


def year_bucket_indicators(year_diff: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    for lo, hi in YEAR_BUCKETS:
        upper = np.inf if hi is None else hi
        out[year_bucket_name(lo, hi)] = ((year_diff >= lo) & (year_diff <= upper)).astype(float)
    return out


def feature_label_correlations(table: FeatureTable, splits: bool = True) -> list[Correlation]:
    """Pearson r of every feature against the binary gold labels.

    With ``splits`` the result also carries the positive/negative polarity
    split, the eight single-emotion features and year-difference buckets
    (0, 1, ..., 10, 11-20, 21-30, 31+).
    """
    mask = table.labels >= 0
    if not mask.any():
        raise ValueError("no gold labels in feature table")
    y = table.labels[mask].astype(float)
    out = []
    for j, name in enumerate(table.names):
        r, deg = pearson(table.values[mask, j], y)
        out.append(Correlation(name, r, deg))
    if splits and table.extras is not None:
        for name in POLARITY_SPLIT + EMOTION_SPLIT:
            r, deg = pearson(table.column(name)[mask], y)
            out.append(Correlation(name, r, deg))
        for name, ind in year_bucket_indicators(table.column("aux_yearDiff_raw")[mask]).items():
            r, deg = pearson(ind, y)
            out.append(Correlation(name, r, deg))
    return out


# --- feature dump -----------------------------------------------------------

def write_feature_table(table: FeatureTable, path: str | Path, sep: str = "\t") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(sep.join(("paper_id", "ref_index", *table.names, "gold_label")) + "\n")
        for key, row, label in zip(table.keys, table.values, table.labels):
            cells = [key.paper_id, str(key.ref_index), *(repr(float(v)) for v in row), "" if label < 0 else str(int(label))]
            fh.write(sep.join(cells) + "\n")


def read_feature_table(path: str | Path, sep: str = "\t") -> FeatureTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(sep)
        if header[:2] != ["paper_id", "ref_index"] or header[-1] != "gold_label":
            raise ValueError(f"{path}: not a feature dump (bad header)")
        names = tuple(header[2:-1])
        keys, rows, labels = [], [], []
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            cells = line.rstrip("\n").split(sep)
            if len(cells) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}")
            keys.append(PairKey(cells[0], int(cells[1])))
            rows.append([float(c) for c in cells[2:-1]])
            labels.append(int(cells[-1]) if cells[-1] != "" else -1)
    values = np.array(rows, dtype=float).reshape(-1, len(names))
    return FeatureTable(keys, values, np.array(labels, dtype=int), names)


def iter_rows(table: FeatureTable) -> Iterable[tuple[PairKey, dict[str, float], int]]:
    for key, row, label in zip(table.keys, table.values, table.labels):
        yield key, dict(zip(table.names, map(float, row))), int(label)
