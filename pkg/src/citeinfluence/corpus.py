"""Corpus records: section-labelled papers, bibliographies and in-text mentions.

A corpus file is UTF-8 JSON Lines, one paper per line::

    {"version": 1, "paper_id": "P1", "year": 2012, "citation_style": "numeric",
     "sections": [{"label": "title", "sentences": ["Measuring influence"]},
                  {"label": "main", "text": "Raw text, split internally. See [1,2]."}],
     "references": [{"ref_index": 1, "title": "...", "year": 2005,
                     "authors": ["Jane Smith"], "global_cite_count": 300,
                     "self_cite": false, "gold_label": true}],
     "mentions": [{"ref_index": 1, "sentence_index": 1, "token_span": [4, 5],
                   "section": "main", "appears_alone": true,
                   "appears_first_in_group": false, "author_name_in_context": false}]}

Sentences are strings or token arrays.  Token spans index into
``tokenize(sentence)``.  Sentence indexes count body sentences (every
section except ``reference``) in document order.  When ``mentions`` is
absent they are detected from the sentence text.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .textproc import split_sentences, tokenize, tokenize_spans

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

SECTION_LABELS = (
    "title", "author", "abstract", "introduction", "related", "main",
    "conclusion", "future", "acknowledgment", "reference", "appendix", "date",
)
CITATION_STYLES = ("numeric", "textual")


class CorpusError(ValueError):
    """A corpus record failed validation."""

    def __init__(self, paper_id: str | None, field_name: str, message: str):
        self.paper_id = paper_id
        self.field = field_name
        super().__init__(f"paper {paper_id!r}: field {field_name!r}: {message}")


@dataclass(frozen=True)
class Reference:
    ref_index: int
    title: str
    year: int | None
    authors: tuple[str, ...] = ()
    global_cite_count: int = 0
    self_cite: bool = False
    gold_label: bool | None = None
    cited_id: str | None = None  # id of the cited paper in a citation network, if known

    @property
    def surnames(self) -> tuple[str, ...]:
        return tuple(s for s in (_surname(a) for a in self.authors) if s)


@dataclass(frozen=True)
class MentionSite:
    ref_index: int
    sentence_index: int
    token_span: tuple[int, int]
    section: str
    appears_alone: bool
    appears_first_in_group: bool
    author_name_in_context: bool = False


@dataclass(frozen=True)
class Section:
    label: str
    sentences: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class AnnotatedPaper:
    paper_id: str
    year: int
    sections: tuple[Section, ...]
    references: tuple[Reference, ...]
    mentions: tuple[MentionSite, ...] = ()
    citation_style: str = "numeric"
    _by_ref: dict = field(default=None, init=False, repr=False, compare=False)

    def body_sentences(self) -> list[tuple[str, tuple[str, ...]]]:
        """(section label, tokens) for every body sentence, indexed densely."""
        return [
            (sec.label, sent)
            for sec in self.sections
            if sec.label != "reference"
            for sent in sec.sentences
        ]

    @property
    def n_sentences(self) -> int:
        return sum(len(sec.sentences) for sec in self.sections if sec.label != "reference")

    def section_tokens(self, labels: Iterable[str]) -> list[str]:
        wanted = set(labels)
        return [t for sec in self.sections if sec.label in wanted for sent in sec.sentences for t in sent]

    def mentions_of(self, ref_index: int) -> tuple[MentionSite, ...]:
        if self._by_ref is None:
            by: dict[int, list[MentionSite]] = {}
            for m in self.mentions:
                by.setdefault(m.ref_index, []).append(m)
            object.__setattr__(self, "_by_ref", {k: tuple(v) for k, v in by.items()})
        return self._by_ref.get(ref_index, ())

    def reference(self, ref_index: int) -> Reference:
        for r in self.references:
            if r.ref_index == ref_index:
                return r
        raise KeyError(ref_index)


# --- section labels ---------------------------------------------------------

_SECTION_KEYWORDS = (
    ("acknowledgment", r"acknowledg|\bthanks\b"),
    ("related", r"related (?:work|research|literature)|previous (?:work|research)|prior work"
                r"|\bbackground\b|literature (?:review|survey)|state of the art"),
    ("conclusion", r"\bconclu|concluding|final remarks"),
    ("future", r"future (?:work|research|directions?)|open (?:problems|questions)|\boutlook\b"),
    ("introduction", r"\bintroduction\b"),
    ("abstract", r"\babstract\b"),
    ("reference", r"\breferences?\b|bibliograph|works cited|literature cited"),
    ("appendix", r"\bappendix|\bappendices\b|supplementary"),
    ("title", r"^title$"),
    ("author", r"^authors?$|\baffiliations?\b"),
    ("date", r"^date$|publication (?:date|year)|year of publication"),
)


def standardize_sections(raw_heading: str) -> str:
    """Map a free-form section heading onto one of the twelve labels.

    Case-insensitive keyword matching; anything unmatched is ``main``.
    """
    h = re.sub(r"^\s*(?:\d+(?:\.\d+)*\.?|[IVXivx]+[.:)])\s*", "", raw_heading)
    h = re.sub(r"\s+", " ", h).strip().lower()
    if h in SECTION_LABELS:
        return h
    if h in ("acknowledgement", "acknowledgements", "acknowledgments"):
        return "acknowledgment"
    for label, pattern in _SECTION_KEYWORDS:
        if re.search(pattern, h):
            return label
    return "main"


# --- mention detection ------------------------------------------------------

_NUMERIC_GROUP_RE = re.compile(r"\[\s*(\d+(?:\s*[-\u2013\u2014]\s*\d+)?(?:\s*[,;]\s*\d+(?:\s*[-\u2013\u2014]\s*\d+)?)*)\s*\]")
_NAME = r"[^\W\d_][\w'’\-]*"
_YEAR = r"(?:1[5-9]\d\d|20\d\d)[a-z]?"
_NARRATIVE_RE = re.compile(
    rf"(?P<name>{_NAME})(?:\s+et\s+al\.?|\s+(?:and|&)\s+{_NAME})?\s*\(\s*(?P<years>{_YEAR}(?:\s*,\s*{_YEAR})*)\s*\)"
)
_PAREN_RE = re.compile(r"\(([^()]*\d{4}[a-z]?[^()]*)\)")
_PAREN_ITEM_RE = re.compile(
    rf"^\s*(?:(?:see|e\.g\.|cf\.|i\.e\.)\s*,?\s*)?(?P<name>{_NAME})(?:\s+et\s+al\.?|\s+(?:and|&)\s+{_NAME})?\s*,?\s*(?P<years>{_YEAR}(?:\s*,\s*{_YEAR})*)\s*$"
)
_CONTEXT_WINDOW = 5


def _surname(author: str) -> str:
    author = author.strip()
    if "," in author:
        return author.split(",", 1)[0].strip().lower()
    parts = author.split()
    return parts[-1].lower() if parts else ""


def _expand_ids(body: str) -> list[int]:
    out: list[int] = []
    for item in re.split(r"\s*[,;]\s*", body.strip()):
        if not item:
            continue
        bounds = re.split(r"\s*[-\u2013\u2014]\s*", item)
        if len(bounds) == 2:
            a, b = int(bounds[0]), int(bounds[1])
            out.extend(range(a, b + 1) if a <= b else [a, b])
        else:
            out.append(int(item))
    return out


def _token_span(spans: list[tuple[str, int, int]], start: int, end: int) -> tuple[int, int]:
    idx = [i for i, (_, s, e) in enumerate(spans) if s >= start and e <= end]
    if not idx:
        return (0, 0)
    return (idx[0], idx[-1] + 1)


def _window(tokens: Sequence[str], span: tuple[int, int], size: int = _CONTEXT_WINDOW) -> list[str]:
    return list(tokens[max(0, span[0] - size) : span[0]]) + list(tokens[span[1] : span[1] + size])


def _names_in(window: Iterable[str], ref: Reference) -> bool:
    toks = set(window)
    return any(all(p in toks for p in tokenize(s)) for s in ref.surnames if tokenize(s))


def _group_sites(ids: list[int], refs: dict[int, Reference], where: str) -> list[tuple[int, bool, bool]]:
    resolved = []
    for i in ids:
        if i in refs:
            resolved.append(i)
        else:
            log.warning("%s: citation id %d has no bibliography entry; skipped", where, i)
    alone = len(resolved) == 1
    return [(rid, alone, (not alone) and pos == 0) for pos, rid in enumerate(resolved)]


def _resolve_textual(name: str, year: str, refs: Sequence[Reference], where: str) -> int | None:
    surname = name.lower()
    y = int(year[:4])
    hits = [r.ref_index for r in refs if r.surnames and r.surnames[0] == surname and r.year == y]
    if len(hits) == 1:
        return hits[0]
    if len(hits) > 1:
        log.warning("%s: citation %s (%s) matches references %s; skipped as ambiguous", where, name, year, hits)
    return None


def _detect_in_sentence(
    text: str,
    sentence_index: int,
    section: str,
    references: Sequence[Reference],
    refs_by_id: dict[int, Reference],
    style: str,
) -> list[MentionSite]:
    spans = tokenize_spans(text)
    tokens = [t for t, _, _ in spans]
    where = f"sentence {sentence_index}"
    found: list[tuple[int, tuple[int, int], bool, bool, bool | None]] = []
    if style == "numeric":
        for m in _NUMERIC_GROUP_RE.finditer(text):
            span = _token_span(spans, m.start(), m.end())
            for rid, alone, first in _group_sites(_expand_ids(m.group(1)), refs_by_id, where):
                found.append((rid, span, alone, first, None))
    else:
        taken: list[tuple[int, int]] = []
        for m in _NARRATIVE_RE.finditer(text):
            years = re.split(r"\s*,\s*", m.group("years"))
            ids = [r for y in years if (r := _resolve_textual(m.group("name"), y, references, where)) is not None]
            if not ids:
                continue
            taken.append((m.start(), m.end()))
            span = _token_span(spans, m.start(), m.end())
            for pos, rid in enumerate(ids):
                alone = len(ids) == 1
                found.append((rid, span, alone, (not alone) and pos == 0, True))
        for m in _PAREN_RE.finditer(text):
            if any(s <= m.start() < e or s < m.end() <= e for s, e in taken):
                continue
            ids = []
            for item in m.group(1).split(";"):
                im = _PAREN_ITEM_RE.match(item)
                if not im:
                    continue
                for y in re.split(r"\s*,\s*", im.group("years")):
                    rid = _resolve_textual(im.group("name"), y, references, where)
                    if rid is not None:
                        ids.append(rid)
            span = _token_span(spans, m.start(), m.end())
            alone = len(ids) == 1
            for pos, rid in enumerate(ids):
                found.append((rid, span, alone, (not alone) and pos == 0, None))
    sites = []
    for rid, span, alone, first, named in found:
        if named is None:
            named = _names_in(_window(tokens, span), refs_by_id[rid])
        sites.append(MentionSite(rid, sentence_index, span, section, alone, first, named))
    return sites


def detect_mentions(
    raw_body: str | Sequence[tuple[str, str]],
    references: Sequence[Reference],
    style: str = "numeric",
) -> list[MentionSite]:
    """Find in-text citations of ``references``.

    ``raw_body`` is either plain text (split into sentences, all labelled
    ``main``) or a sequence of ``(section_label, sentence_text)`` pairs in
    document order.  Sentences labelled ``reference`` are skipped and do not
    consume a sentence index.  Numeric ranges such as ``[7-10]`` expand to
    one site per id; ids without a bibliography entry are logged and skipped.
    Textual citations resolve on first-author surname plus exact year.
    """
    if not references:
        raise ValueError("detect_mentions needs a non-empty bibliography")
    if style not in CITATION_STYLES:
        raise ValueError(f"unknown citation style {style!r}; expected one of {CITATION_STYLES}")
    if isinstance(raw_body, str):
        body = [("main", s) for s in split_sentences(raw_body)]
    else:
        body = list(raw_body)
    refs_by_id = {r.ref_index: r for r in references}
    sites: list[MentionSite] = []
    index = 0
    for label, text in body:
        if label == "reference":
            continue
        sites.extend(_detect_in_sentence(text, index, label, references, refs_by_id, style))
        index += 1
    return sites


# --- record parsing ---------------------------------------------------------

def _require(rec: dict, key: str, pid: str | None, kind: type | tuple[type, ...]):
    if key not in rec:
        raise CorpusError(pid, key, "missing")
    val = rec[key]
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise CorpusError(pid, key, f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
    return val


def _parse_reference(rec: Any, pid: str) -> Reference:
    if not isinstance(rec, dict):
        raise CorpusError(pid, "references", "entries must be objects")
    idx = _require(rec, "ref_index", pid, int)
    where = f"references[{idx}]"
    year = rec.get("year")
    if year is not None and (not isinstance(year, int) or isinstance(year, bool)):
        raise CorpusError(pid, f"{where}.year", "expected integer or null")
    authors = rec.get("authors", [])
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        raise CorpusError(pid, f"{where}.authors", "expected list of strings")
    count = rec.get("global_cite_count", 0)
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise CorpusError(pid, f"{where}.global_cite_count", "expected non-negative integer")
    gold = rec.get("gold_label")
    if gold is not None and not isinstance(gold, bool):
        if gold in (0, 1):
            gold = bool(gold)
        else:
            raise CorpusError(pid, f"{where}.gold_label", "expected boolean or null")
    return Reference(
        ref_index=idx,
        title=str(rec.get("title", "")),
        year=year,
        authors=tuple(authors),
        global_cite_count=count,
        self_cite=bool(rec.get("self_cite", False)),
        gold_label=gold,
        cited_id=None if rec.get("cited_id") is None else str(rec["cited_id"]),
    )


def _parse_mention(rec: Any, pid: str, n: int) -> MentionSite:
    if not isinstance(rec, dict):
        raise CorpusError(pid, f"mentions[{n}]", "entries must be objects")
    span = rec.get("token_span")
    if (
        not isinstance(span, list)
        or len(span) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in span)
    ):
        raise CorpusError(pid, f"mentions[{n}].token_span", "expected [start, end]")
    return MentionSite(
        ref_index=_require(rec, "ref_index", pid, int),
        sentence_index=_require(rec, "sentence_index", pid, int),
        token_span=(span[0], span[1]),
        section=_require(rec, "section", pid, str),
        appears_alone=bool(rec.get("appears_alone", False)),
        appears_first_in_group=bool(rec.get("appears_first_in_group", False)),
        author_name_in_context=bool(rec.get("author_name_in_context", False)),
    )


def _sentence_text(s: Any, pid: str, where: str) -> str:
    if isinstance(s, str):
        return s
    if isinstance(s, list) and all(isinstance(t, str) for t in s):
        return " ".join(s)
    raise CorpusError(pid, where, "sentences must be strings or token arrays")


def parse_record(rec: Any, standardize: bool = False) -> AnnotatedPaper:
    """Validate one decoded JSON record and build an :class:`AnnotatedPaper`.

    With ``standardize`` unknown section labels are mapped through
    :func:`standardize_sections`; otherwise they are rejected.
    """
    if not isinstance(rec, dict):
        raise CorpusError(None, "<record>", "expected a JSON object")
    pid = rec.get("paper_id")
    if not isinstance(pid, str) or not pid:
        raise CorpusError(None, "paper_id", "missing or not a non-empty string")
    version = rec.get("version")
    if version is None:
        raise CorpusError(pid, "version", "missing")
    if version != FORMAT_VERSION:
        raise CorpusError(pid, "version", f"unsupported version {version!r} (expected {FORMAT_VERSION})")
    year = _require(rec, "year", pid, int)
    style = rec.get("citation_style", "numeric")
    if style not in CITATION_STYLES:
        raise CorpusError(pid, "citation_style", f"expected one of {CITATION_STYLES}")

    raw_sections = _require(rec, "sections", pid, list)
    labelled: list[tuple[str, list[str]]] = []
    for n, sec in enumerate(raw_sections):
        if not isinstance(sec, dict):
            raise CorpusError(pid, f"sections[{n}]", "expected an object")
        label = sec.get("label")
        if not isinstance(label, str):
            raise CorpusError(pid, f"sections[{n}].label", "missing")
        if label not in SECTION_LABELS:
            if not standardize:
                raise CorpusError(
                    pid, f"sections[{n}].label",
                    f"unknown section label {label!r}; allowed labels: {', '.join(SECTION_LABELS)}",
                )
            label = standardize_sections(label)
        if "sentences" in sec:
            sents = sec["sentences"]
            if not isinstance(sents, list):
                raise CorpusError(pid, f"sections[{n}].sentences", "expected a list")
            texts = [_sentence_text(s, pid, f"sections[{n}].sentences") for s in sents]
        elif "text" in sec:
            if not isinstance(sec["text"], str):
                raise CorpusError(pid, f"sections[{n}].text", "expected a string")
            texts = split_sentences(sec["text"])
        else:
            raise CorpusError(pid, f"sections[{n}]", "needs 'sentences' or 'text'")
        labelled.append((label, texts))

    references = tuple(_parse_reference(r, pid) for r in _require(rec, "references", pid, list))
    seen: set[int] = set()
    for r in references:
        if r.ref_index in seen:
            raise CorpusError(pid, "references", f"duplicate ref_index {r.ref_index}")
        seen.add(r.ref_index)

    sections = tuple(Section(label, tuple(tuple(tokenize(t)) for t in texts)) for label, texts in labelled)
    body = [(label, t) for label, texts in labelled if label != "reference" for t in texts]

    if rec.get("mentions") is not None:
        raw_m = _require(rec, "mentions", pid, list)
        mentions = tuple(_parse_mention(m, pid, n) for n, m in enumerate(raw_m))
    elif references:
        mentions = tuple(detect_mentions(body, references, style))
    else:
        mentions = ()
    paper = AnnotatedPaper(pid, year, sections, references, mentions, style)
    _validate_mentions(paper)
    return paper


def _validate_mentions(paper: AnnotatedPaper) -> None:
    body = paper.body_sentences()
    ids = {r.ref_index for r in paper.references}
    kept = []
    for n, m in enumerate(paper.mentions):
        where = f"mentions[{n}]"
        if m.section == "reference":
            log.warning("paper %s: %s lies in the reference section; discarded", paper.paper_id, where)
            continue
        if m.ref_index not in ids:
            raise CorpusError(paper.paper_id, f"{where}.ref_index", f"no reference with index {m.ref_index}")
        if not 0 <= m.sentence_index < len(body):
            raise CorpusError(paper.paper_id, f"{where}.sentence_index", f"out of range 0..{len(body) - 1}")
        label, tokens = body[m.sentence_index]
        if m.section != label:
            raise CorpusError(paper.paper_id, f"{where}.section", f"{m.section!r} but sentence is in {label!r}")
        a, b = m.token_span
        if not 0 <= a <= b <= len(tokens):
            raise CorpusError(paper.paper_id, f"{where}.token_span", f"({a}, {b}) outside sentence of {len(tokens)} tokens")
        if m.appears_alone and m.appears_first_in_group:
            raise CorpusError(paper.paper_id, f"{where}.appears_first_in_group", "set together with appears_alone")
        kept.append(m)
    if len(kept) != len(paper.mentions):
        object.__setattr__(paper, "mentions", tuple(kept))


def iter_corpus(path: str | Path, standardize: bool = False) -> Iterator[AnnotatedPaper]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(None, f"line {lineno}", f"invalid JSON: {exc.msg}") from exc
            yield parse_record(rec, standardize=standardize)


def load_corpus(path: str | Path, standardize: bool = False) -> list[AnnotatedPaper]:
    papers = list(iter_corpus(path, standardize=standardize))
    seen: set[str] = set()
    for p in papers:
        if p.paper_id in seen:
            raise CorpusError(p.paper_id, "paper_id", "duplicate paper id in corpus")
        seen.add(p.paper_id)
    return papers


def paper_to_record(paper: AnnotatedPaper) -> dict:
    """Serialize with token-array sentences and explicit mentions."""
    return {
        "version": FORMAT_VERSION,
        "paper_id": paper.paper_id,
        "year": paper.year,
        "citation_style": paper.citation_style,
        "sections": [{"label": s.label, "sentences": [list(t) for t in s.sentences]} for s in paper.sections],
        "references": [
            {**asdict(r), "authors": list(r.authors)} for r in paper.references
        ],
        "mentions": [{**asdict(m), "token_span": list(m.token_span)} for m in paper.mentions],
    }


def write_corpus(papers: Iterable[AnnotatedPaper], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in papers:
            fh.write(json.dumps(paper_to_record(p), ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class CorpusStats:
    papers: int
    pairs: int
    mentions: int
    positives: int
    labelled: int


def corpus_stats(papers: Sequence[AnnotatedPaper]) -> CorpusStats:
    refs = [r for p in papers for r in p.references]
    return CorpusStats(
        papers=len(papers),
        pairs=len(refs),
        mentions=sum(len(p.mentions) for p in papers),
        positives=sum(1 for r in refs if r.gold_label),
        labelled=sum(1 for r in refs if r.gold_label is not None),
    )
