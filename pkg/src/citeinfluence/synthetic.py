"""Seeded generators for demo corpora and citation networks.

The corpus generator writes records in the on-disk format (raw sentence
text with bracketed numeric citations) so that loading one exercises the
same path as a real corpus.  Influential references get more mentions,
titles closer to the citing paper and slightly more cue words around
their citations; everything else is noise.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .corpus import AnnotatedPaper, parse_record
from .network import CitationNetwork

_FILLER = (
    "the a of to and in we this that is for with on as by our are be from it an results method "
    "data model approach paper show using used these which can also has have been more than such "
    "each between other both when two one first into two using based new"
).split()
_CUES = ("inspired", "pivotal", "influential", "similar", "recent", "proposed", "original", "useful")
_SECTIONS = (
    ("abstract", 4), ("introduction", 8), ("related", 6), ("main", 24),
    ("conclusion", 4), ("future", 1), ("acknowledgment", 1),
)


def _words(rng: np.random.Generator, pool, n: int) -> list[str]:
    return [pool[i] for i in rng.integers(0, len(pool), n)]


def _paper_record(pid: str, rng: np.random.Generator, n_refs: int, n_pos: int) -> dict:
    topic = [f"topic{pid}x{i}" for i in range(12)]
    generic = [f"term{i}" for i in range(400)]
    year = int(rng.integers(1995, 2013))
    labels = np.zeros(n_refs, dtype=bool)
    labels[rng.choice(n_refs, size=min(n_pos, n_refs), replace=False)] = True

    refs = []
    for i in range(n_refs):
        overlap = int(rng.binomial(5, 0.5 if labels[i] else 0.15))
        title_words = _words(rng, topic, overlap) + _words(rng, generic, 6 - overlap)
        age = int(rng.geometric(0.35 if labels[i] else 0.18)) - 1
        refs.append({
            "ref_index": i + 1,
            "title": " ".join(title_words),
            "year": year - age,
            "authors": [f"Author{int(rng.integers(0, 500))} Surname{int(rng.integers(0, 500))}"],
            "global_cite_count": int(rng.lognormal(3.4 if labels[i] else 3.0, 1.2)),
            "self_cite": bool(rng.random() < (0.08 if labels[i] else 0.12)),
            "gold_label": bool(labels[i]),
        })

    # mention plan: influential refs are mentioned more and across more sections
    plan: list[tuple[str, int]] = []
    body_sections = [s for s, _ in _SECTIONS if s not in ("abstract", "acknowledgment", "future")]
    for i in range(n_refs):
        n = 1 + int(rng.poisson(2.2 if labels[i] else 0.4))
        if labels[i] and rng.random() < 0.25:
            n = 1
        homes = body_sections if labels[i] else ["introduction", "related", "main"]
        plan.extend((homes[int(rng.integers(0, len(homes)))], i + 1) for _ in range(n))
    by_section: dict[str, list[int]] = {}
    for sec, rid in plan:
        by_section.setdefault(sec, []).append(rid)

    sections = [{"label": "title", "sentences": [" ".join(_words(rng, topic, 5))]}]
    for label, n_sent in _SECTIONS:
        cites = by_section.get(label, [])
        n_sent = max(n_sent, (len(cites) + 1) // 2)
        slots: dict[int, list[int]] = {}
        for rid in cites:
            slots.setdefault(int(rng.integers(0, n_sent)), []).append(rid)
        sents = []
        for s in range(n_sent):
            words = _words(rng, _FILLER, 8) + _words(rng, topic if label in ("abstract", "main", "conclusion") else generic, 4)
            rng.shuffle(words)
            here = slots.get(s, [])
            # co-cited non-influential refs often share one bracket
            grouped = [r for r in here if not labels[r - 1]] if rng.random() < 0.5 else []
            if len(grouped) < 2:
                grouped = []
            for rid in here:
                if labels[rid - 1] and rng.random() < 0.3:
                    words.insert(int(rng.integers(0, len(words))), _CUES[int(rng.integers(0, len(_CUES)))])
                if rid in grouped:
                    continue
                words.insert(int(rng.integers(0, len(words) + 1)), f"[{rid}]")
            if grouped:
                words.insert(int(rng.integers(0, len(words) + 1)), "[" + ", ".join(map(str, sorted(set(grouped)))) + "]")
            sents.append(" ".join(words).capitalize() + ".")
        sections.append({"label": label, "text": " ".join(sents)})
    sections.append({"label": "reference", "sentences": [r["title"] for r in refs]})
    return {
        "version": 1,
        "paper_id": pid,
        "year": year,
        "citation_style": "numeric",
        "sections": sections,
        "references": refs,
    }


def corpus_records(n_papers: int = 100, seed: int = 0, mean_refs: float = 31.0, mean_pos: float = 3.2) -> Iterator[dict]:
    rng = np.random.default_rng(seed)
    for k in range(n_papers):
        n_refs = max(6, int(rng.poisson(mean_refs)))
        n_pos = int(np.clip(rng.poisson(mean_pos - 1) + 1, 1, 6))
        yield _paper_record(f"P{k:04d}", rng, n_refs, n_pos)


def generate_corpus(n_papers: int = 100, seed: int = 0, **kwargs) -> list[AnnotatedPaper]:
    return [parse_record(r) for r in corpus_records(n_papers, seed, **kwargs)]


def generate_honoree_network(
    seed: int,
    n_authors: int = 200,
    n_honorees: int = 17,
    n_citers: int = 1500,
    honoree_mentions: float = 2.0,
    other_mentions: float = 0.4,
) -> tuple[CitationNetwork, list[str]]:
    """A network where every author's papers draw citers from the same
    distribution, but papers by a designated honoree cohort are mentioned
    more often per citation.  Returns the network and the honoree ids."""
    rng = np.random.default_rng(seed)
    ids = [f"A{int(x):05d}" for x in rng.choice(100_000, size=n_authors, replace=False)]
    honorees = sorted(rng.choice(ids, size=n_honorees, replace=False).tolist())
    hon = set(honorees)
    authorship: list[tuple[str, str]] = []
    papers: list[str] = []
    for a in ids:
        for j in range(1 + int(rng.poisson(15))):
            pid = f"{a}-p{j}"
            papers.append(pid)
            authorship.append((a, pid))
    owner = {p: a for a, p in authorship}
    popularity = rng.pareto(1.5, size=len(papers)) + 1.0
    popularity /= popularity.sum()
    edges = []
    for i in range(n_citers):
        citer = f"C{i:05d}"
        for target in set(rng.choice(len(papers), size=int(rng.integers(5, 25)), p=popularity).tolist()):
            lam = honoree_mentions if owner[papers[target]] in hon else other_mentions
            edges.append((citer, papers[target], 1 + int(rng.poisson(lam))))
    return CitationNetwork.build(edges, authorship), honorees
