"""Citation networks weighted by in-paper mention counts.

The influence-primed citation count of a paper sums ``c**2`` over its
citers, where ``c`` is how often the citer mentions it in body text; the
hip-index is the h-index computed from those counts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

COUNTINGS = ("conventional", "primed")


class DegenerateCorrelation(ValueError):
    """Rank correlation undefined: too few items or a constant ranking."""


@dataclass(frozen=True)
class FilterSpec:
    """Keep edge (x, y) when c(x, y) >= min_count and y ranks below
    ``max_rank`` among x's references (0-based, by descending count)."""

    min_count: int = 1
    max_rank: float = math.inf

    def __post_init__(self):
        if self.min_count < 1 or self.max_rank < 1:
            raise ValueError("T1 and T2 must both be >= 1")


@dataclass(frozen=True)
class CitationNetwork:
    papers: frozenset[str]
    edges: Mapping[tuple[str, str], int]
    authors: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        edges: Iterable[tuple[str, str, int]],
        authors: Iterable[tuple[str, str]] = (),
        papers: Iterable[str] | None = None,
    ) -> "CitationNetwork":
        """Assemble a closed network.

        With an explicit ``papers`` set, edges touching anything outside it
        are dropped.  Self-citations and zero counts are dropped; repeated
        (citing, cited) pairs are summed.
        """
        edges = list(edges)
        authors = list(authors)
        closed = papers is not None
        universe = set(papers) if closed else set()
        if not closed:
            for a, b, _ in edges:
                universe.update((a, b))
            universe.update(p for _, p in authors)
        agg: dict[tuple[str, str], int] = {}
        dropped = 0
        for a, b, c in edges:
            c = int(c)
            if c < 0:
                raise ValueError(f"negative mention count on edge {a} -> {b}")
            if a == b or c == 0:
                continue
            if a not in universe or b not in universe:
                dropped += 1
                continue
            agg[(a, b)] = agg.get((a, b), 0) + c
        if dropped:
            log.info("dropped %d edges leaving the closed paper set", dropped)
        own: dict[str, set[str]] = {}
        for author, paper in authors:
            if paper in universe:
                own.setdefault(author, set()).add(paper)
        return cls(frozenset(universe), agg, {a: frozenset(p) for a, p in own.items()})

    def __post_init__(self):
        for (a, b), c in self.edges.items():
            if a == b:
                raise ValueError(f"self-edge on {a}")
            if c < 1:
                raise ValueError(f"edge {a} -> {b} has count {c}; absent edges must be omitted")
        incoming: dict[str, list[int]] = {}
        outgoing: dict[str, list[tuple[str, int]]] = {}
        for (a, b), c in self.edges.items():
            incoming.setdefault(b, []).append(c)
            outgoing.setdefault(a, []).append((b, c))
        object.__setattr__(self, "_incoming", incoming)
        object.__setattr__(self, "_outgoing", outgoing)

    def mention_count(self, citing: str, cited: str) -> int:
        return self.edges.get((citing, cited), 0)

    def incoming_counts(self, paper: str) -> list[int]:
        if paper not in self.papers:
            raise KeyError(f"unknown paper {paper!r}")
        return self._incoming.get(paper, [])

    def references_of(self, paper: str) -> list[tuple[str, int]]:
        return list(self._outgoing.get(paper, []))

    def oeuvre(self, author: str) -> frozenset[str]:
        if author not in self.authors:
            raise KeyError(f"unknown author {author!r}")
        return self.authors[author]


def conventional_count(net: CitationNetwork, paper: str) -> int:
    """Number of papers citing ``paper``, regardless of mention counts."""
    return len(net.incoming_counts(paper))


def cip(net: CitationNetwork, paper: str, exponent: float = 2) -> float:
    """Influence-primed citation count: sum of c**exponent over citers."""
    total = sum(c**exponent for c in net.incoming_counts(paper))
    return int(total) if float(total).is_integer() else total


def h_from_counts(counts: Iterable[float]) -> int:
    """Largest h with at least h values >= h."""
    ordered = sorted(counts, reverse=True)
    h = 0
    for i, c in enumerate(ordered, 1):
        if c >= i:
            h = i
        else:
            break
    return h


def paper_score(net: CitationNetwork, paper: str, counting: str = "conventional", exponent: float = 2) -> float:
    if counting == "conventional":
        return conventional_count(net, paper)
    if counting == "primed":
        return cip(net, paper, exponent)
    raise ValueError(f"counting must be one of {COUNTINGS}")


def h_index(net: CitationNetwork, author: str, counting: str = "conventional", exponent: float = 2) -> int:
    """h-index of ``author``; ``counting="primed"`` gives the hip-index."""
    return h_from_counts(paper_score(net, p, counting, exponent) for p in net.oeuvre(author))


def hip_index(net: CitationNetwork, author: str, exponent: float = 2) -> int:
    return h_index(net, author, "primed", exponent)


def filter_edges(net: CitationNetwork, spec: FilterSpec) -> CitationNetwork:
    """Drop edges below ``spec.min_count`` or ranked at/after ``spec.max_rank``.

    Ranks order each citing paper's references by descending count; ties
    keep the network's edge insertion order.
    """
    kept: dict[tuple[str, str], int] = {}
    for citing in sorted({a for a, _ in net.edges}):
        refs = net.references_of(citing)
        ranked = sorted(range(len(refs)), key=lambda i: -refs[i][1])
        for rank, i in enumerate(ranked):
            cited, c = refs[i]
            if c >= spec.min_count and rank < spec.max_rank:
                kept[(citing, cited)] = c
    ordered = {k: kept[k] for k in net.edges if k in kept}
    return CitationNetwork(net.papers, ordered, net.authors)


# --- rank statistics --------------------------------------------------------

def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties receiving the mean of the ranks they span."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    if len(xs) != len(ys):
        raise ValueError("spearman needs equal-length inputs")
    if len(xs) < 2:
        raise DegenerateCorrelation("spearman needs at least two items")
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0:
        raise DegenerateCorrelation("constant ranking")
    return max(-1.0, min(1.0, float(dx @ dy) / denom))


@dataclass(frozen=True)
class GroupCorrelation:
    first: int  # 1-based rank of the group's first entity
    last: int
    rho: float  # nan when the group is degenerate

    @property
    def label(self) -> str:
        return f"{self.first}-{self.last}"


def entity_scores(net: CitationNetwork, entity: str, exponent: float = 2) -> dict[str, tuple[float, float]]:
    """(conventional, primed) score per paper or per author."""
    if entity == "papers":
        return {p: (conventional_count(net, p), cip(net, p, exponent)) for p in net.papers}
    if entity == "authors":
        return {
            a: (h_index(net, a, "conventional"), h_index(net, a, "primed", exponent))
            for a in net.authors
        }
    raise ValueError("entity must be 'papers' or 'authors'")


def grouped_rank_correlation(
    net: CitationNetwork,
    entity: str,
    group_size: int,
    exponent: float = 2,
    max_groups: int | None = None,
) -> list[GroupCorrelation]:
    """Rank entities by the conventional metric (ties by id), cut the list
    into consecutive groups and correlate conventional against primed
    values within each group.  A trailing partial group is kept if it has
    at least two members."""
    if group_size < 2:
        raise ValueError("group_size must be >= 2")
    scores = entity_scores(net, entity, exponent)
    if len(scores) < group_size:
        raise ValueError(f"{len(scores)} {entity} is fewer than one group of {group_size}")
    ranked = sorted(scores, key=lambda k: (-scores[k][0], k))
    out = []
    for start in range(0, len(ranked), group_size):
        chunk = ranked[start : start + group_size]
        if len(chunk) < 2 or (max_groups is not None and len(out) >= max_groups):
            break
        try:
            rho = spearman([scores[k][0] for k in chunk], [scores[k][1] for k in chunk])
        except DegenerateCorrelation:
            rho = float("nan")
        out.append(GroupCorrelation(start + 1, start + len(chunk), rho))
    return out


# --- leaderboards -----------------------------------------------------------

def leaderboard(scores: Mapping[str, float]) -> list[str]:
    """Ids sorted by score descending, ties by id ascending."""
    return sorted(scores, key=lambda k: (-scores[k], k))


def author_leaderboard(net: CitationNetwork, counting: str = "conventional", exponent: float = 2) -> tuple[list[str], dict[str, int]]:
    scores = {a: h_index(net, a, counting, exponent) for a in net.authors}
    return leaderboard(scores), scores


def precision_at_n(ranked: Sequence[str], honorees: Iterable[str], n: int) -> float:
    if n < 1:
        raise ValueError("N must be >= 1")
    if n > len(ranked):
        raise ValueError(f"N={n} exceeds ranked list length {len(ranked)}")
    hon = set(honorees)
    return sum(1 for a in ranked[:n] if a in hon) / n


def precision_at_n_interval(scores: Mapping[str, float], honorees: Iterable[str], n: int) -> tuple[float, float]:
    """Worst and best precision@N over all orderings of tied scores."""
    if n < 1 or n > len(scores):
        raise ValueError("N out of range")
    hon = set(honorees)
    ranked = leaderboard(scores)
    boundary = scores[ranked[n - 1]]
    above = [a for a in ranked if scores[a] > boundary]
    tied = [a for a in ranked if scores[a] == boundary]
    slots = n - len(above)
    base = sum(1 for a in above if a in hon)
    tied_hon = sum(1 for a in tied if a in hon)
    tied_other = len(tied) - tied_hon
    best = base + min(slots, tied_hon)
    worst = base + max(0, slots - tied_other)
    return worst / n, best / n


def average_precision(ranked: Sequence[str], honorees: Iterable[str], n_c: int, n_r: int) -> float:
    """sum_{k<=n_c} P(k) * rel(k) / n_r."""
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    if n_c < 1 or n_c > len(ranked):
        raise ValueError(f"cutoff n_c={n_c} outside 1..{len(ranked)}")
    hon = set(honorees)
    hits = 0
    total = 0.0
    for k, a in enumerate(ranked[:n_c], 1):
        if a in hon:
            hits += 1
            total += hits / k
    return total / n_r


def network_from_corpus(papers, exclude_numeric: bool = False, closed: bool = True) -> CitationNetwork:
    """Edges from parsed papers to references that carry a ``cited_id``.

    The edge weight is the reference's number of body mentions; references
    never mentioned in the body yield no edge.  With ``closed`` only papers
    of the corpus are nodes.
    """
    edges = []
    for p in papers:
        if exclude_numeric and p.citation_style == "numeric":
            continue
        for r in p.references:
            if r.cited_id is not None:
                edges.append((p.paper_id, r.cited_id, len(p.mentions_of(r.ref_index))))
    universe = [p.paper_id for p in papers] if closed else None
    return CitationNetwork.build(edges, (), universe)


# --- files --------------------------------------------------------------------

def _rows(path: str | Path, ncols: int) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != ncols:
                raise ValueError(f"{path}:{lineno}: expected {ncols} tab-separated columns")
            yield lineno, cols


def read_edges(path: str | Path) -> list[tuple[str, str, int]]:
    out = []
    for lineno, (a, b, c) in _rows(path, 3):
        try:
            out.append((a, b, int(c)))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: mention count must be an integer") from None
    return out


def read_authors(path: str | Path) -> list[tuple[str, str]]:
    return [(a, p) for _, (a, p) in _rows(path, 2)]


def read_ids(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def load_network(
    edges_path: str | Path,
    authors_path: str | Path | None = None,
    papers_path: str | Path | None = None,
) -> CitationNetwork:
    return CitationNetwork.build(
        read_edges(edges_path),
        read_authors(authors_path) if authors_path else (),
        read_ids(papers_path) if papers_path else None,
    )


def write_network(net: CitationNetwork, edges_path: str | Path, authors_path: str | Path | None = None) -> None:
    with open(edges_path, "w", encoding="utf-8") as fh:
        for (a, b), c in net.edges.items():
            fh.write(f"{a}\t{b}\t{c}\n")
    if authors_path is not None:
        with open(authors_path, "w", encoding="utf-8") as fh:
            for author in sorted(net.authors):
                for p in sorted(net.authors[author]):
                    fh.write(f"{author}\t{p}\n")
