"""Delimited-text report tables for the reference-influence and
citation-network analyses."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .features import EMOTION_SPLIT, FEATURE_NAMES, POLARITY_SPLIT, FeatureTable, feature_label_correlations
from .model import TrainConfig, cross_validate, random_baseline, random_curve, threshold_sweep
from .network import (
    CitationNetwork,
    author_leaderboard,
    average_precision,
    grouped_rank_correlation,
    precision_at_n,
    precision_at_n_interval,
)

log = logging.getLogger(__name__)

# models (3)..(6): the greedy chain reported for the gold dataset
ADDITIVE_CHAIN = ("countsInPaper_whole", "sim_titleCore", "countsInPaper_secNum", "aux_selfCite")
SWEEP_FEATURES = ("countsInPaper_whole", "countsInPaper_secNum")


@dataclass
class Table:
    name: str
    header: tuple[str, ...]
    rows: list[tuple]

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [r[j] for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def format_table(table: Table, sep: str = "\t") -> str:
    lines = [sep.join(table.header)]
    lines += [sep.join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def write_table(table: Table, outdir: str | Path, sep: str = "\t") -> Path:
    ext = "csv" if sep == "," else "tsv"
    path = Path(outdir) / f"{table.name}.{ext}"
    path.write_text(format_table(table, sep), encoding="utf-8")
    return path


# --- reference-level tables ---------------------------------------------------

def correlation_tables(table: FeatureTable) -> list[Table]:
    """Feature/label Pearson correlations, the emotion and polarity split,
    and the year-difference buckets."""
    cors = feature_label_correlations(table, splits=True)
    main = [c for c in cors if c.feature in FEATURE_NAMES]
    split_names = set(POLARITY_SPLIT + EMOTION_SPLIT)
    emo = [c for c in cors if c.feature in split_names]
    years = [c for c in cors if c.feature.startswith("aux_yearDiff_")]
    header = ("feature", "pearson_r", "degenerate")
    out = [Table("correlations", header, [(c.feature, c.r, c.degenerate) for c in main])]
    if emo:
        out.append(Table("correlations_emotion", header, [(c.feature, c.r, c.degenerate) for c in emo]))
    if years:
        out.append(Table("correlations_yeardiff", header, [(c.feature, c.r, c.degenerate) for c in years]))
    return out


def sweep_table(table: FeatureTable, features: Sequence[str] = SWEEP_FEATURES) -> Table:
    """Single-feature threshold sweeps with the matching random-guess F."""
    rows = []
    for feat in features:
        points = threshold_sweep(table, feat)
        expected = dict(random_curve(table, [p.fraction_positive for p in points]))
        for p in points:
            rows.append((feat, p.threshold, p.fraction_positive, p.macro_f, p.macro_p, p.macro_r, expected[p.fraction_positive]))
    header = ("feature", "threshold", "fraction_positive", "macro_f", "macro_p", "macro_r", "random_f")
    return Table("threshold_sweep", header, rows)


def additive_table(table: FeatureTable, config: TrainConfig, chain: Sequence[str] = ADDITIVE_CHAIN) -> Table:
    """Random baseline, the citation-count baseline, then models that add
    the features of ``chain`` one at a time."""
    def cfg(features):
        return TrainConfig(tuple(features), config.folds, config.seed, config.downsample, config.top_k)

    rows = []
    rep = random_baseline(table, config)
    rows.append(("(1)", "random", rep.macro_f, rep.macro_p, rep.macro_r))
    rep = cross_validate(table, cfg(["aux_citeCount"]))
    rows.append(("(2)", "aux_citeCount", rep.macro_f, rep.macro_p, rep.macro_r))
    for i in range(len(chain)):
        rep = cross_validate(table, cfg(chain[: i + 1]))
        label = chain[0] if i == 0 else f"({i + 2}) + {chain[i]}"
        rows.append((f"({i + 3})", label, rep.macro_f, rep.macro_p, rep.macro_r))
    return Table("additive_models", ("model", "features", "macro_f", "macro_p", "macro_r"), rows)


# --- network tables -------------------------------------------------------------

def group_table(net: CitationNetwork, entity: str, group_size: int, exponent: float = 2, max_groups: int | None = 10) -> Table:
    groups = grouped_rank_correlation(net, entity, group_size, exponent, max_groups)
    return Table(
        f"{entity.rstrip('s')}_group_correlations",
        ("group", "first", "last", "spearman_rho"),
        [(g.label, g.first, g.last, g.rho) for g in groups],
    )


def honoree_table(net: CitationNetwork, honorees: Sequence[str], max_n: int | None = None, exponent: float = 2) -> Table:
    """precision@N of h- and hip-ranked author lists (ties by id), the
    worst/best precision over tied orderings, and AveP at cutoff N."""
    honorees = list(dict.fromkeys(honorees))
    n_r = len(honorees)
    if n_r == 0:
        raise ValueError("honoree list is empty")
    ranked = {}
    scores = {}
    for counting in ("conventional", "primed"):
        ranked[counting], scores[counting] = author_leaderboard(net, counting, exponent)
    max_n = min(max_n or n_r, len(net.authors))
    rows = []
    for n in range(1, max_n + 1):
        row: list = [str(n)]
        for counting in ("conventional", "primed"):
            lo, hi = precision_at_n_interval(scores[counting], honorees, n)
            row += [precision_at_n(ranked[counting], honorees, n), lo, hi]
        rows.append(tuple(row))
    ap = [average_precision(ranked[c], honorees, max_n, n_r) for c in ("conventional", "primed")]
    rows.append(("AveP", ap[0], math.nan, math.nan, ap[1], math.nan, math.nan))
    header = ("N", "h_precision", "h_worst", "h_best", "hip_precision", "hip_worst", "hip_best")
    return Table("honoree_precision", header, rows)


def build_report(
    outdir: str | Path,
    table: FeatureTable | None = None,
    config: TrainConfig | None = None,
    net: CitationNetwork | None = None,
    honorees: Sequence[str] | None = None,
    group_size: int = 100,
    max_groups: int | None = 10,
    exponent: float = 2,
    sep: str = "\t",
    figures: bool = True,
) -> list[Path]:
    """Write every table that the given inputs support; returns the paths
    in the order written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tables: list[Table] = []
    if table is not None:
        if not (table.labels >= 0).any():
            log.warning("feature table has no gold labels; skipping reference-level tables")
        else:
            tables += correlation_tables(table)
            tables.append(sweep_table(table))
            tables.append(additive_table(table, config or TrainConfig(ADDITIVE_CHAIN)))
    if net is not None:
        for entity in ("papers", "authors"):
            n = len(net.papers) if entity == "papers" else len(net.authors)
            size = min(group_size, n)
            if size < 2:
                log.warning("fewer than two %s; skipping group correlations", entity)
                continue
            tables.append(group_table(net, entity, size, exponent, max_groups))
        if honorees:
            tables.append(honoree_table(net, honorees, exponent=exponent))
    paths = [write_table(t, outdir, sep) for t in tables]
    if figures:
        from . import figures as fig

        paths += fig.render(tables, outdir)
    return paths


def random_expected_f(rate: float) -> float:
    """F of always guessing influential when a fraction ``rate`` is positive."""
    return 2 * rate / (rate + 1) if rate > 0 else 0.0


def summarize(table: Table, top: int = 10) -> str:
    """Short human-readable rendering of a table."""
    widths = [max(len(h), *(len(_fmt(r[j])) for r in table.rows[:top])) if table.rows else len(h) for j, h in enumerate(table.header)]
    lines = [f"# {table.name}", "  ".join(h.ljust(w) for h, w in zip(table.header, widths))]
    for row in table.rows[:top]:
        lines.append("  ".join(_fmt(v).ljust(w) for v, w in zip(row, widths)))
    if len(table.rows) > top:
        lines.append(f"... {len(table.rows) - top} more rows")
    return "\n".join(lines)

