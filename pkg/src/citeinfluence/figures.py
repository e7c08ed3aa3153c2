"""PNG renderings of the report tables (matplotlib, Agg backend)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_PARAMS = {
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "citeinfluence",
}
# no Software/date chunks, so identical inputs give identical bytes
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return path


def _bars(table, path: Path, title: str) -> Path:
    names = table.column("feature")
    values = [0.0 if math.isnan(v) else v for v in table.column("pearson_r")]
    with plt.rc_context(_PARAMS):
        fig, ax = plt.subplots(figsize=(5.0, 0.16 * len(names) + 0.9))
        ys = range(len(names))
        ax.barh(ys, values, color=["#2b8cbe" if v >= 0 else "#d95f02" for v in values])
        ax.set_yticks(list(ys), names)
        ax.invert_yaxis()
        ax.axvline(0, color="k", lw=0.6)
        ax.set_xlabel("Pearson r with gold label")
        ax.set_title(title)
        return _save(fig, path)


def _sweep(table, path: Path) -> Path:
    with plt.rc_context(_PARAMS):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        feats = list(dict.fromkeys(table.column("feature")))
        for feat in feats:
            rows = sorted((r for r in table.rows if r[0] == feat), key=lambda r: r[2])
            ax.plot([r[2] for r in rows], [r[3] for r in rows], marker="o", label=feat)
        rows = sorted((r for r in table.rows if r[0] == feats[0]), key=lambda r: r[2])
        ax.plot([r[2] for r in rows], [r[6] for r in rows], ls="--", color="grey", label="random")
        ax.set_xlabel("fraction predicted influential")
        ax.set_ylabel("macro F")
        ax.legend(frameon=False)
        return _save(fig, path)


def _additive(table, path: Path) -> Path:
    with plt.rc_context(_PARAMS):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        xs = range(len(table.rows))
        ax.bar(xs, table.column("macro_f"), color="#4eb3d3")
        ax.set_xticks(list(xs), table.column("model"))
        ax.set_ylabel("macro F (cross-validated)")
        return _save(fig, path)


def _groups(table, path: Path, entity: str) -> Path:
    with plt.rc_context(_PARAMS):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        xs = range(len(table.rows))
        ax.plot(list(xs), table.column("spearman_rho"), marker="o")
        ax.set_xticks(list(xs), table.column("group"), rotation=45, ha="right")
        ax.set_xlabel(f"{entity} group (conventional rank)")
        ax.set_ylabel("Spearman rho")
        return _save(fig, path)


def _precision(table, path: Path) -> Path:
    rows = [r for r in table.rows if r[0] != "AveP"]
    ns = [int(r[0]) for r in rows]
    with plt.rc_context(_PARAMS):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for off, label, color in ((1, "h-index", "#d95f02"), (4, "hip-index", "#2b8cbe")):
            ax.plot(ns, [r[off] for r in rows], marker="o", color=color, label=label)
            ax.fill_between(ns, [r[off + 1] for r in rows], [r[off + 2] for r in rows], color=color, alpha=0.15, lw=0)
        ax.set_xlabel("N")
        ax.set_ylabel("precision@N")
        ax.legend(frameon=False)
        return _save(fig, path)


def render(tables, outdir: str | Path) -> list[Path]:
    """One PNG per table that has a natural plot."""
    outdir = Path(outdir)
    out = []
    for t in tables:
        path = outdir / f"{t.name}.png"
        if t.name.startswith("correlations"):
            out.append(_bars(t, path, t.name.replace("_", " ")))
        elif t.name == "threshold_sweep":
            out.append(_sweep(t, path))
        elif t.name == "additive_models":
            out.append(_additive(t, path))
        elif t.name.endswith("_group_correlations"):
            out.append(_groups(t, path, t.name.split("_")[0]))
        elif t.name == "honoree_precision":
            out.append(_precision(t, path))
    return out
