"""Logistic-regression influence classifier and its evaluation protocol."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .features import FeatureTable

log = logging.getLogger(__name__)

MODEL_FORMAT = "citeinfluence-logistic"
MODEL_VERSION = 1
WEIGHT_CAP = 50.0
GRAD_TOL = 1e-8
MAX_ITER = 10_000
DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class TrainConfig:
    features: tuple[str, ...] = ("countsInPaper_whole",)
    folds: int = 10
    seed: int = 0
    downsample: bool = True
    top_k: int | str = "auto"

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.top_k != "auto" and (not isinstance(self.top_k, int) or self.top_k < 1):
            raise ValueError("top_k must be a positive integer or 'auto'")
        object.__setattr__(self, "features", tuple(self.features))


@dataclass(frozen=True)
class LogisticModel:
    """P(influential | x) = 1 / (1 + exp(-(w0 + sum_i w_i x_i)))."""

    feature_names: tuple[str, ...]
    weights: np.ndarray  # intercept first
    threshold: float = 0.5
    seed: int = 0
    top_k: int = DEFAULT_TOP_K
    capped: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.feature_names) + 1,):
            raise ValueError("need one weight per feature plus an intercept")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def intercept(self) -> float:
        return float(self.weights[0])

    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.feature_names, map(float, self.weights[1:])))

    def probabilities(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, len(self.feature_names))
        return sigmoid(self.weights[0] + X @ self.weights[1:])

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Threshold rule: influential iff probability exceeds ``threshold``."""
        return self.probabilities(X) > self.threshold


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _design(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.hstack([np.ones((X.shape[0], 1)), X])


def log_likelihood(weights: np.ndarray, X: np.ndarray, t: np.ndarray) -> float:
    """sum_i t_i log p_i + (1 - t_i) log(1 - p_i), with intercept in ``weights[0]``."""
    z = _design(X) @ np.asarray(weights, dtype=float)
    t = np.asarray(t, dtype=float)
    # log p = -log(1+e^-z), log(1-p) = -log(1+e^z)
    return float(-(t * np.logaddexp(0.0, -z) + (1 - t) * np.logaddexp(0.0, z)).sum())


def log_likelihood_gradient(weights: np.ndarray, X: np.ndarray, t: np.ndarray) -> np.ndarray:
    A = _design(X)
    p = sigmoid(A @ np.asarray(weights, dtype=float))
    return A.T @ (np.asarray(t, dtype=float) - p)


def fit_logistic(
    X: np.ndarray,
    t: np.ndarray,
    cap: float = WEIGHT_CAP,
    tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, bool]:
    """Maximum-likelihood weights (intercept first) and whether the cap bound.

    Damped Newton ascent with backtracking, projected onto the box
    ``[-cap, cap]``.  Zero-variance columns are held at zero weight since
    the intercept already absorbs them.
    """
    A = _design(X)
    t = np.asarray(t, dtype=float)
    d = A.shape[1]
    active = np.ones(d, dtype=bool)
    active[1:] = np.ptp(A[:, 1:], axis=0) > 0
    w = np.zeros(d)

    def ll(v):
        z = A @ v
        return float(-(t * np.logaddexp(0.0, -z) + (1 - t) * np.logaddexp(0.0, z)).sum())

    cur = ll(w)
    for _ in range(max_iter):
        p = sigmoid(A @ w)
        g = A.T @ (t - p)
        g[~active] = 0.0
        at_cap = ((w >= cap) & (g > 0)) | ((w <= -cap) & (g < 0))
        free = active & ~at_cap
        if np.linalg.norm(g[free]) <= tol:
            break
        H = (A[:, free] * (p * (1 - p))[:, None]).T @ A[:, free]
        H += 1e-12 * np.eye(H.shape[0])
        try:
            step_f = np.linalg.solve(H, g[free])
        except np.linalg.LinAlgError:
            step_f = np.linalg.lstsq(H, g[free], rcond=None)[0]
        if not np.all(np.isfinite(step_f)) or step_f @ g[free] <= 0:
            step_f = g[free]
        direction = np.zeros(d)
        direction[free] = step_f
        alpha = 1.0
        accepted = None
        while alpha > 1e-14:
            cand = np.clip(w + alpha * direction, -cap, cap)
            val = ll(cand)
            if val >= cur + 1e-4 * float(g @ (cand - w)):
                accepted = cand, val
                break
            alpha *= 0.5
        if accepted is None:
            break
        cand, val = accepted
        moved = np.max(np.abs(cand - w))
        w, cur = cand, val
        if moved < 1e-15:
            break
    capped = bool(np.any(np.abs(w) >= cap))
    return w, capped


def _rng_for(seed: int, *salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, *salt])


def downsample(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row indexes keeping all positives and an equal number of negatives
    drawn without replacement."""
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if len(neg) > len(pos):
        neg = np.sort(rng.choice(neg, size=len(pos), replace=False))
    return np.sort(np.concatenate([pos, neg]))


def _auto_top_k(table: FeatureTable) -> int:
    groups = table.groups()
    if not groups:
        return DEFAULT_TOP_K
    mean_pos = np.mean([int((table.labels[ix] == 1).sum()) for ix in groups.values()])
    k = int(math.floor(mean_pos + 0.5))
    return k if k >= 1 else DEFAULT_TOP_K


def train(table: FeatureTable, config: TrainConfig, salt: int = 0) -> LogisticModel:
    """Fit the classifier on the labelled rows of ``table``.

    Negatives are down-sampled to the number of positives when
    ``config.downsample`` is set.  The threshold is chosen so the fraction
    of training pairs predicted influential matches the fraction that is.
    """
    mask = table.labels >= 0
    labelled = table.subset(np.flatnonzero(mask))
    y = labelled.labels
    X = labelled.matrix(config.features)
    rows = np.arange(len(y))
    if config.downsample:
        rows = downsample(y, _rng_for(config.seed, salt))
    if not (y[rows] == 1).any() or not (y[rows] == 0).any():
        raise ValueError("training data must contain both influential and non-influential pairs")
    w, capped = fit_logistic(X[rows], y[rows])
    if capped:
        log.warning("training data is (quasi-)separable; weights capped at +/-%g", WEIGHT_CAP)
    probs = sigmoid(w[0] + X @ w[1:])
    threshold = _matching_threshold(probs, float(y.mean()))
    top_k = _auto_top_k(labelled) if config.top_k == "auto" else int(config.top_k)
    return LogisticModel(config.features, w, threshold, config.seed, top_k, capped)


def _matching_threshold(probs: np.ndarray, rate: float) -> float:
    """Largest omega with the fraction of ``probs > omega`` closest to ``rate``."""
    n = len(probs)
    n_pos = int(round(rate * n))
    order = np.sort(probs)[::-1]
    if n_pos <= 0:
        omega = float(order[0])
    elif n_pos >= n:
        omega = float(np.nextafter(order[-1], -np.inf))
    else:
        omega = float(order[n_pos])
    return float(min(max(omega, np.nextafter(0.0, 1.0)), np.nextafter(1.0, 0.0)))


def predict_paper(model: LogisticModel, X: np.ndarray, ref_indexes: Sequence[int], k: int | None = None) -> set[int]:
    """The ``k`` references of one paper with the highest probability.

    Ties go to the lower ``ref_index``.  Papers with fewer than ``k``
    references have all of them marked influential.
    """
    k = model.top_k if k is None else k
    if k < 1:
        raise ValueError("k must be >= 1")
    probs = model.probabilities(X)
    order = sorted(range(len(ref_indexes)), key=lambda i: (-probs[i], ref_indexes[i]))
    return {ref_indexes[i] for i in order[:k]}


def f_measure(predicted: Iterable, gold: Iterable) -> tuple[float, float, float]:
    """Precision, recall and F of ``predicted`` against ``gold``; 0/0 is 0."""
    predicted, gold = set(predicted), set(gold)
    tp = len(predicted & gold)
    p = tp / len(predicted) if predicted else 0.0
    r = tp / len(gold) if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


@dataclass(frozen=True)
class PaperScore:
    paper_id: str
    fold: int
    precision: float
    recall: float
    f: float


@dataclass
class EvalReport:
    """Per-paper scores and their macro averages.

    The macro F is the mean of per-paper F values, so it need not lie
    between the macro precision and macro recall.
    """

    name: str
    features: tuple[str, ...]
    per_paper: list[PaperScore]
    folds: dict[str, int]
    seed: int
    models: list[LogisticModel] = field(default_factory=list)

    @property
    def macro_p(self) -> float:
        return float(np.mean([s.precision for s in self.per_paper])) if self.per_paper else 0.0

    @property
    def macro_r(self) -> float:
        return float(np.mean([s.recall for s in self.per_paper])) if self.per_paper else 0.0

    @property
    def macro_f(self) -> float:
        return float(np.mean([s.f for s in self.per_paper])) if self.per_paper else 0.0


def assign_folds(paper_ids: Sequence[str], folds: int, seed: int) -> dict[str, int]:
    """Shuffle papers and deal them round-robin into ``folds`` groups."""
    if len(paper_ids) < folds:
        raise ValueError(f"need at least {folds} papers for {folds}-fold cross-validation, got {len(paper_ids)}")
    order = _rng_for(seed, 7919).permutation(len(paper_ids))
    return {paper_ids[i]: pos % folds for pos, i in enumerate(order)}


def _gold(table: FeatureTable, ix: np.ndarray) -> set[int]:
    return {table.keys[i].ref_index for i in ix if table.labels[i] == 1}


def cross_validate(table: FeatureTable, config: TrainConfig, name: str | None = None) -> EvalReport:
    """K-fold cross-validation with folds over papers.

    Each fold trains on the other papers (down-sampled inside the fold) and
    marks the top-k references of every held-out paper as influential.
    """
    labelled = table.subset(np.flatnonzero(table.labels >= 0))
    groups = labelled.groups()
    folds = assign_folds(list(groups), config.folds, config.seed)
    scores: list[PaperScore] = []
    models = []
    for fold in range(config.folds):
        test_papers = [p for p in groups if folds[p] == fold]
        train_rows = np.concatenate([groups[p] for p in groups if folds[p] != fold])
        model = train(labelled.subset(train_rows), config, salt=fold + 1)
        models.append(model)
        for pid in test_papers:
            ix = groups[pid]
            refs = [labelled.keys[i].ref_index for i in ix]
            pred = predict_paper(model, labelled.matrix(config.features)[ix], refs)
            p, r, f = f_measure(pred, _gold(labelled, ix))
            scores.append(PaperScore(pid, fold, p, r, f))
    scores.sort(key=lambda s: (s.fold, s.paper_id))
    return EvalReport(name or "+".join(config.features), config.features, scores, folds, config.seed, models)


def random_baseline(table: FeatureTable, config: TrainConfig) -> EvalReport:
    """Label each held-out pair influential with probability equal to the
    training folds' positive rate, using the same paper folds."""
    labelled = table.subset(np.flatnonzero(table.labels >= 0))
    groups = labelled.groups()
    folds = assign_folds(list(groups), config.folds, config.seed)
    scores = []
    for fold in range(config.folds):
        train_rows = np.concatenate([groups[p] for p in groups if folds[p] != fold])
        rate = float((labelled.labels[train_rows] == 1).mean())
        rng = _rng_for(config.seed, 104729, fold)
        for pid in [p for p in groups if folds[p] == fold]:
            ix = groups[pid]
            draw = rng.random(len(ix)) < rate
            pred = {labelled.keys[i].ref_index for i, d in zip(ix, draw) if d}
            p, r, f = f_measure(pred, _gold(labelled, ix))
            scores.append(PaperScore(pid, fold, p, r, f))
    scores.sort(key=lambda s: (s.fold, s.paper_id))
    return EvalReport("random", (), scores, folds, config.seed)


@dataclass(frozen=True)
class SelectionStep:
    feature: str
    macro_f: float
    macro_p: float
    macro_r: float


def greedy_feature_selection(
    table: FeatureTable,
    candidates: Sequence[str],
    config: TrainConfig,
    max_features: int | None = None,
) -> list[SelectionStep]:
    """Forward selection: add the candidate that most improves CV macro-F;
    stop when none improves it."""
    if not candidates:
        raise ValueError("need at least one candidate feature")
    chosen: list[str] = []
    path: list[SelectionStep] = []
    best_f = -1.0
    remaining = list(candidates)
    while remaining and (max_features is None or len(chosen) < max_features):
        trial = []
        for feat in remaining:
            cfg = TrainConfig(tuple(chosen + [feat]), config.folds, config.seed, config.downsample, config.top_k)
            rep = cross_validate(table, cfg)
            trial.append((rep.macro_f, -remaining.index(feat), feat, rep))
        f, _, feat, rep = max(trial)
        if f <= best_f:
            break
        best_f = f
        chosen.append(feat)
        remaining.remove(feat)
        path.append(SelectionStep(feat, rep.macro_f, rep.macro_p, rep.macro_r))
    return path


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    fraction_positive: float
    macro_f: float
    macro_p: float
    macro_r: float


def _macro_at(values: np.ndarray, labels: np.ndarray, groups: dict[str, np.ndarray], thr: float) -> tuple[float, float, float, float]:
    pred_all = values >= thr
    ps, rs, fs = [], [], []
    for ix in groups.values():
        pred = set(np.flatnonzero(pred_all[ix]).tolist())
        gold = set(np.flatnonzero(labels[ix] == 1).tolist())
        p, r, f = f_measure(pred, gold)
        ps.append(p), rs.append(r), fs.append(f)
    return float(pred_all.mean()), float(np.mean(fs)), float(np.mean(ps)), float(np.mean(rs))


def threshold_sweep(table: FeatureTable, feature: str, thresholds: Sequence[float] | None = None) -> list[SweepPoint]:
    """Macro-F when pairs with ``feature >= threshold`` are predicted influential.

    Default thresholds are 0, every distinct feature value, and one value
    above 1 (nothing predicted).
    """
    labelled = table.subset(np.flatnonzero(table.labels >= 0))
    values = labelled.column(feature)
    groups = labelled.groups()
    if thresholds is None:
        thresholds = sorted({0.0, *np.unique(values).tolist(), 1.0 + 1e-9})
    out = []
    for thr in thresholds:
        frac, f, p, r = _macro_at(values, labelled.labels, groups, thr)
        out.append(SweepPoint(float(thr), frac, f, p, r))
    return out


def random_curve(table: FeatureTable, fractions: Sequence[float]) -> list[tuple[float, float]]:
    """Expected macro-F of guessing each pair influential with probability x,
    using the per-paper expectation 2*pi*x/(pi+x) (pi = paper's positive rate)."""
    labelled = table.subset(np.flatnonzero(table.labels >= 0))
    rates = [float((labelled.labels[ix] == 1).mean()) for ix in labelled.groups().values()]
    out = []
    for x in fractions:
        fs = [2 * pi * x / (pi + x) if pi + x > 0 else 0.0 for pi in rates]
        out.append((float(x), float(np.mean(fs)) if fs else 0.0))
    return out


# --- model files --------------------------------------------------------------

def save_model(model: LogisticModel, path: str | Path) -> None:
    lines = [
        f"format\t{MODEL_FORMAT}",
        f"version\t{MODEL_VERSION}",
        f"seed\t{model.seed}",
        f"threshold\t{model.threshold!r}",
        f"top_k\t{model.top_k}",
        f"capped\t{int(model.capped)}",
        f"weight\t(intercept)\t{float(model.weights[0])!r}",
    ]
    lines += [f"weight\t{n}\t{float(w)!r}" for n, w in zip(model.feature_names, model.weights[1:])]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LogisticModel:
    meta: dict[str, str] = {}
    names: list[str] = []
    weights: list[float] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if cols[0] == "weight" and len(cols) == 3:
            if cols[1] != "(intercept)":
                names.append(cols[1])
            elif weights:
                raise ValueError(f"{path}:{lineno}: intercept must come first")
            weights.append(float(cols[2]))
        elif len(cols) == 2:
            meta[cols[0]] = cols[1]
        else:
            raise ValueError(f"{path}:{lineno}: malformed line")
    if meta.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a model file")
    if int(meta.get("version", -1)) != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {meta.get('version')}")
    return LogisticModel(
        tuple(names),
        np.array(weights),
        float(meta["threshold"]),
        int(meta.get("seed", 0)),
        int(meta.get("top_k", DEFAULT_TOP_K)),
        bool(int(meta.get("capped", 0))),
    )
