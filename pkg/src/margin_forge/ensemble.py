"""Voting ensembles of depth-limited trees: boosting, random forest, bagging.

Every model carries its vote weights normalized to sum 1 (margins are
defined against a convex combination of learners); boosting also keeps
the raw round coefficients.  sign(0) resolves to +1 everywhere.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cart import Tree, TreeParams, fit_tree
from .dataset_io import Dataset

# floor keeps the round coefficient finite when a tree fits its
# training distribution perfectly
EPS_FLOOR = 1e-10

METHODS = ("adaboost", "random-forest", "bagging")


class EnsembleError(RuntimeError):
    """Training could not produce a usable model."""


@dataclass(frozen=True)
class EnsembleModel:
    method: str
    trees: tuple[Tree, ...]
    vote_weights: np.ndarray          # normalized, sums to 1
    raw_alphas: np.ndarray            # boosting round coefficients, pre-normalization
    tree_params: TreeParams
    seed: int | None = None
    break_reason: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if len(self.trees) < 1:
            raise ValueError("need at least one learner")
        w = np.asarray(self.vote_weights, dtype=float)
        a = np.asarray(self.raw_alphas, dtype=float)
        if w.shape != (len(self.trees),) or a.shape != w.shape:
            raise ValueError("weights must align with the learner list")
        if np.any(w < 0) or np.any(w > 1) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("vote_weights must lie in [0,1] and sum to 1")
        w = w.copy()
        a = a.copy()
        w.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "vote_weights", w)
        object.__setattr__(self, "raw_alphas", a)

    @property
    def n_learners(self) -> int:
        return len(self.trees)


@dataclass(frozen=True)
class PredictionMatrix:
    entries: np.ndarray   # (n, T) of +-1
    labels: np.ndarray    # (n,) of +-1

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if h.ndim != 2 or y.shape != (h.shape[0],):
            raise ValueError("entries must be (n, T) with one label per row")
        if not np.all(np.isin(h, (-1.0, 1.0))) or not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("entries and labels must be -1 or +1")
        h = h.copy()
        y = y.copy()
        h.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "entries", h)
        object.__setattr__(self, "labels", y)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_learners(self) -> int:
        return self.entries.shape[1]


def _check_two_classes(data: Dataset):
    counts = data.class_counts()
    if counts[-1] == 0 or counts[+1] == 0:
        raise ValueError("training data must contain both classes")


def _reweight(dist, alpha: float, wrong) -> np.ndarray:
    # y_i h_t(x_i) is +1 on a hit and -1 on a miss
    updated = dist * np.exp(-alpha * np.where(wrong, -1.0, 1.0))
    return updated / updated.sum()


def adaboost(train: Dataset, T: int, params: TreeParams | None = None) -> EnsembleModel:
    """Sequential reweighting: D starts uniform, each round fits a tree on D,
    scores its weighted error, and exponentially upweights the mistakes.

    The loop breaks early on a perfect round (that tree is kept) or a
    round no better than chance (that tree is dropped).
    """
    _check_two_classes(train)
    if T < 1:
        raise ValueError("T must be >= 1")
    params = params or TreeParams()
    x, y = train.features, train.labels
    n = train.n_rows
    dist = np.full(n, 1.0 / n)
    trees: list[Tree] = []
    alphas: list[float] = []
    break_reason = None
    for _ in range(T):
        tree = fit_tree(x, y, weights=dist, params=params)
        wrong = tree.predict(x) != y
        eps = float(dist[wrong].sum())
        if eps >= 0.5:
            break_reason = f"round error {eps:.6f} is no better than chance"
            break
        alpha = 0.5 * math.log((1.0 - eps) / max(eps, EPS_FLOOR))
        trees.append(tree)
        alphas.append(alpha)
        if eps == 0.0:
            break_reason = "a round fit its training distribution perfectly"
            break
        dist = _reweight(dist, alpha, wrong)
    if not trees:
        raise EnsembleError(f"no usable learners: {break_reason}")
    raw = np.array(alphas)
    return EnsembleModel("adaboost", tuple(trees), raw / raw.sum(), raw, params,
                         break_reason=break_reason)


def replay_distributions(model: EnsembleModel, train: Dataset) -> np.ndarray:
    """Reconstruct the (T_effective+1, n) reweighting history from a
    trained boosting model; row 0 is the uniform start."""
    if model.method != "adaboost":
        raise ValueError("only boosting models carry a reweighting history")
    x, y = train.features, train.labels
    n = train.n_rows
    rows = [np.full(n, 1.0 / n)]
    for tree, alpha in zip(model.trees, model.raw_alphas):
        wrong = tree.predict(x) != y
        rows.append(_reweight(rows[-1], float(alpha), wrong))
    return np.vstack(rows)


def random_forest(train: Dataset, T: int, m_try: int | None = None,
                  params: TreeParams | None = None, seed: int = 0,
                  bootstrap: bool = True) -> EnsembleModel:
    """Bootstrap-resampled trees on random feature subsets, uniform votes.

    The bootstrap is realized as draw counts divided by n, so a fitted
    tree sees the resample through its sample weights.  Per-tree
    randomness comes from an independent stream keyed by (seed, t).
    """
    _check_two_classes(train)
    if T < 1:
        raise ValueError("T must be >= 1")
    params = params or TreeParams()
    n, p = train.n_rows, train.n_features
    if m_try is None:
        m_try = math.ceil(math.sqrt(p))
    if not 1 <= m_try <= p:
        raise ValueError(f"m_try must lie in [1, {p}]")
    x, y = train.features, train.labels
    trees = []
    for t in range(T):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
            weights = counts / n
        else:
            weights = np.full(n, 1.0 / n)
        subset = np.sort(rng.choice(p, size=m_try, replace=False))
        trees.append(fit_tree(x, y, weights=weights, params=params,
                              feature_subset=subset))
    uniform = np.full(T, 1.0 / T)
    return EnsembleModel("random-forest", tuple(trees), uniform, uniform.copy(),
                         params, seed=seed)


def bagging(train: Dataset, T: int, params: TreeParams | None = None,
            seed: int = 0, bootstrap: bool = True) -> EnsembleModel:
    """Random forest with every feature available to every tree."""
    model = random_forest(train, T, m_try=train.n_features, params=params,
                          seed=seed, bootstrap=bootstrap)
    return EnsembleModel("bagging", model.trees, model.vote_weights,
                         model.raw_alphas, model.tree_params, seed=seed)


def prediction_matrix(model: EnsembleModel, data: Dataset) -> PredictionMatrix:
    cols = [tree.predict(data.features) for tree in model.trees]
    return PredictionMatrix(np.column_stack(cols), data.labels)


def predict(model: EnsembleModel, features) -> np.ndarray:
    """Combined vote per row: sign of the weighted learner sum, 0 -> +1."""
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    score = np.zeros(x.shape[0])
    for tree, w in zip(model.trees, model.vote_weights):
        score += w * tree.predict(x)
    return np.where(score >= 0.0, 1.0, -1.0)


def test_error(model: EnsembleModel, data: Dataset) -> float:
    return float(np.mean(predict(model, data.features) != data.labels))


def save_model(model: EnsembleModel, path) -> None:
    blob = {
        "method": model.method,
        "vote_weights": model.vote_weights.tolist(),
        "raw_alphas": model.raw_alphas.tolist(),
        "seed": model.seed,
        "break_reason": model.break_reason,
        "tree_params": {"max_depth": model.tree_params.max_depth,
                        "max_leaves": model.tree_params.max_leaves,
                        "min_leaf_weight": model.tree_params.min_leaf_weight},
        "trees": [tree.to_dict() for tree in model.trees],
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_model(path) -> EnsembleModel:
    with open(path) as fh:
        blob = json.load(fh)
    params = TreeParams(**blob["tree_params"])
    trees = tuple(Tree.from_dict(t) for t in blob["trees"])
    return EnsembleModel(blob["method"], trees,
                         np.array(blob["vote_weights"]),
                         np.array(blob["raw_alphas"]),
                         params, seed=blob.get("seed"),
                         break_reason=blob.get("break_reason"))
