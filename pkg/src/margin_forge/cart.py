"""Depth-limited CART binary classifier on weighted samples.

Splits maximize the weighted Gini impurity decrease over axis-aligned
thresholds placed at midpoints between consecutive distinct values.
Growth is best-first: the pending leaf with the largest decrease splits
next, up to max_leaves.  An impure leaf splits even at zero decrease
(a zero-gain cut can enable a useful one below it, as in xor), so the
only stopping conditions are purity, the depth cap, the leaf cap, and
running out of candidate thresholds.  All tie-breaks are deterministic:
lowest feature index, then lowest threshold, then insertion order.
"""
from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 2
    max_leaves: int = 4
    min_leaf_weight: float = 1e-12

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 2 <= self.max_leaves <= 2 ** self.max_depth:
            raise ValueError("max_leaves must lie in [2, 2**max_depth]")
        if self.min_leaf_weight <= 0:
            raise ValueError("min_leaf_weight must be positive")


@dataclass
class Node:
    feature: int | None = None
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None
    value: float = 1.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _leaf_value(labels, weights) -> float:
    # sign of the weighted label sum, with sign(0) = +1
    return 1.0 if float(np.dot(weights, labels)) >= 0.0 else -1.0


def _weighted_gini(w_pos: float, w_neg: float) -> float:
    total = w_pos + w_neg
    if total <= 0.0:
        return 0.0
    return total - (w_pos * w_pos + w_neg * w_neg) / total


def best_split(x, y, w, idx, features, min_leaf_weight: float):
    """Best (decrease, feature, threshold) for the rows in idx, or None.

    decrease = parent weighted Gini minus the two children's, unnormalized.
    Returns None when the node is already pure (by weight) or no midpoint
    yields two children above min_leaf_weight.
    """
    sub_w = w[idx]
    total = float(sub_w.sum())
    pos = float(sub_w[y[idx] > 0].sum())
    if min(pos, total - pos) <= 0.0:
        return None  # weighted-pure node: nothing to separate
    parent = _weighted_gini(pos, total - pos)
    best = None
    for f in features:
        vals = x[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sw = sub_w[order]
        sp = np.where(y[idx][order] > 0, sw, 0.0)
        cut = np.nonzero(sv[:-1] < sv[1:])[0]
        if cut.size == 0:
            continue
        wl = np.cumsum(sw)[cut]
        pl = np.cumsum(sp)[cut]
        nl = wl - pl
        wr = total - wl
        pr = pos - pl
        nr = wr - pr
        ok = (wl >= min_leaf_weight) & (wr >= min_leaf_weight)
        if not np.any(ok):
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            child = (wl - (pl * pl + nl * nl) / wl) + (wr - (pr * pr + nr * nr) / wr)
        dec = np.where(ok, parent - child, -np.inf)
        j = int(np.argmax(dec))  # argmax keeps the first (lowest threshold) on ties
        if best is None or dec[j] > best[0]:
            thr = float((sv[cut[j]] + sv[cut[j] + 1]) / 2.0)
            best = (float(dec[j]), int(f), thr)
    return best


@dataclass
class Tree:
    root: Node
    n_features: int
    params: TreeParams = field(default_factory=TreeParams)

    def predict(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"expected shape (n, {self.n_features})")
        out = np.empty(x.shape[0])
        stack = [(self.root, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.value
                continue
            go_left = x[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    def n_leaves(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                count += 1
            else:
                stack.extend((node.left, node.right))
        return count

    @property
    def depth(self) -> int:
        def down(node):
            if node.is_leaf:
                return 0
            return 1 + max(down(node.left), down(node.right))
        return down(self.root)

    def to_dict(self) -> dict:
        def pack(node):
            if node.is_leaf:
                return {"value": node.value}
            return {"feature": node.feature, "threshold": node.threshold,
                    "left": pack(node.left), "right": pack(node.right)}
        return {"n_features": self.n_features, "root": pack(self.root),
                "params": {"max_depth": self.params.max_depth,
                           "max_leaves": self.params.max_leaves,
                           "min_leaf_weight": self.params.min_leaf_weight}}

    @classmethod
    def from_dict(cls, blob: dict) -> "Tree":
        def unpack(d):
            if "value" in d:
                return Node(value=float(d["value"]))
            return Node(feature=int(d["feature"]), threshold=float(d["threshold"]),
                        left=unpack(d["left"]), right=unpack(d["right"]))
        return cls(unpack(blob["root"]), int(blob["n_features"]),
                   TreeParams(**blob["params"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Tree":
        return cls.from_dict(json.loads(text))


def fit_tree(features, labels, weights=None, params: TreeParams | None = None,
             feature_subset=None) -> Tree:
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("features must be (n, p) with matching labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    n, p = x.shape
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be nonnegative and finite, one per row")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1 (within 1e-9)")
    params = params or TreeParams()
    if feature_subset is None:
        active = np.arange(p)
    else:
        active = np.unique(np.asarray(feature_subset, dtype=int))
        if active.size == 0 or active[0] < 0 or active[-1] >= p:
            raise ValueError("feature_subset must name valid feature columns")

    all_idx = np.arange(n)
    root = Node(value=_leaf_value(y, w))
    counter = itertools.count()
    heap = []

    def enqueue(node, idx, depth):
        if depth >= params.max_depth:
            return
        found = best_split(x, y, w, idx, active, params.min_leaf_weight)
        if found is not None:
            dec, feat, thr = found
            heapq.heappush(heap, (-dec, feat, thr, next(counter), node, idx, depth))

    enqueue(root, all_idx, 0)
    leaves = 1
    while heap and leaves < params.max_leaves:
        _, feat, thr, _, node, idx, depth = heapq.heappop(heap)
        go_left = x[idx, feat] <= thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        node.feature = feat
        node.threshold = thr
        node.left = Node(value=_leaf_value(y[left_idx], w[left_idx]))
        node.right = Node(value=_leaf_value(y[right_idx], w[right_idx]))
        leaves += 1
        enqueue(node.left, left_idx, depth + 1)
        enqueue(node.right, right_idx, depth + 1)
    return Tree(root, p, params)
