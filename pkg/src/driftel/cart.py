"""Batch CART classifier with exact per-leaf class counts.

Trees grow top-down by greedy binary Gini splits, with no pruning. Numeric
tests send a value left iff ``value <= threshold`` (thresholds are midpoints
between consecutive distinct sorted values); categorical tests send a value
left iff its domain code belongs to the split subset. Growth at a node stops
when the node is pure, has fewer than ``min_samples_split`` samples, sits at
``max_depth``, or no candidate split reaches ``min_impurity_decrease``.

Split ties are broken deterministically: lowest feature index first, then
lowest threshold (for categorical features, earliest subset in the documented
enumeration order). Leaf labels are the argmax of the leaf's class counts,
lowest class index on ties.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import Chunk, ClassDistribution, Instance, Schema

# Fully grown trees on noisy chunks can be deep; growth and routing recurse.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 30000))


@dataclass(frozen=True)
class StoppingParams:
    """Growth limits for tree training. Defaults grow the tree fully."""

    max_depth: int | None = None
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be None or >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_impurity_decrease < 0:
            raise ValueError("min_impurity_decrease must be >= 0")


@dataclass(frozen=True, eq=False)
class Leaf:
    class_counts: np.ndarray  # int64 label counts of the training instances here
    predicted_label: int
    depth: int

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.class_counts, dtype=np.int64))
        c.setflags(write=False)
        object.__setattr__(self, "class_counts", c)

    @cached_property
    def probabilities(self) -> np.ndarray:
        total = int(self.class_counts.sum())
        if total <= 0:
            raise ValueError("leaf has no training counts")
        p = self.class_counts / total
        p.setflags(write=False)
        return p


@dataclass(frozen=True, eq=False)
class Internal:
    feature_index: int
    depth: int
    threshold: float | None  # numeric test: value <= threshold goes left
    categories: tuple[int, ...] | None  # categorical test: code in categories goes left
    left: "TreeNode"
    right: "TreeNode"

    def __post_init__(self):
        if (self.threshold is None) == (self.categories is None):
            raise ValueError("internal node needs exactly one of threshold/categories")
        if self.categories is not None:
            object.__setattr__(self, "categories", tuple(sorted(self.categories)))

    @cached_property
    def _category_array(self) -> np.ndarray:
        return np.asarray(self.categories, dtype=np.int64)


TreeNode = Leaf | Internal


@dataclass(frozen=True, eq=False)
class Tree:
    root: TreeNode
    schema: Schema
    params: StoppingParams
    origin_chunk_index: int


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    gain: float  # Gini impurity decrease
    threshold: float | None
    categories: tuple[int, ...] | None


def _leaf(counts: np.ndarray, depth: int) -> Leaf:
    return Leaf(counts, int(np.argmax(counts)), depth)


def categorical_split_subsets(domain_size: int):
    """Candidate go-left code subsets for a categorical feature.

    Domains of up to 6 symbols are searched exhaustively: one representative
    per complementary pair, enumerated by ascending bitmask over the codes
    below ``domain_size - 1``. Larger domains fall back to one-vs-rest
    singletons in code order.
    """
    if domain_size <= 6:
        for mask in range(1, 1 << (domain_size - 1)):
            yield tuple(c for c in range(domain_size - 1) if (mask >> c) & 1)
    else:
        for c in range(domain_size):
            yield (c,)


# Below this node size a plain-Python sweep beats numpy call overhead.
_SMALL_NODE = 64


def _numeric_candidate_small(col: np.ndarray, y_list: list[int], n: int, K: int):
    """Integer-arithmetic sweep over sorted values; returns (score, threshold)
    of the best cut or None. Exact: all intermediate sums are ints."""
    order = np.argsort(col)
    sv = col[order].tolist()
    sy = [y_list[i] for i in order.tolist()]
    left = [0] * K
    right = [0] * K
    for c in sy:
        right[c] += 1
    sum_left_sq = 0
    sum_right_sq = sum(c * c for c in right)
    best_score = None
    best_thr = 0.0
    for i in range(n - 1):
        c = sy[i]
        sum_left_sq += 2 * left[c] + 1
        left[c] += 1
        sum_right_sq -= 2 * right[c] - 1
        right[c] -= 1
        if sv[i] != sv[i + 1]:
            score = sum_left_sq / (i + 1) + sum_right_sq / (n - i - 1)
            if best_score is None or score > best_score:
                best_score = score
                best_thr = (sv[i] + sv[i + 1]) / 2.0
    if best_score is None:
        return None
    return best_score, best_thr


def best_split_indices(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray, schema: Schema
) -> SplitCandidate | None:
    """Greedy best Gini split over the instances selected by ``idx``.

    Returns None when no candidate produces two non-empty sides. The gain of
    a split is computed from integer class counts, so mathematically tied
    candidates evaluate to identical floats and the documented tie order
    (lowest feature, lowest threshold / earliest subset) decides.
    """
    n = idx.size
    y_sub = y[idx]
    K = schema.num_classes
    int_counts = np.bincount(y_sub, minlength=K)
    parent_sq = int((int_counts.astype(np.int64) ** 2).sum())
    parent_score = parent_sq / n
    counts = int_counts.astype(np.float64)
    small = n <= _SMALL_NODE
    y_list = y_sub.tolist() if small else None
    best: SplitCandidate | None = None

    for f, fd in enumerate(schema.features):
        col = X[idx, f]
        if fd.is_categorical:
            k = len(fd.domain)
            codes = col.astype(np.int64)
            cat_class = np.bincount(codes * K + y_sub, minlength=k * K).reshape(k, K)
            rows = cat_class.tolist()
            totals = int_counts.tolist()
            for cats in categorical_split_subsets(k):
                left = [0] * K
                for c in cats:
                    row = rows[c]
                    for j in range(K):
                        left[j] += row[j]
                nl = sum(left)
                if nl == 0 or nl == n:
                    continue
                nr = n - nl
                sl = sr = 0
                for j in range(K):
                    sl += left[j] * left[j]
                    r = totals[j] - left[j]
                    sr += r * r
                gain = (sl / nl + sr / nr - parent_score) / n
                if best is None or gain > best.gain:
                    best = SplitCandidate(f, gain, None, cats)
        elif small:
            found = _numeric_candidate_small(col, y_list, n, K)
            if found is None:
                continue
            score, threshold = found
            gain = (score - parent_score) / n
            if best is None or gain > best.gain:
                best = SplitCandidate(f, gain, float(threshold), None)
        else:
            order = np.argsort(col)
            sv = col[order]
            cuts = np.flatnonzero(sv[1:] != sv[:-1])
            if cuts.size == 0:
                continue
            sy = y_sub[order]
            onehot = np.zeros((n, K), dtype=np.float64)
            onehot[np.arange(n), sy] = 1.0
            cum = np.cumsum(onehot, axis=0)
            left = cum[cuts]
            nl = (cuts + 1).astype(np.float64)
            right = counts - left
            nr = n - nl
            score = (left * left).sum(axis=1) / nl + (right * right).sum(axis=1) / nr
            gains = (score - parent_score) / n
            j = int(np.argmax(gains))  # first max = lowest threshold
            gain = float(gains[j])
            if best is None or gain > best.gain:
                cut = int(cuts[j])
                threshold = float((sv[cut] + sv[cut + 1]) / 2.0)
                best = SplitCandidate(f, gain, threshold, None)
    return best


def best_split(chunk: Chunk) -> SplitCandidate | None:
    """Best root split for a whole chunk (exposed for split-enumeration checks)."""
    return best_split_indices(chunk.X, chunk.y, np.arange(len(chunk)), chunk.schema)


def grow_subtree(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    schema: Schema,
    params: StoppingParams,
) -> TreeNode:
    """Grow a (sub)tree over the instances selected by ``idx`` starting at ``depth``."""
    K = schema.num_classes
    counts = np.bincount(y[idx], minlength=K)
    if (
        int((counts > 0).sum()) <= 1
        or idx.size < params.min_samples_split
        or (params.max_depth is not None and depth >= params.max_depth)
    ):
        return _leaf(counts, depth)
    split = best_split_indices(X, y, idx, schema)
    if split is None or split.gain < params.min_impurity_decrease:
        return _leaf(counts, depth)
    col = X[idx, split.feature_index]
    if split.threshold is not None:
        mask = col <= split.threshold
    else:
        mask = np.isin(col.astype(np.int64), np.asarray(split.categories, dtype=np.int64))
    return Internal(
        split.feature_index,
        depth,
        split.threshold,
        split.categories,
        grow_subtree(X, y, idx[mask], depth + 1, schema, params),
        grow_subtree(X, y, idx[~mask], depth + 1, schema, params),
    )


def train_cart(chunk: Chunk, params: StoppingParams, schema: Schema | None = None) -> Tree:
    """Train a CART tree on one chunk."""
    if schema is not None and schema != chunk.schema:
        raise ValueError("schema does not match the chunk's schema")
    root = grow_subtree(
        chunk.X, chunk.y, np.arange(len(chunk)), 0, chunk.schema, params
    )
    return Tree(root, chunk.schema, params, chunk.index)


def _goes_left(node: Internal, value: float) -> bool:
    if node.threshold is not None:
        return value <= node.threshold
    # Codes never seen in any training partition are absent from the subset
    # and therefore route right.
    return int(value) in node.categories


def route_to_leaf(tree: Tree, instance: Instance) -> Leaf:
    """Deterministically route one instance to its leaf."""
    x = tree.schema.encode_features(instance.features)
    node = tree.root
    while isinstance(node, Internal):
        node = node.left if _goes_left(node, x[node.feature_index]) else node.right
    return node


def predict(tree: Tree, instance: Instance) -> int:
    return route_to_leaf(tree, instance).predicted_label


def posterior(tree: Tree, instance: Instance) -> ClassDistribution:
    """Class distribution of the routed leaf: per-class count ratios."""
    return ClassDistribution(route_to_leaf(tree, instance).probabilities)


def _left_mask(node: Internal, col: np.ndarray) -> np.ndarray:
    if node.threshold is not None:
        return col <= node.threshold
    return np.isin(col.astype(np.int64), node._category_array)


def _fill_posteriors(root: TreeNode, X: np.ndarray, all_idx: np.ndarray, out: np.ndarray):
    stack = [(root, all_idx)]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.probabilities
            continue
        mask = _left_mask(node, X[idx, node.feature_index])
        left_idx = idx[mask]
        if left_idx.size:
            stack.append((node.left, left_idx))
        right_idx = idx[~mask]
        if right_idx.size:
            stack.append((node.right, right_idx))


def _fill_labels(root: TreeNode, X: np.ndarray, all_idx: np.ndarray, out: np.ndarray):
    stack = [(root, all_idx)]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.predicted_label
            continue
        mask = _left_mask(node, X[idx, node.feature_index])
        left_idx = idx[mask]
        if left_idx.size:
            stack.append((node.left, left_idx))
        right_idx = idx[~mask]
        if right_idx.size:
            stack.append((node.right, right_idx))


def posterior_chunk(tree: Tree, chunk: Chunk) -> np.ndarray:
    """Per-instance posterior matrix, shape (len(chunk), num_classes)."""
    if chunk.schema != tree.schema:
        raise ValueError("chunk schema does not match the tree's schema")
    out = np.empty((len(chunk), tree.schema.num_classes), dtype=np.float64)
    _fill_posteriors(tree.root, chunk.X, np.arange(len(chunk)), out)
    return out


def predict_chunk(tree: Tree, chunk: Chunk) -> np.ndarray:
    """Predicted labels for every instance of a chunk."""
    if chunk.schema != tree.schema:
        raise ValueError("chunk schema does not match the tree's schema")
    out = np.empty(len(chunk), dtype=np.int64)
    _fill_labels(tree.root, chunk.X, np.arange(len(chunk)), out)
    return out


def _node_lines(node: TreeNode, lines: list[str]):
    if isinstance(node, Leaf):
        counts = ",".join(str(int(c)) for c in node.class_counts)
        lines.append(
            f"leaf depth={node.depth} counts={counts} label={node.predicted_label}"
        )
        return
    if node.threshold is not None:
        test = f"x{node.feature_index}<={node.threshold!r}"
    else:
        test = f"x{node.feature_index}in{{{','.join(map(str, node.categories))}}}"
    lines.append(f"node depth={node.depth} {test}")
    _node_lines(node.left, lines)
    _node_lines(node.right, lines)


def tree_to_text(tree: Tree) -> str:
    """Stable text serialization: pre-order, one node per line."""
    lines: list[str] = []
    _node_lines(tree.root, lines)
    return "\n".join(lines) + "\n"


def leaves(tree: Tree) -> list[Leaf]:
    out: list[Leaf] = []

    def walk(node: TreeNode):
        if isinstance(node, Leaf):
            out.append(node)
        else:
            walk(node.left)
            walk(node.right)

    walk(tree.root)
    return out
