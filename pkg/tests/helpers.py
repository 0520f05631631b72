"""Shared fixtures-in-code for the test suite: tiny chunk builders, random
consistent datasets, and tree walkers."""

from __future__ import annotations

import numpy as np

from driftel.cart import Internal, Leaf, Tree
from driftel.core import (
    CATEGORICAL,
    NUMERIC,
    Chunk,
    FeatureDescriptor,
    Schema,
)


def numeric_schema(n_features: int = 1, num_classes: int = 2) -> Schema:
    return Schema(tuple(FeatureDescriptor(NUMERIC) for _ in range(n_features)), num_classes)


def numeric_chunk(points, labels, num_classes: int = 2, index: int = 0) -> Chunk:
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if X.shape[0] == 1 and np.asarray(labels).size > 1:
        X = X.T
    schema = numeric_schema(X.shape[1], num_classes)
    return Chunk(index, schema, X, np.asarray(labels, dtype=np.int64))


def random_schema(rng: np.random.Generator, max_features: int = 3, num_classes: int | None = None) -> Schema:
    """Random mixed schema with at least one numeric feature, so feature
    vectors are almost surely distinct (labelings stay consistent)."""
    n_extra = int(rng.integers(0, max_features))
    feats = [FeatureDescriptor(NUMERIC)]
    for _ in range(n_extra):
        if rng.random() < 0.5:
            feats.append(FeatureDescriptor(NUMERIC))
        else:
            k = int(rng.integers(2, 5))
            feats.append(FeatureDescriptor(CATEGORICAL, tuple(f"c{i}" for i in range(k))))
    if num_classes is None:
        num_classes = int(rng.integers(2, 4))
    return Schema(tuple(feats), num_classes)


def random_chunk(rng: np.random.Generator, schema: Schema, n: int, index: int = 0) -> Chunk:
    X = np.empty((n, schema.n_features))
    for j, fd in enumerate(schema.features):
        if fd.is_categorical:
            X[:, j] = rng.integers(0, len(fd.domain), n)
        else:
            X[:, j] = rng.uniform(0, 10, n)
    y = rng.integers(0, schema.num_classes, n)
    return Chunk(index, schema, X, y.astype(np.int64))


def random_consistent_chunk(rng: np.random.Generator, schema: Schema, n: int, index: int = 0) -> Chunk:
    """Random chunk whose labels are a function of the feature vector, so
    duplicate rows never disagree."""
    chunk = random_chunk(rng, schema, n, index)
    table: dict[tuple, int] = {}
    y = np.empty(n, dtype=np.int64)
    for i, row in enumerate(map(tuple, chunk.X)):
        if row not in table:
            table[row] = int(rng.integers(0, schema.num_classes))
        y[i] = table[row]
    return chunk.with_labels(y)


def walk_nodes(tree: Tree):
    def rec(node):
        yield node
        if isinstance(node, Internal):
            yield from rec(node.left)
            yield from rec(node.right)

    yield from rec(tree.root)


def tree_leaves(tree: Tree) -> list[Leaf]:
    return [n for n in walk_nodes(tree) if isinstance(n, Leaf)]


def assert_structure_above_leaves_preserved(src, adp):
    """Every internal node of the source appears unchanged (same feature,
    same test, same depth) at the same position of the adapted tree."""
    if isinstance(src, Internal):
        assert isinstance(adp, Internal)
        assert adp.feature_index == src.feature_index
        assert adp.threshold == src.threshold
        assert adp.categories == src.categories
        assert adp.depth == src.depth
        assert_structure_above_leaves_preserved(src.left, adp.left)
        assert_structure_above_leaves_preserved(src.right, adp.right)
    # source leaves may be replaced by relabeled leaves or grown subtrees
