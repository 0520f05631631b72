"""Per-chunk ensemble engine.

Each step trains a fresh tree on the arriving chunk, adapts every archived
tree to the chunk (independently, so transfers may run concurrently), weights
all members by the inverse of their squared error plus the squared error of a
prior-sampling random classifier, and predicts by weighted soft voting over
member posteriors. The archive of original (never adapted) trees is kept at
capacity by dropping the model whose removal leaves the most diverse set.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cart import StoppingParams, Tree, posterior_chunk, train_cart
from .core import Chunk, ClassDistribution, Instance, class_prior
from .diversity import NEW_MODEL, correctness, select_removal
from .transfer import AdaptedTree, transfer_tree

ADAPTED = "adapted"
NEW = "new"

REMOVAL_DIVERSITY = "diversity"
REMOVAL_ACCURACY = "accuracy"


@dataclass(frozen=True)
class DtelConfig:
    """Engine parameters: archive capacity, weight guard, tree growth limits."""

    m: int = 25
    epsilon: float = 1e-10
    stopping: StoppingParams = field(default_factory=StoppingParams)
    transfer_workers: int | None = None  # None = sequential transfers

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("archive capacity m must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.transfer_workers is not None and self.transfer_workers < 1:
            raise ValueError("transfer_workers must be None or >= 1")


@dataclass(frozen=True, eq=False)
class Archive:
    """Bounded set of preserved historical trees, oldest first."""

    models: tuple[Tree, ...]
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        if self.capacity < 1:
            raise ValueError("archive capacity must be >= 1")
        if len(self.models) > self.capacity:
            raise ValueError("archive over capacity")

    def __len__(self) -> int:
        return len(self.models)

    @classmethod
    def empty(cls, capacity: int) -> "Archive":
        return cls((), capacity)


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    tree: Tree
    weight: float
    kind: str  # "adapted" | "new"


@dataclass(frozen=True, eq=False)
class WeightedEnsemble:
    members: tuple[EnsembleMember, ...]
    chunk_index: int

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if sum(1 for m in self.members if m.kind == NEW) != 1:
            raise ValueError("ensemble needs exactly one new member")
        if any(not np.isfinite(m.weight) or m.weight <= 0 for m in self.members):
            raise ValueError("weights must be finite and positive")


def mse_model(model: Tree, chunk: Chunk) -> float:
    """Mean squared error of a model's posterior on the true labels."""
    post = posterior_chunk(model, chunk)
    p_true = post[np.arange(len(chunk)), chunk.y]
    return float(np.mean((1.0 - p_true) ** 2))


def mse_random(chunk: Chunk) -> float:
    """Squared error of a classifier sampling labels from the chunk's prior."""
    p = class_prior(chunk).probabilities
    return float(np.sum(p * (1.0 - p) ** 2))


def weight_adapted(mse_r: float, mse_i: float, epsilon: float) -> float:
    return 1.0 / (mse_r + mse_i + epsilon)


def weight_new(mse_r: float, epsilon: float) -> float:
    return 1.0 / (mse_r + epsilon)


def ensemble_posteriors(ens: WeightedEnsemble, chunk: Chunk) -> np.ndarray:
    """Weighted mean of member posteriors, rows normalized to sum to 1."""
    acc = np.zeros((len(chunk), chunk.schema.num_classes), dtype=np.float64)
    total = 0.0
    for member in ens.members:
        acc += member.weight * posterior_chunk(member.tree, chunk)
        total += member.weight
    return acc / total


def predict_ensemble_chunk(ens: WeightedEnsemble, chunk: Chunk) -> np.ndarray:
    return np.argmax(ensemble_posteriors(ens, chunk), axis=1)


def predict_ensemble(ens: WeightedEnsemble, instance: Instance) -> tuple[int, ClassDistribution]:
    """Combined prediction for one instance: (argmax label, soft distribution)."""
    schema = ens.members[0].tree.schema
    chunk = Chunk(ens.chunk_index, schema, schema.encode_features(instance.features)[None, :], np.zeros(1, dtype=np.int64))
    combined = ensemble_posteriors(ens, chunk)[0]
    return int(np.argmax(combined)), ClassDistribution(combined)


def _transfer_all(models: tuple[Tree, ...], chunk: Chunk, cfg: DtelConfig) -> list[AdaptedTree]:
    if not models:
        return []
    if cfg.transfer_workers is None or cfg.transfer_workers == 1 or len(models) == 1:
        return [transfer_tree(f, chunk, cfg.stopping) for f in models]
    # Transfers are pure functions of immutable inputs; collect in archive
    # order so results do not depend on scheduling.
    with ThreadPoolExecutor(max_workers=cfg.transfer_workers) as pool:
        return list(pool.map(lambda f: transfer_tree(f, chunk, cfg.stopping), models))


def _accuracy_removal(candidates) -> int | str:
    # Lowest accuracy removed; ties drop the oldest, the new model last.
    order = sorted(
        range(len(candidates)),
        key=lambda i: (1 if candidates[i].is_new else 0, candidates[i].origin),
    )
    worst = order[0]
    for i in order[1:]:
        if candidates[i].bits.mean() < candidates[worst].bits.mean():
            worst = i
    return candidates[worst].model_id


def _update_archive(archive: Archive, new_tree: Tree, chunk: Chunk, removal: str) -> Archive:
    if len(archive) < archive.capacity:
        return Archive(archive.models + (new_tree,), archive.capacity)
    if archive.capacity == 1:
        # Two candidates cannot carry a pairwise diversity score; ties prefer
        # recency, so the single archived model is replaced.
        return Archive((new_tree,), 1)
    candidates = [
        correctness(f, chunk, model_id=slot) for slot, f in enumerate(archive.models)
    ]
    candidates.append(correctness(new_tree, chunk, model_id=NEW_MODEL))
    if removal == REMOVAL_DIVERSITY:
        removed = select_removal(candidates)
    elif removal == REMOVAL_ACCURACY:
        removed = _accuracy_removal(candidates)
    else:
        raise ValueError(f"unknown removal rule: {removal!r}")
    if removed == NEW_MODEL:
        return archive
    models = tuple(f for slot, f in enumerate(archive.models) if slot != removed)
    return Archive(models + (new_tree,), archive.capacity)


def _step(
    archive: Archive,
    chunk: Chunk,
    cfg: DtelConfig,
    adapt: bool = True,
    removal: str = REMOVAL_DIVERSITY,
) -> tuple[WeightedEnsemble, Archive]:
    new_tree = train_cart(chunk, cfg.stopping)
    if adapt:
        member_trees = [a.tree for a in _transfer_all(archive.models, chunk, cfg)]
    else:
        member_trees = list(archive.models)
    updated = _update_archive(archive, new_tree, chunk, removal)
    mse_r = mse_random(chunk)
    members = tuple(
        EnsembleMember(t, weight_adapted(mse_r, mse_model(t, chunk), cfg.epsilon), ADAPTED)
        for t in member_trees
    ) + (EnsembleMember(new_tree, weight_new(mse_r, cfg.epsilon), NEW),)
    return WeightedEnsemble(members, chunk.index), updated


def process_chunk(archive: Archive, chunk: Chunk, cfg: DtelConfig) -> tuple[WeightedEnsemble, Archive]:
    """One full learning step.

    Order of operations: train the new tree, adapt every archived tree to the
    chunk, update the archive (diversity-based replacement once at capacity,
    judged on the original models' correctness), then weight the adapted
    trees plus the new tree. The ensemble always contains adapted versions of
    all models archived at the start of the step; the archive update only
    affects future steps, and adapted trees themselves are never archived.
    """
    return _step(archive, chunk, cfg, adapt=True, removal=REMOVAL_DIVERSITY)


class DtelLearner:
    """Incremental learner interface around :func:`process_chunk`."""

    name = "dtel"

    def __init__(self, cfg: DtelConfig | None = None):
        self.cfg = cfg or DtelConfig()
        self.archive = Archive.empty(self.cfg.m)
        self.ensemble: WeightedEnsemble | None = None

    def update(self, chunk: Chunk) -> None:
        self.ensemble, self.archive = process_chunk(self.archive, chunk, self.cfg)

    def predict_chunk(self, chunk: Chunk) -> np.ndarray:
        if self.ensemble is None:
            raise ValueError("learner has not been trained yet")
        return predict_ensemble_chunk(self.ensemble, chunk)

    def predict(self, instance: Instance) -> int:
        if self.ensemble is None:
            raise ValueError("learner has not been trained yet")
        return predict_ensemble(self.ensemble, instance)[0]
