import numpy as np
import pytest

from driftel.baselines import (
    ALGORITHMS,
    SeaEnsemble,
    dtel_accuracy_archive,
    dtel_no_transfer,
    majority_vote,
    make_learner,
    sea_predict_chunk,
    sea_process_chunk,
)
from driftel.cart import StoppingParams, predict_chunk, train_cart
from driftel.core import make_rng
from driftel.dtel import Archive, DtelConfig, process_chunk
from helpers import numeric_chunk, random_consistent_chunk, random_schema

UNBOUNDED = StoppingParams()


def test_registry_names():
    assert set(ALGORITHMS) == {"sea", "dtel", "dtel-no-transfer", "dtel-acc-archive"}
    for name in ALGORITHMS:
        learner = make_learner(name, DtelConfig(m=2))
        assert learner.name == name
    with pytest.raises(ValueError):
        make_learner("nope")


def test_majority_vote_tie_takes_lowest_class():
    preds = [np.array([0, 1]), np.array([1, 1]), np.array([0, 0]), np.array([1, 0])]
    assert np.array_equal(majority_vote(preds, 2), [0, 0])


def test_sea_appends_under_capacity():
    cfg = DtelConfig(m=3)
    state = SeaEnsemble.empty(3)
    chunk = numeric_chunk([1, 2, 8, 9], [0, 0, 1, 1], index=0)
    state = sea_process_chunk(state, chunk, cfg)
    assert len(state) == 1
    assert np.array_equal(sea_predict_chunk(state, chunk), chunk.y)


def test_sea_no_replacement_when_new_tree_is_equivalent():
    cfg = DtelConfig(m=2)
    chunk = numeric_chunk([1, 2, 8, 9], [0, 0, 1, 1], index=0)
    state = SeaEnsemble.empty(2)
    state = sea_process_chunk(state, chunk, cfg)
    state = sea_process_chunk(state, chunk.with_labels(chunk.y), cfg)
    before = state.models
    # a third identical chunk trains an equivalent tree; no accuracy gain
    state = sea_process_chunk(state, chunk.with_labels(chunk.y), cfg)
    assert state.models == before


def test_sea_replaces_the_always_wrong_model():
    cfg = DtelConfig(m=2)
    base = numeric_chunk([1, 2, 3, 8, 9, 10, 1.5, 2.5, 8.5, 9.5], [0, 0, 0, 1, 1, 1, 0, 0, 1, 1], index=0)
    inverted = base.with_labels(1 - np.asarray(base.y))
    wrong = train_cart(inverted, UNBOUNDED)  # wrong on every instance of base
    right = train_cart(base, UNBOUNDED)
    state = SeaEnsemble((wrong, right), 2)
    updated = sea_process_chunk(state, base, cfg)
    assert wrong not in updated.models
    assert right in updated.models
    # brute-force over both replacements confirms slot 0 was the best swap
    new_tree = [t for t in updated.models if t is not right][0]
    accs = []
    for slot in range(2):
        models = list(state.models)
        models[slot] = new_tree
        preds = [predict_chunk(t, base) for t in models]
        accs.append(np.mean(majority_vote(preds, 2) == base.y))
    assert accs[0] == max(accs)


def brute_force_sea_replacement(state, new_tree, chunk):
    """Straight-line re-statement of the replacement rule."""
    K = chunk.schema.num_classes

    def vote_accuracy(models):
        votes = np.zeros((len(chunk), K))
        for t in models:
            p = predict_chunk(t, chunk)
            for i, c in enumerate(p):
                votes[i, c] += 1
        return float(np.mean(np.argmax(votes, axis=1) == chunk.y))

    base = vote_accuracy(state.models)
    best_slot, best_acc = None, base
    for slot in range(len(state.models)):
        models = list(state.models)
        models[slot] = new_tree
        acc = vote_accuracy(models)
        if acc > best_acc:
            best_slot, best_acc = slot, acc
    return best_slot


def test_sea_replacement_matches_brute_force_random():
    rng = make_rng(61)
    cfg = DtelConfig(m=4)
    for trial in range(40):
        schema = random_schema(rng, max_features=2, num_classes=2)
        state = SeaEnsemble(
            tuple(
                train_cart(random_consistent_chunk(rng, schema, 12, index=t), UNBOUNDED)
                for t in range(4)
            ),
            4,
        )
        chunk = random_consistent_chunk(rng, schema, 12, index=9)
        new_tree = train_cart(chunk, UNBOUNDED)
        expected_slot = brute_force_sea_replacement(state, new_tree, chunk)
        updated = sea_process_chunk(state, chunk, cfg)
        if expected_slot is None:
            assert updated.models == state.models
        else:
            expected = list(state.models)
            expected[expected_slot] = updated.models[expected_slot]
            assert updated.models[expected_slot] is not state.models[expected_slot]
            assert [
                a is b for a, b in zip(updated.models, state.models)
            ].count(False) == 1


def test_no_transfer_equals_dtel_on_stationary_stream():
    rng = make_rng(67)
    schema = random_schema(rng, max_features=2, num_classes=2)
    chunk0 = random_consistent_chunk(rng, schema, 30, index=0)
    test_chunk = random_consistent_chunk(rng, schema, 50, index=99)
    cfg = DtelConfig(m=3)
    a1 = Archive.empty(3)
    a2 = Archive.empty(3)
    for t in range(4):
        e1, a1 = process_chunk(a1, chunk0, cfg)
        e2, a2 = dtel_no_transfer(a2, chunk0, cfg)
        from driftel.dtel import predict_ensemble_chunk

        assert np.array_equal(
            predict_ensemble_chunk(e1, test_chunk), predict_ensemble_chunk(e2, test_chunk)
        )


def test_no_transfer_suffers_on_abrupt_inversion():
    from driftel.dtel import predict_ensemble_chunk

    rng = make_rng(71)
    schema = random_schema(rng, max_features=1, num_classes=2)
    cfg = DtelConfig(m=4)
    base = [random_consistent_chunk(rng, schema, 40, index=t) for t in range(8)]
    # abrupt concept change: labels invert at step 4
    chunks = [c if t < 4 else c.with_labels(1 - np.asarray(c.y)) for t, c in enumerate(base)]
    a_full, a_nt = Archive.empty(4), Archive.empty(4)
    full_acc, nt_acc = [], []
    for t, chunk in enumerate(chunks):
        e_full, a_full = process_chunk(a_full, chunk, cfg)
        e_nt, a_nt = dtel_no_transfer(a_nt, chunk, cfg)
        if t >= 4:
            probe = chunks[t]
            full_acc.append(np.mean(predict_ensemble_chunk(e_full, probe) == probe.y))
            nt_acc.append(np.mean(predict_ensemble_chunk(e_nt, probe) == probe.y))
    assert np.mean(full_acc) > np.mean(nt_acc)


def test_accuracy_archive_examples():
    rng = make_rng(73)
    schema = random_schema(rng, max_features=1, num_classes=2)
    cfg = DtelConfig(m=2)
    archive = Archive.empty(2)
    # all candidates equally accurate -> oldest removed
    chunk0 = random_consistent_chunk(rng, schema, 20, index=0)
    for t in range(3):
        chunk = chunk0.with_labels(chunk0.y)
        object.__setattr__(chunk, "index", t)
        _, archive = dtel_accuracy_archive(archive, chunk, cfg)
    assert [m.origin_chunk_index for m in archive.models] == [1, 2]


def test_accuracy_archive_removes_zero_accuracy_model():
    cfg = DtelConfig(m=2)
    base = numeric_chunk([1, 2, 8, 9], [0, 0, 1, 1], index=5)
    inverted_tree = train_cart(base.with_labels(1 - np.asarray(base.y)), UNBOUNDED)
    object.__setattr__(inverted_tree, "origin_chunk_index", 3)
    good_tree = train_cart(base, UNBOUNDED)
    object.__setattr__(good_tree, "origin_chunk_index", 4)
    archive = Archive((inverted_tree, good_tree), 2)
    _, updated = dtel_accuracy_archive(archive, base, cfg)
    assert inverted_tree not in updated.models
    assert good_tree in updated.models


def test_accuracy_archive_diverges_from_diversity_archive():
    # candidates where the least accurate model contributes the most
    # diversity: constant predictors on a 60%-ones chunk
    cfg = DtelConfig(m=2, stopping=StoppingParams(max_depth=0))
    ones = numeric_chunk([1, 2, 3, 4, 5], [1, 1, 1, 1, 1], index=0)
    zeros = numeric_chunk([1, 2, 3, 4, 5], [0, 0, 0, 0, 0], index=1)
    mixed = numeric_chunk([1, 2, 3, 4, 5], [1, 1, 1, 0, 0], index=2)

    div_archive = Archive.empty(2)
    _, div_archive = process_chunk(div_archive, ones, cfg)
    _, div_archive = process_chunk(div_archive, zeros, cfg)
    _, div_archive = process_chunk(div_archive, mixed, cfg)

    acc_archive = Archive.empty(2)
    _, acc_archive = dtel_accuracy_archive(acc_archive, ones, cfg)
    _, acc_archive = dtel_accuracy_archive(acc_archive, zeros, cfg)
    _, acc_archive = dtel_accuracy_archive(acc_archive, mixed, cfg)

    # diversity keeps the all-zeros model (complementary); accuracy drops it
    assert [m.origin_chunk_index for m in div_archive.models] == [1, 2]
    assert [m.origin_chunk_index for m in acc_archive.models] == [0, 2]


def test_baselines_respect_capacity_and_determinism():
    rng = make_rng(79)
    schema = random_schema(rng, max_features=2, num_classes=2)
    chunks = [random_consistent_chunk(rng, schema, 20, index=t) for t in range(6)]
    probe = random_consistent_chunk(rng, schema, 30, index=50)
    for name in ALGORITHMS:
        preds = []
        for _ in range(2):
            learner = make_learner(name, DtelConfig(m=2))
            for chunk in chunks:
                learner.update(chunk)
            preds.append(learner.predict_chunk(probe))
        assert np.array_equal(preds[0], preds[1])
