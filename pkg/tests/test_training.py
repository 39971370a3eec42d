"""Training tests: heads, ADAM, accumulation, splits, clone pairs."""
import math

import numpy as np
import pytest

from mtn.autodiff import Tape, Tensor, backward, zeros
from mtn.frontend import AstNode
from mtn.model import ModelConfig, build_vocab, init_params
from mtn.training import (
    AdamState,
    ClonePair,
    EmptySplit,
    InsufficientFragments,
    LabeledExample,
    adam_step,
    classify_forward,
    clone_forward,
    clone_loss,
    cross_entropy,
    down_sample,
    example_loss,
    fit,
    make_splits,
    predict_class,
    predict_clone,
    sample_clone_pairs,
    train_epoch,
)


# --- heads -----------------------------------------------------------------


def test_classify_forward_zero_head():
    logits = classify_forward(Tensor([1.0, 2.0]), zeros(3, 2), zeros(3))
    assert np.all(logits.data == 0.0)
    assert predict_class(logits) == 0  # ties to lowest index


def test_classify_forward_identity_head():
    d = 4
    v = Tensor(np.eye(d)[:, 3:4])
    logits = classify_forward(v, Tensor(np.eye(d)), zeros(d))
    assert predict_class(logits) == 3


def test_cross_entropy_requires_two_classes():
    with pytest.raises(ValueError):
        cross_entropy(Tensor([[1.0]]), 0)


def test_clone_forward_and_predict():
    v = Tensor([1.0, 2.0])
    assert clone_forward(v, v).item() == pytest.approx(1.0)
    assert predict_clone(0.3) is True
    assert predict_clone(-0.2) is False
    assert predict_clone(0.0) is False  # threshold is strict


def test_clone_loss_values():
    assert clone_loss(Tensor([[0.25]]), 1).item() == pytest.approx(0.5625)
    assert clone_loss(Tensor([[-1.0]]), -1).item() == 0.0


# --- adam ---------------------------------------------------------------------


class _FakeStore:
    def __init__(self, tensors):
        self.tensors = tensors

    def zero_grads(self):
        for t in self.tensors.values():
            t.grad = None


def test_adam_zero_gradient_keeps_params():
    theta = Tensor([[1.5]], requires_grad=True)
    store = _FakeStore({"w": theta})
    state = AdamState(store)
    theta.grad = np.zeros((1, 1))
    adam_step(store, state)
    assert theta.data[0, 0] == 1.5
    assert state.t == 1


def test_adam_first_step_magnitude():
    theta = Tensor([[0.0]], requires_grad=True)
    store = _FakeStore({"w": theta})
    state = AdamState(store)
    theta.grad = np.ones((1, 1))
    adam_step(store, state)
    # bias corrections cancel at t=1: step = -lr / (1 + eps)
    assert theta.data[0, 0] == pytest.approx(-0.001, rel=1e-6)
    assert theta.grad is None


def test_adam_deterministic():
    rng = np.random.default_rng(0)
    grads = [rng.normal(size=(3, 1)) for _ in range(10)]

    def run():
        theta = Tensor(np.ones((3, 1)), requires_grad=True)
        store = _FakeStore({"w": theta})
        state = AdamState(store)
        for g in grads:
            theta.grad = g.copy()
            adam_step(store, state)
        return theta.data.copy()

    assert np.array_equal(run(), run())


def test_accumulation_matches_mean_gradient_on_linear_model():
    """Batch-accumulated gradient equals the mean of per-example gradients."""
    rng = np.random.default_rng(1)
    w = Tensor(rng.normal(size=(1, 4)), requires_grad=True)
    xs = [Tensor(rng.normal(size=(4, 1))) for _ in range(8)]

    from mtn.autodiff import matmul
    for x in xs:
        with Tape():
            backward(matmul(w, x))
    w.grad *= 1.0 / len(xs)
    accumulated = w.grad.copy()
    expected = np.mean([x.data[:, 0] for x in xs], axis=0).reshape(1, 4)
    assert np.allclose(accumulated, expected, atol=1e-12)


# --- train_epoch ------------------------------------------------------------------


def _toy_classify_setup(n_classes=3, per_class=4, d=6, seed=1):
    leaves = ["Break", "Continue", "Empty", "EmptyStatement", "Return"]
    examples = []
    for label in range(n_classes):
        for idx in range(per_class):
            kids = [AstNode(leaves[(label + j) % len(leaves)])
                    for j in range(label + 1)]
            examples.append(LabeledExample(AstNode("Compound", None, kids),
                                           label))
    vocab = build_vocab((e.ast for e in examples), "types-only")
    config = ModelConfig(variant="mtn-b", hidden=d, vocab=vocab, seed=seed,
                         n_classes=n_classes)
    store = init_params(config)
    return examples, config, store


def test_train_epoch_step_count():
    examples, config, store = _toy_classify_setup(per_class=22)  # 66 examples
    examples = examples[:65]
    state = AdamState(store)
    train_epoch(examples, store, state, config, example_loss, batch_size=32)
    assert state.t == 3  # batches of 32, 32, 1


def test_identical_examples_match_single_example_step():
    examples, config, store = _toy_classify_setup(per_class=1, n_classes=2)
    ex = examples[0]
    batch = [ex] * 8
    state = AdamState(store)
    train_epoch(batch, store, state, config, example_loss, batch_size=8)
    after_batch = store.tensors["head/W"].data.copy()

    store2 = init_params(config)
    state2 = AdamState(store2)
    train_epoch([ex], store2, state2, config, example_loss, batch_size=1)
    after_single = store2.tensors["head/W"].data.copy()
    assert np.allclose(after_batch, after_single, atol=1e-14)


def test_toy_corpus_loss_decreases():
    examples, config, store = _toy_classify_setup(n_classes=3, per_class=10,
                                                  seed=1)
    state = AdamState(store)
    losses = [train_epoch(examples, store, state, config, example_loss,
                          batch_size=32, epoch=e) for e in range(3)]
    assert losses[0] > losses[1] > losses[2]


def test_fit_restores_best_checkpoint():
    examples, config, store = _toy_classify_setup(per_class=6)
    state = AdamState(store)
    calls = []

    def metric(s):
        calls.append(s.tensors["head/W"].data.copy())
        # favor epoch 1, degrade afterwards
        return [0.3, 0.9, 0.1, 0.1][len(calls) - 1]

    result = fit(examples, store, state, config, example_loss, metric,
                 epochs=4)
    assert result.best_epoch == 1
    assert np.array_equal(store.tensors["head/W"].data, calls[1])


def test_fit_patience_stops_early():
    examples, config, store = _toy_classify_setup(per_class=6)
    state = AdamState(store)
    result = fit(examples, store, state, config, example_loss,
                 lambda s: 0.5, epochs=50, patience=3)
    assert len(result.history) == 4  # epoch 0 sets the best, 3 stale epochs


# --- splits ------------------------------------------------------------------------


def test_make_splits_sizes():
    train, valid, test = make_splits(list(range(10)), (8, 1, 1), seed=0)
    assert (len(train), len(valid), len(test)) == (8, 1, 1)
    train, valid, test = make_splits(list(range(7500)), (8, 1, 1), seed=0)
    assert (len(train), len(valid), len(test)) == (6000, 750, 750)


def test_make_splits_deterministic_and_disjoint():
    items = list(range(100))
    a = make_splits(items, seed=42)
    b = make_splits(items, seed=42)
    assert a == b
    train, valid, test = a
    assert sorted(train + valid + test) == items
    c = make_splits(items, seed=43)
    assert c != a


def test_make_splits_stratified():
    items = [(i, i % 5) for i in range(50)]
    train, valid, test = make_splits(items, seed=1, stratify=lambda x: x[1])
    for split, expected in ((train, 8), (valid, 1), (test, 1)):
        per_class = {}
        for _i, cls in split:
            per_class[cls] = per_class.get(cls, 0) + 1
        assert all(v == expected for v in per_class.values())


def test_make_splits_empty_raises():
    with pytest.raises(EmptySplit):
        make_splits(list(range(5)), (8, 1, 1), seed=0)


def test_down_sample_stratified():
    items = [(i, i % 4) for i in range(40)]
    kept = down_sample(items, 0.5, seed=3, stratify=lambda x: x[1])
    assert len(kept) == 20
    counts = {}
    for _i, cls in kept:
        counts[cls] = counts.get(cls, 0) + 1
    assert all(v == 5 for v in counts.values())
    assert down_sample(items, 1.0, seed=3) == items


# --- clone pairs ----------------------------------------------------------------------


def _fragments(n_problems, per_problem, prefix=""):
    return [(f"{prefix}{p}_{i}", p)
            for p in range(n_problems) for i in range(per_problem)]


def test_pair_labels_are_definitional():
    splits = (_fragments(4, 8), _fragments(4, 4, "v"), _fragments(4, 4, "t"))
    train, valid, test = sample_clone_pairs(splits, 30, 30, 20, seed=5)
    for pair in train + valid + test:
        same = pair.ast1.split("_")[0].lstrip("vt") == \
            pair.ast2.split("_")[0].lstrip("vt")
        assert pair.label == (1 if same else -1)
    pos = [p for p in train if p.label == 1]
    neg = [p for p in train if p.label == -1]
    assert len(pos) == 30 and len(neg) == 30


def test_minimal_positive_negative():
    splits = (_fragments(2, 2), _fragments(2, 2, "v"), _fragments(2, 2, "t"))
    train, _v, _t = sample_clone_pairs(splits, 1, 1, 2, seed=0)
    assert sorted(p.label for p in train) == [-1, 1]


def test_pairs_unique_within_set():
    splits = (_fragments(5, 10), _fragments(5, 3, "v"), _fragments(5, 3, "t"))
    train, valid, test = sample_clone_pairs(splits, 80, 80, 40, seed=9)
    for pairs in (train, valid, test):
        keys = {tuple(sorted((p.ast1, p.ast2))) for p in pairs}
        assert len(keys) == len(pairs)


def test_upsampling_with_replacement_when_scarce():
    # 2 fragments per problem -> only 3 distinct positives from 3 problems
    splits = (_fragments(3, 2), _fragments(3, 2, "v"), _fragments(3, 2, "t"))
    train, _v, _t = sample_clone_pairs(splits, 10, 10, 3, seed=1)
    pos = [p for p in train if p.label == 1]
    assert len(pos) == 10
    keys = {tuple(sorted((p.ast1, p.ast2))) for p in pos}
    assert len(keys) == 3  # every distinct positive appears


def test_eval_positive_rate_near_baseline():
    """15 equal problems: chance of same-problem pair ~ (m-1)/(N-1) ~ 1/15."""
    per, problems = 40, 15
    frags = _fragments(problems, per)
    _t, _v, test = sample_clone_pairs((frags, frags, frags), 2, 2, 3000,
                                      seed=7)
    n = per * problems
    p_same = (per - 1) / (n - 1)
    rate = sum(1 for p in test if p.label == 1) / len(test)
    sigma = math.sqrt(p_same * (1 - p_same) / len(test))
    assert abs(rate - p_same) < 3 * sigma


def test_insufficient_fragments():
    lone = [(f"f{i}", i) for i in range(4)]  # one fragment per problem
    with pytest.raises(InsufficientFragments):
        sample_clone_pairs((lone, lone, lone), 1, 1, 1, seed=0)
    single_problem = _fragments(1, 6)
    with pytest.raises(InsufficientFragments):
        sample_clone_pairs((single_problem, single_problem, single_problem),
                           1, 1, 1, seed=0)


def test_sampling_deterministic():
    splits = (_fragments(4, 6), _fragments(4, 2, "v"), _fragments(4, 2, "t"))
    a = sample_clone_pairs(splits, 20, 20, 10, seed=11)
    b = sample_clone_pairs(splits, 20, 20, 10, seed=11)
    assert [(p.ast1, p.ast2, p.label) for p in a[0]] == \
        [(p.ast1, p.ast2, p.label) for p in b[0]]
