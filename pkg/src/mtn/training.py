"""Training: ADAM with manual gradient accumulation, task heads, splits.

Batching over per-example dynamic graphs works by accumulation: each
example in a batch gets its own tape, forward pass and backward pass;
gradients add up in the parameter store, are divided by the actual batch
size, and feed one optimizer step.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .autodiff import (
    DegenerateVector,
    Tape,
    Tensor,
    affine,
    backward,
    cosine_similarity,
    mul_elem,
    sub,
)
from .autodiff import cross_entropy as _cross_entropy_op
from .frontend import AstNode
from .model import ModelConfig, ParamStore, encode

ADAM_FORMAT = "mtn-adam/1"


class EmptySplit(Exception):
    pass


class InsufficientFragments(Exception):
    pass


@dataclass
class LabeledExample:
    ast: AstNode
    label: int


@dataclass
class ClonePair:
    ast1: AstNode
    ast2: AstNode
    label: int  # +1 true clone, -1 false


# --- task heads -------------------------------------------------------------


def classify_forward(v: Tensor, head_w: Tensor, head_b: Tensor) -> Tensor:
    """Affine classification head: logits = W v + b."""
    return affine(head_w, v, head_b)


def predict_class(logits: Tensor) -> int:
    """argmax over logits; ties resolve to the lowest index."""
    return int(np.argmax(logits.data[:, 0]))


def cross_entropy(logits: Tensor, label: int) -> Tensor:
    """Stable cross-entropy of logits against an integer class label."""
    if logits.data.shape[0] < 2:
        raise ValueError("cross_entropy requires at least 2 classes")
    return _cross_entropy_op(logits, label)


def clone_forward(v1: Tensor, v2: Tensor) -> Tensor:
    """Cosine similarity of two code vectors, in [-1, 1].

    Raises DegenerateVector when either norm is below 1e-12 (a collapsed
    encoder); training and scoring treat that case as similarity 0.
    """
    return cosine_similarity(v1, v2)


def clone_loss(y_hat: Tensor, label: int) -> Tensor:
    """Squared error against the +-1 clone label."""
    diff = sub(Tensor([[float(label)]]), y_hat)
    return mul_elem(diff, diff)


def predict_clone(score: float) -> bool:
    """Decision threshold at zero: score > 0 predicts a clone."""
    return score > 0.0


# --- optimizer ----------------------------------------------------------------


class AdamState:
    """Per-parameter first/second moments and the shared step counter."""

    def __init__(self, store: ParamStore, lr: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(t.data)
                  for name, t in store.tensors.items()}
        self.v = {name: np.zeros_like(t.data)
                  for name, t in store.tensors.items()}

    def snapshot(self) -> dict:
        return {
            "t": self.t,
            "m": {k: a.copy() for k, a in self.m.items()},
            "v": {k: a.copy() for k, a in self.v.items()},
        }

    def restore(self, snap: dict) -> None:
        self.t = snap["t"]
        for k in self.m:
            self.m[k][...] = snap["m"][k]
            self.v[k][...] = snap["v"][k]

    def to_json(self) -> str:
        doc = {
            "format": ADAM_FORMAT,
            "t": self.t,
            "lr": self.lr,
            "m": {k: a.reshape(-1).tolist() for k, a in self.m.items()},
            "v": {k: a.reshape(-1).tolist() for k, a in self.v.items()},
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def adam_step(store: ParamStore, state: AdamState) -> None:
    """One ADAM update from the accumulated (already averaged) gradients.

    Parameters without a gradient this step are treated as having g = 0.
    Gradients are zeroed afterwards.
    """
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    lr, eps = state.lr, state.eps
    for name, tensor in store.tensors.items():
        g = tensor.grad
        m = state.m[name]
        v = state.v[name]
        if g is None:
            m *= b1
            v *= b2
        else:
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            tensor.grad = None
        tensor.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


# --- per-example losses -------------------------------------------------------


def example_loss(example: LabeledExample, store: ParamStore,
                 config: ModelConfig) -> tuple[Tensor, bool]:
    v = encode(example.ast, store, config)
    logits = classify_forward(v, *store.head)
    return cross_entropy(logits, example.label), True


def pair_loss(pair: ClonePair, store: ParamStore,
              config: ModelConfig) -> tuple[Tensor, bool]:
    v1 = encode(pair.ast1, store, config)
    v2 = encode(pair.ast2, store, config)
    try:
        y_hat = clone_forward(v1, v2)
    except DegenerateVector:
        # Collapsed encoder: score 0, constant loss, no gradient this pair.
        return Tensor([[float(pair.label) ** 2]]), False
    return clone_loss(y_hat, pair.label), True


def _epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    digest = hashlib.sha256(f"epoch\x00{seed}\x00{epoch}".encode()).digest()
    entropy = int.from_bytes(digest[:16], "big")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
    return rng.permutation(n)


def train_epoch(dataset: Sequence, store: ParamStore, state: AdamState,
                config: ModelConfig, loss_fn: Callable,
                batch_size: int = 32, epoch: int = 0) -> float:
    """One pass over the dataset; returns the mean per-example loss.

    The dataset order is reshuffled by a permutation keyed on
    (config.seed, epoch). Each batch accumulates per-example gradients,
    divides by the actual batch size (short final batch included) and
    takes one ADAM step.
    """
    n = len(dataset)
    if n == 0:
        raise EmptySplit("cannot train on an empty dataset")
    perm = _epoch_permutation(n, config.seed, epoch)
    total = 0.0
    for start in range(0, n, batch_size):
        batch = perm[start:start + batch_size]
        for idx in batch:
            item = dataset[int(idx)]
            try:
                with Tape():
                    loss, attached = loss_fn(item, store, config)
                    if attached:
                        backward(loss)
            except Exception as exc:
                raise type(exc)(f"example {int(idx)}: {exc}") from exc
            total += loss.data[0, 0]
        inv = 1.0 / len(batch)
        for t in store.tensors.values():
            if t.grad is not None:
                t.grad *= inv
        adam_step(store, state)
    return total / n


# --- dataset splitting --------------------------------------------------------


def _seeded_rng(seed: int, *context) -> np.random.Generator:
    payload = "\x00".join(str(c) for c in (seed, *context))
    digest = hashlib.sha256(payload.encode()).digest()
    entropy = int.from_bytes(digest[:16], "big")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def make_splits(items: Sequence, ratios: tuple[int, int, int] = (8, 1, 1),
                seed: int = 0, stratify: Optional[Callable] = None):
    """Deterministic (train, valid, test) split.

    Shuffles with a seeded permutation, then slices contiguously with
    floor-sized valid/test shares; the remainder goes to train. With a
    ``stratify`` key function the split happens independently per key (in
    sorted key order), which also keeps clone fragments of one problem
    proportionally represented.
    """
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if stratify is not None:
        groups: dict = {}
        for item in items:
            groups.setdefault(stratify(item), []).append(item)
        train: list = []
        valid: list = []
        test: list = []
        for key in sorted(groups):
            tr, va, te = make_splits(groups[key], ratios,
                                     seed=_mix_seed(seed, key))
            train.extend(tr)
            valid.extend(va)
            test.extend(te)
        return train, valid, test
    items = list(items)
    n = len(items)
    total = sum(ratios)
    n_valid = n * ratios[1] // total
    n_test = n * ratios[2] // total
    n_train = n - n_valid - n_test
    if min(n_train, n_valid, n_test) == 0:
        raise EmptySplit(
            f"{n} items cannot fill a {ratios[0]}:{ratios[1]}:{ratios[2]} split")
    rng = _seeded_rng(seed, "split")
    perm = rng.permutation(n)
    shuffled = [items[int(i)] for i in perm]
    return (shuffled[:n_train],
            shuffled[n_train:n_train + n_valid],
            shuffled[n_train + n_valid:])


def _mix_seed(seed: int, key) -> int:
    digest = hashlib.sha256(f"stratum\x00{seed}\x00{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def down_sample(items: Sequence, fraction: float, seed: int,
                stratify: Optional[Callable] = None) -> list:
    """Keep a seeded fraction of items, stratified when a key is given."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    if fraction == 1.0:
        return list(items)
    if stratify is not None:
        groups: dict = {}
        for item in items:
            groups.setdefault(stratify(item), []).append(item)
        kept: list = []
        for key in sorted(groups):
            kept.extend(down_sample(groups[key], fraction,
                                    _mix_seed(seed, key)))
        return kept
    items = list(items)
    keep = max(1, int(len(items) * fraction))
    rng = _seeded_rng(seed, "downsample")
    idx = sorted(rng.permutation(len(items))[:keep].tolist())
    return [items[i] for i in idx]


# --- clone pair sampling --------------------------------------------------------


def _distinct_pairs(rng: np.random.Generator, draw, population: int,
                    count: int) -> list:
    """Uniform pairs: without replacement while the population allows it,
    topping up with replacement otherwise (up-sampling)."""
    if count <= population:
        seen: set = set()
        out = []
        while len(out) < count:
            key, pair = draw(rng)
            if key in seen:
                continue
            seen.add(key)
            out.append(pair)
        return out
    # Up-sampling: exhaust the population, then draw with replacement.
    seen = set()
    out = []
    while len(seen) < population:
        key, pair = draw(rng)
        if key in seen:
            continue
        seen.add(key)
        out.append(pair)
    while len(out) < count:
        _key, pair = draw(rng)
        out.append(pair)
    return out


def sample_clone_pairs(split_fragments, n_train_pos: int, n_train_neg: int,
                       n_eval: int, seed: int):
    """Build (train, valid, test) pair sets from split fragment lists.

    ``split_fragments`` is a (train, valid, test) triple of lists of
    (item, problem_id). Train pairs are n_train_pos same-problem and
    n_train_neg cross-problem pairs; valid/test each get n_eval uniformly
    random unordered pairs regardless of label. Labels are +1 when the
    problem ids match, else -1.
    """
    train_frags, valid_frags, test_frags = split_fragments

    def count_pos(frags) -> int:
        byp: dict = {}
        for _item, pid in frags:
            byp[pid] = byp.get(pid, 0) + 1
        return sum(k * (k - 1) // 2 for k in byp.values())

    def make_train(rng: np.random.Generator):
        groups: dict = {}
        for i, (_item, pid) in enumerate(train_frags):
            groups.setdefault(pid, []).append(i)
        elig = sorted(pid for pid, idxs in groups.items() if len(idxs) >= 2)
        if not elig:
            raise InsufficientFragments(
                "no problem has 2+ train fragments for positive pairs")
        if len(groups) < 2:
            raise InsufficientFragments(
                "need fragments from 2+ problems for negative pairs")
        weights = np.array([len(groups[p]) * (len(groups[p]) - 1) / 2
                            for p in elig])
        pos_population = int(weights.sum())
        weights = weights / weights.sum()
        n = len(train_frags)
        neg_population = n * (n - 1) // 2 - count_pos(train_frags)

        def draw_pos(rng):
            pid = elig[int(rng.choice(len(elig), p=weights))]
            idxs = groups[pid]
            a, b = rng.choice(len(idxs), size=2, replace=False)
            i, j = idxs[int(a)], idxs[int(b)]
            if i > j:
                i, j = j, i
            return (i, j), _pair(train_frags, i, j)

        def draw_neg(rng):
            while True:
                i, j = rng.choice(n, size=2, replace=False)
                i, j = int(i), int(j)
                if train_frags[i][1] == train_frags[j][1]:
                    continue
                if i > j:
                    i, j = j, i
                return (i, j), _pair(train_frags, i, j)

        pos = _distinct_pairs(rng, draw_pos, pos_population, n_train_pos)
        neg = _distinct_pairs(rng, draw_neg, neg_population, n_train_neg)
        return pos + neg

    def make_eval(frags, rng: np.random.Generator):
        n = len(frags)
        if n < 2:
            raise InsufficientFragments("need 2+ fragments for eval pairs")
        population = n * (n - 1) // 2

        def draw(rng):
            i, j = rng.choice(n, size=2, replace=False)
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            return (i, j), _pair(frags, i, j)

        return _distinct_pairs(rng, draw, population, n_eval)

    train_pairs = make_train(_seeded_rng(seed, "pairs", "train"))
    valid_pairs = make_eval(valid_frags, _seeded_rng(seed, "pairs", "valid"))
    test_pairs = make_eval(test_frags, _seeded_rng(seed, "pairs", "test"))
    return train_pairs, valid_pairs, test_pairs


def _pair(frags, i: int, j: int) -> ClonePair:
    item_i, pid_i = frags[i]
    item_j, pid_j = frags[j]
    return ClonePair(item_i, item_j, 1 if pid_i == pid_j else -1)


# --- fit loop ---------------------------------------------------------------------


@dataclass
class FitResult:
    history: list[dict]
    best_epoch: int
    best_metric: float


def fit(train_set: Sequence, store: ParamStore, state: AdamState,
        config: ModelConfig, loss_fn: Callable, metric_fn: Callable,
        epochs: int, batch_size: int = 32,
        patience: Optional[int] = None,
        log_fn: Optional[Callable[[dict], None]] = None) -> FitResult:
    """Epoch loop with best-validation checkpointing.

    ``metric_fn(store)`` scores the validation split after each epoch; the
    parameter values and optimizer state of the best epoch are restored at
    the end. ``patience`` stops early after that many epochs without
    improvement.
    """
    history: list[dict] = []
    best_metric = -np.inf
    best_epoch = -1
    best_values = store.values_snapshot()
    best_state = state.snapshot()
    for epoch in range(epochs):
        start = time.monotonic()
        mean_loss = train_epoch(train_set, store, state, config, loss_fn,
                                batch_size=batch_size, epoch=epoch)
        val_metric = metric_fn(store)
        entry = {
            "epoch": epoch,
            "mean_loss": float(mean_loss),
            "val_metric": float(val_metric),
            "wall_seconds": time.monotonic() - start,
        }
        history.append(entry)
        if log_fn is not None:
            log_fn(entry)
        if val_metric > best_metric:
            best_metric = val_metric
            best_epoch = epoch
            best_values = store.values_snapshot()
            best_state = state.snapshot()
        elif patience is not None and epoch - best_epoch >= patience:
            break
    store.load_values(best_values)
    state.restore(best_state)
    return FitResult(history, best_epoch, float(best_metric))
