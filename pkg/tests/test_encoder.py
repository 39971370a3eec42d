"""Encoder tests: dispatch, analytic leaf values, reduction, order effects."""
import itertools

import numpy as np
import pytest

from mtn.frontend import AstNode, parse_source
from mtn.model import (
    ModelConfig,
    build_vocab,
    dispatch,
    encode,
    encode_ast,
    encode_seq_baseline,
    init_params,
    preorder_tokens,
)

ALL_MODULES = ("FuncDef", "While", "DoWhile", "For", "If", "Switch",
               "Case", "Seq")


def _config(variant="mtn-b", d=6, seed=2, asts=(), **kw):
    vocab = build_vocab(asts, kw.pop("identifier_mode", "types-only"))
    return ModelConfig(variant=variant, hidden=d, vocab=vocab, seed=seed, **kw)


def _zero_store(config):
    store = init_params(config)
    for t in store.tensors.values():
        t.data[...] = 0.0
    return store


# --- dispatch ------------------------------------------------------------------


def test_dispatch_rules():
    cfg = _config()
    assert dispatch(AstNode("If", None, [AstNode("Empty"), AstNode("Empty")]),
                    cfg) == "If"
    compound = AstNode("Compound", None, [AstNode("Break")] * 3)
    assert dispatch(compound, cfg) == "seq"
    assert dispatch(AstNode("ID", "i"), cfg) == "default"
    assert dispatch(AstNode("Compound"), cfg) == "default"  # no children
    assert dispatch(AstNode("BinaryOp", "+",
                            [AstNode("ID", "a"), AstNode("ID", "b")]),
                    cfg) == "default"


def test_dispatch_disabled_falls_back():
    cfg_no_if = _config(disabled_modules=("If",))
    if_node = AstNode("If", None, [AstNode("Empty"), AstNode("Empty")])
    assert dispatch(if_node, cfg_no_if) == "default"
    cfg_no_seq = _config(disabled_modules=("Seq",))
    compound = AstNode("Compound", None, [AstNode("Break")])
    assert dispatch(compound, cfg_no_seq) == "default"


def test_dispatch_trace_on_loop_fragment():
    ast = parse_source("int f(){ while (i < 10) { i = i + 1; } }")
    cfg = _config(asts=[ast])
    seen = {}
    for node in _walk(ast):
        seen.setdefault(node.kind, dispatch(node, cfg))
    assert seen["While"] == "While"
    assert seen["Compound"] == "seq"
    assert seen["BinaryOp"] == "default"
    assert seen["Assignment"] == "default"
    assert seen["ID"] == "default"
    assert seen["Constant"] == "default"


def _walk(node):
    yield node
    for c in node.children:
        yield from _walk(c)


# --- analytic values ---------------------------------------------------------------


def test_single_leaf_zero_params_gives_zero_vector():
    ast = AstNode("Empty")
    cfg = _config(asts=[ast])
    store = _zero_store(cfg)
    out = encode_ast(ast, store, cfg)
    assert np.all(out.data == 0.0)


def test_zero_params_whole_tree_gives_zero_vector():
    ast = parse_source("int f(){ if (x) { y = 1; } else { y = 2; } }")
    cfg = _config(asts=[ast])
    out = encode_ast(ast, _zero_store(cfg), cfg)
    assert np.all(out.data == 0.0)


# --- baseline reduction ---------------------------------------------------------


def test_all_disabled_equals_treelstm_bitwise():
    sources = [
        "int main(){ int i; for (i = 0; i < 4; i = i + 1) { } }",
        "int f(int x){ if (x > 0) { return 1; } else { return 2; } }",
        "int g(){ int s = 0; do { s = s + 1; } while (s < 5); return s; }",
        "int h(int x){ switch (x) { case 1: return 1; default: return 0; } }",
    ]
    asts = [parse_source(s) for s in sources]
    cfg_mtn = _config(variant="mtn-b", asts=asts,
                      disabled_modules=ALL_MODULES)
    cfg_tree = _config(variant="treelstm", asts=asts)
    store_mtn = init_params(cfg_mtn)
    store_tree = init_params(cfg_tree)
    for ast in asts:
        a = encode_ast(ast, store_mtn, cfg_mtn)
        b = encode_ast(ast, store_tree, cfg_tree)
        assert np.array_equal(a.data, b.data)


def test_variants_differ_when_modules_enabled():
    ast = parse_source("int f(){ while (i < 3) { i = i + 1; } }")
    cfg_mtn = _config(variant="mtn-b", asts=[ast])
    cfg_tree = _config(variant="treelstm", asts=[ast])
    a = encode_ast(ast, init_params(cfg_mtn), cfg_mtn)
    b = encode_ast(ast, init_params(cfg_tree), cfg_tree)
    assert not np.array_equal(a.data, b.data)


# --- order sensitivity ---------------------------------------------------------------


_FIVE_LEAVES = ["Break", "Continue", "EmptyStatement", "Empty", "Return"]


def _compound_of(kinds):
    return AstNode("Compound", None, [AstNode(k) for k in kinds])


def test_seq_node_is_order_sensitive():
    base = _compound_of(_FIVE_LEAVES)
    cfg = _config(asts=[base])
    store = init_params(cfg)
    h0 = encode_ast(base, store, cfg).data
    diffs = []
    for perm in itertools.permutations(range(5)):
        tree = _compound_of([_FIVE_LEAVES[i] for i in perm])
        h = encode_ast(tree, store, cfg).data
        diffs.append(np.abs(h - h0).max())
    assert max(diffs) > 1e-8


def test_child_sum_node_is_order_invariant_bitwise():
    base = _compound_of(_FIVE_LEAVES)
    cfg = _config(asts=[base], disabled_modules=("Seq",))
    store = init_params(cfg)
    h0 = encode_ast(base, store, cfg).data
    for perm in itertools.permutations(range(5)):
        tree = _compound_of([_FIVE_LEAVES[i] for i in perm])
        h = encode_ast(tree, store, cfg).data
        assert np.array_equal(h, h0)


# --- sequential baseline ---------------------------------------------------------------


def test_preorder_token_order():
    ast = parse_source("int f(){ while (i < 10) { i = i + 1; } }")
    while_node = ast.children[0].children[1].children[0]
    assert preorder_tokens(while_node, "types-only") == [
        "While", "BinaryOp", "ID", "Constant", "Compound", "Assignment",
        "ID", "BinaryOp", "ID", "Constant"]


def test_seq_baseline_single_node_one_step():
    ast = AstNode("Empty")
    cfg = _config(variant="seq-lstm", asts=[ast])
    store = init_params(cfg)
    out = encode_seq_baseline(ast, store, cfg)
    assert out.shape == (cfg.hidden, 1)


def test_seq_baseline_zero_params_stays_zero():
    ast = AstNode("Compound", None, [AstNode("Break"), AstNode("Break")])
    cfg = _config(variant="seq-lstm", asts=[ast])
    store = _zero_store(cfg)
    out = encode(ast, store, cfg)
    assert np.all(out.data == 0.0)


def test_encode_dispatches_on_variant():
    ast = parse_source("int f(){ return 1; }")
    cfg = _config(variant="seq-lstm", asts=[ast])
    store = init_params(cfg)
    a = encode(ast, store, cfg)
    b = encode_seq_baseline(ast, store, cfg)
    assert np.array_equal(a.data, b.data)


def test_unknown_tokens_map_to_unk():
    train_ast = parse_source("int f(){ return 1; }")
    cfg = _config(asts=[train_ast], identifier_mode="with-ids")
    store = init_params(cfg)
    unseen = parse_source("int g(){ return zzz; }")
    out = encode(unseen, store, cfg)  # must not raise
    assert out.shape == (cfg.hidden, 1)
