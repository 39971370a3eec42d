"""Bottom-up AST encoders: unit dispatch, tree encoding, sequence baseline."""
from __future__ import annotations

from ..autodiff import Tensor, embed_row, sum_of
from ..frontend import SEQ_KINDS, AstNode, node_token
from .config import MODULE_TYPES, ModelConfig
from .modules import UnitState, lstm_last_hidden, module_forward, \
    mtn_unit_forward
from .params import ParamStore

_TYPED_KINDS = frozenset(MODULE_TYPES) - {"Seq"}


def dispatch(node: AstNode, config: ModelConfig) -> str:
    """Unit choice for one node: a typed module name, "seq" or "default".

    Typed kinds get their module unless disabled; sequence-typed kinds with
    at least one child get the Seq unit; everything else (leaves included)
    falls back to the child-sum default.
    """
    kind = node.kind
    disabled = config.disabled_modules
    if kind in _TYPED_KINDS and kind not in disabled:
        return kind
    if kind in SEQ_KINDS and node.children and "Seq" not in disabled:
        return "seq"
    return "default"


def _post_order(root: AstNode) -> list[AstNode]:
    order: list[AstNode] = []
    stack: list[tuple[AstNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    return order


def encode_ast(root: AstNode, store: ParamStore, config: ModelConfig) -> Tensor:
    """Root hidden state of the tree encoder (post-order, one unit per node)."""
    treelstm = config.variant == "treelstm"
    containers = store.containers
    default_container = containers["default"]
    modules = store.modules
    embedding = store.embedding
    vocab_get = config.vocab.get
    mode = config.identifier_mode
    for_outer_tanh = config.for_outer_tanh

    states: dict[int, UnitState] = {}
    for node in _post_order(root):
        child_states = [states.pop(id(c)) for c in node.children]
        x = embed_row(embedding, vocab_get(node_token(node, mode), 0))
        if treelstm:
            unit = "default"
        else:
            unit = dispatch(node, config)
        if unit == "default":
            h_tilde = (sum_of([s.h for s in child_states])
                       if child_states else None)
            container = default_container
        elif unit == "seq":
            h_tilde = module_forward("Seq", [s.h for s in child_states],
                                     modules["Seq"])
            container = containers.get("Seq", default_container)
        else:
            h_tilde = module_forward(unit, [s.h for s in child_states],
                                     modules[unit], for_outer_tanh)
            container = containers.get(unit, default_container)
        states[id(node)] = mtn_unit_forward(x, child_states, h_tilde, container)
    return states[id(root)].h


def preorder_tokens(root: AstNode, mode: str) -> list[str]:
    """Depth-first (pre-order) token sequence of a tree."""
    tokens: list[str] = []
    stack = [root]
    while stack:
        node = stack.pop()
        tokens.append(node_token(node, mode))
        stack.extend(reversed(node.children))
    return tokens


def encode_seq_baseline(root: AstNode, store: ParamStore,
                        config: ModelConfig) -> Tensor:
    """Sequential-LSTM baseline: scan the pre-order token sequence."""
    if store.seq_cell is None:
        raise ValueError("encode_seq_baseline requires the seq-lstm variant")
    xs = [embed_row(store.embedding, config.lookup(tok))
          for tok in preorder_tokens(root, config.identifier_mode)]
    return lstm_last_hidden(store.seq_cell, xs)


def encode(root: AstNode, store: ParamStore, config: ModelConfig) -> Tensor:
    """Variant-appropriate code vector for one AST."""
    if config.variant == "seq-lstm":
        return encode_seq_baseline(root, store, config)
    return encode_ast(root, store, config)
