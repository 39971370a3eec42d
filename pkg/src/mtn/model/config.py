"""Encoder configuration and vocabulary handling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from ..frontend import AstNode, iter_nodes, node_token

VARIANTS = ("mtn-a", "mtn-b", "treelstm", "seq-lstm")
IDENTIFIER_MODES = ("types-only", "with-ids")

# Node kinds with a dedicated neural module.
MODULE_TYPES = ("FuncDef", "While", "DoWhile", "For", "If", "Switch",
                "Case", "Seq")

UNK_TOKEN = "<unk>"
UNK_INDEX = 0


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to rebuild an encoder: variant, sizes, vocabulary.

    ``hidden`` is the shared dimensionality d of node embeddings, hidden
    states and memory cells. ``vocab`` maps tokens to indices with index 0
    reserved for unknowns. ``for_outer_tanh`` selects between the two
    published forms of the For module (outer tanh on by default).
    """

    variant: str
    hidden: int
    vocab: Mapping[str, int] = field(default_factory=dict)
    identifier_mode: str = "types-only"
    disabled_modules: tuple[str, ...] = ()
    seed: int = 0
    for_outer_tanh: bool = True
    n_classes: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.hidden < 1:
            raise ValueError("hidden size must be >= 1")
        if self.identifier_mode not in IDENTIFIER_MODES:
            raise ValueError(f"unknown identifier mode {self.identifier_mode!r}")
        disabled = tuple(sorted(set(self.disabled_modules)))
        for m in disabled:
            if m not in MODULE_TYPES:
                raise ValueError(f"unknown module type {m!r}")
        if disabled and self.variant not in ("mtn-a", "mtn-b"):
            raise ValueError("disabled_modules requires an mtn variant")
        object.__setattr__(self, "disabled_modules", disabled)
        if self.n_classes is not None and self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")

    @property
    def enabled_modules(self) -> tuple[str, ...]:
        return tuple(m for m in MODULE_TYPES if m not in self.disabled_modules)

    def vocab_rows(self) -> int:
        """Number of embedding rows (the UNK slot plus known tokens)."""
        return max(self.vocab.values(), default=0) + 1

    def lookup(self, token: str) -> int:
        return self.vocab.get(token, UNK_INDEX)

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "hidden": self.hidden,
            "vocab": dict(self.vocab),
            "identifier_mode": self.identifier_mode,
            "disabled_modules": list(self.disabled_modules),
            "seed": self.seed,
            "for_outer_tanh": self.for_outer_tanh,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ModelConfig":
        return cls(
            variant=obj["variant"],
            hidden=obj["hidden"],
            vocab=obj["vocab"],
            identifier_mode=obj["identifier_mode"],
            disabled_modules=tuple(obj["disabled_modules"]),
            seed=obj["seed"],
            for_outer_tanh=obj["for_outer_tanh"],
            n_classes=obj["n_classes"],
        )


def build_vocab(asts: Iterable[AstNode], identifier_mode: str) -> dict[str, int]:
    """Token -> index map over the given trees; index 0 is the UNK slot.

    Tokens are sorted before numbering, so the result is independent of
    tree order.
    """
    tokens: set[str] = set()
    for root in asts:
        for node in iter_nodes(root):
            tokens.add(node_token(node, identifier_mode))
    tokens.discard(UNK_TOKEN)
    vocab = {UNK_TOKEN: UNK_INDEX}
    for i, tok in enumerate(sorted(tokens), start=1):
        vocab[tok] = i
    return vocab
