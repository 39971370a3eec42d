"""Typed AST nodes for the C subset and their structural contracts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

# Closed set of node kinds. Parsing, interchange decoding and model dispatch
# all reject anything outside it.
NODE_KINDS = frozenset({
    "TranslationUnit", "FuncDef", "FuncDecl", "ParamList", "Decl", "DeclList",
    "IdentifierType", "Compound", "If", "While", "DoWhile", "For", "Switch",
    "Case", "Default", "Return", "Break", "Continue", "EmptyStatement",
    "Empty", "Assignment", "BinaryOp", "UnaryOp", "FuncCall", "ExprList",
    "ArrayRef", "ID", "Constant",
})

# Kinds whose children form an arbitrary-length homogeneous sequence.
SEQ_KINDS = frozenset({
    "TranslationUnit", "Compound", "ParamList", "DeclList", "ExprList",
    "Default",
})

# Kinds that carry a lexical value (name, literal text or operator symbol).
VALUE_KINDS = frozenset({
    "ID", "Constant", "BinaryOp", "UnaryOp", "Assignment", "Decl",
    "IdentifierType",
})

# kind -> (min_children, max_children); None means unbounded.
ARITY = {
    "TranslationUnit": (0, None),
    "FuncDef": (2, 2),
    "FuncDecl": (2, 2),
    "ParamList": (0, None),
    "Decl": (1, 3),
    "DeclList": (1, None),
    "IdentifierType": (0, 0),
    "Compound": (0, None),
    "If": (2, 3),
    "While": (2, 2),
    "DoWhile": (2, 2),
    "For": (4, 4),
    "Switch": (2, 2),
    "Case": (1, None),
    "Default": (0, None),
    "Return": (0, 1),
    "Break": (0, 0),
    "Continue": (0, 0),
    "EmptyStatement": (0, 0),
    "Empty": (0, 0),
    "Assignment": (2, 2),
    "BinaryOp": (2, 2),
    "UnaryOp": (1, 1),
    "FuncCall": (2, 2),
    "ExprList": (0, None),
    "ArrayRef": (2, 2),
    "ID": (0, 0),
    "Constant": (0, 0),
}


class AstValidationError(Exception):
    """A node violates the structural contract (kind, value or arity)."""


@dataclass(eq=False, repr=False)
class AstNode:
    """One node of a typed, ordered AST.

    ``value`` holds lexical content (identifier name, literal text, operator
    symbol) and is present exactly on the kinds in ``VALUE_KINDS``. ``span``
    is the 1-based (line, column) of the originating token; it participates
    in neither equality nor serialization.
    """

    kind: str
    value: Optional[str] = None
    children: list["AstNode"] = field(default_factory=list)
    span: Optional[tuple[int, int]] = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AstNode):
            return NotImplemented
        # Iterative structural comparison; spans deliberately ignored.
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a.kind != b.kind or a.value != b.value:
                return False
            if len(a.children) != len(b.children):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        head = self.kind if self.value is None else f"{self.kind}:{self.value}"
        if not self.children:
            return head
        return f"{head}({', '.join(repr(c) for c in self.children)})"


def iter_nodes(root: AstNode) -> Iterator[AstNode]:
    """Pre-order traversal (node first, then children left to right)."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def validate_ast(root: AstNode) -> None:
    """Check the closed-kind, value-carrying and arity invariants.

    Raises AstValidationError on the first violation found.
    """
    for node in iter_nodes(root):
        if node.kind not in NODE_KINDS:
            raise AstValidationError(f"unknown node kind {node.kind!r}")
        lo, hi = ARITY[node.kind]
        n = len(node.children)
        if n < lo or (hi is not None and n > hi):
            raise AstValidationError(
                f"{node.kind} has {n} children, expected "
                f"{lo if hi == lo else f'{lo}..{hi if hi is not None else chr(8734)}'}"
            )
        if node.value is not None and node.kind not in VALUE_KINDS:
            raise AstValidationError(f"{node.kind} must not carry a value")
        if node.value is None and node.kind in VALUE_KINDS:
            raise AstValidationError(f"{node.kind} must carry a value")


def node_token(node: AstNode, mode: str) -> str:
    """Vocabulary token for a node.

    mode="types-only" strips all lexical content and keeps the kind name;
    mode="with-ids" appends the value as "kind:value" on value-carrying
    nodes.
    """
    if mode == "types-only":
        return node.kind
    if mode == "with-ids":
        if node.value is None:
            return node.kind
        return f"{node.kind}:{node.value}"
    raise ValueError(f"unknown identifier mode {mode!r}")
