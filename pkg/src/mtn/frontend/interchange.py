"""Canonical JSON interchange format for ASTs.

A document is the recursive object {"kind": str, "value": str|null,
"children": [...]} with the fields in exactly that order. Canonical mode
emits no extraneous whitespace, so serialization is byte-deterministic.
Spans are not serialized; round-tripping preserves structure, values and
child order.
"""
from __future__ import annotations

import json

from .nodes import NODE_KINDS, VALUE_KINDS, AstNode


class MalformedDocument(Exception):
    def __init__(self, path: str, reason: str):
        super().__init__(f"malformed document at {path}: {reason}")
        self.path = path
        self.reason = reason


class UnknownKind(Exception):
    def __init__(self, name: object, path: str = "$"):
        super().__init__(f"unknown node kind {name!r} at {path}")
        self.name = name
        self.path = path


def _encode(node: AstNode) -> dict:
    return {
        "kind": node.kind,
        "value": node.value,
        "children": [_encode(c) for c in node.children],
    }


def to_interchange(node: AstNode, indent: int | None = None) -> str:
    """Serialize an AST. indent=None is the canonical compact form."""
    obj = _encode(node)
    if indent is None:
        return json.dumps(obj, separators=(",", ":"))
    return json.dumps(obj, indent=indent)


def _decode(obj: object, path: str) -> AstNode:
    if not isinstance(obj, dict):
        raise MalformedDocument(path, f"expected object, got {type(obj).__name__}")
    extra = set(obj) - {"kind", "value", "children"}
    if extra:
        raise MalformedDocument(path, f"unexpected keys {sorted(extra)}")
    missing = {"kind", "value", "children"} - set(obj)
    if missing:
        raise MalformedDocument(path, f"missing keys {sorted(missing)}")
    kind = obj["kind"]
    if not isinstance(kind, str):
        raise MalformedDocument(path + ".kind", "kind must be a string")
    if kind not in NODE_KINDS:
        raise UnknownKind(kind, path + ".kind")
    value = obj["value"]
    if value is not None and not isinstance(value, str):
        raise MalformedDocument(path + ".value", "value must be a string or null")
    if value is None and kind in VALUE_KINDS:
        raise MalformedDocument(path + ".value", f"{kind} requires a value")
    if value is not None and kind not in VALUE_KINDS:
        raise MalformedDocument(path + ".value", f"{kind} must not carry a value")
    children_obj = obj["children"]
    if not isinstance(children_obj, list):
        raise MalformedDocument(path + ".children", "children must be a list")
    children = [
        _decode(child, f"{path}.children[{i}]")
        for i, child in enumerate(children_obj)
    ]
    return AstNode(kind, value, children)


def from_interchange(text: str) -> AstNode:
    """Parse an interchange document back into an AST."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument("$", f"invalid JSON: {exc}") from exc
    return _decode(obj, "$")
