"""Walk through the C-subset frontend: tokens, trees, interchange JSON.

Run: python3 demos/01_parse_and_inspect.py
"""
from mtn.frontend import (
    from_interchange,
    iter_nodes,
    node_token,
    parse_source,
    to_interchange,
    tokenize,
)

SOURCE = """\
int main() {
    int i = 0;
    int total = 0;
    while (i < 10) {
        total = total + i;
        i = i + 1;
    }
    return total;
}
"""

# Tokens carry their kind, text and 1-based position.
print("== tokens (first 10)")
for tok in tokenize(SOURCE)[:10]:
    print(f"  {tok.kind:6} {tok.text!r:10} at {tok.line}:{tok.column}")

# The parser produces a typed, ordered tree. Node kinds form a closed set;
# identifiers, constants and operators keep their text in .value.
ast = parse_source(SOURCE)
print("\n== tree")
print(repr(ast))

# Two vocabulary views of the same node: structural only, or with lexical
# content attached. The model trains on either.
loop = ast.children[0].children[1].children[2]
print("\n== node tokens for the while-loop condition")
for node in iter_nodes(loop.children[0]):
    print(f"  {node_token(node, 'types-only'):10} | "
          f"{node_token(node, 'with-ids')}")

# Canonical JSON interchange: deterministic bytes, lossless round-trip.
doc = to_interchange(ast)
assert from_interchange(doc) == ast
print(f"\n== interchange document: {len(doc)} bytes, round-trips exactly")
print(doc[:120] + "...")
