"""C-subset frontend: tokenizer, parser, AST types and interchange format."""
from .nodes import (
    ARITY,
    NODE_KINDS,
    SEQ_KINDS,
    VALUE_KINDS,
    AstNode,
    AstValidationError,
    iter_nodes,
    node_token,
    validate_ast,
)
from .lexer import (
    KEYWORDS,
    LexError,
    Token,
    UnknownCharacter,
    UnterminatedLiteral,
    tokenize,
)
from .parser import ParseError, parse, parse_source
from .interchange import (
    MalformedDocument,
    UnknownKind,
    from_interchange,
    to_interchange,
)

__all__ = [
    "ARITY", "NODE_KINDS", "SEQ_KINDS", "VALUE_KINDS",
    "AstNode", "AstValidationError", "iter_nodes", "node_token",
    "validate_ast",
    "KEYWORDS", "LexError", "Token", "UnknownCharacter",
    "UnterminatedLiteral", "tokenize",
    "ParseError", "parse", "parse_source",
    "MalformedDocument", "UnknownKind", "from_interchange", "to_interchange",
]
