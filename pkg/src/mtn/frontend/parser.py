"""Recursive-descent parser for the C subset.

Grammar (no preprocessor, pointers, structs, typedefs or multi-dimensional
arrays):

    translation-unit := (func-def | decl-stmt)*
    func-def   := type ident "(" param-list? ")" compound
    param-list := decl ("," decl)*
    decl-stmt  := decl ("," init-declarator)* ";"
    decl       := type ident ("[" expr "]")? ("=" expr)?
    compound   := "{" statement* "}"
    statement  := compound | if | while | do-while | for | switch
                | "return" expr? ";" | "break" ";" | "continue" ";"
                | decl-stmt | ";" | expr ";"
    for        := "for" "(" (decl | expr)? ";" expr? ";" expr? ")" statement
    switch     := "switch" "(" expr ")" "{" (case | default)* "}"
    case       := "case" expr ":" statement*
    default    := "default" ":" statement*

Expressions use standard C precedence for the operators in the lexer's
closed set; assignment is right-associative. Absent for-clauses are
normalized to an Empty leaf so For nodes always have exactly 4 children.
"""
from __future__ import annotations

from .lexer import Token, tokenize
from .nodes import AstNode

TYPE_KEYWORDS = frozenset({"int", "char", "float", "double", "void"})

_ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/="})

# Binary operator precedence levels, lowest binding first.
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]

_UNARY_OPS = frozenset({"!", "-", "+", "++", "--", "&"})


class ParseError(Exception):
    """First syntax failure; no recovery is attempted."""

    def __init__(self, expected: str, found: str, line: int, column: int):
        super().__init__(
            f"expected {expected}, found {found!r} at {line}:{column}")
        self.expected = expected
        self.found = found
        self.line = line
        self.column = column


_EOF = Token("eof", "<end of input>", 0, 0)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        if tokens:
            last = tokens[-1]
            self._eof = Token("eof", "<end of input>", last.line,
                              last.column + len(last.text))
        else:
            self._eof = Token("eof", "<end of input>", 1, 1)

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else self._eof

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("kw", "op", "punct")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(f"{text!r}", tok.text, tok.line, tok.column)
        return self.next()

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        return ParseError(expected, tok.text, tok.line, tok.column)

    # --- declarations -----------------------------------------------------

    def at_type(self) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text in TYPE_KEYWORDS

    def parse_type(self) -> AstNode:
        tok = self.peek()
        if not self.at_type():
            raise self.fail("type name")
        self.next()
        return AstNode("IdentifierType", tok.text, span=(tok.line, tok.column))

    def parse_declarator(self, type_tok_value: str, type_span) -> AstNode:
        name = self.peek()
        if name.kind != "ident":
            raise self.fail("identifier")
        self.next()
        children = [AstNode("IdentifierType", type_tok_value, span=type_span)]
        if self.accept("["):
            children.append(self.parse_expression())
            self.expect("]")
        if self.accept("="):
            children.append(self.parse_expression())
        return AstNode("Decl", name.text, children,
                       span=(name.line, name.column))

    def parse_decl_group(self) -> AstNode:
        """type declarator ("," declarator)*; no trailing semicolon."""
        type_node = self.parse_type()
        decls = [self.parse_declarator(type_node.value, type_node.span)]
        while self.accept(","):
            decls.append(self.parse_declarator(type_node.value, type_node.span))
        if len(decls) == 1:
            return decls[0]
        return AstNode("DeclList", None, decls, span=decls[0].span)

    # --- top level --------------------------------------------------------

    def parse_translation_unit(self) -> AstNode:
        items: list[AstNode] = []
        while self.peek().kind != "eof":
            items.append(self.parse_top_level())
        return AstNode("TranslationUnit", None, items, span=(1, 1))

    def parse_top_level(self) -> AstNode:
        if not self.at_type():
            raise self.fail("type name")
        # type ident "(" starts a function definition.
        if self.peek(1).kind == "ident" and self.peek(2).text == "(":
            return self.parse_func_def()
        group = self.parse_decl_group()
        self.expect(";")
        return group

    def parse_func_def(self) -> AstNode:
        type_tok = self.next()
        name = self.next()
        self.expect("(")
        params: list[AstNode] = []
        if not self.at(")"):
            params.append(self.parse_param())
            while self.accept(","):
                params.append(self.parse_param())
        self.expect(")")
        body = self.parse_compound()
        decl = AstNode("FuncDecl", None, [
            AstNode("ID", name.text, span=(name.line, name.column)),
            AstNode("ParamList", None, params, span=(name.line, name.column)),
        ], span=(name.line, name.column))
        return AstNode("FuncDef", None, [decl, body],
                       span=(type_tok.line, type_tok.column))

    def parse_param(self) -> AstNode:
        type_node = self.parse_type()
        return self.parse_declarator(type_node.value, type_node.span)

    # --- statements -------------------------------------------------------

    def parse_compound(self) -> AstNode:
        brace = self.expect("{")
        stmts: list[AstNode] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.fail("'}'")
            stmts.append(self.parse_statement())
        self.expect("}")
        return AstNode("Compound", None, stmts, span=(brace.line, brace.column))

    def parse_statement(self) -> AstNode:
        tok = self.peek()
        if self.at("{"):
            return self.parse_compound()
        if self.at("if"):
            return self.parse_if()
        if self.at("while"):
            return self.parse_while()
        if self.at("do"):
            return self.parse_do_while()
        if self.at("for"):
            return self.parse_for()
        if self.at("switch"):
            return self.parse_switch()
        if self.at("return"):
            self.next()
            children = []
            if not self.at(";"):
                children.append(self.parse_expression())
            self.expect(";")
            return AstNode("Return", None, children, span=(tok.line, tok.column))
        if self.at("break"):
            self.next()
            self.expect(";")
            return AstNode("Break", span=(tok.line, tok.column))
        if self.at("continue"):
            self.next()
            self.expect(";")
            return AstNode("Continue", span=(tok.line, tok.column))
        if self.at(";"):
            self.next()
            return AstNode("EmptyStatement", span=(tok.line, tok.column))
        if self.at_type():
            group = self.parse_decl_group()
            self.expect(";")
            return group
        expr = self.parse_expression()
        self.expect(";")
        return expr

    def parse_if(self) -> AstNode:
        tok = self.expect("if")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        then = self.parse_statement()
        children = [cond, then]
        if self.accept("else"):
            children.append(self.parse_statement())
        return AstNode("If", None, children, span=(tok.line, tok.column))

    def parse_while(self) -> AstNode:
        tok = self.expect("while")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return AstNode("While", None, [cond, body], span=(tok.line, tok.column))

    def parse_do_while(self) -> AstNode:
        tok = self.expect("do")
        body = self.parse_statement()
        self.expect("while")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        self.expect(";")
        return AstNode("DoWhile", None, [cond, body],
                       span=(tok.line, tok.column))

    def parse_for(self) -> AstNode:
        tok = self.expect("for")
        self.expect("(")
        if self.at(";"):
            init = AstNode("Empty", span=(self.peek().line, self.peek().column))
        elif self.at_type():
            init = self.parse_decl_group()
        else:
            init = self.parse_expression()
        self.expect(";")
        if self.at(";"):
            cond = AstNode("Empty", span=(self.peek().line, self.peek().column))
        else:
            cond = self.parse_expression()
        self.expect(";")
        if self.at(")"):
            step = AstNode("Empty", span=(self.peek().line, self.peek().column))
        else:
            step = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return AstNode("For", None, [init, cond, step, body],
                       span=(tok.line, tok.column))

    def parse_switch(self) -> AstNode:
        tok = self.expect("switch")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        brace = self.expect("{")
        branches: list[AstNode] = []
        while not self.at("}"):
            if self.at("case"):
                case_tok = self.next()
                label = self.parse_expression()
                self.expect(":")
                stmts = self.parse_branch_body()
                branches.append(AstNode("Case", None, [label, *stmts],
                                        span=(case_tok.line, case_tok.column)))
            elif self.at("default"):
                def_tok = self.next()
                self.expect(":")
                stmts = self.parse_branch_body()
                branches.append(AstNode("Default", None, stmts,
                                        span=(def_tok.line, def_tok.column)))
            else:
                raise self.fail("'case', 'default' or '}'")
        self.expect("}")
        body = AstNode("Compound", None, branches,
                       span=(brace.line, brace.column))
        return AstNode("Switch", None, [cond, body],
                       span=(tok.line, tok.column))

    def parse_branch_body(self) -> list[AstNode]:
        stmts: list[AstNode] = []
        while not (self.at("case") or self.at("default") or self.at("}")):
            if self.peek().kind == "eof":
                raise self.fail("'}'")
            stmts.append(self.parse_statement())
        return stmts

    # --- expressions --------------------------------------------------------

    def parse_expression(self) -> AstNode:
        lhs = self.parse_binary(0)
        tok = self.peek()
        if tok.kind == "op" and tok.text in _ASSIGN_OPS:
            self.next()
            rhs = self.parse_expression()  # right-associative
            return AstNode("Assignment", tok.text, [lhs, rhs],
                           span=(tok.line, tok.column))
        return lhs

    def parse_binary(self, level: int) -> AstNode:
        if level >= len(_BINARY_LEVELS):
            return self.parse_unary()
        ops = _BINARY_LEVELS[level]
        node = self.parse_binary(level + 1)
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ops:
                self.next()
                rhs = self.parse_binary(level + 1)
                node = AstNode("BinaryOp", tok.text, [node, rhs],
                               span=(tok.line, tok.column))
            else:
                return node

    def parse_unary(self) -> AstNode:
        tok = self.peek()
        if tok.kind == "op" and tok.text in _UNARY_OPS:
            self.next()
            operand = self.parse_unary()
            return AstNode("UnaryOp", tok.text, [operand],
                           span=(tok.line, tok.column))
        return self.parse_postfix()

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        while True:
            tok = self.peek()
            if self.at("["):
                self.next()
                index = self.parse_expression()
                self.expect("]")
                node = AstNode("ArrayRef", None, [node, index],
                               span=(tok.line, tok.column))
            elif tok.kind == "op" and tok.text in ("++", "--"):
                self.next()
                node = AstNode("UnaryOp", "p" + tok.text, [node],
                               span=(tok.line, tok.column))
            else:
                return node

    def parse_primary(self) -> AstNode:
        tok = self.peek()
        if self.at("("):
            self.next()
            node = self.parse_expression()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.next()
            ident = AstNode("ID", tok.text, span=(tok.line, tok.column))
            if self.at("("):
                paren = self.next()
                args: list[AstNode] = []
                if not self.at(")"):
                    args.append(self.parse_expression())
                    while self.accept(","):
                        args.append(self.parse_expression())
                self.expect(")")
                arglist = AstNode("ExprList", None, args,
                                  span=(paren.line, paren.column))
                return AstNode("FuncCall", None, [ident, arglist],
                               span=(tok.line, tok.column))
            return ident
        if tok.kind in ("int", "float", "char", "string"):
            self.next()
            return AstNode("Constant", tok.text, span=(tok.line, tok.column))
        raise self.fail("expression")


def parse(tokens: list[Token]) -> AstNode:
    """Parse a token list into a TranslationUnit AST."""
    parser = _Parser(tokens)
    return parser.parse_translation_unit()


def parse_source(source: str) -> AstNode:
    """Tokenize and parse C-subset source text."""
    return parse(tokenize(source))
