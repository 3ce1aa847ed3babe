"""Recursive-descent parser with an explicit nesting bound.

Grammar (``docs/grammar.md`` has the full version)::

    program   := function*
    function  := "fn" IDENT "(" [param ("," param)*] ")" "->" type block
    block     := "{" stmt* "}"
    stmt      := "let" IDENT [":" type] "=" expr ";"
               | IDENT "=" expr ";"
               | "if" expr block ["else" (block | if-stmt)]
               | "while" expr block
               | "return" expr ";"
               | expr ";"
    expr      := or ;  or := and ("||" and)* ;  and := cmp ("&&" cmp)*
    cmp       := add (("<"|"<="|">"|">="|"=="|"!=") add)*
    add       := mul (("+"|"-") mul)* ;  mul := unary (("*"|"/") unary)*
    unary     := "-" unary | primary
    primary   := INT | BOOL | IDENT | IDENT "(" args ")" | "(" expr ")"
"""

from __future__ import annotations

from .ast import (
    Assign, BinOp, Block, BoolLit, Call, Expr, ExprStmt, FunctionDecl, If, IntLit,
    Let, Neg, Param, Pos, Program, Return, Stmt, Type, Var, While,
)
from .lexer import CompileError, Token, TokenKind

DEFAULT_MAX_DEPTH = 64

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


class ParseError(CompileError):
    def __init__(self, expected: str, found: Token | None, line: int = 0, col: int = 0):
        self.expected = expected
        self.found = found
        what = "end of input" if found is None else repr(found.text)
        if found is not None:
            line, col = found.line, found.col
        super().__init__(f"expected {expected}, found {what}", line, col)


class ParseDepthExceeded(ParseError):
    def __init__(self, limit: int, found: Token | None, line: int = 0, col: int = 0):
        self.limit = limit
        super().__init__(f"nesting depth at most {limit}", found, line, col)
        self.message = f"nesting deeper than {limit} levels"


class _Parser:
    def __init__(self, tokens: list[Token], max_depth: int):
        self.toks = tokens
        self.i = 0
        self.max_depth = max_depth
        self.depth = 0

    # -- token helpers

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text and tok.kind in (
            TokenKind.OP, TokenKind.PUNCT, TokenKind.KEYWORD)

    def end_pos(self) -> tuple[int, int]:
        if not self.toks:
            return 1, 1
        last = self.toks[-1]
        return last.line, last.col + len(last.text)

    def fail(self, expected: str) -> ParseError:
        return ParseError(expected, self.peek(), *self.end_pos())

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            raise self.fail("identifier")
        self.i += 1
        return tok

    def enter(self) -> None:
        self.depth += 1
        if self.depth > self.max_depth:
            raise ParseDepthExceeded(self.max_depth, self.peek(), *self.end_pos())

    def leave(self) -> None:
        self.depth -= 1

    # -- declarations

    def program(self) -> Program:
        fns = []
        while self.peek() is not None:
            fns.append(self.function())
        return Program(tuple(fns), token_count=len(self.toks))

    def type_(self) -> Type:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.KEYWORD and tok.text in ("int", "bool"):
            self.i += 1
            return Type(tok.text)
        raise self.fail("type")

    def function(self) -> FunctionDecl:
        kw = self.expect("fn")
        name = self.expect_ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident()
                self.expect(":")
                params.append(Param(pname.text, self.type_(), Pos(pname.line, pname.col)))
                if not self.at(","):
                    break
                self.i += 1
        self.expect(")")
        self.expect("->")
        ret = self.type_()
        body = self.block()
        return FunctionDecl(name.text, tuple(params), ret, body, Pos(kw.line, kw.col))

    def block(self) -> Block:
        open_ = self.expect("{")
        self.enter()
        stmts = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.fail("'}'")
            stmts.append(self.statement())
        self.expect("}")
        self.leave()
        return Block(tuple(stmts), Pos(open_.line, open_.col))

    def statement(self) -> Stmt:
        tok = self.peek()
        pos = Pos(tok.line, tok.col)
        if self.at("let"):
            self.i += 1
            name = self.expect_ident()
            declared = None
            if self.at(":"):
                self.i += 1
                declared = self.type_()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return Let(name.text, declared, value, pos)
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.i += 1
            cond = self.expr()
            return While(cond, self.block(), pos)
        if self.at("return"):
            self.i += 1
            value = self.expr()
            self.expect(";")
            return Return(value, pos)
        nxt = self.peek(1)
        if (tok.kind is TokenKind.IDENT and nxt is not None
                and nxt.kind is TokenKind.OP and nxt.text == "="):
            self.i += 2
            value = self.expr()
            self.expect(";")
            return Assign(tok.text, value, pos)
        value = self.expr()
        self.expect(";")
        return ExprStmt(value, pos)

    def if_stmt(self) -> If:
        kw = self.expect("if")
        cond = self.expr()
        then = self.block()
        orelse = None
        if self.at("else"):
            self.i += 1
            if self.at("if"):
                self.enter()
                nested = self.if_stmt()
                self.leave()
                orelse = Block((nested,), nested.pos)
            else:
                orelse = self.block()
        return If(cond, then, orelse, Pos(kw.line, kw.col))

    # -- expressions

    def expr(self) -> Expr:
        self.enter()
        e = self.or_()
        self.leave()
        return e

    def _binary_level(self, ops, sub):
        left = sub()
        while True:
            tok = self.peek()
            if tok is None or tok.kind is not TokenKind.OP or tok.text not in ops:
                return left
            self.i += 1
            right = sub()
            left = BinOp(tok.text, left, right, Pos(tok.line, tok.col))

    def or_(self) -> Expr:
        return self._binary_level(("||",), self.and_)

    def and_(self) -> Expr:
        return self._binary_level(("&&",), self.cmp)

    def cmp(self) -> Expr:
        return self._binary_level(_CMP_OPS, self.add)

    def add(self) -> Expr:
        return self._binary_level(("+", "-"), self.mul)

    def mul(self) -> Expr:
        return self._binary_level(("*", "/"), self.unary)

    def unary(self) -> Expr:
        if self.at("-"):
            tok = self.toks[self.i]
            self.i += 1
            self.enter()
            operand = self.unary()
            self.leave()
            return Neg(operand, Pos(tok.line, tok.col))
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail("expression")
        pos = Pos(tok.line, tok.col)
        if tok.kind is TokenKind.INT:
            self.i += 1
            return IntLit(int(tok.text), pos)
        if tok.kind is TokenKind.BOOL:
            self.i += 1
            return BoolLit(tok.text == "true", pos)
        if tok.kind is TokenKind.IDENT:
            self.i += 1
            if self.at("("):
                self.i += 1
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.i += 1
                self.expect(")")
                return Call(tok.text, tuple(args), pos)
            return Var(tok.text, pos)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail("expression")


def parse(tokens: list[Token], max_depth: int = DEFAULT_MAX_DEPTH) -> Program:
    return _Parser(tokens, max_depth).program()


def parse_expression(tokens: list[Token], max_depth: int = DEFAULT_MAX_DEPTH) -> Expr:
    """Parse a standalone expression; all tokens must be consumed."""
    p = _Parser(tokens, max_depth)
    e = p.expr()
    if p.peek() is not None:
        raise p.fail("end of expression")
    return e
