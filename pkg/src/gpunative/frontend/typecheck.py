from __future__ import annotations

import dataclasses

from .ast import (
    ARITH_OPS, EQUALITY_OPS, LOGIC_OPS, ORDER_OPS, Assign, BinOp, Block, BoolLit, Call,
    Expr, ExprStmt, FunctionDecl, If, IntLit, Let, Neg, Pos, Program, Return, Stmt, Type,
    Var, While,
)
from .lexer import CompileError


class TypeCheckError(CompileError):
    def __init__(self, message: str, pos: Pos | None = None):
        super().__init__(message, *(pos.line, pos.col) if pos else (0, 0))


class UndefinedVariable(TypeCheckError):
    pass


class UndefinedFunction(TypeCheckError):
    pass


class MissingMain(TypeCheckError):
    pass


def _returns(stmt: Stmt) -> bool:
    if isinstance(stmt, Return):
        return True
    if isinstance(stmt, If):
        return stmt.orelse is not None and _block_returns(stmt.then) and _block_returns(stmt.orelse)
    return False


def _block_returns(block: Block) -> bool:
    return any(_returns(s) for s in block.stmts)


class _FunctionChecker:
    def __init__(self, fn: FunctionDecl, signatures: dict[str, tuple[int, FunctionDecl]]):
        self.fn = fn
        self.sigs = signatures
        self.scopes: list[dict[str, tuple[int, Type]]] = [{}]
        self.next_slot = 0

    def declare(self, name: str, ty: Type, pos: Pos) -> int:
        scope = self.scopes[-1]
        if name in scope:
            raise TypeCheckError(f"'{name}' is already declared in this scope", pos)
        slot = self.next_slot
        self.next_slot += 1
        scope[name] = (slot, ty)
        return slot

    def scratch(self) -> int:
        slot = self.next_slot
        self.next_slot += 1
        return slot

    def lookup(self, name: str, pos: Pos) -> tuple[int, Type]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise UndefinedVariable(f"undefined variable '{name}'", pos)

    def run(self) -> FunctionDecl:
        for p in self.fn.params:
            self.declare(p.name, p.ty, p.pos)
        body = self.block(self.fn.body, new_scope=False)
        if not _block_returns(body):
            raise TypeCheckError(f"function '{self.fn.name}' may finish without returning", self.fn.pos)
        return dataclasses.replace(self.fn, body=body, n_slots=self.next_slot)

    def block(self, block: Block, new_scope: bool = True) -> Block:
        if new_scope:
            self.scopes.append({})
        stmts = tuple(self.stmt(s) for s in block.stmts)
        if new_scope:
            self.scopes.pop()
        return Block(stmts, block.pos)

    def stmt(self, s: Stmt) -> Stmt:
        if isinstance(s, Let):
            value = self.expr(s.value)
            if s.declared is not None and s.declared is not value.ty:
                raise TypeCheckError(
                    f"'{s.name}' declared {s.declared} but initialized with {value.ty}", s.pos)
            slot = self.declare(s.name, value.ty, s.pos)
            return dataclasses.replace(s, value=value, slot=slot)
        if isinstance(s, Assign):
            slot, ty = self.lookup(s.name, s.pos)
            value = self.expr(s.value)
            if value.ty is not ty:
                raise TypeCheckError(f"cannot assign {value.ty} to '{s.name}' of type {ty}", s.pos)
            return dataclasses.replace(s, value=value, slot=slot)
        if isinstance(s, If):
            cond = self.expect(s.cond, Type.BOOL, "if condition")
            then = self.block(s.then)
            orelse = self.block(s.orelse) if s.orelse is not None else None
            return If(cond, then, orelse, s.pos)
        if isinstance(s, While):
            cond = self.expect(s.cond, Type.BOOL, "while condition")
            return While(cond, self.block(s.body), s.pos)
        if isinstance(s, Return):
            value = self.expect(s.value, self.fn.ret, f"return value of '{self.fn.name}'")
            return Return(value, s.pos)
        if isinstance(s, ExprStmt):
            return dataclasses.replace(s, value=self.expr(s.value), slot=self.scratch())
        raise AssertionError(f"unknown statement {s!r}")

    def expect(self, e: Expr, ty: Type, what: str) -> Expr:
        typed = self.expr(e)
        if typed.ty is not ty:
            raise TypeCheckError(f"{what} must be {ty}, found {typed.ty}", e.pos)
        return typed

    def expr(self, e: Expr) -> Expr:
        if isinstance(e, IntLit):
            return dataclasses.replace(e, ty=Type.INT)
        if isinstance(e, BoolLit):
            return dataclasses.replace(e, ty=Type.BOOL)
        if isinstance(e, Var):
            slot, ty = self.lookup(e.name, e.pos)
            return dataclasses.replace(e, ty=ty, slot=slot)
        if isinstance(e, Neg):
            return Neg(self.expect(e.operand, Type.INT, "operand of unary '-'"), e.pos, Type.INT)
        if isinstance(e, BinOp):
            left, right = self.expr(e.left), self.expr(e.right)
            if e.op in ARITH_OPS or e.op in ORDER_OPS:
                operand, result = Type.INT, (Type.INT if e.op in ARITH_OPS else Type.BOOL)
                if left.ty is not operand or right.ty is not operand:
                    raise TypeCheckError(
                        f"operator '{e.op}' needs int operands, found {left.ty} and {right.ty}", e.pos)
            elif e.op in LOGIC_OPS:
                result = Type.BOOL
                if left.ty is not Type.BOOL or right.ty is not Type.BOOL:
                    raise TypeCheckError(
                        f"operator '{e.op}' needs bool operands, found {left.ty} and {right.ty}", e.pos)
            elif e.op in EQUALITY_OPS:
                result = Type.BOOL
                if left.ty is not right.ty:
                    raise TypeCheckError(
                        f"operator '{e.op}' compares {left.ty} with {right.ty}", e.pos)
            else:
                raise AssertionError(f"unknown operator {e.op}")
            return BinOp(e.op, left, right, e.pos, result)
        if isinstance(e, Call):
            if e.name not in self.sigs:
                raise UndefinedFunction(f"undefined function '{e.name}'", e.pos)
            index, decl = self.sigs[e.name]
            if len(e.args) != len(decl.params):
                raise TypeCheckError(
                    f"'{e.name}' takes {len(decl.params)} argument(s), {len(e.args)} given", e.pos)
            args = tuple(
                self.expect(a, p.ty, f"argument {i + 1} of '{e.name}'")
                for i, (a, p) in enumerate(zip(e.args, decl.params))
            )
            return Call(e.name, args, e.pos, decl.ret, index)
        raise AssertionError(f"unknown expression {e!r}")


def typecheck(program: Program) -> Program:
    """Annotate every expression with its type and every variable with a frame slot.

    Accepts already-typed programs; the result is a fixed point.
    """
    sigs: dict[str, tuple[int, FunctionDecl]] = {}
    for i, fn in enumerate(program.functions):
        if fn.name in sigs:
            raise TypeCheckError(f"function '{fn.name}' is defined twice", fn.pos)
        sigs[fn.name] = (i, fn)
    if "main" not in sigs:
        raise MissingMain("program has no 'main' function", None)
    fns = tuple(_FunctionChecker(fn, sigs).run() for fn in program.functions)
    return Program(fns, program.token_count, typed=True)
