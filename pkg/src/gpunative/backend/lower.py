"""Typed AST to stack IR.

The target ISA only has ``COMPARE_LT``, no stack duplication and no pop, so:

* ``a > b`` becomes ``b < a``; ``a >= b`` becomes ``1 - (a < b)``;
  ``a <= b`` becomes ``1 - (b < a)``;
* ``a == b`` becomes ``(1 - (a < b)) * (1 - (b < a))`` and ``a != b``
  becomes ``(a < b) + (b < a)``;
* ``&&`` is ``a * b`` and ``||`` is ``1 - (1 - a) * (1 - b)`` on 0/1 values.

Operands that must be reordered or read twice are spilled to temporary slots
unless they are plain literals/variables, so evaluation stays left to right.
Discarded expression-statement values go to a scratch slot.
"""

from __future__ import annotations

from ..frontend.ast import (
    Assign, BinOp, Block, BoolLit, Call, Expr, ExprStmt, FunctionDecl, If, IntLit, Let,
    Neg, Program, Return, Stmt, Var, While, walk_exprs,
)
from .ir import Ir, IrFunction, IrProgram

_ARITH = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def _atomic(e: Expr) -> bool:
    return isinstance(e, (IntLit, BoolLit, Var))


def _trap_free(e: Expr) -> bool:
    return not any(isinstance(x, Call) or (isinstance(x, BinOp) and x.op == "/")
                   for x in walk_exprs(e))


class _FunctionLowering:
    def __init__(self, fn: FunctionDecl):
        self.fn = fn
        self.code: list[Ir] = []
        self.next_label = 0
        self.temp_top = fn.n_slots
        self.max_slots = fn.n_slots

    def emit(self, op: str, arg: int | None = None) -> None:
        self.code.append(Ir(op, arg))

    def label(self) -> int:
        self.next_label += 1
        return self.next_label - 1

    def temp(self) -> int:
        slot = self.temp_top
        self.temp_top += 1
        self.max_slots = max(self.max_slots, self.temp_top)
        return slot

    def run(self) -> IrFunction:
        self.block(self.fn.body)
        if not self.code or self.code[-1].op not in ("ret", "jump"):
            # unreachable (typecheck proves every path returns) but keeps the layout closed
            self.emit("const", 0)
            self.emit("ret")
        return IrFunction(self.fn.name, len(self.fn.params), self.max_slots, tuple(self.code))

    # -- statements

    def block(self, block: Block) -> None:
        for s in block.stmts:
            self.stmt(s)

    def stmt(self, s: Stmt) -> None:
        if isinstance(s, (Let, Assign, ExprStmt)):
            self.expr(s.value)
            self.emit("store", s.slot)
        elif isinstance(s, Return):
            self.expr(s.value)
            self.emit("ret")
        elif isinstance(s, If):
            self.expr(s.cond)
            else_ = self.label()
            self.emit("jif", else_)
            self.block(s.then)
            if s.orelse is None:
                self.emit("label", else_)
            else:
                end = self.label()
                self.emit("jump", end)
                self.emit("label", else_)
                self.block(s.orelse)
                self.emit("label", end)
        elif isinstance(s, While):
            top, end = self.label(), self.label()
            self.emit("label", top)
            self.expr(s.cond)
            self.emit("jif", end)
            self.block(s.body)
            self.emit("jump", top)
            self.emit("label", end)
        else:
            raise AssertionError(f"unknown statement {s!r}")

    # -- expressions

    def operands(self, left: Expr, right: Expr, swap_ok: bool, reuse: bool):
        """Evaluate both operands left to right; return emitters that push each again."""
        if (reuse and _atomic(left) and _atomic(right)) or (not reuse and swap_ok):
            return (lambda: self.expr(left)), (lambda: self.expr(right)), []
        self.expr(left)
        a = self.temp()
        self.emit("store", a)
        self.expr(right)
        b = self.temp()
        self.emit("store", b)
        return (lambda: self.emit("load", a)), (lambda: self.emit("load", b)), [a, b]

    def release(self, temps: list[int]) -> None:
        self.temp_top -= len(temps)

    def expr(self, e: Expr) -> None:
        if isinstance(e, IntLit):
            self.emit("const", e.value)
        elif isinstance(e, BoolLit):
            self.emit("const", int(e.value))
        elif isinstance(e, Var):
            self.emit("load", e.slot)
        elif isinstance(e, Neg):
            self.emit("const", 0)
            self.expr(e.operand)
            self.emit("sub")
        elif isinstance(e, Call):
            for a in e.args:
                self.expr(a)
            self.emit("call", e.index)
        elif isinstance(e, BinOp):
            self.binop(e)
        else:
            raise AssertionError(f"unknown expression {e!r}")

    def binop(self, e: BinOp) -> None:
        op, l, r = e.op, e.left, e.right
        if op in _ARITH:
            self.expr(l)
            self.expr(r)
            self.emit(_ARITH[op])
        elif op == "<":
            self.expr(l)
            self.expr(r)
            self.emit("lt")
        elif op == ">=":
            self.emit("const", 1)
            self.expr(l)
            self.expr(r)
            self.emit("lt")
            self.emit("sub")
        elif op in (">", "<="):
            if op == "<=":
                self.emit("const", 1)
            swap_ok = _trap_free(l) and _trap_free(r)
            pl, pr, temps = self.operands(l, r, swap_ok, reuse=False)
            pr()
            pl()
            self.emit("lt")
            self.release(temps)
            if op == "<=":
                self.emit("sub")
        elif op == "==":
            pl, pr, temps = self.operands(l, r, False, reuse=True)
            self.emit("const", 1)
            pl()
            pr()
            self.emit("lt")
            self.emit("sub")
            self.emit("const", 1)
            pr()
            pl()
            self.emit("lt")
            self.emit("sub")
            self.emit("mul")
            self.release(temps)
        elif op == "!=":
            pl, pr, temps = self.operands(l, r, False, reuse=True)
            pl()
            pr()
            self.emit("lt")
            pr()
            pl()
            self.emit("lt")
            self.emit("add")
            self.release(temps)
        elif op == "&&":
            self.expr(l)
            self.expr(r)
            self.emit("mul")
        elif op == "||":
            self.emit("const", 1)
            self.emit("const", 1)
            self.expr(l)
            self.emit("sub")
            self.emit("const", 1)
            self.expr(r)
            self.emit("sub")
            self.emit("mul")
            self.emit("sub")
        else:
            raise AssertionError(f"unknown operator {op}")


def lower_to_ir(typed: Program) -> IrProgram:
    if not typed.typed:
        raise ValueError("lower_to_ir needs a type-checked program")
    fns = tuple(_FunctionLowering(fn).run() for fn in typed.functions)
    return IrProgram(fns, typed.main_index)
