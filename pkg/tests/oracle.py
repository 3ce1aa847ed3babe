"""Direct tree-walking interpreter over the *untyped* AST.

This is the brute-force oracle for every execution value in the test suite.
It shares nothing with the backend or the VM beyond the parser's output.
"""

from __future__ import annotations

import sys

from gpunative.frontend import lex, parse
from gpunative.frontend.ast import (
    Assign, BinOp, Block, BoolLit, Call, ExprStmt, If, IntLit, Let, Neg, Program, Return, Var,
    While,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

CALL_DEPTH = 64
TWO64 = 1 << 64


def i64(x: int) -> int:
    return (x + (1 << 63)) % TWO64 - (1 << 63)


def div_toward_zero(a: int, b: int) -> int:
    q = a // b
    if q < 0 and q * b != a:
        q += 1
    return i64(q)


class Trap(Exception):
    def __init__(self, kind: str):
        self.kind = kind


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class OutOfBudget(Exception):
    pass


class Interpreter:
    def __init__(self, program: Program, call_depth: int = CALL_DEPTH, budget: int = 5_000_000):
        self.fns = {f.name: f for f in program.functions}
        self.call_depth = call_depth
        self.budget = budget

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise OutOfBudget()

    def run(self, args) -> tuple:
        try:
            value = self.invoke("main", list(args), 1)
        except Trap as t:
            return ("Trap", t.kind)
        return ("Ok", int(value))

    def invoke(self, name, args, depth):
        if depth > self.call_depth:
            raise Trap("CallDepthExceeded")
        fn = self.fns[name]
        env = [{p.name: a for p, a in zip(fn.params, args)}]
        try:
            self.block(fn.body, env, depth, new_scope=False)
        except _Return as r:
            return r.value
        raise AssertionError("fell off the end of a function")

    def lookup(self, env, name):
        for scope in reversed(env):
            if name in scope:
                return scope
        raise KeyError(name)

    def block(self, block: Block, env, depth, new_scope=True):
        if new_scope:
            env = env + [{}]
        for s in block.stmts:
            self.stmt(s, env, depth)

    def stmt(self, s, env, depth):
        self.tick()
        if isinstance(s, Let):
            env[-1][s.name] = self.eval(s.value, env, depth)
        elif isinstance(s, Assign):
            value = self.eval(s.value, env, depth)
            self.lookup(env, s.name)[s.name] = value
        elif isinstance(s, ExprStmt):
            self.eval(s.value, env, depth)
        elif isinstance(s, Return):
            raise _Return(self.eval(s.value, env, depth))
        elif isinstance(s, If):
            if self.eval(s.cond, env, depth):
                self.block(s.then, env, depth)
            elif s.orelse is not None:
                self.block(s.orelse, env, depth)
        elif isinstance(s, While):
            while self.eval(s.cond, env, depth):
                self.tick()
                self.block(s.body, env, depth)
        else:
            raise AssertionError(s)

    def eval(self, e, env, depth):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Var):
            return self.lookup(env, e.name)[e.name]
        if isinstance(e, Neg):
            return i64(-self.eval(e.operand, env, depth))
        if isinstance(e, Call):
            args = [self.eval(a, env, depth) for a in e.args]
            self.tick()
            return self.invoke(e.name, args, depth + 1)
        if isinstance(e, BinOp):
            a = self.eval(e.left, env, depth)
            b = self.eval(e.right, env, depth)
            op = e.op
            if op == "+":
                return i64(a + b)
            if op == "-":
                return i64(a - b)
            if op == "*":
                return i64(a * b)
            if op == "/":
                if b == 0:
                    raise Trap("DivideByZero")
                return div_toward_zero(a, b)
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            if op == "&&":
                return bool(a) and bool(b)
            if op == "||":
                return bool(a) or bool(b)
        raise AssertionError(e)


def interpret(source: str, args=(), call_depth: int = CALL_DEPTH) -> tuple:
    """Run ``main`` of ``source``; returns ``("Ok", value)`` or ``("Trap", kind)``."""
    return Interpreter(parse(lex(source)), call_depth).run(args)
