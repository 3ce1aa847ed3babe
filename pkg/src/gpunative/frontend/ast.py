"""AST node types.

Expression nodes carry an optional ``ty`` annotation and variable-bearing
nodes an optional ``slot``; both stay ``None`` until type checking fills them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union


class Type(enum.Enum):
    INT = "int"
    BOOL = "bool"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos
    ty: Type | None = None


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos
    ty: Type | None = None


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos
    ty: Type | None = None
    slot: int | None = None


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos
    ty: Type | None = None


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos
    ty: Type | None = None


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    pos: Pos
    ty: Type | None = None
    index: int | None = None  # function table index, set by typecheck


Expr = Union[IntLit, BoolLit, Var, Neg, BinOp, Call]

ARITH_OPS = frozenset({"+", "-", "*", "/"})
ORDER_OPS = frozenset({"<", "<=", ">", ">="})
EQUALITY_OPS = frozenset({"==", "!="})
LOGIC_OPS = frozenset({"&&", "||"})


# --- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Let:
    name: str
    declared: Type | None
    value: Expr
    pos: Pos
    slot: int | None = None


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    pos: Pos
    slot: int | None = None


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Block"
    orelse: "Block | None"
    pos: Pos


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Block"
    pos: Pos


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Pos


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    pos: Pos
    slot: int | None = None  # scratch slot that swallows the discarded value


Stmt = Union[Let, Assign, If, While, Return, ExprStmt]


@dataclass(frozen=True)
class Block:
    stmts: tuple[Stmt, ...]
    pos: Pos


# --- top level -------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    ty: Type
    pos: Pos


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple[Param, ...]
    ret: Type
    body: Block
    pos: Pos
    n_slots: int | None = None


@dataclass(frozen=True)
class Program:
    functions: tuple[FunctionDecl, ...]
    token_count: int = 0
    typed: bool = field(default=False, compare=False)

    def function(self, name: str) -> FunctionDecl:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    @property
    def main_index(self) -> int:
        return [f.name for f in self.functions].index("main")


def walk_exprs(node):
    """Yield every expression node under ``node`` (statement, block, or expression)."""
    if isinstance(node, (IntLit, BoolLit, Var)):
        yield node
    elif isinstance(node, Neg):
        yield node
        yield from walk_exprs(node.operand)
    elif isinstance(node, BinOp):
        yield node
        yield from walk_exprs(node.left)
        yield from walk_exprs(node.right)
    elif isinstance(node, Call):
        yield node
        for a in node.args:
            yield from walk_exprs(a)
    elif isinstance(node, Block):
        for s in node.stmts:
            yield from walk_exprs(s)
    elif isinstance(node, (Let, Assign, Return, ExprStmt)):
        yield from walk_exprs(node.value)
    elif isinstance(node, If):
        yield from walk_exprs(node.cond)
        yield from walk_exprs(node.then)
        if node.orelse is not None:
            yield from walk_exprs(node.orelse)
    elif isinstance(node, While):
        yield from walk_exprs(node.cond)
        yield from walk_exprs(node.body)
    elif isinstance(node, FunctionDecl):
        yield from walk_exprs(node.body)
    elif isinstance(node, Program):
        for fn in node.functions:
            yield from walk_exprs(fn)


def sexpr(node, indent: int = 0) -> str:
    """Indented s-expression dump; typed nodes show ``:type`` and ``@slot``."""
    pad = "  " * indent

    def ann(n) -> str:
        out = f":{n.ty}" if getattr(n, "ty", None) is not None else ""
        return out + (f"@{n.slot}" if getattr(n, "slot", None) is not None else "")

    if isinstance(node, IntLit):
        return f"{node.value}{ann(node)}"
    if isinstance(node, BoolLit):
        return f"{'true' if node.value else 'false'}{ann(node)}"
    if isinstance(node, Var):
        return f"{node.name}{ann(node)}"
    if isinstance(node, Neg):
        return f"(neg{ann(node)} {sexpr(node.operand)})"
    if isinstance(node, BinOp):
        return f"({node.op}{ann(node)} {sexpr(node.left)} {sexpr(node.right)})"
    if isinstance(node, Call):
        args = "".join(" " + sexpr(a) for a in node.args)
        return f"(call {node.name}{ann(node)}{args})"
    if isinstance(node, Let):
        ty = f" {node.declared}" if node.declared is not None else ""
        return f"{pad}(let {node.name}{ty}{ann(node)} {sexpr(node.value)})"
    if isinstance(node, Assign):
        return f"{pad}(set {node.name}{ann(node)} {sexpr(node.value)})"
    if isinstance(node, Return):
        return f"{pad}(return {sexpr(node.value)})"
    if isinstance(node, ExprStmt):
        return f"{pad}(expr{ann(node)} {sexpr(node.value)})"
    if isinstance(node, If):
        text = f"{pad}(if {sexpr(node.cond)}\n{sexpr(node.then, indent + 1)}"
        if node.orelse is not None:
            text += "\n" + sexpr(node.orelse, indent + 1)
        return text + ")"
    if isinstance(node, While):
        return f"{pad}(while {sexpr(node.cond)}\n{sexpr(node.body, indent + 1)})"
    if isinstance(node, Block):
        if not node.stmts:
            return f"{pad}(block)"
        return f"{pad}(block\n" + "\n".join(sexpr(s, indent + 1) for s in node.stmts) + ")"
    if isinstance(node, FunctionDecl):
        params = " ".join(f"{p.name}:{p.ty}" for p in node.params)
        slots = f" slots={node.n_slots}" if node.n_slots is not None else ""
        return f"{pad}(fn {node.name} ({params}) -> {node.ret}{slots}\n{sexpr(node.body, indent + 1)})"
    if isinstance(node, Program):
        return "\n".join(sexpr(f, indent) for f in node.functions)
    raise TypeError(f"not an AST node: {type(node).__name__}")
