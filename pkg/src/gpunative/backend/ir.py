"""Stack IR: a linear instruction list per function with label pseudo-instructions."""

from __future__ import annotations

from dataclasses import dataclass

ARITH = ("add", "sub", "mul", "div", "lt")
BRANCHES = ("jump", "jif")
TERMINATORS = ("jump", "ret")
_WITH_ARG = ("const", "load", "store", "jump", "jif", "call", "label")
OPS = _WITH_ARG + ARITH + ("ret",)


@dataclass(frozen=True)
class Ir:
    op: str
    arg: int | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown IR op {self.op!r}")
        if (self.op in _WITH_ARG) != (self.arg is not None):
            raise ValueError(f"IR op {self.op} operand mismatch: {self.arg!r}")

    def __str__(self) -> str:
        if self.op == "label":
            return f"L{self.arg}:"
        if self.op in BRANCHES:
            return f"    {self.op} L{self.arg}"
        return f"    {self.op}" if self.arg is None else f"    {self.op} {self.arg}"


@dataclass(frozen=True)
class IrFunction:
    name: str
    arity: int
    n_slots: int
    code: tuple[Ir, ...]

    def labels(self) -> set[int]:
        return {i.arg for i in self.code if i.op == "label"}


@dataclass(frozen=True)
class IrProgram:
    functions: tuple[IrFunction, ...]
    entry: int

    def dump(self) -> str:
        parts = []
        for i, fn in enumerate(self.functions):
            tag = "  # entry" if i == self.entry else ""
            parts.append(f"fn {fn.name}/{fn.arity} slots={fn.n_slots}{tag}")
            parts.extend(str(ins) for ins in fn.code)
        return "\n".join(parts)


def split_blocks(code: tuple[Ir, ...] | list[Ir]) -> list[list[Ir]]:
    """Basic blocks: a label starts a block, a branch or return ends one."""
    blocks: list[list[Ir]] = []
    cur: list[Ir] = []
    for ins in code:
        if ins.op == "label" and cur:
            blocks.append(cur)
            cur = []
        cur.append(ins)
        if ins.op in ("jump", "jif", "ret"):
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    return blocks


def successors(blocks: list[list[Ir]]) -> list[list[int]]:
    where = {}
    for b, block in enumerate(blocks):
        if block[0].op == "label":
            where[block[0].arg] = b
    succ = []
    for b, block in enumerate(blocks):
        last = block[-1]
        out = []
        if last.op in BRANCHES:
            out.append(where[last.arg])
        if last.op not in TERMINATORS and b + 1 < len(blocks):
            out.append(b + 1)
        succ.append(out)
    return succ


def check_function(fn: IrFunction) -> list[str]:
    """Violations of IR invariants: dangling branch targets or reachable fall-off."""
    problems = []
    labels = fn.labels()
    for ins in fn.code:
        if ins.op in BRANCHES and ins.arg not in labels:
            problems.append(f"{fn.name}: branch to missing label L{ins.arg}")
    if problems or not fn.code:
        return problems or [f"{fn.name}: empty body"]
    blocks = split_blocks(fn.code)
    succ = successors(blocks)
    seen, work = {0}, [0]
    while work:
        b = work.pop()
        last = blocks[b][-1]
        if last.op not in TERMINATORS and b + 1 == len(blocks):
            problems.append(f"{fn.name}: control can fall off the end")
        for s in succ[b]:
            if s not in seen:
                seen.add(s)
                work.append(s)
    return problems
