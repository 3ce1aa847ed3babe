"""Worklist optimization passes over the stack IR.

Each pass rewrites one function to its own fixed point; :func:`optimize`
repeats the pass list until a whole round changes nothing.
"""

from __future__ import annotations

from typing import Callable, Sequence

from ..vm.machine import trunc_div, wrap
from .ir import Ir, IrFunction, IrProgram, split_blocks, successors

DEFAULT_PASSES = ("fold", "dead_store", "unreachable")
DEFAULT_MAX_ITERATIONS = 1000


class OptimizerError(RuntimeError):
    pass


def _fold_value(op: str, a: int, b: int) -> int | None:
    if op == "add":
        return wrap(a + b)
    if op == "sub":
        return wrap(a - b)
    if op == "mul":
        return wrap(a * b)
    if op == "lt":
        return 1 if a < b else 0
    if op == "div" and b != 0:
        return trunc_div(a, b)
    return None  # division by a zero constant must still trap at run time


def fold_constants(fn: IrFunction) -> IrFunction:
    """Fold ``const a; const b; op`` and branches on constant conditions.

    The output list doubles as the worklist: every rewrite lands on its tail,
    where it is immediately re-examined against the preceding instructions.
    """
    out: list[Ir] = []
    for ins in fn.code:
        out.append(ins)
        while True:
            tail = out[-1]
            if (tail.op in ("add", "sub", "mul", "div", "lt") and len(out) >= 3
                    and out[-2].op == "const" and out[-3].op == "const"):
                value = _fold_value(tail.op, out[-3].arg, out[-2].arg)
                if value is None:
                    break
                del out[-3:]
                out.append(Ir("const", value))
                continue
            if tail.op == "jif" and len(out) >= 2 and out[-2].op == "const":
                cond = out[-2].arg
                del out[-2:]
                if cond == 0:
                    out.append(Ir("jump", tail.arg))
                if not out:
                    break
                continue
            break
    return IrFunction(fn.name, fn.arity, fn.n_slots, tuple(out))


_PURE = {"const": (0, 1), "load": (0, 1), "add": (2, 1), "sub": (2, 1), "mul": (2, 1), "lt": (2, 1)}


def _pure_producer(block: list[Ir], store_at: int) -> int | None:
    """Start index of the side-effect-free instruction run that feeds ``block[store_at]``."""
    need = 1
    j = store_at - 1
    while j >= 0:
        effect = _PURE.get(block[j].op)
        if effect is None:
            return None
        pops, pushes = effect
        need = need - pushes + pops
        if need == 0:
            return j
        j -= 1
    return None


def _liveness(blocks: list[list[Ir]]) -> list[set[int]]:
    """Slots live on exit of each block (backward may-analysis, worklist)."""
    succ = successors(blocks)
    preds: list[list[int]] = [[] for _ in blocks]
    for b, ss in enumerate(succ):
        for s in ss:
            preds[s].append(b)
    gen, kill = [], []
    for block in blocks:
        g, k = set(), set()
        for ins in reversed(block):
            if ins.op == "load":
                g.add(ins.arg)
                k.discard(ins.arg)
            elif ins.op == "store":
                k.add(ins.arg)
                g.discard(ins.arg)
        gen.append(g)
        kill.append(k)
    live_in = [set() for _ in blocks]
    live_out = [set() for _ in blocks]
    work = list(range(len(blocks)))
    while work:
        b = work.pop()
        out = set().union(*(live_in[s] for s in succ[b])) if succ[b] else set()
        live_out[b] = out
        new_in = gen[b] | (out - kill[b])
        if new_in != live_in[b]:
            live_in[b] = new_in
            work.extend(p for p in preds[b] if p not in work)
    return live_out


def eliminate_dead_stores(fn: IrFunction) -> IrFunction:
    """Remove stores whose slot is never read afterwards, with their pure producers."""
    code = list(fn.code)
    while True:
        blocks = split_blocks(code)
        live_out = _liveness(blocks)
        changed = False
        new_code: list[Ir] = []
        for block, out in zip(blocks, live_out):
            live = set(out)
            drop: set[int] = set()
            for i in range(len(block) - 1, -1, -1):
                ins = block[i]
                if i in drop:
                    continue
                if ins.op == "store":
                    if ins.arg not in live:
                        start = _pure_producer(block, i)
                        if start is not None:
                            drop.update(range(start, i + 1))
                            changed = True
                            continue
                    live.discard(ins.arg)
                elif ins.op == "load":
                    live.add(ins.arg)
            new_code.extend(ins for i, ins in enumerate(block) if i not in drop)
        code = new_code
        if not changed:
            break
    return IrFunction(fn.name, fn.arity, fn.n_slots, tuple(code))


def remove_unreachable(fn: IrFunction) -> IrFunction:
    """Drop basic blocks not reachable from the function entry."""
    if not fn.code:
        return fn
    blocks = split_blocks(fn.code)
    succ = successors(blocks)
    seen, work = {0}, [0]
    while work:
        b = work.pop()
        for s in succ[b]:
            if s not in seen:
                seen.add(s)
                work.append(s)
    code = tuple(ins for b, block in enumerate(blocks) if b in seen for ins in block)
    return IrFunction(fn.name, fn.arity, fn.n_slots, code)


PASSES: dict[str, Callable[[IrFunction], IrFunction]] = {
    "fold": fold_constants,
    "dead_store": eliminate_dead_stores,
    "unreachable": remove_unreachable,
}


def optimize(ir: IrProgram, passes: Sequence[str] = DEFAULT_PASSES,
             max_iterations: int = DEFAULT_MAX_ITERATIONS) -> IrProgram:
    for name in passes:
        if name not in PASSES:
            raise ValueError(f"unknown pass {name!r}; choose from {sorted(PASSES)}")
    fns = []
    for fn in ir.functions:
        for _ in range(max_iterations):
            before = fn
            for name in passes:
                fn = PASSES[name](fn)
            if fn == before:
                break
        else:
            raise OptimizerError(f"{fn.name}: no fixed point after {max_iterations} rounds")
        fns.append(fn)
    return IrProgram(tuple(fns), ir.entry)
