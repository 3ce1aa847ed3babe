"""Structure-preserving bytecode corruptions.

Every mutation keeps the program decodable: operands are clamped into their
valid range, and insertions/deletions re-target jumps and function entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vm.bytecode import BytecodeProgram, FunctionEntry, Instruction, Op

KINDS = ("opcode_substitution", "operand_perturbation", "instruction_deletion", "instruction_insertion")
_ALL_OPS = tuple(Op)


@dataclass(frozen=True)
class Mutation:
    kind: str
    position: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}@{self.position}: {self.detail}"


def _owner(p: BytecodeProgram, index: int) -> int:
    owner = 0
    for f, fn in enumerate(p.functions):
        if fn.entry <= index:
            owner = f
    return owner


def _limit(p: BytecodeProgram, index: int, op: Op, code_len: int | None = None) -> int:
    if op is Op.LOAD_CONST:
        return len(p.pool)
    if op in (Op.LOAD_VAR, Op.STORE_VAR):
        return p.functions[_owner(p, index)].slots
    if op in (Op.JUMP, Op.JUMP_IF_FALSE):
        return len(p.code) if code_len is None else code_len
    if op is Op.CALL:
        return len(p.functions)
    return 0


def _usable_ops(p: BytecodeProgram, index: int, code_len: int | None = None) -> list[Op]:
    return [op for op in _ALL_OPS if not op.has_operand or _limit(p, index, op, code_len) > 0]


def _rebuild(p: BytecodeProgram, code: list[Instruction], functions=None) -> BytecodeProgram:
    return BytecodeProgram(p.pool, tuple(functions if functions is not None else p.functions),
                           tuple(code), p.entry, p.version)


def substitute_opcode(p: BytecodeProgram, rng: np.random.Generator):
    i = int(rng.integers(len(p.code)))
    old = p.code[i]
    choices = [op for op in _usable_ops(p, i) if op is not old.op]
    new_op = choices[int(rng.integers(len(choices)))]
    operand = None
    if new_op.has_operand:
        limit = _limit(p, i, new_op)
        operand = min(old.operand, limit - 1) if old.operand is not None else int(rng.integers(limit))
    code = list(p.code)
    code[i] = Instruction(new_op, operand)
    return _rebuild(p, code), Mutation("opcode_substitution", i, f"{old} -> {code[i]}")


def perturb_operand(p: BytecodeProgram, rng: np.random.Generator):
    candidates = [i for i, ins in enumerate(p.code)
                  if ins.operand is not None and _limit(p, i, ins.op) > 1]
    if not candidates:
        return None
    i = candidates[int(rng.integers(len(candidates)))]
    ins = p.code[i]
    limit = _limit(p, i, ins.op)
    # limit > 1 guarantees at least one in-range step
    deltas = [d for d in (-2, -1, 1, 2) if 0 <= ins.operand + d < limit]
    new = ins.operand + deltas[int(rng.integers(len(deltas)))]
    code = list(p.code)
    code[i] = Instruction(ins.op, new)
    return _rebuild(p, code), Mutation("operand_perturbation", i, f"{ins} -> {code[i]}")


def _retarget(ins: Instruction, fn, code_len: int) -> Instruction:
    if ins.op in (Op.JUMP, Op.JUMP_IF_FALSE):
        return Instruction(ins.op, min(max(fn(ins.operand), 0), code_len - 1))
    return ins


def delete_instruction(p: BytecodeProgram, rng: np.random.Generator):
    ranges = p.function_ranges()
    candidates = [i for lo, hi in ranges if hi - lo > 1 for i in range(lo, hi)]
    if not candidates:
        return None
    i = candidates[int(rng.integers(len(candidates)))]
    removed = p.code[i]
    new_len = len(p.code) - 1
    shift = lambda t: t - 1 if t > i else t  # noqa: E731
    code = [_retarget(ins, shift, new_len) for j, ins in enumerate(p.code) if j != i]
    fns = [FunctionEntry(shift(f.entry), f.arity, f.slots) for f in p.functions]
    return _rebuild(p, code, fns), Mutation("instruction_deletion", i, f"removed {removed}")


def insert_instruction(p: BytecodeProgram, rng: np.random.Generator):
    i = int(rng.integers(len(p.code) + 1))
    new_len = len(p.code) + 1
    owner_index = min(i, len(p.code) - 1)
    ops = _usable_ops(p, owner_index, new_len)
    op = ops[int(rng.integers(len(ops)))]
    operand = int(rng.integers(_limit(p, owner_index, op, new_len))) if op.has_operand else None
    new = Instruction(op, operand)
    shift = lambda t: t + 1 if t >= i else t  # noqa: E731
    code = [_retarget(ins, shift, new_len) for ins in p.code]
    code.insert(i, new)
    # an entry at i keeps pointing at i so the new instruction joins that function
    fns = [FunctionEntry(f.entry + 1 if f.entry > i else f.entry, f.arity, f.slots)
           for f in p.functions]
    return _rebuild(p, code, fns), Mutation("instruction_insertion", i, f"inserted {new}")


MUTATORS = {
    "opcode_substitution": substitute_opcode,
    "operand_perturbation": perturb_operand,
    "instruction_deletion": delete_instruction,
    "instruction_insertion": insert_instruction,
}


def mutate(p: BytecodeProgram, rng: np.random.Generator, weights: dict[str, float]):
    """Apply one mutation drawn by ``weights``; kinds that do not apply are redrawn."""
    kinds = [k for k in KINDS if weights.get(k, 0.0) > 0]
    w = np.array([weights[k] for k in kinds], dtype=float)
    while kinds:
        j = int(rng.choice(len(kinds), p=w / w.sum()))
        out = MUTATORS[kinds[j]](p, rng)
        if out is not None:
            return out
        kinds.pop(j)
        w = np.delete(w, j)
    raise ValueError("no enabled mutation applies to this program")
