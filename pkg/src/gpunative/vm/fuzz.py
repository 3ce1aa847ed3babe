"""Random structurally valid bytecode, for round-trip and robustness testing."""

from __future__ import annotations

import random

from .bytecode import INT64_MAX, INT64_MIN, BytecodeProgram, FunctionEntry, Instruction, Op

_INTERESTING = (0, 1, -1, 2, 7, INT64_MAX, INT64_MIN, INT64_MAX - 1, INT64_MIN + 1)


def random_constant(rng: random.Random) -> int:
    if rng.random() < 0.4:
        return rng.choice(_INTERESTING)
    return rng.randint(-1000, 1000) if rng.random() < 0.7 else rng.randint(INT64_MIN, INT64_MAX)


def random_instruction(rng: random.Random, pool_size: int, slots: int, code_len: int,
                       n_functions: int) -> Instruction:
    choices = [op for op in Op
               if not (op is Op.LOAD_CONST and pool_size == 0)
               and not (op in (Op.LOAD_VAR, Op.STORE_VAR) and slots == 0)]
    op = rng.choice(choices)
    limit = {
        Op.LOAD_CONST: pool_size, Op.LOAD_VAR: slots, Op.STORE_VAR: slots,
        Op.JUMP: code_len, Op.JUMP_IF_FALSE: code_len, Op.CALL: n_functions,
    }.get(op)
    return Instruction(op, rng.randrange(limit) if limit is not None else None)


def random_program(rng: random.Random, max_functions: int = 4, max_fn_len: int = 12,
                   max_pool: int = 6, max_slots: int = 4) -> BytecodeProgram:
    pool = tuple(random_constant(rng) for _ in range(rng.randint(0, max_pool)))
    n_fns = rng.randint(1, max_functions)
    lengths = [rng.randint(1, max_fn_len) for _ in range(n_fns)]
    code_len = sum(lengths)
    fns, code, entry = [], [], 0
    for length in lengths:
        slots = rng.randint(0, max_slots)
        fns.append(FunctionEntry(entry, rng.randint(0, slots), slots))
        for _ in range(length):
            code.append(random_instruction(rng, len(pool), slots, code_len, n_fns))
        entry += length
    return BytecodeProgram(pool, tuple(fns), tuple(code), rng.randrange(n_fns))
