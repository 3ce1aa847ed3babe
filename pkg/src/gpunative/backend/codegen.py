from __future__ import annotations

from ..vm.bytecode import BytecodeProgram, FunctionEntry, Instruction, Op
from .ir import IrProgram

_OPCODES = {
    "const": Op.LOAD_CONST, "load": Op.LOAD_VAR, "store": Op.STORE_VAR,
    "add": Op.BINARY_ADD, "sub": Op.BINARY_SUB, "mul": Op.BINARY_MUL, "div": Op.BINARY_DIV,
    "lt": Op.COMPARE_LT, "jump": Op.JUMP, "jif": Op.JUMP_IF_FALSE, "call": Op.CALL,
    "ret": Op.RETURN,
}


class CodegenError(RuntimeError):
    pass


def codegen(ir: IrProgram) -> BytecodeProgram:
    """Lay functions out back to back, resolve labels, intern constants."""
    pool: list[int] = []
    pool_index: dict[int, int] = {}
    code: list[Instruction] = []
    table: list[FunctionEntry] = []
    for fn in ir.functions:
        start = len(code)
        # first pass: label -> absolute index
        where: dict[int, int] = {}
        pc = start
        for ins in fn.code:
            if ins.op == "label":
                where[ins.arg] = pc
            else:
                pc += 1
        end = pc
        if end == start:
            raise CodegenError(f"function '{fn.name}' has no instructions")
        for ins in fn.code:
            if ins.op == "label":
                continue
            op = _OPCODES[ins.op]
            operand = ins.arg
            if ins.op == "const":
                if operand not in pool_index:
                    pool_index[operand] = len(pool)
                    pool.append(operand)
                operand = pool_index[operand]
            elif ins.op in ("jump", "jif"):
                target = where.get(operand)
                if target is None or not start <= target < end:
                    raise CodegenError(f"'{fn.name}': unresolved jump target L{operand}")
                operand = target
            code.append(Instruction(op, operand))
        table.append(FunctionEntry(start, fn.arity, fn.n_slots))
    return BytecodeProgram(tuple(pool), tuple(table), tuple(code), ir.entry)
