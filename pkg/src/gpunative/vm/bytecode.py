"""Bytecode program model and its bit-exact ``.gnbc`` encoding.

Layout (all integers little-endian)::

    magic        4 bytes  b"GNBC"
    version      u16      1
    pool count   u32, then each constant as i64
    fn count     u16, then per function {entry u32, arity u16, slots u16}
    entry index  u32
    code length  u32, then per instruction: opcode u8 [+ operand u32]
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

MAGIC = b"GNBC"
VERSION = 1
HEADER_SIZE = 20  # magic, version and the four counts with an empty pool/table/code

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
U16_MAX = 2**16 - 1
U32_MAX = 2**32 - 1


class Op(enum.IntEnum):
    LOAD_CONST = 0x01
    LOAD_VAR = 0x02
    STORE_VAR = 0x03
    BINARY_ADD = 0x10
    BINARY_SUB = 0x11
    BINARY_MUL = 0x12
    BINARY_DIV = 0x13
    COMPARE_LT = 0x20
    JUMP = 0x30
    JUMP_IF_FALSE = 0x31
    CALL = 0x40
    RETURN = 0x41

    @property
    def has_operand(self) -> bool:
        return self in OPERAND_OPS


OPERAND_OPS = frozenset({Op.LOAD_CONST, Op.LOAD_VAR, Op.STORE_VAR, Op.JUMP, Op.JUMP_IF_FALSE, Op.CALL})
_OPCODE_BYTES = {int(op): op for op in Op}


@dataclass(frozen=True)
class Instruction:
    op: Op
    operand: int | None = None

    def __post_init__(self):
        if self.op.has_operand != (self.operand is not None):
            raise ValueError(f"{self.op.name} operand presence mismatch: {self.operand!r}")

    def __str__(self) -> str:
        return self.op.name if self.operand is None else f"{self.op.name} {self.operand}"


@dataclass(frozen=True)
class FunctionEntry:
    entry: int
    arity: int
    slots: int


@dataclass(frozen=True)
class BytecodeProgram:
    pool: tuple[int, ...] = ()
    functions: tuple[FunctionEntry, ...] = ()
    code: tuple[Instruction, ...] = ()
    entry: int = 0
    version: int = field(default=VERSION)

    def function_ranges(self) -> list[tuple[int, int]]:
        """Half-open code range owned by each function, in table order."""
        starts = [f.entry for f in self.functions]
        ordered = sorted(set(starts))
        ends = {s: (ordered[i + 1] if i + 1 < len(ordered) else len(self.code))
                for i, s in enumerate(ordered)}
        return [(s, ends[s]) for s in starts]

    def owner_slots(self) -> list[int]:
        """Slot count of the function enclosing each instruction (0 if none)."""
        owner = [0] * len(self.code)
        for fn, (lo, hi) in zip(self.functions, self.function_ranges()):
            for i in range(lo, hi):
                owner[i] = fn.slots
        return owner

    def operand_limit(self, index: int, op: Op, owner_slots: list[int] | None = None) -> int:
        """Exclusive upper bound for ``op``'s operand at code position ``index``."""
        if op is Op.LOAD_CONST:
            return len(self.pool)
        if op in (Op.LOAD_VAR, Op.STORE_VAR):
            slots = owner_slots if owner_slots is not None else self.owner_slots()
            return slots[index] if index < len(slots) else 0
        if op in (Op.JUMP, Op.JUMP_IF_FALSE):
            return len(self.code)
        if op is Op.CALL:
            return len(self.functions)
        return 0

    def problems(self) -> list[tuple[str, int | None]]:
        """Structural invariant violations as (reason, code index or None)."""
        out: list[tuple[str, int | None]] = []
        if self.version != VERSION:
            out.append((f"unsupported version {self.version}", None))
        for c in self.pool:
            if not INT64_MIN <= c <= INT64_MAX:
                out.append((f"constant {c} does not fit in 64 bits", None))
        if self.functions:
            if not 0 <= self.entry < len(self.functions):
                out.append((f"entry function {self.entry} out of range", None))
            entries = [f.entry for f in self.functions]
            if entries[0] != 0:
                out.append(("first function must start at instruction 0", None))
            if any(b <= a for a, b in zip(entries, entries[1:])):
                out.append(("function entries must be strictly increasing", None))
            for f in self.functions:
                if f.entry >= len(self.code):
                    out.append((f"function entry {f.entry} beyond code", None))
                if f.arity > f.slots:
                    out.append((f"arity {f.arity} exceeds slot count {f.slots}", None))
                if f.slots > U16_MAX:
                    out.append((f"slot count {f.slots} too large", None))
        else:
            if self.code:
                out.append(("code present without a function table", None))
            if self.entry != 0:
                out.append((f"entry function {self.entry} out of range", None))
        slots = self.owner_slots()
        for i, ins in enumerate(self.code):
            if ins.operand is None:
                continue
            limit = self.operand_limit(i, ins.op, slots)
            if not 0 <= ins.operand < limit:
                out.append((f"{ins.op.name} operand {ins.operand} out of range (< {limit})", i))
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def disassemble(self) -> str:
        lines = [f"pool: {list(self.pool)}"]
        starts = {f.entry: i for i, f in enumerate(self.functions)}
        for i, ins in enumerate(self.code):
            if i in starts:
                f = self.functions[starts[i]]
                tag = " (entry)" if starts[i] == self.entry else ""
                lines.append(f"fn #{starts[i]} arity={f.arity} slots={f.slots}{tag}:")
            lines.append(f"  {i:4d}  {ins}")
        return "\n".join(lines)


class DecodeError(Exception):
    def __init__(self, offset: int, reason: str):
        super().__init__(f"offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


def encode(p: BytecodeProgram) -> bytes:
    out = bytearray(MAGIC)
    out += struct.pack("<H", p.version)
    out += struct.pack("<I", len(p.pool))
    for c in p.pool:
        out += struct.pack("<q", c)
    out += struct.pack("<H", len(p.functions))
    for f in p.functions:
        out += struct.pack("<IHH", f.entry, f.arity, f.slots)
    out += struct.pack("<I", p.entry)
    out += struct.pack("<I", len(p.code))
    for ins in p.code:
        out.append(int(ins.op))
        if ins.operand is not None:
            out += struct.pack("<I", ins.operand)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise DecodeError(self.pos, f"truncated while reading {what}")
        value = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return value if len(value) > 1 else value[0]

    def need(self, count: int, width: int, what: str) -> None:
        if self.pos + count * width > len(self.data):
            raise DecodeError(self.pos, f"truncated: {count} {what} declared")


def decode(data: bytes) -> BytecodeProgram:
    r = _Reader(bytes(data))
    if len(r.data) < 4 or r.data[:4] != MAGIC:
        raise DecodeError(0, "bad magic")
    r.pos = 4
    version = r.take("<H", "version")
    if version != VERSION:
        raise DecodeError(4, f"unsupported version {version}")
    n_pool = r.take("<I", "pool count")
    r.need(n_pool, 8, "constants")
    pool = tuple(r.take("<q", "constant") for _ in range(n_pool))
    n_fns = r.take("<H", "function count")
    r.need(n_fns, 8, "functions")
    fns = tuple(FunctionEntry(*r.take("<IHH", "function entry")) for _ in range(n_fns))
    entry = r.take("<I", "entry index")
    code_offset = r.pos
    n_code = r.take("<I", "code length")
    r.need(n_code, 1, "instructions")
    code = []
    offsets = []
    for _ in range(n_code):
        offsets.append(r.pos)
        byte = r.take("<B", "opcode")
        op = _OPCODE_BYTES.get(byte)
        if op is None:
            raise DecodeError(r.pos - 1, f"unknown opcode 0x{byte:02X}")
        operand = r.take("<I", f"{op.name} operand") if op.has_operand else None
        code.append(Instruction(op, operand))
    if r.pos != len(r.data):
        raise DecodeError(r.pos, f"{len(r.data) - r.pos} trailing bytes")
    prog = BytecodeProgram(pool, fns, tuple(code), entry, version)
    issues = prog.problems()
    if issues:
        reason, index = issues[0]
        raise DecodeError(offsets[index] if index is not None else code_offset, reason)
    return prog
