from .batch import DEFAULT_WARP_WIDTH, BatchResult, WarpStats, execute_batch
from .bytecode import (
    HEADER_SIZE, MAGIC, BytecodeProgram, DecodeError, FunctionEntry, Instruction, Op, decode, encode,
)
from .machine import (
    DEFAULT_CALL_DEPTH, DEFAULT_FUEL, STACK_CAPACITY, ExecResult, Image, Lane, Status, TrapKind,
    execute, wrap,
)

__all__ = [
    "BatchResult", "BytecodeProgram", "DecodeError", "ExecResult", "FunctionEntry", "HEADER_SIZE",
    "Image", "Instruction", "Lane", "MAGIC", "Op", "STACK_CAPACITY", "Status", "TrapKind",
    "WarpStats", "DEFAULT_CALL_DEPTH", "DEFAULT_FUEL", "DEFAULT_WARP_WIDTH", "decode", "encode",
    "execute", "execute_batch", "wrap",
]
