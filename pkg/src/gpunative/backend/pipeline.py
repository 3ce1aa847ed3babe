"""End-to-end deterministic compilation: lex, parse, typecheck, lower, optimize, codegen."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..frontend import Program, Token, lex, parse, typecheck
from ..frontend.parser import DEFAULT_MAX_DEPTH
from ..vm.bytecode import BytecodeProgram
from .codegen import codegen
from .ir import IrProgram
from .lower import lower_to_ir
from .optimize import DEFAULT_MAX_ITERATIONS, DEFAULT_PASSES, optimize


@dataclass(frozen=True)
class CompileOptions:
    passes: tuple[str, ...] = DEFAULT_PASSES
    max_parse_depth: int = DEFAULT_MAX_DEPTH
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    @classmethod
    def unoptimized(cls) -> "CompileOptions":
        return cls(passes=())

    def with_passes(self, passes: Sequence[str]) -> "CompileOptions":
        return CompileOptions(tuple(passes), self.max_parse_depth, self.max_iterations)


@dataclass
class Compilation:
    """Every intermediate product of one compile, for ``--emit`` and debugging."""

    tokens: list[Token]
    ast: Program
    typed: Program
    ir: IrProgram
    opt_ir: IrProgram
    bytecode: BytecodeProgram
    options: CompileOptions = field(default_factory=CompileOptions)


def compile_stages(source: str, options: CompileOptions | None = None) -> Compilation:
    options = options or CompileOptions()
    tokens = lex(source)
    ast = parse(tokens, options.max_parse_depth)
    typed = typecheck(ast)
    ir = lower_to_ir(typed)
    opt_ir = optimize(ir, options.passes, options.max_iterations)
    return Compilation(tokens, ast, typed, ir, opt_ir, codegen(opt_ir), options)


def compile_reference(source: str, options: CompileOptions | None = None) -> BytecodeProgram:
    return compile_stages(source, options).bytecode
