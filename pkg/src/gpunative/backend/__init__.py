from .codegen import CodegenError, codegen
from .ir import Ir, IrFunction, IrProgram, check_function
from .lower import lower_to_ir
from .optimize import (
    DEFAULT_MAX_ITERATIONS, DEFAULT_PASSES, PASSES, OptimizerError, eliminate_dead_stores,
    fold_constants, optimize, remove_unreachable,
)
from .pipeline import Compilation, CompileOptions, compile_reference, compile_stages

__all__ = [
    "CodegenError", "Compilation", "CompileOptions", "DEFAULT_MAX_ITERATIONS", "DEFAULT_PASSES",
    "Ir", "IrFunction", "IrProgram", "OptimizerError", "PASSES", "check_function", "codegen",
    "compile_reference", "compile_stages", "eliminate_dead_stores", "fold_constants",
    "lower_to_ir", "optimize", "remove_unreachable",
]
