import random

import pytest
from hypothesis import given, strategies as st

from gpunative.backend import compile_reference
from gpunative.vm import (
    BytecodeProgram, ExecResult, FunctionEntry, Image, Instruction, Lane, Op, Status, TrapKind,
    execute, wrap,
)
from gpunative.vm.fuzz import random_program
from gpunative.vm.machine import run_lane, trunc_div
from oracle import div_toward_zero, i64

I = Instruction
MAX, MIN = 2**63 - 1, -(2**63)


def straight(code, pool=(), arity=0, slots=None):
    slots = arity if slots is None else slots
    return BytecodeProgram(tuple(pool), (FunctionEntry(0, arity, slots),), tuple(code), 0)


def binop(op, a, b):
    return execute(straight([I(Op.LOAD_CONST, 0), I(Op.LOAD_CONST, 1), I(op), I(Op.RETURN)],
                            pool=(a, b)))


def test_one_plus_two():
    r = execute(compile_reference("fn main() -> int { return 1 + 2; }"))
    assert r.outcome() == ("Ok", 3) and r.steps <= 4
    assert str(r) == "Ok 3"


def test_divide_by_zero_traps():
    r = execute(compile_reference("fn main(x: int) -> int { return 10 / x; }"), (0,))
    assert r.status is Status.TRAP and r.trap is TrapKind.DIVIDE_BY_ZERO
    assert str(r) == "Trap DivideByZero"


def test_infinite_loop_times_out_exactly():
    p = compile_reference("fn main() -> int { while (0 < 1) { } return 0; }")
    r = execute(p, (), fuel=1000)
    assert r.status is Status.TIMEOUT and r.steps == 1000 and str(r) == "Timeout"


def test_busy_loop_with_changing_state_times_out_exactly():
    p = compile_reference("fn main() -> int { let i = 0; while (0 < 1) { i = i + 1; } return i; }")
    assert execute(p, (), fuel=777) == ExecResult(Status.TIMEOUT, 0, 777)


@pytest.mark.parametrize("op, a, b, want", [
    (Op.BINARY_ADD, MAX, 1, MIN),
    (Op.BINARY_SUB, MIN, 1, MAX),
    (Op.BINARY_MUL, MAX, 2, -2),
    (Op.BINARY_DIV, -7, 2, -3),
    (Op.BINARY_DIV, 7, -2, -3),
    (Op.BINARY_DIV, MIN, -1, MIN),
    (Op.COMPARE_LT, -1, 0, 1),
    (Op.COMPARE_LT, 0, 0, 0),
])
def test_arithmetic(op, a, b, want):
    assert binop(op, a, b).outcome() == ("Ok", want)


@given(st.integers(MIN, MAX), st.integers(MIN, MAX))
def test_arithmetic_matches_reference_helpers(a, b):
    assert binop(Op.BINARY_ADD, a, b).value == i64(a + b)
    assert binop(Op.BINARY_MUL, a, b).value == i64(a * b)
    if b != 0:
        assert binop(Op.BINARY_DIV, a, b).value == div_toward_zero(a, b) == trunc_div(a, b)


def test_wrap():
    assert wrap(2**63) == MIN and wrap(-(2**63) - 1) == MAX and wrap(5) == 5


def test_call_pops_arguments_right_to_left():
    # f(a, b) = a - b; main pushes 10 then 3
    p = BytecodeProgram(
        (10, 3),
        (FunctionEntry(0, 0, 0), FunctionEntry(4, 2, 2)),
        (I(Op.LOAD_CONST, 0), I(Op.LOAD_CONST, 1), I(Op.CALL, 1), I(Op.RETURN),
         I(Op.LOAD_VAR, 0), I(Op.LOAD_VAR, 1), I(Op.BINARY_SUB), I(Op.RETURN)),
        0,
    )
    assert execute(p).outcome() == ("Ok", 7)


def test_call_depth_limit_counts_main():
    src = "fn f(n: int) -> int { if (n < 1) { return 0; } return f(n - 1); } fn main(n: int) -> int { return f(n); }"
    p = compile_reference(src)
    # n needs main plus f(n) .. f(0): n + 2 frames
    assert execute(p, (62,)).outcome() == ("Ok", 0)
    assert execute(p, (63,)).outcome() == ("Trap", "CallDepthExceeded")
    assert execute(p, (3,), call_depth_limit=5).outcome() == ("Ok", 0)
    assert execute(p, (3,), call_depth_limit=4).outcome() == ("Trap", "CallDepthExceeded")


def test_stack_overflow():
    code = [I(Op.LOAD_CONST, 0), I(Op.JUMP, 0)]
    r = execute(straight(code, pool=(1,)))
    assert r.outcome() == ("Trap", "StackOverflow") and r.steps == 2 * 256


def test_stack_underflow_and_invalid_operand():
    assert execute(straight([I(Op.BINARY_ADD)])).trap is TrapKind.STACK_UNDERFLOW
    assert execute(straight([I(Op.RETURN)])).trap is TrapKind.STACK_UNDERFLOW
    # falling off the end of the code
    assert execute(straight([I(Op.LOAD_CONST, 0)], pool=(1,))).outcome() == ("Trap", "InvalidOperand")


def test_trapping_instruction_not_counted():
    r = execute(straight([I(Op.LOAD_CONST, 0), I(Op.LOAD_CONST, 1), I(Op.BINARY_DIV)], pool=(1, 0)))
    assert r.trap is TrapKind.DIVIDE_BY_ZERO and r.steps == 2


def test_wrong_argument_count():
    with pytest.raises(ValueError):
        execute(compile_reference("fn main(a: int) -> int { return a; }"), ())


def test_args_are_wrapped():
    p = compile_reference("fn main(a: int) -> int { return a; }")
    assert execute(p, (2**64 + 5,)).value == 5


def test_fuel_zero():
    r = execute(compile_reference("fn main() -> int { return 1; }"), fuel=0)
    assert r.status is Status.TIMEOUT and r.steps == 0


def test_fuel_monotonicity():
    rng = random.Random(3)
    for _ in range(300):
        p = random_program(rng)
        img = Image(p)
        args = tuple(rng.randint(-9, 9) for _ in range(img.arity))
        r = execute(img, args, fuel=2000)
        if r.status is Status.OK:
            for fuel in (r.steps, r.steps + 1, 10**6):
                assert execute(img, args, fuel=fuel) == r
            if r.steps:
                assert execute(img, args, fuel=r.steps - 1).status is Status.TIMEOUT


def test_fast_loop_matches_reference_lane():
    rng = random.Random(8)
    for _ in range(1500):
        p = random_program(rng)
        img = Image(p)
        args = tuple(rng.randint(-50, 50) for _ in range(img.arity))
        for fuel in (0, 3, 64, 3000):
            for depth in (1, 2, 64):
                trace = []
                fast = run_lane(img, args, fuel, depth, trace)
                lane = Lane(img, args, fuel, depth)
                ops = []
                while lane.active:
                    op = lane.next_op()
                    if op is not None:
                        ops.append(op)
                    lane.step()
                assert fast == lane.result
                assert trace == ops


def test_steps_never_exceed_fuel():
    rng = random.Random(9)
    for _ in range(500):
        p = random_program(rng)
        img = Image(p)
        r = execute(img, (0,) * img.arity, fuel=100)
        assert r.steps <= 100
        assert (r.status is Status.TIMEOUT) == (r.steps == 100 and r.status is not Status.OK)


def test_empty_program_traps():
    assert execute(BytecodeProgram()).outcome() == ("Trap", "InvalidOperand")


def test_result_dict():
    assert execute(compile_reference("fn main() -> int { return 4; }")).as_dict() == {
        "status": "Ok", "value": 4, "trap": None, "steps": 2}
