"""Single-lane stack machine with fuel metering.

:class:`Lane` retires one instruction per :meth:`Lane.step` and is the
reference semantics. :func:`run_lane` is the same machine as one tight loop;
it can record the opcode of every retired instruction, which is all the
lockstep scheduler needs because lanes share no state. Tests pin the two
against each other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .bytecode import BytecodeProgram, Op

DEFAULT_FUEL = 100_000
DEFAULT_CALL_DEPTH = 64
STACK_CAPACITY = 256

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def wrap(x: int) -> int:
    """Reduce an integer to signed 64-bit two's complement."""
    x &= _MASK
    return x - (1 << 64) if x & _SIGN else x


def trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


class Status(enum.Enum):
    OK = "Ok"
    TRAP = "Trap"
    TIMEOUT = "Timeout"


class TrapKind(enum.Enum):
    DIVIDE_BY_ZERO = "DivideByZero"
    STACK_OVERFLOW = "StackOverflow"
    CALL_DEPTH_EXCEEDED = "CallDepthExceeded"
    INVALID_OPERAND = "InvalidOperand"
    STACK_UNDERFLOW = "StackUnderflow"


@dataclass(frozen=True)
class ExecResult:
    status: Status
    value: int = 0
    steps: int = 0
    trap: TrapKind | None = None

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def outcome(self) -> tuple:
        """(status, value-or-trap) pair used for semantic comparisons."""
        if self.status is Status.OK:
            return ("Ok", self.value)
        if self.status is Status.TRAP:
            return ("Trap", self.trap.value)
        return ("Timeout", None)

    def __str__(self) -> str:
        if self.status is Status.OK:
            return f"Ok {self.value}"
        if self.status is Status.TRAP:
            return f"Trap {self.trap.value}"
        return "Timeout"

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "value": self.value if self.ok else None,
            "trap": self.trap.value if self.trap else None,
            "steps": self.steps,
        }


class Image:
    """Flattened, index-friendly view of a program shared by all lanes running it."""

    __slots__ = ("ops", "args", "pool", "fns", "entry", "ncode")

    def __init__(self, p: BytecodeProgram):
        self.ops = [int(i.op) for i in p.code]
        self.args = [i.operand for i in p.code]
        self.pool = list(p.pool)
        self.fns = [(f.entry, f.arity, f.slots) for f in p.functions]
        self.entry = p.entry
        self.ncode = len(self.ops)

    @property
    def arity(self) -> int:
        return self.fns[self.entry][1] if self.fns else 0


_LOAD_CONST, _LOAD_VAR, _STORE_VAR = int(Op.LOAD_CONST), int(Op.LOAD_VAR), int(Op.STORE_VAR)
_ADD, _SUB, _MUL, _DIV = int(Op.BINARY_ADD), int(Op.BINARY_SUB), int(Op.BINARY_MUL), int(Op.BINARY_DIV)
_LT, _JUMP, _JIF = int(Op.COMPARE_LT), int(Op.JUMP), int(Op.JUMP_IF_FALSE)
_CALL, _RETURN = int(Op.CALL), int(Op.RETURN)


class Lane:
    __slots__ = ("img", "fuel", "depth_limit", "pc", "steps", "frames", "result")

    def __init__(self, img: Image, args: Sequence[int], fuel: int = DEFAULT_FUEL,
                 call_depth_limit: int = DEFAULT_CALL_DEPTH):
        self.img = img
        self.fuel = fuel
        self.depth_limit = call_depth_limit
        self.steps = 0
        self.result: ExecResult | None = None
        if not img.fns:
            self.frames = []
            self.pc = 0
            self._trap(TrapKind.INVALID_OPERAND)
            return
        entry, arity, slots = img.fns[img.entry]
        if len(args) != arity:
            raise ValueError(f"entry function takes {arity} argument(s), {len(args)} given")
        local = [0] * slots
        for i, a in enumerate(args):
            local[i] = wrap(int(a))
        # frame: [slots, operand stack, return pc]
        self.frames = [[local, [], -1]]
        self.pc = entry

    @property
    def active(self) -> bool:
        return self.result is None

    def _trap(self, kind: TrapKind) -> None:
        self.result = ExecResult(Status.TRAP, 0, self.steps, kind)

    def next_op(self) -> int | None:
        """Opcode the lane retires on its next step, or None if it halts instead."""
        if self.result is not None or self.steps >= self.fuel or not 0 <= self.pc < self.img.ncode:
            return None
        return self.img.ops[self.pc]

    def step(self) -> None:
        if self.result is not None:
            return
        if self.steps >= self.fuel:
            self.result = ExecResult(Status.TIMEOUT, 0, self.steps)
            return
        img = self.img
        pc = self.pc
        if not 0 <= pc < img.ncode:
            self._trap(TrapKind.INVALID_OPERAND)
            return
        op = img.ops[pc]
        arg = img.args[pc]
        frame = self.frames[-1]
        stack = frame[1]
        nxt = pc + 1

        if op == _LOAD_CONST:
            if arg >= len(img.pool):
                return self._trap(TrapKind.INVALID_OPERAND)
            if len(stack) >= STACK_CAPACITY:
                return self._trap(TrapKind.STACK_OVERFLOW)
            stack.append(img.pool[arg])
        elif op == _LOAD_VAR:
            if arg >= len(frame[0]):
                return self._trap(TrapKind.INVALID_OPERAND)
            if len(stack) >= STACK_CAPACITY:
                return self._trap(TrapKind.STACK_OVERFLOW)
            stack.append(frame[0][arg])
        elif op == _STORE_VAR:
            if arg >= len(frame[0]):
                return self._trap(TrapKind.INVALID_OPERAND)
            if not stack:
                return self._trap(TrapKind.STACK_UNDERFLOW)
            frame[0][arg] = stack.pop()
        elif op == _ADD or op == _SUB or op == _MUL or op == _DIV or op == _LT:
            if len(stack) < 2:
                return self._trap(TrapKind.STACK_UNDERFLOW)
            b = stack[-1]
            a = stack[-2]
            if op == _ADD:
                r = wrap(a + b)
            elif op == _SUB:
                r = wrap(a - b)
            elif op == _MUL:
                r = wrap(a * b)
            elif op == _DIV:
                if b == 0:
                    return self._trap(TrapKind.DIVIDE_BY_ZERO)
                r = trunc_div(a, b)
            else:
                r = 1 if a < b else 0
            del stack[-1]
            stack[-1] = r
        elif op == _JUMP:
            nxt = arg
        elif op == _JIF:
            if not stack:
                return self._trap(TrapKind.STACK_UNDERFLOW)
            if stack.pop() == 0:
                nxt = arg
        elif op == _CALL:
            if arg >= len(img.fns):
                return self._trap(TrapKind.INVALID_OPERAND)
            entry, arity, slots = img.fns[arg]
            if len(self.frames) >= self.depth_limit:
                return self._trap(TrapKind.CALL_DEPTH_EXCEEDED)
            if len(stack) < arity:
                return self._trap(TrapKind.STACK_UNDERFLOW)
            local = [0] * slots
            for i in range(arity - 1, -1, -1):
                local[i] = stack.pop()
            self.frames.append([local, [], nxt])
            nxt = entry
        elif op == _RETURN:
            if not stack:
                return self._trap(TrapKind.STACK_UNDERFLOW)
            value = stack.pop()
            self.frames.pop()
            if not self.frames:
                self.steps += 1
                self.result = ExecResult(Status.OK, value, self.steps)
                return
            caller = self.frames[-1][1]
            if len(caller) >= STACK_CAPACITY:
                self.frames.append(frame)
                return self._trap(TrapKind.STACK_OVERFLOW)
            caller.append(value)
            nxt = frame[2]
        else:
            return self._trap(TrapKind.INVALID_OPERAND)

        self.steps += 1
        self.pc = nxt

    def run(self) -> ExecResult:
        step = self.step
        while self.result is None:
            step()
        return self.result


_LO, _HI = -_SIGN, _SIGN


def run_lane(img: Image, args: Sequence[int], fuel: int = DEFAULT_FUEL,
             call_depth_limit: int = DEFAULT_CALL_DEPTH, trace: list | None = None) -> ExecResult:
    """Run one lane to completion; appends retired opcodes to ``trace`` if given.

    A frame whose (pc, locals, stack) repeats at a backward branch, with no
    call or return in between, can only spin until its fuel runs out; that
    case ends early with the same Timeout and the periodic remainder of the
    trace.
    """
    if not img.fns:
        return ExecResult(Status.TRAP, 0, 0, TrapKind.INVALID_OPERAND)
    entry, arity, slots = img.fns[img.entry]
    if len(args) != arity:
        raise ValueError(f"entry function takes {arity} argument(s), {len(args)} given")
    ops, opargs, pool, fns, ncode = img.ops, img.args, img.pool, img.fns, img.ncode
    npool, nfns = len(pool), len(fns)
    local = [0] * slots
    for i, a in enumerate(args):
        local[i] = wrap(int(a))
    stack: list[int] = []
    callers: list = []  # (locals, stack, return pc) of suspended frames
    record = trace.append if trace is not None else None
    pc = entry
    steps = 0
    trap = None
    snap, snap_steps, power, lam = None, 0, 1, 0
    while True:
        if steps >= fuel:
            return ExecResult(Status.TIMEOUT, 0, steps)
        if not 0 <= pc < ncode:
            trap = TrapKind.INVALID_OPERAND
            break
        op = ops[pc]
        if record is not None:
            record(op)
        arg = opargs[pc]
        pc += 1
        if op == _LOAD_VAR:
            if arg >= len(local):
                trap = TrapKind.INVALID_OPERAND
                break
            if len(stack) >= STACK_CAPACITY:
                trap = TrapKind.STACK_OVERFLOW
                break
            stack.append(local[arg])
        elif op == _LOAD_CONST:
            if arg >= npool:
                trap = TrapKind.INVALID_OPERAND
                break
            if len(stack) >= STACK_CAPACITY:
                trap = TrapKind.STACK_OVERFLOW
                break
            stack.append(pool[arg])
        elif op == _STORE_VAR:
            if arg >= len(local):
                trap = TrapKind.INVALID_OPERAND
                break
            if not stack:
                trap = TrapKind.STACK_UNDERFLOW
                break
            local[arg] = stack.pop()
        elif op == _JIF or op == _JUMP:
            if op == _JIF:
                if not stack:
                    trap = TrapKind.STACK_UNDERFLOW
                    break
                if stack.pop() != 0:
                    steps += 1
                    continue
            back = arg < pc
            pc = arg
            if back:
                steps += 1
                # Brent cycle check on the frame state at backward branches
                key = (pc, tuple(local), tuple(stack))
                if key == snap:
                    period = steps - snap_steps
                    if trace is not None:
                        cycle = trace[-period:]
                        need = fuel - steps
                        trace.extend((cycle * (need // period + 1))[:need])
                    return ExecResult(Status.TIMEOUT, 0, fuel)
                lam += 1
                if lam == power:
                    snap, snap_steps, power, lam = key, steps, power * 2, 0
                continue
        elif _ADD <= op <= _DIV or op == _LT:
            if len(stack) < 2:
                trap = TrapKind.STACK_UNDERFLOW
                break
            b = stack.pop()
            a = stack[-1]
            if op == _ADD:
                r = a + b
            elif op == _SUB:
                r = a - b
            elif op == _MUL:
                r = a * b
            elif op == _LT:
                r = 1 if a < b else 0
            else:
                if b == 0:
                    trap = TrapKind.DIVIDE_BY_ZERO
                    break
                r = trunc_div(a, b)
            stack[-1] = r if _LO <= r < _HI else wrap(r)
        elif op == _CALL:
            if arg >= nfns:
                trap = TrapKind.INVALID_OPERAND
                break
            f_entry, f_arity, f_slots = fns[arg]
            if len(callers) + 1 >= call_depth_limit:
                trap = TrapKind.CALL_DEPTH_EXCEEDED
                break
            if len(stack) < f_arity:
                trap = TrapKind.STACK_UNDERFLOW
                break
            new_local = [0] * f_slots
            if f_arity:
                new_local[:f_arity] = stack[-f_arity:]
                del stack[-f_arity:]
            callers.append((local, stack, pc))
            local, stack, pc = new_local, [], f_entry
            snap, power, lam = None, 1, 0
        elif op == _RETURN:
            if not stack:
                trap = TrapKind.STACK_UNDERFLOW
                break
            value = stack.pop()
            if not callers:
                return ExecResult(Status.OK, value, steps + 1)
            c_local, c_stack, c_pc = callers[-1]
            if len(c_stack) >= STACK_CAPACITY:
                trap = TrapKind.STACK_OVERFLOW
                break
            callers.pop()
            c_stack.append(value)
            local, stack, pc = c_local, c_stack, c_pc
            snap, power, lam = None, 1, 0
        else:
            trap = TrapKind.INVALID_OPERAND
            break
        steps += 1
    return ExecResult(Status.TRAP, 0, steps, trap)


def execute(p: BytecodeProgram | Image, args: Sequence[int] = (), fuel: int = DEFAULT_FUEL,
            call_depth_limit: int = DEFAULT_CALL_DEPTH) -> ExecResult:
    """Run the entry function on ``args``; never raises for malformed code."""
    img = p if isinstance(p, Image) else Image(p)
    return run_lane(img, args, fuel, call_depth_limit)
