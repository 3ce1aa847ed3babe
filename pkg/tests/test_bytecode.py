import random
import struct

import pytest
from hypothesis import given, strategies as st

from gpunative.backend import compile_reference
from gpunative.vm import (
    HEADER_SIZE, BytecodeProgram, DecodeError, FunctionEntry, Instruction, Op, decode, encode,
)
from gpunative.vm.fuzz import random_program

I = Instruction


def prog(code, pool=(), fns=None, entry=0):
    fns = fns if fns is not None else (FunctionEntry(0, 0, 1),)
    return BytecodeProgram(tuple(pool), tuple(fns), tuple(code), entry)


def test_empty_program_header_is_20_bytes():
    data = encode(BytecodeProgram())
    assert len(data) == HEADER_SIZE == 20
    # magic, version 1, pool 0, functions 0, entry 0, code length 0
    assert data == b"GNBC" + struct.pack("<HIHII", 1, 0, 0, 0, 0)
    assert decode(data) == BytecodeProgram()


def test_return_byte():
    data = encode(prog([I(Op.LOAD_CONST, 0), I(Op.RETURN)], pool=[5]))
    assert data[-1] == 0x41


def test_load_const_operand_little_endian():
    data = encode(prog([I(Op.LOAD_CONST, 1), I(Op.RETURN)], pool=[5, 6]))
    assert data[-6:-1] == bytes([0x01, 0x01, 0x00, 0x00, 0x00])


def test_opcode_values():
    assert {op.name: int(op) for op in Op} == {
        "LOAD_CONST": 0x01, "LOAD_VAR": 0x02, "STORE_VAR": 0x03, "BINARY_ADD": 0x10,
        "BINARY_SUB": 0x11, "BINARY_MUL": 0x12, "BINARY_DIV": 0x13, "COMPARE_LT": 0x20,
        "JUMP": 0x30, "JUMP_IF_FALSE": 0x31, "CALL": 0x40, "RETURN": 0x41,
    }


def test_full_layout():
    p = BytecodeProgram((-2,), (FunctionEntry(0, 1, 2),), (I(Op.LOAD_VAR, 1), I(Op.RETURN)), 0)
    expected = (b"GNBC" + struct.pack("<H", 1) + struct.pack("<I", 1) + struct.pack("<q", -2)
                + struct.pack("<H", 1) + struct.pack("<IHH", 0, 1, 2) + struct.pack("<I", 0)
                + struct.pack("<I", 2) + bytes([0x02]) + struct.pack("<I", 1) + bytes([0x41]))
    assert encode(p) == expected


def test_operand_presence_enforced():
    with pytest.raises(ValueError):
        I(Op.RETURN, 0)
    with pytest.raises(ValueError):
        I(Op.LOAD_CONST)


def test_bad_magic():
    data = bytearray(encode(compile_reference("fn main() -> int { return 1; }")))
    data[0] = 0x00
    with pytest.raises(DecodeError) as info:
        decode(bytes(data))
    assert info.value.offset == 0


def test_unknown_opcode():
    data = encode(BytecodeProgram((), (FunctionEntry(0, 0, 0),), (I(Op.RETURN),), 0))
    with pytest.raises(DecodeError) as info:
        decode(data[:-1] + b"\xff")
    assert "opcode" in str(info.value)


@pytest.mark.parametrize("p", [
    prog([I(Op.LOAD_CONST, 0), I(Op.RETURN)]),  # empty pool
    prog([I(Op.LOAD_VAR, 1), I(Op.RETURN)]),  # one slot
    prog([I(Op.JUMP, 2), I(Op.RETURN)]),
    prog([I(Op.CALL, 1), I(Op.RETURN)]),
    prog([I(Op.RETURN)], entry=1),
    prog([I(Op.RETURN)], fns=[FunctionEntry(0, 2, 1)]),
    prog([I(Op.RETURN), I(Op.RETURN)], fns=[FunctionEntry(1, 0, 0), FunctionEntry(0, 0, 0)]),
    prog([I(Op.RETURN)], fns=[FunctionEntry(0, 0, 0), FunctionEntry(1, 0, 0)]),
    BytecodeProgram((), (), (I(Op.RETURN),), 0),
])
def test_invalid_programs_rejected(p):
    assert not p.is_valid()
    with pytest.raises(DecodeError):
        decode(encode(p))


def test_slot_check_uses_owning_function():
    ok = BytecodeProgram((), (FunctionEntry(0, 0, 0), FunctionEntry(1, 0, 3)),
                         (I(Op.RETURN), I(Op.LOAD_VAR, 2)), 0)
    assert ok.is_valid()
    bad = BytecodeProgram((), ok.functions, (I(Op.LOAD_VAR, 2), I(Op.RETURN)), 0)
    assert not bad.is_valid()


def test_trailing_bytes_rejected():
    data = encode(compile_reference("fn main() -> int { return 1; }"))
    with pytest.raises(DecodeError):
        decode(data + b"\x00")


def test_every_truncation_rejected():
    data = encode(compile_reference("fn main(a: int) -> int { return a * 2 + 1; }"))
    for n in range(len(data)):
        with pytest.raises(DecodeError):
            decode(data[:n])


def test_round_trip_random():
    rng = random.Random(5)
    for _ in range(300):
        p = random_program(rng)
        assert p.is_valid()
        assert decode(encode(p)) == p


@given(st.binary(max_size=80))
def test_decode_never_crashes(data):
    try:
        p = decode(b"GNBC" + data)
    except DecodeError:
        return
    assert p.is_valid()
