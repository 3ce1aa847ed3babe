import random
from fractions import Fraction

import pytest

from gpunative.backend import compile_reference
from gpunative.progen import random_source
from gpunative.suite import TestSuite
from gpunative.vm import BytecodeProgram, FunctionEntry, Image, Instruction, Op, execute, execute_batch
from gpunative.vm.batch import _run_warp, lockstep_reference
from gpunative.vm.fuzz import random_program

I = Instruction


def one_arg(code, pool=(1, 2)):
    return BytecodeProgram(tuple(pool), (FunctionEntry(0, 1, 1),), tuple(code), 0)


# 10 instructions: constants and additions
SHORT = one_arg([I(Op.LOAD_CONST, 0), I(Op.LOAD_CONST, 1), I(Op.BINARY_ADD), I(Op.LOAD_CONST, 0),
                 I(Op.BINARY_ADD), I(Op.LOAD_CONST, 0), I(Op.BINARY_ADD), I(Op.LOAD_CONST, 0),
                 I(Op.BINARY_ADD), I(Op.RETURN)])
# 20 instructions whose first ten opcodes all differ from SHORT's
LONG = one_arg([I(Op.LOAD_VAR, 0), I(Op.LOAD_VAR, 0), I(Op.BINARY_SUB), I(Op.LOAD_VAR, 0),
                I(Op.BINARY_SUB), I(Op.LOAD_VAR, 0), I(Op.BINARY_MUL), I(Op.LOAD_VAR, 0),
                I(Op.BINARY_SUB), I(Op.STORE_VAR, 0), I(Op.LOAD_VAR, 0), I(Op.LOAD_VAR, 0),
                I(Op.BINARY_ADD), I(Op.STORE_VAR, 0), I(Op.LOAD_VAR, 0), I(Op.LOAD_VAR, 0),
                I(Op.BINARY_MUL), I(Op.STORE_VAR, 0), I(Op.LOAD_VAR, 0), I(Op.RETURN)])


def test_hand_simulated_divergence():
    # cycles 1-10: two lanes, different opcodes, one minority lane each -> 10
    # cycles 11-20: LONG alone -> 0; active lane-cycles 10*2 + 10 = 30
    r = execute_batch([SHORT, LONG], [(3,)], warp_width=32)
    assert [row[0].steps for row in r.results] == [10, 20]
    assert r.divergence == float(Fraction(10, 30))
    assert r.total_lockstep_cycles == 20
    assert r.warps[0].active_lane_cycles == 30 and r.warps[0].divergent_lane_cycles == 10


def test_identical_programs_zero_divergence():
    p = compile_reference("fn main(a: int) -> int { let s = 0; while (s < a) { s = s + 1; } return s; }")
    r = execute_batch([p] * 40, [(0,), (5,), (17,)], warp_width=8)
    assert r.divergence == 0.0
    assert len(r.warps) == 5


def test_width_one_zero_divergence():
    r = execute_batch([SHORT, LONG, SHORT], [(1,)], warp_width=1)
    assert r.divergence == 0.0
    assert r.total_lockstep_cycles == 10 + 20 + 10


def test_warp_count_and_cycles_are_sum_over_warps():
    progs = [SHORT, LONG] * 5
    r = execute_batch(progs, [(1,), (2,)], warp_width=3)
    assert len(r.warps) == 4
    assert r.total_lockstep_cycles == sum(w.cycles for w in r.warps)


def test_matches_solo_and_is_worker_independent():
    rng = random.Random(21)
    progs = [compile_reference(random_source(s)) for s in range(40)]
    suite = [tuple(rng.randint(-10, 30) for _ in range(2)) for _ in range(3)]
    runs = [execute_batch(progs, suite, w, workers) for w in (1, 7, 32) for workers in (1, 4)]
    for r in runs[1:]:
        assert r.results == runs[0].results
    for i, p in enumerate(progs):
        for t, args in enumerate(suite):
            assert runs[0].results[i][t] == execute(p, args)
    by_width = {}
    for r in runs:
        by_width.setdefault(len(r.warps), []).append(r)
    for group in by_width.values():
        assert all(g == group[0] for g in group)


def test_fast_warps_match_literal_lockstep():
    rng = random.Random(4)
    pool = {}
    for _ in range(4000):
        p = random_program(rng)
        pool.setdefault(Image(p).arity, []).append(p)
    checked = 0
    for arity, progs in pool.items():
        for i in range(0, min(len(progs), 240), 6):
            imgs = [Image(p) for p in progs[i:i + 6]]
            args = tuple(rng.randint(-5, 5) for _ in range(arity))
            for fuel in (4, 300):
                assert _run_warp(imgs, args, fuel, 64) == lockstep_reference(imgs, args, fuel, 64)
                checked += 1
    assert checked > 100


def test_accepts_test_suite_objects():
    suite = TestSuite.of([((1,), 0), ((2,), 0)])
    r = execute_batch([SHORT], suite)
    assert len(r.results[0]) == 2


def test_errors():
    with pytest.raises(ValueError):
        execute_batch([], [()])
    with pytest.raises(ValueError):
        execute_batch([SHORT], [(1,)], warp_width=0)
    with pytest.raises(ValueError):
        execute_batch([SHORT], [(1, 2)])


def test_divergence_bounds_and_json():
    rng = random.Random(2)
    progs = [random_program(rng, max_functions=1) for _ in range(30)]
    progs = [p for p in progs if Image(p).arity == 0] or [SHORT]
    r = execute_batch(progs, [()], fuel=500)
    assert 0.0 <= r.divergence <= 1.0
    d = r.as_dict()
    assert set(d) == {"divergence", "total_lockstep_cycles", "programs", "warps"}
