"""Lockstep warp scheduler.

Programs are packed into warps of ``warp_width`` lanes. For each test case a
warp advances in cycles; every lane that can still retire an instruction
retires exactly one per cycle. Divergence counts, per cycle, the lanes whose
opcode differs from the cycle's majority opcode.

Lanes share no state, so a warp is simulated by running each lane alone while
recording its opcode trace: cycle ``c`` of the warp is column ``c`` of the
aligned traces. This is exactly the step-by-step schedule (see
``lockstep_reference``), only faster.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bytecode import BytecodeProgram, Op
from .machine import DEFAULT_CALL_DEPTH, DEFAULT_FUEL, ExecResult, Image, Lane, run_lane

_OPCODES = tuple(int(op) for op in Op)
_INDEX = np.zeros(256, dtype=np.int64)  # opcode byte -> 1-based dense index
_INDEX[list(_OPCODES)] = np.arange(1, len(_OPCODES) + 1)

DEFAULT_WARP_WIDTH = 32


@dataclass(frozen=True)
class WarpStats:
    warp: int
    lanes: int
    cycles: int
    active_lane_cycles: int
    divergent_lane_cycles: int

    @property
    def divergence(self) -> float:
        return self.divergent_lane_cycles / self.active_lane_cycles if self.active_lane_cycles else 0.0


@dataclass(frozen=True)
class BatchResult:
    results: tuple[tuple[ExecResult, ...], ...]  # [program][test]
    divergence: float
    total_lockstep_cycles: int
    warps: tuple[WarpStats, ...] = ()

    def __getitem__(self, i):
        return self.results[i]

    def __len__(self) -> int:
        return len(self.results)

    def as_dict(self) -> dict:
        return {
            "divergence": self.divergence,
            "total_lockstep_cycles": self.total_lockstep_cycles,
            "programs": [[r.as_dict() for r in row] for row in self.results],
            "warps": [
                {"warp": w.warp, "lanes": w.lanes, "cycles": w.cycles, "divergence": w.divergence}
                for w in self.warps
            ],
        }


def _trace_stats(traces: list[list[int]]) -> tuple[int, int, int]:
    """(cycles, active lane-cycles, divergent lane-cycles) of aligned opcode traces."""
    lengths = sorted(len(t) for t in traces)
    cycles = lengths[-1] if lengths else 0
    active = sum(lengths)
    # a column with at most one live lane cannot diverge
    width = lengths[-2] if len(lengths) > 1 else 0
    if width == 0:
        return cycles, active, 0
    grid = np.zeros((len(traces), width), dtype=np.int64)  # 0 marks a halted lane
    for row, t in zip(grid, traces):
        n = min(len(t), width)
        row[:n] = _INDEX[np.asarray(t[:n], dtype=np.int64)]
    cols = np.broadcast_to(np.arange(width, dtype=np.int64), grid.shape)
    counts = np.bincount((grid * width + cols).ravel(), minlength=(len(_OPCODES) + 1) * width)
    majority = counts.reshape(len(_OPCODES) + 1, width)[1:].max(axis=0)
    live = np.count_nonzero(grid, axis=0)
    return cycles, active, int((live - majority).sum())


def _run_warp(images: list[Image], args: tuple[int, ...], fuel: int, depth: int):
    traces: list[list[int]] = []
    results = []
    for img in images:
        trace: list[int] = []
        results.append(run_lane(img, args, fuel, depth, trace))
        traces.append(trace)
    return (results, *_trace_stats(traces))


def lockstep_reference(images: list[Image], args: tuple[int, ...], fuel: int = DEFAULT_FUEL,
                       depth: int = DEFAULT_CALL_DEPTH):
    """Literal cycle-by-cycle warp simulation; slow, kept as the specification."""
    lanes = [Lane(img, args, fuel, depth) for img in images]
    cycles = active_total = divergent = 0
    live = lanes
    while live:
        ops = []
        for lane in live:
            op = lane.next_op()
            if op is not None:
                ops.append(op)
            lane.step()
        if ops:
            cycles += 1
            active_total += len(ops)
            # ties between opcodes do not change the count of minority lanes
            divergent += len(ops) - max(Counter(ops).values())
        live = [lane for lane in live if lane.active]
    return [lane.result for lane in lanes], cycles, active_total, divergent


def execute_batch(programs: Sequence[BytecodeProgram], suite, warp_width: int = DEFAULT_WARP_WIDTH,
                  workers: int = 1, fuel: int = DEFAULT_FUEL,
                  call_depth_limit: int = DEFAULT_CALL_DEPTH) -> BatchResult:
    """Execute every program on every test case of ``suite`` in lockstep warps.

    ``suite`` is a :class:`~gpunative.suite.TestSuite` or a sequence of argument
    tuples. The result is independent of ``workers``.
    """
    if not programs:
        raise ValueError("execute_batch needs at least one program")
    if warp_width < 1:
        raise ValueError("warp width must be >= 1")
    arg_lists = suite.arg_lists if hasattr(suite, "arg_lists") else [tuple(a) for a in suite]
    images = [Image(p) for p in programs]
    for i, img in enumerate(images):
        for args in arg_lists:
            if img.fns and len(args) != img.arity:
                raise ValueError(f"program {i} takes {img.arity} argument(s), test gives {len(args)}")
    warps = [images[i:i + warp_width] for i in range(0, len(images), warp_width)]
    jobs = [(w, t) for w in range(len(warps)) for t in range(len(arg_lists))]

    def work(job):
        w, t = job
        return _run_warp(warps[w], arg_lists[t], fuel, call_depth_limit)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(work, jobs))
    else:
        outputs = [work(j) for j in jobs]

    table: list[list[ExecResult | None]] = [[None] * len(arg_lists) for _ in programs]
    per_warp = [[0, 0, 0] for _ in warps]
    for (w, t), (results, cycles, active, divergent) in zip(jobs, outputs):
        for lane, res in enumerate(results):
            table[w * warp_width + lane][t] = res
        per_warp[w][0] += cycles
        per_warp[w][1] += active
        per_warp[w][2] += divergent

    active_sum = sum(s[1] for s in per_warp)
    divergent_sum = sum(s[2] for s in per_warp)
    divergence = float(Fraction(divergent_sum, active_sum)) if active_sum else 0.0
    return BatchResult(
        results=tuple(tuple(row) for row in table),
        divergence=divergence,
        total_lockstep_cycles=sum(s[0] for s in per_warp),
        warps=tuple(WarpStats(w, len(warps[w]), *per_warp[w]) for w in range(len(warps))),
    )
