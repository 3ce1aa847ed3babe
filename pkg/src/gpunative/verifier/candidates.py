"""Sample-and-verify compilation.

A generator proposes ``k`` bytecode candidates for a source program; all of
them run against a test suite in one lockstep batch; the fastest candidate
that passes every test wins, otherwise the failures are summarized.

The bundled generator is a surrogate for a learned compiler: each candidate is
the reference bytecode with probability ``p_correct`` and a 1-4 fold mutation
of it otherwise. Pass ``kill_suite`` to re-draw any mutant the suite cannot
tell apart from the reference, which makes the per-candidate success process
exactly Bernoulli(``p_correct``).
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ..backend import CompileOptions, compile_reference
from ..suite import TestSuite
from ..vm import (
    DEFAULT_FUEL, DEFAULT_WARP_WIDTH, BatchResult, BytecodeProgram, ExecResult, Image, Status,
    execute, execute_batch,
)
from .mutate import KINDS, Mutation, mutate

DEFAULT_ALPHA = 0.01
DEFAULT_WEIGHTS = {k: 1.0 for k in KINDS}

ALL_PASSED = "AllPassed"
FAILED = "Failed"
TRAPPED = "Trapped"
TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class GeneratorConfig:
    mode: str = "stochastic"  # "stochastic" or "reference"
    p_correct: float = 0.5
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    seed: int = 0
    max_redraws: int = 64

    def __post_init__(self):
        if self.mode not in ("stochastic", "reference"):
            raise ValueError(f"unknown generator mode {self.mode!r}")
        if not 0.0 <= self.p_correct <= 1.0:
            raise ValueError(f"p_correct must lie in [0, 1], got {self.p_correct}")
        unknown = set(self.weights) - set(KINDS)
        if unknown:
            raise ValueError(f"unknown mutation kinds {sorted(unknown)}")
        if any(w < 0 for w in self.weights.values()) or not any(w > 0 for w in self.weights.values()):
            raise ValueError("mutation weights must be >= 0 and not all zero")

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return GeneratorConfig(self.mode, self.p_correct, dict(self.weights), seed, self.max_redraws)


@dataclass(frozen=True)
class Provenance:
    clean: bool
    mutations: tuple[Mutation, ...] = ()
    redraws: int = 0
    killed: bool | None = None  # None when no kill suite was used

    def as_dict(self) -> dict:
        return {
            "clean": self.clean,
            "mutations": [str(m) for m in self.mutations],
            "redraws": self.redraws,
            "killed": self.killed,
        }


@dataclass(frozen=True)
class CandidateBatch:
    source_id: str
    reference: BytecodeProgram
    candidates: tuple[BytecodeProgram, ...]
    provenance: tuple[Provenance, ...]

    def __len__(self) -> int:
        return len(self.candidates)


class CandidateGenerator(Protocol):
    """Anything that proposes ``k`` candidates given the source and its reference bytecode."""

    def propose(self, source: str, reference: BytecodeProgram, k: int,
                kill_suite: TestSuite | None, fuel: int) -> list[tuple[BytecodeProgram, Provenance]]:
        ...


def source_id(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()[:12]


def _passes(img: Image, suite: TestSuite, fuel: int) -> bool:
    for case in suite:
        r = execute(img, case.args, fuel)
        if r.status is not Status.OK or r.value != case.expected:
            return False
    return True


class MutationSurrogate:
    """Reference-then-corrupt stand-in for a sampled neural compiler."""

    def __init__(self, cfg: GeneratorConfig):
        self.cfg = cfg

    def stream(self, i: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed & (2**64 - 1), i])

    def propose(self, source, reference, k, kill_suite=None, fuel=DEFAULT_FUEL):
        cfg = self.cfg
        out = []
        for i in range(k):
            if cfg.mode == "reference":
                out.append((reference, Provenance(True)))
                continue
            rng = self.stream(i)
            if rng.random() < cfg.p_correct:
                out.append((reference, Provenance(True)))
                continue
            redraws = 0
            while True:
                prog, applied = reference, []
                for _ in range(int(rng.integers(1, 5))):
                    prog, m = mutate(prog, rng, cfg.weights)
                    applied.append(m)
                if kill_suite is None:
                    out.append((prog, Provenance(False, tuple(applied))))
                    break
                killed = not _passes(Image(prog), kill_suite, fuel)
                if killed or redraws >= cfg.max_redraws:
                    out.append((prog, Provenance(False, tuple(applied), redraws, killed)))
                    break
                redraws += 1
        return out


def sample_candidates(source: str, k: int, cfg: GeneratorConfig, *,
                      kill_suite: TestSuite | None = None, fuel: int = DEFAULT_FUEL,
                      options: CompileOptions | None = None,
                      generator: CandidateGenerator | None = None) -> CandidateBatch:
    reference = compile_reference(source, options)
    generator = generator or MutationSurrogate(cfg)
    pairs = generator.propose(source, reference, k, kill_suite, fuel) if k > 0 else []
    return CandidateBatch(
        source_id(source), reference,
        tuple(p for p, _ in pairs), tuple(prov for _, prov in pairs),
    )


# --- verification ----------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    kind: str
    total_steps: int = 0
    test_index: int | None = None
    got: int | None = None
    expected: int | None = None
    trap: str | None = None

    @property
    def passed(self) -> bool:
        return self.kind == ALL_PASSED

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def judge(results: Sequence[ExecResult], suite: TestSuite) -> Verdict:
    for t, (r, case) in enumerate(zip(results, suite)):
        if r.status is Status.TRAP:
            return Verdict(TRAPPED, test_index=t, trap=r.trap.value, expected=case.expected)
        if r.status is Status.TIMEOUT:
            return Verdict(TIMED_OUT, test_index=t, expected=case.expected)
        if r.value != case.expected:
            return Verdict(FAILED, test_index=t, got=r.value, expected=case.expected)
    return Verdict(ALL_PASSED, total_steps=sum(r.steps for r in results))


def reward(verdict: Verdict | bool, steps: int, compiled_ok: bool = True,
           alpha: float = DEFAULT_ALPHA) -> float:
    """+10 if every test passes, minus ``alpha`` per executed step, +1 if the candidate is valid.

    The step penalty applies only to passing candidates: steps of a failed
    run measure nothing useful.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if not compiled_ok:
        return 0.0
    passed = verdict.passed if isinstance(verdict, Verdict) else bool(verdict)
    return (10.0 - alpha * steps if passed else 0.0) + 1.0


@dataclass(frozen=True)
class VerificationReport:
    verdicts: tuple[Verdict, ...]
    verified: tuple[int, ...]
    best: int | None
    rewards: tuple[float, ...]
    divergence: float = 0.0
    cycles: int = 0

    def as_dict(self) -> dict:
        return {
            "candidates": len(self.verdicts),
            "verified": list(self.verified),
            "best": self.best,
            "divergence": self.divergence,
            "lockstep_cycles": self.cycles,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "rewards": list(self.rewards),
        }


def verify(batch: CandidateBatch, suite: TestSuite, fuel: int = DEFAULT_FUEL,
           warp_width: int = DEFAULT_WARP_WIDTH, workers: int = 1,
           alpha: float = DEFAULT_ALPHA) -> tuple[VerificationReport, BatchResult | None]:
    if len(suite) == 0:
        raise ValueError("verification needs a nonempty test suite")
    if not batch.candidates:
        return VerificationReport((), (), None, ()), None
    result = execute_batch(batch.candidates, suite, warp_width, workers, fuel)
    verdicts = tuple(judge(row, suite) for row in result.results)
    verified = tuple(i for i, v in enumerate(verdicts) if v.passed)
    best = min(verified, key=lambda i: (verdicts[i].total_steps, i)) if verified else None
    rewards = tuple(reward(v, v.total_steps, True, alpha) for v in verdicts)
    report = VerificationReport(verdicts, verified, best, rewards,
                                result.divergence, result.total_lockstep_cycles)
    return report, result


@dataclass(frozen=True)
class FailureSummary:
    categories: dict  # every verdict kind, sums to k
    failures: dict  # verdict kinds other than AllPassed
    traps: dict
    most_common_failing_test: int | None

    def as_dict(self) -> dict:
        return {
            "categories": self.categories,
            "failures": self.failures,
            "traps": self.traps,
            "most_common_failing_test": self.most_common_failing_test,
        }


def analyze_failures(report: VerificationReport) -> FailureSummary:
    categories = Counter(v.kind for v in report.verdicts)
    failures = {k: n for k, n in categories.items() if k != ALL_PASSED}
    traps = Counter(v.trap for v in report.verdicts if v.kind == TRAPPED)
    tests = Counter(v.test_index for v in report.verdicts if not v.passed)
    common = min(tests, key=lambda t: (-tests[t], t)) if tests else None
    return FailureSummary(dict(categories), failures, dict(traps), common)


@dataclass(frozen=True)
class Alg2Result:
    """Outcome of one sample-and-verify round; ``best`` is None for the failure branch."""

    best: BytecodeProgram | None
    best_index: int | None
    batch: CandidateBatch
    report: VerificationReport
    summary: FailureSummary

    @property
    def success(self) -> bool:
        return self.best is not None

    def as_dict(self) -> dict:
        return {
            "source_id": self.batch.source_id,
            "success": self.success,
            "best_index": self.best_index,
            "report": self.report.as_dict(),
            "failure_summary": self.summary.as_dict(),
            "provenance": [p.as_dict() for p in self.batch.provenance],
        }


def run_alg2(source: str, suite: TestSuite, k: int, cfg: GeneratorConfig,
             fuel: int = DEFAULT_FUEL, *, warp_width: int = DEFAULT_WARP_WIDTH, workers: int = 1,
             kill_suite: TestSuite | None = None, alpha: float = DEFAULT_ALPHA,
             options: CompileOptions | None = None,
             generator: CandidateGenerator | None = None) -> Alg2Result:
    batch = sample_candidates(source, k, cfg, kill_suite=kill_suite, fuel=fuel,
                              options=options, generator=generator)
    report, _ = verify(batch, suite, fuel, warp_width, workers, alpha)
    best = batch.candidates[report.best] if report.best is not None else None
    return Alg2Result(best, report.best, batch, report, analyze_failures(report))
