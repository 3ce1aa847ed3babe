"""Complexity-routed hybrid compilation.

Programs scoring below ``theta_simple`` try the sample-and-verify path on a
quick prefix of their suite; a quick-path winner is re-checked on the full
suite before it is accepted. Anything else comes from the reference compiler.
"""

from __future__ import annotations

import enum
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

from .backend import CompileOptions, compile_reference
from .frontend import FeatureVector, extract_features, lex, parse
from .suite import TestSuite
from .verifier import GeneratorConfig, sample_candidates, verify
from .verifier.candidates import CandidateBatch, Provenance, source_id
from .vm import DEFAULT_FUEL, DEFAULT_WARP_WIDTH, BytecodeProgram

FEATURES = tuple(f.name for f in fields(FeatureVector))
DEFAULT_WEIGHTS = {name: (5.0 if name == "has_recursion" else 1.0) for name in FEATURES}


@dataclass(frozen=True)
class RouterConfig:
    theta_simple: float = 25.0
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    k_fast: int = 100
    quick_suite_size: int = 2

    def __post_init__(self):
        if self.k_fast < 1:
            raise ValueError("k_fast must be >= 1")
        if self.quick_suite_size < 1:
            raise ValueError("quick_suite_size must be >= 1")
        unknown = set(self.weights) - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown feature weights {sorted(unknown)}")

    def scaled(self, factor: float) -> "RouterConfig":
        return RouterConfig(self.theta_simple * factor,
                            {k: v * factor for k, v in self.weights.items()},
                            self.k_fast, self.quick_suite_size)

    def with_theta(self, theta: float) -> "RouterConfig":
        return RouterConfig(theta, dict(self.weights), self.k_fast, self.quick_suite_size)

    # plain-text key=value form
    def dumps(self) -> str:
        lines = [f"theta_simple={self.theta_simple}", f"k_fast={self.k_fast}",
                 f"quick_suite_size={self.quick_suite_size}"]
        lines += [f"weight.{k}={v}" for k, v in self.weights.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RouterConfig":
        values: dict = {}
        weights = dict(DEFAULT_WEIGHTS)
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key.startswith("weight."):
                weights[key[len("weight."):]] = float(value)
            elif key == "theta_simple":
                values[key] = float(value)
            elif key in ("k_fast", "quick_suite_size"):
                values[key] = int(value)
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        return cls(weights=weights, **values)

    @classmethod
    def load(cls, path: str | Path) -> "RouterConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


class RoutePath(enum.Enum):
    NEURAL_ACCEPTED = "NeuralAccepted"
    NEURAL_FAILED_FELL_BACK = "NeuralFailedFellBack"
    ROUTED_TRADITIONAL = "RoutedTraditional"


def complexity_score(features: FeatureVector, cfg: RouterConfig) -> float:
    return sum(cfg.weights.get(name, 0.0) * float(getattr(features, name)) for name in FEATURES)


@dataclass(frozen=True)
class RoutingOutcome:
    path: RoutePath
    score: float
    bytecode: BytecodeProgram
    timing: dict  # seconds per phase: routing, generation, verification, traditional
    candidate_index: int | None = None

    @property
    def total_time(self) -> float:
        return sum(self.timing.values())

    def as_dict(self) -> dict:
        return {
            "path": self.path.value,
            "score": self.score,
            "candidate_index": self.candidate_index,
            "timing_s": dict(self.timing),
            "total_s": self.total_time,
        }


def route(source: str, full_suite: TestSuite, cfg: RouterConfig | None = None,
          gen_cfg: GeneratorConfig | None = None, *, fuel: int = DEFAULT_FUEL,
          warp_width: int = DEFAULT_WARP_WIDTH, workers: int = 1,
          options: CompileOptions | None = None, kill: bool = True) -> RoutingOutcome:
    """Route one program. With ``kill`` (default) the surrogate's mutants are
    re-drawn until ``full_suite`` rejects them, so ``p_correct`` is exactly the
    per-candidate success rate; a learned generator would ignore it."""
    cfg = cfg or RouterConfig()
    gen_cfg = gen_cfg or GeneratorConfig()
    if len(full_suite) == 0:
        raise ValueError("routing needs a nonempty full test suite")
    timing = {"routing": 0.0, "generation": 0.0, "verification": 0.0, "traditional": 0.0}

    t0 = time.perf_counter()
    score = complexity_score(extract_features(parse(lex(source))), cfg)
    timing["routing"] = time.perf_counter() - t0

    if score < cfg.theta_simple:
        quick = full_suite.head(cfg.quick_suite_size)
        t0 = time.perf_counter()
        batch = sample_candidates(source, cfg.k_fast, gen_cfg, fuel=fuel, options=options,
                                  kill_suite=full_suite if kill else None)
        timing["generation"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        report, _ = verify(batch, quick, fuel, warp_width, workers)
        accepted = False
        if report.best is not None:
            winner = batch.candidates[report.best]
            single = CandidateBatch(batch.source_id, batch.reference, (winner,), (Provenance(False),))
            full_report, _ = verify(single, full_suite, fuel, warp_width, 1)
            accepted = full_report.best == 0
        timing["verification"] = time.perf_counter() - t0
        if accepted:
            return RoutingOutcome(RoutePath.NEURAL_ACCEPTED, score, winner, timing, report.best)
        path = RoutePath.NEURAL_FAILED_FELL_BACK
    else:
        path = RoutePath.ROUTED_TRADITIONAL

    t0 = time.perf_counter()
    bytecode = compile_reference(source, options)
    timing["traditional"] = time.perf_counter() - t0
    return RoutingOutcome(path, score, bytecode, timing)


# --- threshold calibration -------------------------------------------------

@dataclass(frozen=True)
class CalibrationRow:
    source_id: str
    score: float
    succeeded: bool


@dataclass(frozen=True)
class CalibrationReport:
    theta_simple: float
    misclassified: int
    rows: tuple[CalibrationRow, ...]

    def as_dict(self) -> dict:
        return {
            "theta_simple": self.theta_simple,
            "misclassified": self.misclassified,
            "programs": [asdict(r) for r in self.rows],
        }


def best_threshold(scored: Sequence[tuple[float, bool]]) -> tuple[float, int]:
    """Smallest threshold minimizing misclassification of ``succeeded`` by ``score < theta``.

    Candidates are every observed score plus one point below the minimum and
    one above the maximum.
    """
    if not scored:
        raise ValueError("calibration needs at least one labeled program")
    scores = sorted({s for s, _ in scored})
    candidates = [scores[0] - 1.0, *scores, scores[-1] + 1.0]
    best = None
    for theta in candidates:
        errors = sum((s < theta) != ok for s, ok in scored)
        if best is None or errors < best[1]:
            best = (theta, errors)
    return best


def calibrate_threshold(corpus: Sequence[tuple[str, TestSuite]], cfg: RouterConfig | None = None,
                        gen_cfg: GeneratorConfig | None = None, *, fuel: int = DEFAULT_FUEL,
                        warp_width: int = DEFAULT_WARP_WIDTH, workers: int = 1) -> CalibrationReport:
    """Label each program by whether the sampled path yields a full-suite-correct candidate
    within ``k_fast`` samples, then sweep the threshold on the complexity score."""
    cfg = cfg or RouterConfig()
    gen_cfg = gen_cfg or GeneratorConfig()
    rows = []
    for source, suite in corpus:
        score = complexity_score(extract_features(parse(lex(source))), cfg)
        forced = cfg.with_theta(float("inf"))
        outcome = route(source, suite, forced, gen_cfg, fuel=fuel, warp_width=warp_width,
                        workers=workers)
        rows.append(CalibrationRow(source_id(source), score,
                                   outcome.path is RoutePath.NEURAL_ACCEPTED))
    theta, errors = best_threshold([(r.score, r.succeeded) for r in rows])
    return CalibrationReport(theta, errors, tuple(rows))
