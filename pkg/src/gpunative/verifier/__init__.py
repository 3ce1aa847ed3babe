from .candidates import (
    ALL_PASSED, DEFAULT_ALPHA, DEFAULT_WEIGHTS, FAILED, TIMED_OUT, TRAPPED, Alg2Result,
    CandidateBatch, CandidateGenerator, FailureSummary, GeneratorConfig, MutationSurrogate,
    Provenance, Verdict, VerificationReport, analyze_failures, judge, reward, run_alg2,
    sample_candidates, verify,
)
from .mutate import KINDS, Mutation, mutate

__all__ = [
    "ALL_PASSED", "Alg2Result", "CandidateBatch", "CandidateGenerator", "DEFAULT_ALPHA",
    "DEFAULT_WEIGHTS", "FAILED", "FailureSummary", "GeneratorConfig", "KINDS", "Mutation",
    "MutationSurrogate", "Provenance", "TIMED_OUT", "TRAPPED", "Verdict", "VerificationReport",
    "analyze_failures", "judge", "mutate", "reward", "run_alg2", "sample_candidates", "verify",
]
