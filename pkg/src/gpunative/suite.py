"""Test suites: ``args: <ints> => <int>`` per line, ``#`` comments."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class SuiteFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class TestCase:
    args: tuple[int, ...]
    expected: int

    __test__ = False  # not a pytest class

    def __str__(self) -> str:
        lhs = " ".join(map(str, self.args))
        return f"args: {lhs} => {self.expected}" if lhs else f"args: => {self.expected}"


@dataclass(frozen=True)
class TestSuite:
    cases: tuple[TestCase, ...]

    __test__ = False

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def __getitem__(self, i):
        return self.cases[i]

    def head(self, n: int) -> "TestSuite":
        return TestSuite(self.cases[:n])

    @property
    def arg_lists(self) -> list[tuple[int, ...]]:
        return [c.args for c in self.cases]

    @classmethod
    def of(cls, pairs: Iterable[tuple[Iterable[int], int]]) -> "TestSuite":
        return cls(tuple(TestCase(tuple(int(a) for a in args), int(exp)) for args, exp in pairs))

    @classmethod
    def parse(cls, text: str) -> "TestSuite":
        cases = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if not line.startswith("args:") or "=>" not in line:
                raise SuiteFormatError(lineno, "expected 'args: <ints> => <int>'")
            lhs, rhs = line[len("args:"):].split("=>", 1)
            try:
                args = tuple(int(tok) for tok in lhs.split())
                expected = int(rhs.strip())
            except ValueError as exc:
                raise SuiteFormatError(lineno, str(exc)) from None
            cases.append(TestCase(args, expected))
        return cls(tuple(cases))

    @classmethod
    def load(cls, path: str | Path) -> "TestSuite":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        return "".join(f"{c}\n" for c in self.cases)


def reference_suite(program, n_cases: int, rng, fuel: int, arg_range: tuple[int, int] = (-20, 40),
                    max_attempts: int | None = None) -> TestSuite:
    """Label ``n_cases`` random inputs with the outputs of a trusted bytecode program.

    Inputs whose reference run traps or times out are skipped. ``rng`` is a
    ``random.Random``.
    """
    from .vm import Image, Status, execute

    img = Image(program)
    arity = img.arity
    cases: list[TestCase] = []
    seen = set()
    attempts = max_attempts if max_attempts is not None else 20 * max(n_cases, 1)
    for _ in range(attempts):
        if len(cases) >= n_cases:
            break
        args = tuple(rng.randint(*arg_range) for _ in range(arity))
        if args in seen:
            continue
        seen.add(args)
        r = execute(img, args, fuel)
        if r.status is Status.OK:
            cases.append(TestCase(args, r.value))
    return TestSuite(tuple(cases))
