from __future__ import annotations

from dataclasses import asdict, dataclass

from .ast import Block, Call, If, Program, While, walk_exprs


@dataclass(frozen=True)
class FeatureVector:
    source_len: int
    nesting_depth: int
    loop_count: int
    function_count: int
    call_count: int
    has_recursion: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _depth(block: Block, level: int) -> int:
    # every block counts, empty or not
    deepest = level
    for s in block.stmts:
        if isinstance(s, If):
            deepest = max(deepest, _depth(s.then, level + 1))
            if s.orelse is not None:
                deepest = max(deepest, _depth(s.orelse, level + 1))
        elif isinstance(s, While):
            deepest = max(deepest, _depth(s.body, level + 1))
    return deepest


def _loops(block: Block) -> int:
    n = 0
    for s in block.stmts:
        if isinstance(s, While):
            n += 1 + _loops(s.body)
        elif isinstance(s, If):
            n += _loops(s.then) + (_loops(s.orelse) if s.orelse is not None else 0)
    return n


def _recursive(graph: dict[str, set[str]]) -> bool:
    # a function is recursive when it can reach itself through the call graph
    for start in graph:
        seen: set[str] = set()
        stack = list(graph[start])
        while stack:
            f = stack.pop()
            if f == start:
                return True
            if f in seen or f not in graph:
                continue
            seen.add(f)
            stack.extend(graph[f])
    return False


def extract_features(program: Program) -> FeatureVector:
    graph: dict[str, set[str]] = {}
    calls = 0
    depth = 0
    loops = 0
    for fn in program.functions:
        callees = {e.name for e in walk_exprs(fn) if isinstance(e, Call)}
        calls += sum(1 for e in walk_exprs(fn) if isinstance(e, Call))
        graph[fn.name] = callees
        depth = max(depth, _depth(fn.body, 1))
        loops += _loops(fn.body)
    return FeatureVector(
        source_len=program.token_count,
        nesting_depth=depth,
        loop_count=loops,
        function_count=len(program.functions),
        call_count=calls,
        has_recursion=_recursive(graph),
    )
