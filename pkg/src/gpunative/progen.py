"""Random well-typed ``.gn`` programs for differential testing and demo corpora.

Generated programs always terminate quickly: loops count a read-only counter
up to a small literal bound and contain no calls, helper functions only call
helpers declared after them, and the single recursive helper is depth-guarded
by its first argument (large arguments make it hit the call-depth limit,
which is intended).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

_BIG = (9223372036854775807, 4611686018427387904, 3037000499, 65536)


@dataclass
class _Fn:
    name: str
    params: list[tuple[str, str]]
    ret: str


@dataclass
class _Scope:
    vars: list[tuple[str, str, bool]] = field(default_factory=list)  # name, type, assignable

    def of_type(self, ty: str, assignable: bool = False) -> list[str]:
        return [n for n, t, a in self.vars if t == ty and (a or not assignable)]


class ProgramGenerator:
    def __init__(self, rng: random.Random, n_params: int = 2, max_helpers: int = 2,
                 recursion: bool = True, max_stmt_depth: int = 3, max_expr_depth: int = 3,
                 loop_bound: int = 3):
        self.rng = rng
        self.n_params = n_params
        self.max_helpers = max_helpers
        self.recursion = recursion
        self.max_stmt_depth = max_stmt_depth
        self.max_expr_depth = max_expr_depth
        self.loop_bound = loop_bound
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # -- expressions

    def int_expr(self, scope: _Scope, depth: int, callees: list[_Fn]) -> str:
        rng = self.rng
        names = scope.of_type("int")
        if depth <= 0 or rng.random() < 0.3:
            if names and rng.random() < 0.6:
                return rng.choice(names)
            if rng.random() < 0.08:
                return str(rng.choice(_BIG))
            return str(rng.randint(0, 20))
        roll = rng.random()
        int_callees = [f for f in callees if f.ret == "int"]
        if roll < 0.12 and int_callees:
            return self.call(rng.choice(int_callees), scope, depth, callees)
        if roll < 0.2:
            return f"-{self.int_expr(scope, depth - 1, callees)}"
        op = rng.choices(["+", "-", "*", "/"], weights=[4, 3, 3, 1])[0]
        left = self.int_expr(scope, depth - 1, callees)
        right = self.int_expr(scope, depth - 1, callees)
        return f"({left} {op} {right})"

    def bool_expr(self, scope: _Scope, depth: int, callees: list[_Fn]) -> str:
        rng = self.rng
        names = scope.of_type("bool")
        if depth <= 0 or rng.random() < 0.2:
            if names and rng.random() < 0.6:
                return rng.choice(names)
            return rng.choice(["true", "false"])
        roll = rng.random()
        bool_callees = [f for f in callees if f.ret == "bool"]
        if roll < 0.1 and bool_callees:
            return self.call(rng.choice(bool_callees), scope, depth, callees)
        if roll < 0.6:
            op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
            return (f"({self.int_expr(scope, depth - 1, callees)} {op} "
                    f"{self.int_expr(scope, depth - 1, callees)})")
        if roll < 0.75:
            op = rng.choice(["==", "!="])
            return (f"({self.bool_expr(scope, depth - 1, callees)} {op} "
                    f"{self.bool_expr(scope, depth - 1, callees)})")
        op = rng.choice(["&&", "||"])
        return (f"({self.bool_expr(scope, depth - 1, callees)} {op} "
                f"{self.bool_expr(scope, depth - 1, callees)})")

    def expr(self, ty: str, scope: _Scope, depth: int, callees: list[_Fn]) -> str:
        if ty == "int":
            return self.int_expr(scope, depth, callees)
        return self.bool_expr(scope, depth, callees)

    def call(self, fn: _Fn, scope: _Scope, depth: int, callees: list[_Fn]) -> str:
        args = ", ".join(self.expr(t, scope, depth - 1, callees) for _, t in fn.params)
        return f"{fn.name}({args})"

    # -- statements

    def block(self, scope: _Scope, depth: int, fn: _Fn, callees: list[_Fn], indent: int,
              in_loop: bool, n_stmts: int) -> list[str]:
        inner = _Scope(list(scope.vars))
        lines = []
        for _ in range(n_stmts):
            lines.extend(self.stmt(inner, depth, fn, callees, indent, in_loop))
        return lines

    def stmt(self, scope: _Scope, depth: int, fn: _Fn, callees: list[_Fn], indent: int,
             in_loop: bool) -> list[str]:
        rng = self.rng
        pad = "    " * indent
        ed = self.max_expr_depth
        usable = [] if in_loop else callees
        kinds = ["let", "let", "assign", "assign"]
        if depth < self.max_stmt_depth:
            kinds += ["if", "if"]
            if not in_loop:
                kinds.append("while")
        if usable:
            kinds.append("call")
        kinds.append("return")
        kind = rng.choice(kinds)
        if kind == "assign" and not (scope.of_type("int", True) or scope.of_type("bool", True)):
            kind = "let"
        if kind == "let":
            ty = rng.choice(["int", "int", "bool"])
            name = self.fresh("v")
            value = self.expr(ty, scope, ed, usable)
            scope.vars.append((name, ty, True))
            annot = f": {ty}" if rng.random() < 0.3 else ""
            return [f"{pad}let {name}{annot} = {value};"]
        if kind == "assign":
            choices = [(n, "int") for n in scope.of_type("int", True)]
            choices += [(n, "bool") for n in scope.of_type("bool", True)]
            name, ty = rng.choice(choices)
            return [f"{pad}{name} = {self.expr(ty, scope, ed, usable)};"]
        if kind == "call":
            target = rng.choice(usable)
            return [f"{pad}{self.call(target, scope, ed, usable)};"]
        if kind == "return":
            return [f"{pad}return {self.expr(fn.ret, scope, ed, usable)};"]
        if kind == "if":
            cond = self.bool_expr(scope, ed, usable)
            lines = [f"{pad}if {cond} {{"]
            lines += self.block(scope, depth + 1, fn, callees, indent + 1, in_loop, rng.randint(1, 3))
            if rng.random() < 0.5:
                lines.append(f"{pad}}} else {{")
                lines += self.block(scope, depth + 1, fn, callees, indent + 1, in_loop, rng.randint(1, 3))
            lines.append(f"{pad}}}")
            return lines
        # bounded while
        counter = self.fresh("c")
        bound = rng.randint(0, self.loop_bound)
        lines = [f"{pad}let {counter} = 0;", f"{pad}while {counter} < {bound} {{"]
        scope.vars.append((counter, "int", False))
        lines += self.block(scope, depth + 1, fn, callees, indent + 1, True, rng.randint(1, 3))
        lines.append(f"{pad}    {counter} = {counter} + 1;")
        lines.append(f"{pad}}}")
        return lines

    def function(self, fn: _Fn, callees: list[_Fn]) -> str:
        scope = _Scope([(n, t, True) for n, t in fn.params])
        body = self.block(scope, 1, fn, callees, 1, False, self.rng.randint(1, 4))
        body.append(f"    return {self.expr(fn.ret, scope, self.max_expr_depth, callees)};")
        params = ", ".join(f"{n}: {t}" for n, t in fn.params)
        return "\n".join([f"fn {fn.name}({params}) -> {fn.ret} {{", *body, "}"])

    def recursive_helper(self) -> tuple[_Fn, str]:
        fn = _Fn("rec", [("n", "int"), ("acc", "int")], "int")
        scope = _Scope([("n", "int", False), ("acc", "int", False)])
        step = self.int_expr(scope, 2, [])
        text = "\n".join([
            "fn rec(n: int, acc: int) -> int {",
            "    if n < 1 {",
            "        return acc;",
            "    }",
            f"    return rec(n - 1, acc + {step});",
            "}",
        ])
        return fn, text

    def program(self) -> str:
        rng = self.rng
        self.counter = 0
        helpers = []
        for i in range(rng.randint(0, self.max_helpers)):
            params = [(f"p{j}", rng.choice(["int", "int", "bool"])) for j in range(rng.randint(0, 3))]
            helpers.append(_Fn(f"h{i}", params, rng.choice(["int", "int", "bool"])))
        texts = []
        extra: list[_Fn] = []
        if self.recursion and rng.random() < 0.3:
            rec, rec_text = self.recursive_helper()
            extra.append(rec)
            texts.append(rec_text)
        for i, h in enumerate(helpers):
            texts.append(self.function(h, helpers[i + 1:] + extra))
        main = _Fn("main", [(f"a{j}", "int") for j in range(self.n_params)], "int")
        texts.append(self.function(main, helpers + extra))
        return "\n\n".join(texts) + "\n"


def random_source(seed: int, **kwargs) -> str:
    return ProgramGenerator(random.Random(seed), **kwargs).program()


def random_args(rng: random.Random, n: int) -> tuple[int, ...]:
    return tuple(rng.choice((rng.randint(-5, 40), rng.randint(-1000, 1000), 0, 1)) for _ in range(n))
