import pytest

from gpunative.frontend import (
    MissingMain, Type, TypeCheckError, UndefinedFunction, UndefinedVariable, extract_features,
    lex, parse, typecheck,
)
from gpunative.frontend.ast import BinOp, Block, Call, FunctionDecl, Program, walk_exprs


def check(src):
    return typecheck(parse(lex(src)))


def features(src):
    return extract_features(parse(lex(src)))


def test_arithmetic_annotated_int():
    prog = check("fn main() -> int { return 1 + 2; }")
    ret = prog.functions[0].body.stmts[0]
    assert isinstance(ret.value, BinOp) and ret.value.ty is Type.INT
    assert prog.typed


def test_comparison_annotated_bool():
    ret = check("fn main() -> bool { return 1 < 2; }").functions[0].body.stmts[0]
    assert ret.value.ty is Type.BOOL


def test_mixed_operands_rejected_at_operator():
    with pytest.raises(TypeCheckError) as info:
        check("fn main() -> int { return 1 + true; }")
    assert (info.value.line, info.value.col) == (1, 29)  # the "+"


@pytest.mark.parametrize("src, err", [
    ("fn main() -> int { return x; }", UndefinedVariable),
    ("fn main() -> int { return g(1); }", UndefinedFunction),
    ("fn f() -> int { return 0; }", MissingMain),
    ("", MissingMain),
    ("fn main() -> int { if (1) { return 0; } return 1; }", TypeCheckError),
    ("fn main() -> int { while (0) { } return 1; }", TypeCheckError),
    ("fn main() -> bool { return 1; }", TypeCheckError),
    ("fn main() -> int { let x = 1; x = true; return x; }", TypeCheckError),
    ("fn main() -> int { let x: bool = 1; return 0; }", TypeCheckError),
    ("fn main() -> int { let x = 1; let x = 2; return x; }", TypeCheckError),
    ("fn f(a: int) -> int { return a; } fn main() -> int { return f(); }", TypeCheckError),
    ("fn f(a: int) -> int { return a; } fn main() -> int { return f(true); }", TypeCheckError),
    ("fn f() -> int { return 0; } fn f() -> int { return 1; } fn main() -> int { return 0; }",
     TypeCheckError),
    ("fn main() -> int { let x = 1; }", TypeCheckError),
    ("fn main() -> int { if (true) { return 1; } }", TypeCheckError),
    ("fn main() -> int { return -true; }", TypeCheckError),
    ("fn main() -> int { return (1 && 2); }", TypeCheckError),
    ("fn main() -> bool { return true < false; }", TypeCheckError),
    ("fn main() -> bool { return true == 1; }", TypeCheckError),
])
def test_rejections(src, err):
    with pytest.raises(err):
        check(src)


def test_accepts_bool_equality_and_shadowing():
    check("""
    fn main(a: int) -> int {
        let b = true == (a < 3);
        if (b != false) { let a2 = a; return a2; } else { let a2 = 0; return a2; }
    }""")


def test_if_else_both_returning_is_definite():
    check("fn main(a: int) -> int { if (a < 0) { return 0; } else { return 1; } }")


def test_slots_dense_from_zero():
    prog = check("""
    fn main(a: int, b: int) -> int {
        let c = a;
        if (c < b) { let d = 1; c = d; }
        g(c);
        return c;
    }
    fn g(x: int) -> int { return x; }
    """)
    main = prog.function("main")
    slots = sorted({e.slot for e in walk_exprs(main) if getattr(e, "slot", None) is not None})
    assert slots == list(range(len(slots)))
    assert main.n_slots == 5  # a, b, c, d, scratch for g(c);


def test_every_expression_annotated_once_and_fixed_point():
    src = """
    fn fib(n: int) -> int { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); }
    fn main(x: int) -> int { let y = -x; while (y < 0 && x >= 1) { y = y + 1; } return fib(y); }
    """
    once = check(src)
    assert all(e.ty is not None for e in walk_exprs(once))
    assert typecheck(once) == once
    calls = [e for e in walk_exprs(once) if isinstance(e, Call)]
    assert {c.index for c in calls} == {0}


def test_features_minimal_program():
    assert features("fn main() -> int { return 0; }").as_dict() == {
        "source_len": 11, "nesting_depth": 1, "loop_count": 0, "function_count": 1,
        "call_count": 0, "has_recursion": False,
    }


def test_nesting_while_in_if():
    f = features("fn main() -> int { if (true) { while (false) { } } return 0; }")
    assert f.nesting_depth == 3 and f.loop_count == 1


def test_direct_and_mutual_recursion():
    assert features("fn f(n: int) -> int { return f(n); } fn main() -> int { return 0; }").has_recursion
    mutual = """
    fn a(n: int) -> int { return b(n); }
    fn b(n: int) -> int { return a(n); }
    fn main() -> int { return a(1); }
    """
    f = features(mutual)
    assert f.has_recursion and f.call_count == 3 and f.function_count == 3
    assert not features("fn g() -> int { return 1; } fn main() -> int { return g() + g(); }").has_recursion


def test_features_ignore_whitespace_and_comments():
    a = "fn main(x: int) -> int { while (x < 3) { x = x + 1; } return x; }"
    b = "# header\nfn   main(x:int)->int{\n  while(x<3){x=x+1;} # loop\n return x;\n}\n"
    assert features(a) == features(b)


def test_features_counts_are_nonnegative_on_empty_program():
    f = extract_features(Program(()))
    assert f.function_count == 0 and f.nesting_depth == 0 and not f.has_recursion


def test_typecheck_does_not_mutate_input():
    untyped = parse(lex("fn main() -> int { return 1; }"))
    typecheck(untyped)
    assert not untyped.typed
    assert untyped.functions[0].body.stmts[0].value.ty is None
