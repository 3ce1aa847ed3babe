"""``gpunative`` command-line entry point.

Exit codes: 0 success, 1 compile/decode/input error, 2 trap or timeout,
3 sampling found no verified candidate, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from pathlib import Path

from . import __version__
from .backend import CompileOptions, DEFAULT_PASSES, compile_reference, compile_stages
from .cost import PRESETS, SECTIONS, CostParams, evaluate, growth_report, p_success
from .frontend import CompileError, render, sexpr
from .router import RoutePath, RouterConfig, calibrate_threshold, route
from .suite import SuiteFormatError, TestSuite, reference_suite
from .verifier import GeneratorConfig, run_alg2
from .vm import (
    DEFAULT_FUEL, DEFAULT_WARP_WIDTH, MAGIC, DecodeError, Status, decode, encode, execute,
    execute_batch,
)

EXIT_OK, EXIT_COMPILE, EXIT_EXEC, EXIT_NO_CANDIDATE, EXIT_USAGE = 0, 1, 2, 3, 64

DEFAULTS = {"seed": 0, "fuel": DEFAULT_FUEL, "warp_width": DEFAULT_WARP_WIDTH, "workers": 1,
            "format": "table", "plot_dir": None}
ENV = {"seed": "GNC_SEED", "workers": "GNC_WORKERS"}

PATH_MESSAGES = {
    RoutePath.NEURAL_ACCEPTED: "accepted sampled candidate",
    RoutePath.NEURAL_FAILED_FELL_BACK: "fell back to traditional",
    RoutePath.ROUTED_TRADITIONAL: "routed to traditional",
}


class UsageError(Exception):
    pass


class InputError(Exception):
    """Unreadable file or malformed input; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS defaults let the flags appear before or after the subcommand
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="RNG seed (default 0, env GNC_SEED)")
    g.add_argument("--fuel", type=int, default=argparse.SUPPRESS,
                   help=f"step budget per execution (default {DEFAULT_FUEL})")
    g.add_argument("--warp-width", type=int, default=argparse.SUPPRESS,
                   help=f"lanes per lockstep warp (default {DEFAULT_WARP_WIDTH})")
    g.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                   help="worker threads for batch execution (default 1, env GNC_WORKERS)")
    g.add_argument("--format", choices=("table", "json"), default=argparse.SUPPRESS,
                   help="output format (default table)")
    g.add_argument("--plot-dir", default=argparse.SUPPRESS,
                   help="also render report figures as PNG files into this directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpunative", description="Compile, run and verify .gn programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p)
        return p

    p = add("compile", "compile a .gn source file to .gnbc bytecode")
    p.add_argument("source")
    p.add_argument("-o", "--output", help="bytecode path (default: source with .gnbc suffix)")
    p.add_argument("--emit", choices=("tokens", "ast", "ir", "bytecode"),
                   help="print an intermediate form; writes .gnbc only when -o is given")
    opt = p.add_mutually_exclusive_group()
    opt.add_argument("--opt", dest="optimize", action="store_true", default=True,
                     help="run the optimizer (default)")
    opt.add_argument("--no-opt", dest="optimize", action="store_false", help="skip the optimizer")
    p.add_argument("--passes", help=f"comma-separated pass list (default {','.join(DEFAULT_PASSES)})")

    p = add("run", "execute a .gnbc (or .gn) program once")
    p.add_argument("program")
    p.add_argument("args", nargs="*", type=int)

    p = add("batch", "execute many programs in lockstep warps")
    p.add_argument("programs", nargs="+", help=".gnbc/.gn files or directories holding them")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--suite", help="test suite file; its inputs are used")
    src.add_argument("--args", action="append", metavar="\"A B ...\"",
                     help="one whitespace-separated argument list (repeatable)")

    p = add("verify", "sample k candidates and verify them against a suite")
    _suite_flags(p)
    p.add_argument("--k", type=int, default=46, help="candidates per round (default 46)")
    p.add_argument("--p-correct", type=float, default=0.1, help="surrogate p_correct (default 0.1)")
    p.add_argument("--trials", type=int, default=1,
                   help="independent rounds; >1 reports the empirical success rate")
    p.add_argument("--no-kill", dest="kill", action="store_false",
                   help="keep mutants the suite cannot distinguish from the reference")
    p.add_argument("--alpha", type=float, default=0.01, help="reward step penalty (default 0.01)")
    p.add_argument("-o", "--output", help="write the winning bytecode here (single trial)")

    p = add("route", "route a program to sampled or traditional compilation")
    _suite_flags(p)
    _router_flags(p)
    p.add_argument("--p-correct", type=float, default=0.5, help="surrogate p_correct (default 0.5)")
    p.add_argument("--timing", action="store_true", help="include wall-clock phase timings")
    p.add_argument("-o", "--output", help="write the routed bytecode here")

    p = add("calibrate", "pick theta_simple from a corpus of programs")
    p.add_argument("sources", nargs="*", help=".gn files or directories (suite: sibling .suite file)")
    p.add_argument("--generate", type=int, default=0, metavar="N",
                   help="add N generated programs to the corpus")
    p.add_argument("--cases", type=int, default=5, help="cases for derived suites (default 5)")
    _router_flags(p)
    p.add_argument("--p-correct", type=float, default=0.5, help="surrogate p_correct (default 0.5)")
    p.add_argument("--write-config", help="save the calibrated router config here")

    p = add("cost", "evaluate the analytical cost model")
    p.add_argument("--preset", choices=sorted(PRESETS), help="load a worked parameter set")
    p.add_argument("--config", help="key=value parameter file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one parameter (repeatable)")
    p.add_argument("--section", action="append", choices=SECTIONS,
                   help="restrict output to these sections (repeatable)")
    p.add_argument("--growth", action="store_true",
                   help="print the order-of-growth generation cost instead (abstract units)")
    return parser


def _suite_flags(p) -> None:
    p.add_argument("source")
    p.add_argument("--suite", help="test suite file (default: sibling .suite file, else derived)")
    p.add_argument("--cases", type=int, default=5,
                   help="random inputs for a derived suite (default 5)")


def _router_flags(p) -> None:
    p.add_argument("--config", help="router key=value config file")
    p.add_argument("--theta", type=float, help="override theta_simple")
    p.add_argument("--k-fast", type=int, help="override k_fast")


# --- option resolution -----------------------------------------------------

def resolve_globals(ns: argparse.Namespace, environ=None) -> argparse.Namespace:
    environ = os.environ if environ is None else environ
    for key, default in DEFAULTS.items():
        if hasattr(ns, key):
            continue
        value = default
        if key in ENV and environ.get(ENV[key]):
            try:
                value = int(environ[ENV[key]])
            except ValueError:
                raise UsageError(f"{ENV[key]} must be an integer") from None
        setattr(ns, key, value)
    if ns.fuel < 0:
        raise UsageError("--fuel must be >= 0")
    if ns.warp_width < 1:
        raise UsageError("--warp-width must be >= 1")
    if ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    return ns


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _load_program(path: str | Path):
    """Decode .gnbc bytes, or compile the file when it is not bytecode."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    if data[:4] == MAGIC:
        return decode(data)
    return compile_reference(data.decode("utf-8"))


def _load_suite(ns, source_path: str, program) -> TestSuite:
    if ns.suite:
        return TestSuite.parse(_read(ns.suite))
    sibling = Path(source_path).with_suffix(".suite")
    if sibling.exists():
        return TestSuite.parse(_read(sibling))
    suite = reference_suite(program, ns.cases, random.Random(ns.seed), ns.fuel)
    if len(suite) == 0:
        raise InputError(f"{source_path}: could not derive a test suite (every input trapped)")
    return suite


def _router_config(ns) -> RouterConfig:
    cfg = RouterConfig.parse(_read(ns.config)) if ns.config else RouterConfig()
    if ns.theta is not None:
        cfg = cfg.with_theta(ns.theta)
    if ns.k_fast is not None:
        cfg = RouterConfig(cfg.theta_simple, dict(cfg.weights), ns.k_fast, cfg.quick_suite_size)
    return cfg


def _emit(ns, out, table: str, payload: dict) -> None:
    if ns.format == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write(table.rstrip("\n") + "\n")


# --- subcommands -----------------------------------------------------------

def cmd_compile(ns, out) -> int:
    source = _read(ns.source)
    if ns.passes is not None:
        options = CompileOptions().with_passes([s for s in ns.passes.split(",") if s])
    else:
        options = CompileOptions() if ns.optimize else CompileOptions.unoptimized()
    comp = compile_stages(source, options)
    if ns.emit:
        text = {
            "tokens": lambda: render(comp.tokens),
            "ast": lambda: sexpr(comp.typed),
            "ir": lambda: comp.opt_ir.dump(),
            "bytecode": lambda: comp.bytecode.disassemble(),
        }[ns.emit]()
        out.write(text.rstrip("\n") + "\n")
        if not ns.output:
            return EXIT_OK
    target = Path(ns.output) if ns.output else Path(ns.source).with_suffix(".gnbc")
    data = encode(comp.bytecode)
    target.write_bytes(data)
    if not ns.emit:
        _emit(ns, out, f"wrote {target} ({len(data)} bytes, {len(comp.bytecode.code)} instructions)",
              {"output": str(target), "bytes": len(data), "instructions": len(comp.bytecode.code),
               "functions": len(comp.bytecode.functions), "pool": list(comp.bytecode.pool)})
    return EXIT_OK


def cmd_run(ns, out) -> int:
    program = _load_program(ns.program)
    result = execute(program, tuple(ns.args), ns.fuel)
    _emit(ns, out, f"{result}\nsteps {result.steps}", result.as_dict())
    return EXIT_OK if result.status is Status.OK else EXIT_EXEC


def _expand(paths) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(q for q in p.iterdir() if q.suffix in (".gnbc", ".gn"))
            # a compiled file shadows its source
            names = {q.stem for q in found if q.suffix == ".gnbc"}
            files += [q for q in found if q.suffix == ".gnbc" or q.stem not in names]
        else:
            files.append(p)
    if not files:
        raise InputError("no programs found")
    return files


def cmd_batch(ns, out) -> int:
    files = _expand(ns.programs)
    programs = [_load_program(f) for f in files]
    if ns.suite:
        arg_lists = TestSuite.parse(_read(ns.suite)).arg_lists
    else:
        try:
            arg_lists = [tuple(int(t) for t in a.split()) for a in ns.args]
        except ValueError as exc:
            raise InputError(f"--args: {exc}") from None
    if not arg_lists:
        raise InputError("the suite has no test cases")
    try:
        result = execute_batch(programs, arg_lists, ns.warp_width, ns.workers, ns.fuel)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows = [["program"] + [f"test{t}" for t in range(len(arg_lists))]]
    rows += [[str(f)] + [str(r) for r in row] for f, row in zip(files, result.results)]
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.append(f"divergence {result.divergence:.3f}")
    lines.append(f"lockstep cycles {result.total_lockstep_cycles}")
    payload = result.as_dict()
    payload["files"] = [str(f) for f in files]
    if ns.plot_dir:
        from . import plots
        payload["plots"] = [str(plots.warp_divergence(result, ns.plot_dir))]
    _emit(ns, out, "\n".join(lines), payload)
    bad = any(r.status is not Status.OK for row in result.results for r in row)
    return EXIT_EXEC if bad else EXIT_OK


def cmd_verify(ns, out) -> int:
    if ns.k < 0 or ns.trials < 1:
        raise UsageError("--k must be >= 0 and --trials >= 1")
    source = _read(ns.source)
    reference = compile_reference(source)
    suite = _load_suite(ns, ns.source, reference)
    kill = suite if ns.kill else None
    base = GeneratorConfig(p_correct=ns.p_correct, seed=ns.seed)

    if ns.trials == 1:
        res = run_alg2(source, suite, ns.k, base, ns.fuel, warp_width=ns.warp_width,
                       workers=ns.workers, kill_suite=kill, alpha=ns.alpha)
        if res.success and ns.output:
            Path(ns.output).write_bytes(encode(res.best))
        s = res.summary
        lines = [f"candidates {ns.k}  verified {len(res.report.verified)}  tests {len(suite)}"]
        if res.success:
            v = res.report.verdicts[res.best_index]
            lines.append(f"best candidate #{res.best_index} ({v.total_steps} steps, "
                         f"reward {res.report.rewards[res.best_index]:.2f})")
        else:
            lines.append("no candidate passed every test")
        lines.append("failures " + (", ".join(f"{k} {n}" for k, n in sorted(s.failures.items()))
                                    or "none"))
        if s.traps:
            lines.append("traps " + ", ".join(f"{k} {n}" for k, n in sorted(s.traps.items())))
        lines.append(f"divergence {res.report.divergence:.3f}")
        payload = res.as_dict()
        payload["suite"] = [str(c) for c in suite]
        _emit(ns, out, "\n".join(lines), payload)
        return EXIT_OK if res.success else EXIT_NO_CANDIDATE

    successes = 0
    for t in range(ns.trials):
        res = run_alg2(source, suite, ns.k, base.with_seed(ns.seed + t), ns.fuel,
                       warp_width=ns.warp_width, workers=ns.workers, kill_suite=kill,
                       alpha=ns.alpha)
        successes += res.success
    rate = successes / ns.trials
    theory = p_success(ns.k, ns.p_correct)
    tol = 4 * math.sqrt(rate * (1 - rate) / ns.trials)
    within = abs(rate - theory) <= tol
    table = (f"empirical {rate:.4f}  theoretical {theory:.4f}  "
             f"tolerance {tol:.4f}  trials {ns.trials}  within {'yes' if within else 'no'}")
    payload = {"trials": ns.trials, "k": ns.k, "p_correct": ns.p_correct, "successes": successes,
               "empirical": rate, "theoretical": theory, "tolerance": tol, "within": within,
               "kill_verified": ns.kill}
    if ns.plot_dir:
        from . import plots
        payload["plots"] = [str(plots.verify_trials(rate, theory, ns.trials, tol, ns.plot_dir)),
                            str(plots.success_curves(ns.plot_dir, (ns.p_correct,),
                                                     k_max=max(10, 4 * ns.k)))]
    _emit(ns, out, table, payload)
    return EXIT_OK if successes else EXIT_NO_CANDIDATE


def cmd_route(ns, out) -> int:
    source = _read(ns.source)
    suite = _load_suite(ns, ns.source, compile_reference(source))
    cfg = _router_config(ns)
    outcome = route(source, suite, cfg, GeneratorConfig(p_correct=ns.p_correct, seed=ns.seed),
                    fuel=ns.fuel, warp_width=ns.warp_width, workers=ns.workers)
    if ns.output:
        Path(ns.output).write_bytes(encode(outcome.bytecode))
    message = PATH_MESSAGES[outcome.path]
    if outcome.path is RoutePath.NEURAL_ACCEPTED:
        message += f" #{outcome.candidate_index}"
    lines = [message, f"score {outcome.score:g} (theta_simple {cfg.theta_simple:g})"]
    payload = outcome.as_dict()
    if ns.timing:
        lines.append("timing " + "  ".join(f"{k} {v * 1000:.2f}ms" for k, v in outcome.timing.items()))
    else:
        payload.pop("timing_s")
        payload.pop("total_s")
    payload["message"] = message
    payload["theta_simple"] = cfg.theta_simple
    _emit(ns, out, "\n".join(lines), payload)
    return EXIT_OK


def cmd_calibrate(ns, out) -> int:
    from .progen import random_source

    corpus = []
    for f in _expand(ns.sources) if ns.sources else []:
        if f.suffix != ".gn":
            continue
        text = _read(f)
        suite_ns = argparse.Namespace(suite=None, cases=ns.cases, seed=ns.seed, fuel=ns.fuel)
        corpus.append((text, _load_suite(suite_ns, str(f), compile_reference(text))))
    rng = random.Random(ns.seed)
    for i in range(ns.generate):
        text = random_source(ns.seed * 1_000_003 + i)
        suite = reference_suite(compile_reference(text), ns.cases, rng, ns.fuel)
        if len(suite):
            corpus.append((text, suite))
    if not corpus:
        raise InputError("calibration needs at least one program (give files or --generate N)")
    cfg = _router_config(ns)
    report = calibrate_threshold(corpus, cfg, GeneratorConfig(p_correct=ns.p_correct, seed=ns.seed),
                                 fuel=ns.fuel, warp_width=ns.warp_width, workers=ns.workers)
    if ns.write_config:
        Path(ns.write_config).write_text(cfg.with_theta(report.theta_simple).dumps(), encoding="utf-8")
    ok = sum(r.succeeded for r in report.rows)
    table = (f"programs {len(report.rows)}  sampled-path successes {ok}\n"
             f"theta_simple {report.theta_simple:g}  misclassified {report.misclassified}")
    _emit(ns, out, table, report.as_dict())
    return EXIT_OK


def cmd_cost(ns, out) -> int:
    params, sections = CostParams(), SECTIONS
    if ns.preset:
        from .cost import preset
        params, sections = preset(ns.preset)
    if ns.config:
        params = CostParams.parse(_read(ns.config), params)
    for item in ns.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        try:
            params = params.replace(**{key: CostParams.coerce(key, value)})
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    if ns.section:
        sections = tuple(ns.section)
    report = growth_report(params) if ns.growth else evaluate(params).only(sections)
    payload = report.as_dict()
    if ns.preset:
        payload["preset"] = ns.preset
    if ns.plot_dir:
        from . import plots
        payload["plots"] = [str(plots.cost_breakdown(report, ns.plot_dir)),
                            str(plots.success_curves(ns.plot_dir, target=params.target))]
    _emit(ns, out, report.table(), payload)
    return EXIT_OK


COMMANDS = {
    "compile": cmd_compile, "run": cmd_run, "batch": cmd_batch, "verify": cmd_verify,
    "route": cmd_route, "calibrate": cmd_calibrate, "cost": cmd_cost,
}


def main(argv=None, out=None, err=None, environ=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    ns = parser.parse_args(argv)
    where = getattr(ns, "source", None) or getattr(ns, "program", None) or "<input>"
    try:
        resolve_globals(ns, environ)
        return COMMANDS[ns.command](ns, out)
    except UsageError as exc:
        err.write(f"gpunative: error: {exc}\n")
        return EXIT_USAGE
    except CompileError as exc:
        err.write(f"{where}:{exc.line}:{exc.col}: error: {exc.message}\n")
        return EXIT_COMPILE
    except DecodeError as exc:
        err.write(f"{where}: invalid bytecode: {exc}\n")
        return EXIT_COMPILE
    except SuiteFormatError as exc:
        err.write(f"{getattr(ns, 'suite', None) or 'suite'}: {exc}\n")
        return EXIT_COMPILE
    except (InputError, ValueError) as exc:
        err.write(f"gpunative: error: {exc}\n")
        return EXIT_COMPILE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
