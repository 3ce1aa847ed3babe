"""Closed-form latency, energy, memory and sampling-probability model.

Times are milliseconds, powers watts, energies millijoules internally
(W x ms = mJ, which keeps the worked examples exact in floating point).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal
from pathlib import Path

MB = 10**6
GB = 10**9


# --- sampling probability --------------------------------------------------

def p_success(k: int, p_correct: float) -> float:
    """Probability that at least one of ``k`` independent candidates is correct."""
    if k < 0 or not 0.0 <= p_correct <= 1.0:
        raise ValueError("need k >= 0 and p_correct in [0, 1]")
    if k == 0 or p_correct == 0.0:
        return 0.0
    if p_correct == 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-p_correct))


def _rounded_constant(target: float) -> Decimal:
    # -ln(1 - target) at two significant digits, e.g. 4.6 for a 99% target
    return Decimal(format(Decimal(repr(-math.log1p(-target))), ".2g"))


def k_required(target: float, p_correct: float, mode: str = "exact") -> int:
    """Samples needed so that ``p_success >= target``.

    ``mode="exact"`` inverts the success probability; ``mode="approx"`` uses the
    rounded rule of thumb ``k = ceil(c / p)`` with ``c = -ln(1 - target)`` at two
    significant digits (4.6 for 99%).
    """
    if not 0.0 < target < 1.0 or not 0.0 < p_correct <= 1.0:
        raise ValueError("need 0 < target < 1 and 0 < p_correct <= 1")
    if mode == "approx":
        k = _rounded_constant(target) / Decimal(repr(p_correct))
        return int(k.to_integral_value(ROUND_CEILING))
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if p_correct == 1.0:
        return 1
    k = max(1, math.ceil(math.log1p(-target) / math.log1p(-p_correct)))
    # guard the float inversion on both sides
    while k > 1 and p_success(k - 1, p_correct) >= target:
        k -= 1
    while p_success(k, p_correct) < target:
        k += 1
    return k


# --- latency ---------------------------------------------------------------

def t_cpu_iteration(t_gen_ms: float, t_transfer_ms: float, t_compile_ms: float,
                    t_exec_ms: float) -> float:
    return t_gen_ms + 2 * t_transfer_ms + t_compile_ms + t_exec_ms


def t_trad_parallel(phase_times: list[list[float]] | tuple, cores: int) -> float:
    """Slowest per-program phase sum, times ``ceil(k / cores)`` waves when k exceeds the cores."""
    if cores < 1:
        raise ValueError("cores must be >= 1")
    if not phase_times:
        return 0.0
    waves = math.ceil(len(phase_times) / cores)
    return max(sum(phases) for phases in phase_times) * waves


def t_neural(t_gen_k_ms: float, t_verify_k_ms: float) -> float:
    return t_gen_k_ms + t_verify_k_ms


def speedup_neural(k: int, t_cpu_per_program_ms: float, t_neural_ms: float) -> float:
    if t_neural_ms == 0:
        raise ZeroDivisionError("neural compile time is zero")
    return k * t_cpu_per_program_ms / t_neural_ms


def t_hybrid(p_simple: float, t_neural_ms: float, t_trad_ms: float, t_routing_ms: float) -> float:
    if not 0.0 <= p_simple <= 1.0:
        raise ValueError("p_simple must lie in [0, 1]")
    return p_simple * t_neural_ms + (1 - p_simple) * t_trad_ms + t_routing_ms


def t_gen_transformer(layers: float, n_seq: float, d_model: float, k: float, cores: float) -> float:
    """Order-of-growth generation cost ``L * n * d^2 * k / P`` in abstract units (not ms)."""
    if min(layers, n_seq, d_model, k, cores) <= 0:
        raise ValueError("all transformer cost inputs must be positive")
    return layers * n_seq * d_model**2 * k / cores


# --- energy ----------------------------------------------------------------

def energy_mj(power_w: float, time_ms: float) -> float:
    return power_w * time_ms


def mj_to_j(mj: float) -> float:
    return mj / 1000


def j_to_mj(j: float) -> float:
    return j * 1000


# --- memory ----------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    low_mb: float
    high_mb: float
    reference_k: int | None  # None: fixed cost independent of k


TRADITIONAL_COMPONENTS = {
    "source": Component(1, 10, 100),
    "ast": Component(5, 50, 100),
    "symbol_tables": Component(5, 50, 100),
    "bytecode": Component(1, 10, 100),
    # residual between the listed components (12-120 MB) and the quoted 20-200 MB total
    "overhead": Component(8, 80, 100),
}

NEURAL_COMPONENTS = {
    "model_parameters": Component(1000, 10000, None),
    "input_embeddings": Component(100, 100, None),
    "generated_bytecode": Component(100, 1000, 1000),
    "execution_state": Component(10, 100, 1000),
}


@dataclass(frozen=True)
class MemoryRange:
    low_bytes: float
    high_bytes: float

    def rounded(self, unit: int) -> tuple[int, int]:
        """Outward rounding to whole ``unit``s (floor the low end, ceil the high end)."""
        return math.floor(self.low_bytes / unit + 1e-9), math.ceil(self.high_bytes / unit - 1e-9)


def memory_estimate(approach: str, k: int, components: dict[str, Component] | None = None) -> MemoryRange:
    if components is None:
        components = {"traditional": TRADITIONAL_COMPONENTS, "neural": NEURAL_COMPONENTS}[approach]
    low = high = 0.0
    for c in components.values():
        if c.low_mb < 0 or c.high_mb < 0:
            raise ValueError("component sizes must be >= 0")
        scale = 1.0 if c.reference_k is None else k / c.reference_k
        low += c.low_mb * scale * MB
        high += c.high_mb * scale * MB
    return MemoryRange(low, high)


# --- parameters and report -------------------------------------------------

@dataclass(frozen=True)
class CostParams:
    # per-iteration CPU baseline
    t_gen_ms: float = 10.0
    t_transfer_ms: float = 1.0
    t_compile_cpu_ms: float = 50.0
    t_exec_ms: float = 10.0
    # parallel traditional compile: per-program phase times
    phase_times: tuple = ()
    cores: int = 10_000
    # sampled compilation
    k: int = 1000
    p_correct: float = 0.1
    target: float = 0.99
    t_gen_k_ms: float = 100.0
    t_verify_k_ms: float = 400.0
    t_cpu_per_program_ms: float = 200.0
    # hybrid mixture
    p_simple: float = 0.8
    t_neural_amortized_ms: float = 0.2
    t_trad_ms: float = 20.0
    t_routing_ms: float = 2.0
    # transformer order-of-growth
    layers: int = 24
    d_model: int = 1024
    n_seq: int = 1000
    # energy
    pcie_w: float = 25.0
    gpu_w: float = 300.0
    t_gpu_compile_ms: float = 50.0
    t_neural_batch_ms: float = 200.0
    iterations: int = 1000
    cpu_energy_per_iteration_j: float = 70.0
    alpha: float = 0.01

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and v < 0:
                raise ValueError(f"{f.name} must be >= 0")
        for name in ("p_correct", "p_simple"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.k < 1 or self.cores < 1:
            raise ValueError("k and cores must be >= 1")

    def replace(self, **changes) -> "CostParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def coerce(cls, key: str, text: str):
        """Convert a key=value string to the field's type."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        if key not in fields:
            raise KeyError(f"unknown cost parameter {key!r}")
        default = fields[key].default
        if key == "phase_times":
            return tuple(tuple(float(x) for x in prog.split(",") if x.strip())
                         for prog in text.split(";") if prog.strip())
        if isinstance(default, int) and not isinstance(default, bool):
            return int(text)
        return float(text)

    @classmethod
    def parse(cls, text: str, base: "CostParams | None" = None) -> "CostParams":
        changes = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            changes[key] = cls.coerce(key, value)
        return dataclasses.replace(base or cls(), **changes)

    @classmethod
    def load(cls, path: str | Path, base: "CostParams | None" = None) -> "CostParams":
        return cls.parse(Path(path).read_text(encoding="utf-8"), base)


@dataclass(frozen=True)
class CostEntry:
    name: str
    value: float
    unit: str
    formula: str
    section: str


@dataclass
class CostReport:
    entries: list[CostEntry] = field(default_factory=list)

    def add(self, section: str, name: str, value: float, unit: str, formula: str) -> None:
        self.entries.append(CostEntry(name, value, unit, formula, section))

    def __getitem__(self, name: str) -> CostEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def only(self, sections) -> "CostReport":
        return CostReport([e for e in self.entries if e.section in sections])

    def as_dict(self) -> dict:
        return {"entries": [dataclasses.asdict(e) for e in self.entries]}

    def table(self) -> str:
        rows = [(e.section, e.name, _fmt(e.value), e.unit, e.formula) for e in self.entries]
        header = ("section", "quantity", "value", "unit", "formula")
        widths = [max(len(r[i]) for r in rows + [header]) for i in range(4)]
        lines = []
        for r in [header] + rows:
            lines.append("  ".join([r[0].ljust(widths[0]), r[1].ljust(widths[1]),
                                    r[2].rjust(widths[2]), r[3].ljust(widths[3]), r[4]]))
        return "\n".join(lines)


def _fmt(v: float) -> str:
    if isinstance(v, int) or float(v).is_integer():
        return f"{int(v):,}" if abs(v) < 1e15 else f"{v:.4g}"
    if abs(v) >= 1000 or abs(v) < 1e-3:
        return f"{v:.6g}"
    return f"{round(v, 6):g}"


SECTIONS = ("sampling", "latency", "hybrid", "energy", "memory")


def evaluate(params: CostParams) -> CostReport:
    r = CostReport()
    p, k = params.p_correct, params.k

    r.add("sampling", "p_success", p_success(k, p), "prob", "1 - (1 - p_correct)^k")
    if 0 < p:
        r.add("sampling", "k_required_exact", k_required(params.target, p, "exact"), "samples",
              "min k with p_success(k) >= target")
        r.add("sampling", "k_required_approx", k_required(params.target, p, "approx"), "samples",
              "ceil(c / p_correct), c = -ln(1 - target) to 2 s.f.")

    r.add("latency", "t_cpu_iteration", t_cpu_iteration(
        params.t_gen_ms, params.t_transfer_ms, params.t_compile_cpu_ms, params.t_exec_ms), "ms",
        "T_gen + 2*T_transfer + T_compile + T_exec")
    if params.phase_times:
        waves = math.ceil(len(params.phase_times) / params.cores)
        note = "max_i sum_j T_j(n_i)" + (f" x {waves} waves (k > P extension)" if waves > 1 else "")
        r.add("latency", "t_trad_parallel", t_trad_parallel(params.phase_times, params.cores), "ms", note)
    tn = t_neural(params.t_gen_k_ms, params.t_verify_k_ms)
    r.add("latency", "t_neural", tn, "ms", "T_gen(k) + T_verify(k)")
    if tn > 0:
        r.add("latency", "speedup_neural", speedup_neural(k, params.t_cpu_per_program_ms, tn), "x",
              "k * T_CPU / T_neural")

    r.add("hybrid", "t_hybrid", t_hybrid(params.p_simple, params.t_neural_amortized_ms,
                                         params.t_trad_ms, params.t_routing_ms), "ms",
          "p_simple*T_neural + (1-p_simple)*T_trad + T_routing")

    e_transfer = energy_mj(params.pcie_w, params.t_transfer_ms)
    e_compile = energy_mj(params.gpu_w, params.t_gpu_compile_ms)
    e_neural = energy_mj(params.gpu_w, params.t_neural_batch_ms)
    r.add("energy", "e_transfer", e_transfer, "mJ", "P_pcie * T_transfer")
    r.add("energy", "e_gpu_compile", mj_to_j(e_compile), "J", "P_gpu * T_compile_gpu")
    r.add("energy", "e_neural_batch", mj_to_j(e_neural), "J", "P_gpu * T_neural_batch")
    r.add("energy", "e_neural_amortized", e_neural / k, "mJ", "E_neural / k")
    cpu_total_j = params.cpu_energy_per_iteration_j * params.iterations
    r.add("energy", "e_cpu_total", cpu_total_j, "J", "E_cpu_iteration * iterations")
    gpu_total_j = mj_to_j(e_neural)
    r.add("energy", "e_gpu_native_total", gpu_total_j, "J", "one neural batch covers the iterations")
    if gpu_total_j > 0:
        r.add("energy", "energy_savings", cpu_total_j / gpu_total_j, "x", "E_cpu_total / E_gpu_native")

    trad = memory_estimate("traditional", 100)
    r.add("memory", "memory_traditional_low", trad.low_bytes / MB, "MB", "sum of component lows, k=100")
    r.add("memory", "memory_traditional_high", trad.high_bytes / MB, "MB", "sum of component highs, k=100")
    neural = memory_estimate("neural", k)
    lo, hi = neural.rounded(GB)
    r.add("memory", "memory_neural_low", neural.low_bytes / MB, "MB", "sum of component lows")
    r.add("memory", "memory_neural_high", neural.high_bytes / MB, "MB", "sum of component highs")
    r.add("memory", "memory_neural_low_rounded", lo, "GB", "floor to whole GB")
    r.add("memory", "memory_neural_high_rounded", hi, "GB", "ceil to whole GB")
    return r


def growth_report(params: CostParams) -> CostReport:
    """Order-of-growth generation cost, kept apart from the millisecond report."""
    r = CostReport()
    r.add("growth", "t_gen_transformer", t_gen_transformer(
        params.layers, params.n_seq, params.d_model, params.k, params.cores), "units",
        "L * n * d^2 * k / P (order of growth, not ms)")
    return r


PRESETS: dict[str, tuple[dict, tuple[str, ...]]] = {
    "paper-section-4.3": ({"p_correct": 0.1, "target": 0.99, "k": 46}, ("sampling",)),
    "paper-section-4.4": ({"k": 1000, "t_cpu_per_program_ms": 200.0, "t_gen_k_ms": 100.0,
                           "t_verify_k_ms": 400.0}, ("latency",)),
    "paper-section-5.2": ({"p_simple": 0.8, "t_neural_amortized_ms": 0.2, "t_trad_ms": 20.0,
                           "t_routing_ms": 2.0}, ("hybrid",)),
    "paper-section-6.1": ({"t_gen_ms": 10.0, "t_transfer_ms": 1.0, "t_compile_cpu_ms": 50.0,
                           "t_exec_ms": 10.0}, ("latency",)),
    "paper-section-6.2": ({"pcie_w": 25.0, "t_transfer_ms": 1.0, "gpu_w": 300.0,
                           "t_gpu_compile_ms": 50.0, "t_neural_batch_ms": 200.0, "k": 1000,
                           "iterations": 1000, "cpu_energy_per_iteration_j": 70.0}, ("energy",)),
    "paper-section-6.3": ({"k": 1000}, ("memory",)),
}


def preset(name: str) -> tuple[CostParams, tuple[str, ...]]:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    changes, sections = PRESETS[name]
    return CostParams().replace(**changes), sections
