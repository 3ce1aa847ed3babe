import math

import pytest
from hypothesis import given, strategies as st

from gpunative.cost import (
    GB, MB, NEURAL_COMPONENTS, PRESETS, SECTIONS, Component, CostParams, energy_mj, evaluate,
    growth_report, j_to_mj, k_required, memory_estimate, mj_to_j, p_success, preset,
    speedup_neural, t_cpu_iteration, t_gen_transformer, t_hybrid, t_neural, t_trad_parallel,
)

P_GRID = [round(0.01 * i, 2) for i in range(1, 100)]
T_GRID = [0.9, 0.99, 0.999]


def test_p_success_examples():
    assert p_success(0, 0.3) == 0
    assert p_success(5, 1.0) == 1
    assert p_success(46, 0.1) == pytest.approx(0.9921448, abs=1e-7)
    assert p_success(46, 0.1) == pytest.approx(1 - 0.9**46, rel=1e-12)


def test_p_success_small_p_large_k():
    # naive 1 - (1-p)^k collapses to 0 in double precision here
    v = p_success(10, 1e-18)
    assert v == pytest.approx(1e-17, rel=1e-9)
    assert p_success(10**9, 1e-6) == 1.0 or p_success(10**9, 1e-6) > 0.999999


def test_p_success_rejects_bad_input():
    with pytest.raises(ValueError):
        p_success(-1, 0.5)
    with pytest.raises(ValueError):
        p_success(3, 1.5)


def test_k_required_examples():
    assert k_required(0.99, 0.1, "approx") == 46
    assert k_required(0.99, 0.01, "approx") == 460
    assert k_required(0.99, 0.1, "exact") == 44
    assert 0.9**44 == pytest.approx(0.00969, abs=1e-5)
    assert k_required(0.99, 1.0) == 1
    with pytest.raises(ValueError):
        k_required(1.0, 0.1)
    with pytest.raises(ValueError):
        k_required(0.9, 0.0)
    with pytest.raises(ValueError):
        k_required(0.9, 0.1, "guess")


@pytest.mark.parametrize("t", T_GRID)
def test_k_required_grid(t):
    for p in P_GRID:
        k = k_required(t, p)
        assert p_success(k, p) >= t
        assert k == 1 or p_success(k - 1, p) < t
        assert k_required(t, p, "approx") >= k


@given(st.integers(0, 2000), st.integers(0, 2000), st.floats(0, 1), st.floats(0, 1))
def test_p_success_monotone(k1, k2, p1, p2):
    k1, k2 = sorted((k1, k2))
    p1, p2 = sorted((p1, p2))
    assert p_success(k1, p1) <= p_success(k2, p1) + 1e-15
    assert p_success(k1, p1) <= p_success(k1, p2) + 1e-15


def test_latency_examples():
    assert t_cpu_iteration(10, 1, 50, 10) == 72
    assert t_cpu_iteration(10, 1, 500, 1000) == 1512
    assert t_cpu_iteration(0, 0, 0, 0) == 0
    assert t_trad_parallel([(1, 2, 3)], 8) == 6
    assert t_trad_parallel([(6,), (4, 6), (7,)], 8) == 10
    assert t_trad_parallel([(1, 2, 3)] * 10, 4) == 18
    assert t_trad_parallel([], 4) == 0
    assert t_neural(100, 50) == 150
    assert speedup_neural(1000, 200, 500) == 400
    assert speedup_neural(1, 200, 200) == 1
    with pytest.raises(ZeroDivisionError):
        speedup_neural(10, 200, 0)


def test_t_hybrid_examples():
    assert t_hybrid(0.8, 0.2, 20, 2) == pytest.approx(6.16, abs=1e-12)
    assert t_hybrid(1, 0.2, 20, 2) == pytest.approx(2.2)
    assert t_hybrid(0, 0.2, 20, 2) == 22
    with pytest.raises(ValueError):
        t_hybrid(1.2, 1, 1, 1)


@given(st.floats(0, 1), st.floats(0, 1e4), st.floats(0, 1e4), st.floats(0, 100))
def test_t_hybrid_bounds(p, tn, tt, tr):
    v = t_hybrid(p, tn, tt, tr)
    eps = 1e-9 * (1 + tn + tt + tr)
    assert min(tn, tt) + tr - eps <= v <= max(tn, tt) + tr + eps


def test_energy_examples():
    assert energy_mj(25, 1) == 25
    assert mj_to_j(energy_mj(300, 50)) == 15
    assert mj_to_j(energy_mj(300, 200)) == 60
    assert energy_mj(300, 200) / 1000 == 60
    r = evaluate(preset("paper-section-6.2")[0])
    assert r["e_transfer"].value == 25 and r["e_transfer"].unit == "mJ"
    assert r["e_neural_amortized"].value == 60
    assert r["e_cpu_total"].value == 70_000
    assert r["energy_savings"].value == pytest.approx(70_000 / 60)
    assert round(r["energy_savings"].value) == 1167


@given(st.floats(0, 1e6, allow_nan=False))
def test_unit_roundtrip(x):
    assert j_to_mj(mj_to_j(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


def test_memory_examples():
    trad = memory_estimate("traditional", 100)
    assert (trad.low_bytes / MB, trad.high_bytes / MB) == pytest.approx((20, 200))
    assert memory_estimate("traditional", 200).high_bytes / MB == pytest.approx(400)
    neural = memory_estimate("neural", 1000)
    assert neural.rounded(GB) == (1, 12)
    zero = {name: Component(0, 0, c.reference_k) for name, c in NEURAL_COMPONENTS.items()}
    z = memory_estimate("neural", 1000, zero)
    assert (z.low_bytes, z.high_bytes) == (0, 0)
    with pytest.raises(ValueError):
        memory_estimate("neural", 10, {"x": Component(-1, 1, None)})


def test_t_gen_transformer():
    assert t_gen_transformer(1, 1, 1, 1, 1) == 1
    base = t_gen_transformer(24, 1000, 1024, 100, 10_000)
    assert t_gen_transformer(24, 1000, 1024, 200, 10_000) == 2 * base
    assert t_gen_transformer(24, 1000, 2048, 100, 10_000) == 4 * base
    with pytest.raises(ValueError):
        t_gen_transformer(0, 1, 1, 1, 1)
    g = growth_report(CostParams())
    assert [e.unit for e in g.entries] == ["units"]


def test_report_never_mixes_growth_units():
    r = evaluate(CostParams(phase_times=((1, 2, 3),) * 10, cores=4))
    assert "units" not in {e.unit for e in r.entries}
    assert r["t_trad_parallel"].value == 18 and "waves" in r["t_trad_parallel"].formula
    assert {e.section for e in r.entries} == set(SECTIONS)
    assert all(e.unit for e in r.entries)


def test_presets_reproduce_worked_numbers():
    def val(name, key):
        params, sections = preset(name)
        return evaluate(params).only(sections)[key].value

    assert val("paper-section-4.3", "k_required_approx") == 46
    assert val("paper-section-4.3", "k_required_exact") == 44
    assert val("paper-section-4.4", "speedup_neural") == 400
    assert val("paper-section-4.4", "t_neural") == 500
    assert val("paper-section-5.2", "t_hybrid") == pytest.approx(6.16)
    assert round(val("paper-section-5.2", "t_hybrid")) == 6
    assert val("paper-section-6.1", "t_cpu_iteration") == 72
    assert val("paper-section-6.2", "e_gpu_compile") == 15
    assert val("paper-section-6.2", "e_neural_batch") == 60
    assert val("paper-section-6.3", "memory_neural_high_rounded") == 12
    assert val("paper-section-6.3", "memory_neural_low_rounded") == 1
    assert val("paper-section-6.3", "memory_traditional_high") == pytest.approx(200)
    for name in PRESETS:
        params, sections = preset(name)
        assert evaluate(params).only(sections).entries
    with pytest.raises(KeyError):
        preset("nope")


def test_params_validation_and_parse():
    with pytest.raises(ValueError):
        CostParams(t_gen_ms=-1)
    with pytest.raises(ValueError):
        CostParams(p_simple=2)
    with pytest.raises(ValueError):
        CostParams(k=0)
    p = CostParams.parse("# cfg\nk = 46\np_correct=0.5\nphase_times = 1,2,3; 4,5\n")
    assert p.k == 46 and isinstance(p.k, int) and p.p_correct == 0.5
    assert p.phase_times == ((1.0, 2.0, 3.0), (4.0, 5.0))
    with pytest.raises(KeyError):
        CostParams.parse("bogus = 1")
    with pytest.raises(ValueError):
        CostParams.parse("k")


def test_report_rendering():
    r = evaluate(CostParams())
    text = r.table()
    assert text.splitlines()[0].split()[:4] == ["section", "quantity", "value", "unit"]
    assert len(text.splitlines()) == len(r.entries) + 1
    d = r.as_dict()
    assert {"name", "value", "unit", "formula", "section"} == set(d["entries"][0])
    assert math.isclose(r["p_success"].value, p_success(1000, 0.1))
