import pytest

from hybridsim.config import HardwareSpec
from hybridsim.cost import CostResult
from hybridsim.engine import ArchMode, simulate_token
from hybridsim.metrics import (
    build_report,
    gops_and_gops_per_watt,
    tokens_per_joule,
    tokens_per_second,
    words_per_battery,
)
from hybridsim.workload import ModelSpec, build_op_graph, mac_counts


def _cost(latency=0.0, energy=0.0):
    c = CostResult()
    c.add("systolic", latency_s=latency, energy_j=energy)
    return c


def test_throughput_inverts_latency():
    # power-of-two values keep the division exact
    assert tokens_per_second(_cost(latency=0.0078125)) == 128.0
    assert tokens_per_second(_cost(latency=0.01)) == 100.0
    half = tokens_per_second(_cost(latency=0.02))
    assert tokens_per_second(_cost(latency=0.01)) == 2 * half


def test_efficiency_inverts_energy():
    assert tokens_per_joule(_cost(latency=1.0, energy=0.125)) == 8.0


def test_words_per_battery_default_budget():
    # 18000 J at 10 tokens/J and 1.5 tokens/word
    assert words_per_battery(_cost(latency=1.0, energy=0.1)) == 120000.0
    assert words_per_battery(_cost(latency=1.0, energy=0.125)) == 96000.0


def test_words_per_battery_custom_budget():
    cost = _cost(latency=1.0, energy=0.5)
    assert words_per_battery(cost, battery_joules=300.0, tokens_per_word=2.0) == 300.0


def test_degenerate_costs_rejected():
    with pytest.raises(ValueError):
        tokens_per_second(CostResult())
    with pytest.raises(ValueError):
        tokens_per_joule(_cost(latency=1.0))


def test_gops_counts_two_ops_per_mac():
    model = ModelSpec("m", 64, 4, 128, 2, context_len=16)
    graph = build_op_graph(model)
    low, high = mac_counts(graph)
    cost = _cost(latency=1.0, energy=1.0)
    gops, gpw = gops_and_gops_per_watt(graph, cost)
    assert gops == 2 * (low + high) / 1e9
    assert gpw == gops


def test_gops_ratio_is_average_power():
    model = ModelSpec("m", 64, 4, 128, 2, context_len=16)
    hw = HardwareSpec()
    cost = simulate_token(model, hw, ArchMode.HYBRID)
    gops, gpw = gops_and_gops_per_watt(build_op_graph(model), cost)
    power = cost.total_energy_j / cost.total_latency_s
    assert gops / gpw == pytest.approx(power, rel=1e-12)


def test_build_report_round_trip():
    model = ModelSpec("m", 64, 4, 128, 2, context_len=16)
    hw = HardwareSpec()
    baseline = simulate_token(model, hw, ArchMode.TPU_ONLY)
    cost = simulate_token(model, hw, ArchMode.HYBRID)
    rep = build_report(
        model, hw, ArchMode.HYBRID, build_op_graph(model), cost, baseline.total_latency_s
    )
    assert rep.model == "m"
    assert rep.context_len == 16
    assert rep.mode == "hybrid"
    assert rep.dataflow == "OS"
    assert rep.speedup_vs_tpu == baseline.total_latency_s / cost.total_latency_s
    assert rep.tokens_per_s == tokens_per_second(cost)
    assert sum(rep.breakdown_pct.values()) == pytest.approx(100.0, abs=1e-9)
