import logging
from dataclasses import replace

import pytest

from hybridsim.config import HardwareSpec
from hybridsim.cost import CATEGORIES
from hybridsim.engine import (
    ArchMode,
    breakdown_percentages,
    simulate_token,
    speedup,
    tpu_layer_tilecost,
)
from hybridsim.cost import CostResult
from hybridsim.pim import PIMSpec
from hybridsim.systolic import attention_block_cost
from hybridsim.workload import ModelSpec, NonlinearKind, Precision, build_op_graph

UNIT = ModelSpec("unit", 1, 1, 1, 1, context_len=1)
SMALL = ModelSpec("small", 64, 4, 128, 3, context_len=32)


def test_both_modes_run_on_minimal_model():
    hw = HardwareSpec()
    for mode in ArchMode:
        cost = simulate_token(UNIT, hw, mode)
        assert cost.total_latency_s > 0
        assert cost.total_energy_j > 0


def test_totals_are_category_sums():
    hw = HardwareSpec()
    cost = simulate_token(SMALL, hw, ArchMode.HYBRID)
    assert cost.total_latency_s == sum(cost.latency_s[c] for c in CATEGORIES)
    assert cost.total_energy_j == sum(cost.energy_j[c] for c in CATEGORIES)


def test_hybrid_array_time_is_attention_only():
    # in hybrid mode the systolic category must be exactly the attention
    # block, scaled by layer count
    hw = HardwareSpec()
    graph = build_op_graph(SMALL)
    attention = [
        op
        for op in graph.layer_ops(0)
        if getattr(op, "precision", None) is Precision.W8A8
        or getattr(op, "kind", None) is NonlinearKind.SOFTMAX
    ]
    cycles = attention_block_cost(attention, hw.tpu).total_cycles
    expected = SMALL.n_layers * cycles / hw.tpu.freq_hz
    cost = simulate_token(SMALL, hw, ArchMode.HYBRID)
    assert cost.latency_s["systolic"] == pytest.approx(expected, rel=1e-12)


def test_tpu_only_uses_no_crossbar_categories():
    hw = HardwareSpec()
    cost = simulate_token(SMALL, hw, ArchMode.TPU_ONLY)
    for cat in ("xbar", "dac", "adc", "peripheral"):
        assert cost.latency_s[cat] == 0.0
        assert cost.energy_j[cat] == 0.0


def test_tpu_only_buffer_latency_is_kv_append():
    hw = HardwareSpec()
    cost = simulate_token(SMALL, hw, ArchMode.TPU_ONLY)
    per_layer = 2 * SMALL.d / hw.tpu.sram_bw_bytes_per_cycle / hw.tpu.freq_hz
    assert cost.latency_s["buffer"] == pytest.approx(SMALL.n_layers * per_layer, rel=1e-12)


def test_tpu_only_streams_weights():
    hw = HardwareSpec()
    cost = simulate_token(SMALL, hw, ArchMode.TPU_ONLY)
    weight_bytes = SMALL.n_layers * (4 * SMALL.d**2 + 2 * SMALL.d * SMALL.d_ff)
    expected = weight_bytes / hw.tpu.dram_bw_bytes_per_cycle / hw.tpu.freq_hz
    assert cost.latency_s["communication"] == pytest.approx(expected, rel=1e-12)
    assert cost.energy_j["communication"] == pytest.approx(
        weight_bytes * hw.tpu.dram_energy_pj_per_byte * 1e-12, rel=1e-12
    )


def test_layer_scaling():
    hw = HardwareSpec()
    one = simulate_token(replace(SMALL, n_layers=1), hw, ArchMode.HYBRID)
    five = simulate_token(replace(SMALL, n_layers=5), hw, ArchMode.HYBRID)
    assert five.total_latency_s == pytest.approx(5 * one.total_latency_s, rel=1e-12)
    assert five.total_energy_j == pytest.approx(5 * one.total_energy_j, rel=1e-12)


def test_speedup_exceeds_one_and_decays_with_context():
    hw = HardwareSpec()
    model = ModelSpec("opt-1.3b", 2048, 32, 8192, 24)
    values = [speedup(model, hw, l) for l in (128, 1024, 4096)]
    assert all(v > 1.0 for v in values)
    assert values[0] > values[1] > values[2]


def test_speedup_l_override_equals_replace():
    hw = HardwareSpec()
    assert speedup(SMALL, hw, 64) == speedup(replace(SMALL, context_len=64), hw)


def test_simulation_is_deterministic():
    hw = HardwareSpec()
    a = simulate_token(SMALL, hw, ArchMode.HYBRID)
    b = simulate_token(SMALL, hw, ArchMode.HYBRID)
    assert a.latency_s == b.latency_s
    assert a.energy_j == b.energy_j


def test_breakdown_single_category():
    cost = CostResult()
    cost.add("systolic", latency_s=0.5)
    pct = breakdown_percentages(cost)
    assert pct["systolic"] == 100.0
    assert sum(pct.values()) == 100.0


def test_breakdown_sums_to_hundred():
    hw = HardwareSpec()
    pct = breakdown_percentages(simulate_token(SMALL, hw, ArchMode.HYBRID))
    assert sum(pct.values()) == pytest.approx(100.0, abs=1e-9)


def test_breakdown_rejects_zero_total():
    with pytest.raises(ValueError):
        breakdown_percentages(CostResult())


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        simulate_token(SMALL, HardwareSpec(), "hybrid")


def test_capacity_warning_fires_once(caplog):
    hw = HardwareSpec(pim=PIMSpec(banks=1, tiles_per_bank=1, pes_per_tile=1))
    model = ModelSpec("capacity-probe", 512, 4, 512, 2, context_len=8)
    with caplog.at_level(logging.WARNING, logger="hybridsim.engine"):
        simulate_token(model, hw, ArchMode.HYBRID)
        assert any("crossbars" in r.message for r in caplog.records)
        caplog.clear()
        simulate_token(model, hw, ArchMode.HYBRID)
        assert not caplog.records


def test_tpu_layer_tilecost_covers_all_matmuls():
    hw = HardwareSpec()
    graph = build_op_graph(SMALL)
    tc = tpu_layer_tilecost(graph.layer_ops(0), hw.tpu)
    per_layer_macs = 4 * SMALL.d**2 + 2 * SMALL.d * SMALL.d_ff + 2 * SMALL.context_len * SMALL.d
    assert tc.macs == per_layer_macs
