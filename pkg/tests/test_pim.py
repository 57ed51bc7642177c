import numpy as np
import pytest

from hybridsim.pim import (
    CROSSBAR_WRITES_PER_INFERENCE,
    AdcMode,
    PIMSpec,
    crossbar_capacity,
    crossbars_required,
    functional_mvm,
    pim_layer_cost,
    plan_mapping,
)
from hybridsim.workload import MatMulOp, ModelSpec, Precision, Role, build_op_graph


def _op(m, k, role=Role.PROJ_Q):
    return MatMulOp(role, m, k, 1, Precision.W1A8, 0)


def _ternary(rng, rows, cols):
    return rng.integers(-1, 2, size=(rows, cols), dtype=np.int64)


def test_weights_stay_resident():
    assert CROSSBAR_WRITES_PER_INFERENCE == 0


def test_plan_single_tile():
    plan = plan_mapping(256, 256, PIMSpec())
    assert (plan.tiles_r, plan.tiles_c, plan.total_tiles) == (1, 1, 1)


def test_plan_large_square():
    plan = plan_mapping(4096, 4096, PIMSpec())
    assert plan.total_tiles == 256


def test_plan_ragged_edge():
    plan = plan_mapping(257, 1, PIMSpec())
    assert (plan.tiles_r, plan.tiles_c) == (2, 1)
    assert plan.row_tile_depths(256) == [256, 1]
    assert plan.col_tile_widths(256) == [1]


def test_plan_tile_counts_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        xr = int(rng.integers(1, 40))
        xc = int(rng.integers(1, 40))
        r = int(rng.integers(1, 500))
        c = int(rng.integers(1, 500))
        plan = plan_mapping(r, c, PIMSpec(xbar_rows=xr, xbar_cols=xc, adcs_per_xbar=1))
        assert plan.tiles_r == -(-r // xr)
        assert plan.tiles_c == -(-c // xc)
        assert sum(plan.row_tile_depths(xr)) == r
        assert sum(plan.col_tile_widths(xc)) == c


def test_mvm_identity_weights():
    hw = PIMSpec()
    x = np.array([1, -2, 3, -4])
    out = functional_mvm(np.eye(4, dtype=np.int64), x, hw)
    assert np.array_equal(out, x)
    out = functional_mvm(-np.eye(4, dtype=np.int64), x, hw)
    assert np.array_equal(out, -x)


def test_mvm_zero_weights():
    hw = PIMSpec()
    out = functional_mvm(np.zeros((5, 3), dtype=np.int64), np.arange(5) - 2, hw)
    assert np.array_equal(out, np.zeros(3, dtype=np.int64))


def test_mvm_matches_reference_across_xbar_sizes():
    rng = np.random.default_rng(23)
    for _ in range(40):
        rows = int(rng.integers(1, 300))
        cols = int(rng.integers(1, 200))
        w = _ternary(rng, rows, cols)
        x = rng.integers(-128, 128, size=rows, dtype=np.int64)
        ref = w.T @ x
        for size in (4, 16, 256):
            hw = PIMSpec(xbar_rows=size, xbar_cols=size, adcs_per_xbar=min(size, 32))
            assert np.array_equal(functional_mvm(w, x, hw), ref)


def test_mvm_large_case():
    rng = np.random.default_rng(29)
    w = _ternary(rng, 1000, 700)
    x = rng.integers(-128, 128, size=1000, dtype=np.int64)
    hw = PIMSpec()
    assert np.array_equal(functional_mvm(w, x, hw), w.T @ x)


def test_mvm_column_split_never_changes_values():
    rng = np.random.default_rng(31)
    w = _ternary(rng, 64, 90)
    x = rng.integers(-128, 128, size=64, dtype=np.int64)
    narrow = PIMSpec(xbar_rows=64, xbar_cols=7, adcs_per_xbar=7)
    wide = PIMSpec(xbar_rows=64, xbar_cols=256, adcs_per_xbar=256)
    assert np.array_equal(functional_mvm(w, x, narrow), functional_mvm(w, x, wide))


def test_quantized_matches_ideal_when_sums_fit():
    # at most 64 rows per tile, so every per-phase column sum fits in 8 bits
    rng = np.random.default_rng(37)
    hw = PIMSpec(xbar_rows=64, xbar_cols=64, adcs_per_xbar=32)
    w = _ternary(rng, 200, 50)
    x = rng.integers(-128, 128, size=200, dtype=np.int64)
    ideal = functional_mvm(w, x, hw, AdcMode.IDEAL)
    quant = functional_mvm(w, x, hw, AdcMode.QUANTIZED)
    assert np.array_equal(ideal, quant)


def test_quantized_clips_oversized_sums():
    # 300 unit weights on one column with all activation bits set: per-phase
    # sums of 300 clip to 127 behind an 8-bit converter
    hw = PIMSpec(xbar_rows=512, xbar_cols=8, adcs_per_xbar=8)
    w = np.ones((300, 1), dtype=np.int64)
    x = np.full(300, 127, dtype=np.int64)
    ideal = functional_mvm(w, x, hw, AdcMode.IDEAL)
    quant = functional_mvm(w, x, hw, AdcMode.QUANTIZED)
    assert ideal[0] == 300 * 127
    assert quant[0] == 127 * 127
    assert not np.array_equal(ideal, quant)


def test_mvm_input_validation():
    hw = PIMSpec()
    with pytest.raises(ValueError, match="ternary"):
        functional_mvm(np.array([[2]]), np.array([1]), hw)
    with pytest.raises(ValueError, match="does not match"):
        functional_mvm(np.eye(3, dtype=np.int64), np.array([1, 2]), hw)
    with pytest.raises(ValueError, match="range"):
        functional_mvm(np.eye(2, dtype=np.int64), np.array([128, 0]), hw)
    with pytest.raises(ValueError, match="2-D"):
        functional_mvm(np.array([1, 0, 1]), np.array([1, 2, 3]), hw)


def test_latency_hand_case():
    # 8 phases of 1ns DAC + 1ns array + ceil(256/32) ADC rounds at 1ns
    hw = PIMSpec(t_xbar_ns=1.0)
    cost = pim_layer_cost(_op(256, 256), hw)
    analog = cost.latency_s["dac"] + cost.latency_s["xbar"] + cost.latency_s["adc"]
    assert analog == pytest.approx(80e-9, rel=1e-12)


def test_latency_independent_of_tile_count():
    hw = PIMSpec()
    small = pim_layer_cost(_op(256, 256), hw)
    large = pim_layer_cost(_op(4096, 4096), hw)
    for cat in ("dac", "xbar", "adc"):
        assert small.latency_s[cat] == large.latency_s[cat]


def test_analog_energy_scales_with_tiles():
    # a 16x16 tiling of full crossbars burns exactly 256x one tile's energy
    hw = PIMSpec()
    one = pim_layer_cost(_op(256, 256), hw)
    big = pim_layer_cost(_op(4096, 4096), hw)
    for cat in ("dac", "xbar", "adc"):
        assert big.energy_j[cat] == pytest.approx(256 * one.energy_j[cat], rel=1e-12)


def test_io_charged_to_noc_and_buffer():
    hw = PIMSpec()
    cost = pim_layer_cost(_op(100, 60), hw)
    io = 160
    assert cost.latency_s["communication"] == pytest.approx(
        io / hw.noc_bw_bytes_per_ns * 1e-9, rel=1e-12
    )
    assert cost.energy_j["buffer"] == pytest.approx(
        io * hw.buffer_energy_pj_per_byte * 1e-12, rel=1e-12
    )


def test_peripheral_charge_per_output():
    hw = PIMSpec(peripheral_ns_per_element=2.0)
    cost = pim_layer_cost(_op(100, 60), hw)
    assert cost.latency_s["peripheral"] == pytest.approx(200e-9, rel=1e-12)


def test_rejects_attention_ops():
    op = MatMulOp(Role.ATTN_SCORE, 8, 8, 1, Precision.W8A8, 0)
    with pytest.raises(ValueError, match="systolic"):
        pim_layer_cost(op, PIMSpec())


def test_capacity_and_requirements():
    hw = PIMSpec()
    assert crossbar_capacity(hw) == 8 * 16 * 16
    model = ModelSpec("m", 256, 2, 512, 1, context_len=8)
    ops = build_op_graph(model).layer_ops(0)
    # four 256x256 projections (1 tile each) + 512x256 and 256x512 (2 each)
    assert crossbars_required(ops, hw) == 8


def test_spec_validation():
    with pytest.raises(ValueError, match="adcs_per_xbar"):
        PIMSpec(xbar_cols=16, adcs_per_xbar=32)
    with pytest.raises(ValueError):
        PIMSpec(banks=0)
    with pytest.raises(ValueError):
        PIMSpec(t_adc_ns=-1.0)
