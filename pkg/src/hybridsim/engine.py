"""Per-token-step cost composition for both execution modes.

Hybrid mode runs the six W1A8 projection/feed-forward MVMs of each layer on
the crossbar banks and the W8A8 attention block on the systolic array, with
activation vectors crossing between the two sides once per direction per
layer. TpuOnly mode routes every MatMul through the systolic array and,
because the multi-hundred-MB weight set cannot reside in on-chip SRAM,
streams all projection/FF weights from DRAM once per token; that residency
decision is the single biggest contributor to the baseline's latency and is
deliberate (see README).

Latency is strictly additive across categories: execution is modeled as
sequential with no overlap between the crossbar, array, and transfer
phases. Every layer of the stack is identical at fixed context length, so
one layer is costed and scaled by n_layers. The 1/sqrt(d) attention scaling
is functional only and carries no cost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from enum import Enum

from .cost import CostResult
from .pim import crossbar_capacity, crossbars_required, pim_layer_cost
from .systolic import TileCost, analytic_cycles, attention_block_cost
from .workload import (
    MatMulOp,
    ModelSpec,
    NonlinearKind,
    NonlinearOp,
    Precision,
    build_op_graph,
)

log = logging.getLogger(__name__)

_capacity_warned = set()


class ArchMode(Enum):
    HYBRID = "hybrid"
    TPU_ONLY = "tpu-only"


def _split_layer(ops):
    """One layer's ops -> (w1a8 MVMs, attention block, postprocess nonlinears)."""

    w1a8 = []
    attention = []
    post = []
    for op in ops:
        if isinstance(op, MatMulOp):
            (w1a8 if op.precision is Precision.W1A8 else attention).append(op)
        elif isinstance(op, NonlinearOp):
            (attention if op.kind is NonlinearKind.SOFTMAX else post).append(op)
    return w1a8, attention, post


def _array_time_s(cycles, hw) -> float:
    return cycles / hw.tpu.freq_hz


def _attention_fragment(attention_ops, hw) -> tuple[CostResult, TileCost]:
    """Systolic-array cost of the attention block; shared by both modes."""

    tc = attention_block_cost(attention_ops, hw.tpu)
    frag = CostResult()
    frag.add(
        "systolic",
        latency_s=_array_time_s(tc.total_cycles, hw),
        energy_j=hw.tpu.mac_energy_pj * tc.macs * 1e-12,
    )
    frag.add(
        "buffer",
        energy_j=hw.tpu.sram_energy_pj_per_byte
        * (tc.sram_reads_bytes + tc.sram_writes_bytes)
        * 1e-12,
    )
    return frag, tc


def _kv_append_fragment(model, hw) -> CostResult:
    # one d-byte K row and one d-byte V row join the cache every step
    kv_bytes = 2 * model.d
    frag = CostResult()
    frag.add(
        "buffer",
        latency_s=kv_bytes / hw.tpu.sram_bw_bytes_per_cycle / hw.tpu.freq_hz,
        energy_j=kv_bytes * hw.tpu.sram_energy_pj_per_byte * 1e-12,
    )
    return frag


def _hybrid_layer(model, layer_ops, hw) -> CostResult:
    w1a8, attention, post = _split_layer(layer_ops)
    frag = CostResult()
    for op in w1a8:
        frag.merge(pim_layer_cost(op, hw.pim))
    attn_frag, _ = _attention_fragment(attention, hw)
    frag.merge(attn_frag)
    # activations cross between the crossbar banks and the array once per
    # direction per layer, d bytes each way
    crossing_bytes = 2 * model.d
    frag.add(
        "communication",
        latency_s=crossing_bytes / hw.system.lpddr_bw_bytes_per_ns * 1e-9,
        energy_j=crossing_bytes * hw.system.lpddr_energy_pj_per_byte * 1e-12,
    )
    for op in post:
        frag.add(
            "peripheral",
            latency_s=hw.pim.peripheral_ns_per_element * op.element_count * 1e-9,
        )
    frag.merge(_kv_append_fragment(model, hw))
    return frag


def tpu_layer_tilecost(layer_ops, tpu) -> TileCost:
    """All of one layer's MatMuls plus nonlinears on the array alone.

    Nonlinears run on the array's functional unit in this mode (there are
    no crossbar postprocessing units without the crossbars), charged at
    nfu_cycles_per_element like Softmax.
    """

    w1a8, attention, post = _split_layer(layer_ops)
    tc = attention_block_cost(attention, tpu)
    for op in w1a8:
        tc = tc + analytic_cycles(op.m, op.k, op.n, tpu)
    nfu_elements = sum(op.element_count for op in post)
    tc.compute_cycles += math.ceil(tpu.nfu_cycles_per_element * nfu_elements)
    return tc


def _tpu_only_layer(model, layer_ops, hw) -> CostResult:
    w1a8, _, _ = _split_layer(layer_ops)
    tc = tpu_layer_tilecost(layer_ops, hw.tpu)
    frag = CostResult()
    frag.add(
        "systolic",
        latency_s=_array_time_s(tc.total_cycles, hw),
        energy_j=hw.tpu.mac_energy_pj * tc.macs * 1e-12,
    )
    frag.add(
        "buffer",
        energy_j=hw.tpu.sram_energy_pj_per_byte
        * (tc.sram_reads_bytes + tc.sram_writes_bytes)
        * 1e-12,
    )
    # weights do not fit on chip: stream the full W1A8 set (held as 8-bit
    # operands on this path) from DRAM once per token
    weight_bytes = sum(op.m * op.k for op in w1a8)
    frag.add(
        "communication",
        latency_s=weight_bytes / hw.tpu.dram_bw_bytes_per_cycle / hw.tpu.freq_hz,
        energy_j=weight_bytes * hw.tpu.dram_energy_pj_per_byte * 1e-12,
    )
    frag.merge(_kv_append_fragment(model, hw))
    return frag


def _check_capacity(model, layer_ops, hw):
    per_layer = crossbars_required(layer_ops, hw.pim)
    required = per_layer * model.n_layers
    available = crossbar_capacity(hw.pim)
    key = (model.name, required, available)
    if required > available and key not in _capacity_warned:
        _capacity_warned.add(key)
        log.warning(
            "%s needs %d crossbars but the hierarchy holds %d "
            "(banks*tiles*PEs); latency model assumes full preloading either way",
            model.name,
            required,
            available,
        )


def simulate_token(model: ModelSpec, hw, mode: ArchMode) -> CostResult:
    """Latency/energy of generating one token at fixed context length."""

    graph = build_op_graph(model)
    layer_ops = graph.layer_ops(0)
    if mode is ArchMode.HYBRID:
        _check_capacity(model, layer_ops, hw)
        layer = _hybrid_layer(model, layer_ops, hw)
    elif mode is ArchMode.TPU_ONLY:
        layer = _tpu_only_layer(model, layer_ops, hw)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # every layer is identical at fixed l
    return layer.scaled(model.n_layers)


def speedup(model: ModelSpec, hw, l: int | None = None) -> float:
    """TpuOnly latency over Hybrid latency at context length l."""

    if l is not None:
        model = replace(model, context_len=l)
    baseline = simulate_token(model, hw, ArchMode.TPU_ONLY).total_latency_s
    hybrid = simulate_token(model, hw, ArchMode.HYBRID).total_latency_s
    return baseline / hybrid


def breakdown_percentages(cost: CostResult) -> dict:
    """Latency share per category, in percent; shares sum to 100."""

    total = cost.total_latency_s
    if total <= 0.0:
        raise ValueError("cannot break down a zero-latency result")
    return {c: 100.0 * v / total for c, v in cost.latency_s.items()}
