"""Crossbar mapping, cost model, and functional MVM emulator for W1A8 ops.

A stationary weight matrix with k rows and m columns (activations enter the
k rows, results appear on the m columns) is split across xbar_rows x
xbar_cols crossbar tiles. Each cell stores one ternary weight as a
differential device pair: +1 = (Gon, Goff), -1 = (Goff, Gon),
0 = (Goff, Goff); a differential amplifier subtracts the negative-device
column current from the positive one, which the emulator models as exact
integer column sums. Activations are applied bit-serially: one activation
bit per phase through 1-bit DACs, act_bits phases total, recombined by
digital shift-and-add (the sign bit carries weight -2^(act_bits-1)).

Weights stay resident across inferences (loaded once at configuration), so
crossbar writes per inference are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cost import CostResult
from .workload import MatMulOp, Precision

# weight-stationary mapping: inference never reprograms a cell
CROSSBAR_WRITES_PER_INFERENCE = 0


class AdcMode(Enum):
    IDEAL = "Ideal"
    QUANTIZED = "Quantized"


@dataclass
class PIMSpec:
    xbar_rows: int = 256
    xbar_cols: int = 256
    adc_bits: int = 8
    act_bits: int = 8
    adcs_per_xbar: int = 32
    t_dac_ns: float = 1.0
    t_xbar_ns: float = 10.0
    t_adc_ns: float = 1.0
    e_dac_pj: float = 0.2
    e_xbar_pj_per_row: float = 0.05
    e_adc_pj: float = 2.0
    pes_per_tile: int = 16
    tiles_per_bank: int = 16
    banks: int = 8
    noc_bw_bytes_per_ns: float = 1.0
    noc_energy_pj_per_byte: float = 1.0
    buffer_bw_bytes_per_ns: float = 4.0
    buffer_energy_pj_per_byte: float = 0.5
    peripheral_ns_per_element: float = 0.0

    def __post_init__(self):
        for fname in ("xbar_rows", "xbar_cols", "adc_bits", "act_bits", "adcs_per_xbar",
                      "pes_per_tile", "tiles_per_bank", "banks"):
            if getattr(self, fname) < 1:
                raise ValueError(f"{fname} must be >= 1")
        if self.adcs_per_xbar > self.xbar_cols:
            raise ValueError("adcs_per_xbar cannot exceed xbar_cols")
        for fname in ("t_dac_ns", "t_xbar_ns", "t_adc_ns", "e_dac_pj",
                      "e_xbar_pj_per_row", "e_adc_pj", "noc_energy_pj_per_byte",
                      "buffer_energy_pj_per_byte", "peripheral_ns_per_element"):
            if getattr(self, fname) < 0:
                raise ValueError(f"{fname} must be nonnegative")
        if self.noc_bw_bytes_per_ns <= 0 or self.buffer_bw_bytes_per_ns <= 0:
            raise ValueError("NoC and buffer bandwidths must be positive")


@dataclass(frozen=True)
class CrossbarTilePlan:
    weight_rows: int
    weight_cols: int
    tiles_r: int
    tiles_c: int

    @property
    def total_tiles(self) -> int:
        return self.tiles_r * self.tiles_c

    def row_tile_depths(self, xbar_rows: int):
        """Rows used by each row-block; all full except possibly the last."""
        depths = [xbar_rows] * (self.tiles_r - 1)
        depths.append(self.weight_rows - (self.tiles_r - 1) * xbar_rows)
        return depths

    def col_tile_widths(self, xbar_cols: int):
        widths = [xbar_cols] * (self.tiles_c - 1)
        widths.append(self.weight_cols - (self.tiles_c - 1) * xbar_cols)
        return widths


def plan_mapping(weight_rows: int, weight_cols: int, hw: PIMSpec) -> CrossbarTilePlan:
    """Tile grid covering the matrix; weights assigned row-major to tiles."""

    if weight_rows < 1 or weight_cols < 1:
        raise ValueError("weight matrix dimensions must be positive")
    return CrossbarTilePlan(
        weight_rows=weight_rows,
        weight_cols=weight_cols,
        tiles_r=-(-weight_rows // hw.xbar_rows),
        tiles_c=-(-weight_cols // hw.xbar_cols),
    )


def functional_mvm(weights, x, hw: PIMSpec, adc_mode: AdcMode = AdcMode.IDEAL) -> np.ndarray:
    """Emulate the tiled bit-serial crossbar MVM; returns W^T . x.

    weights: (rows x cols) ternary matrix; x: signed act_bits vector of
    length rows. Column tiling partitions independent outputs, so only the
    row split matters for values: each row-tile produces per-phase column
    sums (positive-device current minus negative-device current), Quantized
    mode clamps every per-tile per-phase sum to the signed adc_bits range,
    and the digital backend shift-adds phases and adds row-tile partials.
    """

    w = np.asarray(weights, dtype=np.int64)
    xv = np.asarray(x, dtype=np.int64)
    if w.ndim != 2:
        raise ValueError("weights must be a 2-D matrix")
    if xv.ndim != 1 or xv.shape[0] != w.shape[0]:
        raise ValueError(f"activation length {xv.shape} does not match weight rows {w.shape[0]}")
    if not np.isin(w, (-1, 0, 1)).all():
        raise ValueError("weights must be ternary (-1, 0, +1)")
    lo_act = -(1 << (hw.act_bits - 1))
    hi_act = (1 << (hw.act_bits - 1)) - 1
    if xv.min(initial=0) < lo_act or xv.max(initial=0) > hi_act:
        raise ValueError(f"activations out of signed {hw.act_bits}-bit range")

    bits = hw.act_bits
    # two's-complement phase weights: the sign phase subtracts
    coef = np.array([1 << b for b in range(bits)], dtype=np.int64)
    coef[-1] = -coef[-1]
    bitmat = ((xv & ((1 << bits) - 1))[None, :] >> np.arange(bits)[:, None]) & 1

    w_pos = (w > 0).astype(np.float64)
    w_neg = (w < 0).astype(np.float64)
    clamp_lo = -(1 << (hw.adc_bits - 1))
    clamp_hi = (1 << (hw.adc_bits - 1)) - 1
    out = np.zeros(w.shape[1], dtype=np.int64)
    for r0 in range(0, w.shape[0], hw.xbar_rows):
        r1 = min(r0 + hw.xbar_rows, w.shape[0])
        # one row of drivers per phase; sums stay far below 2^53 so the
        # float64 matmul is exact
        drive = bitmat[:, r0:r1].astype(np.float64)
        sums = (drive @ w_pos[r0:r1] - drive @ w_neg[r0:r1]).astype(np.int64)
        if adc_mode is AdcMode.QUANTIZED:
            np.clip(sums, clamp_lo, clamp_hi, out=sums)
        out += coef @ sums
    return out


def pim_layer_cost(op: MatMulOp, hw: PIMSpec) -> CostResult:
    """Latency/energy fragment of one W1A8 MVM on the crossbar banks.

    All tiles of the mapping fire in parallel, so latency is tile-count
    independent:

        act_bits * (t_dac + t_xbar + ceil(min(xbar_cols, m)/adcs_per_xbar) * t_adc)

    Energy sums over tiles: DAC and crossbar energy scale with the rows a
    tile actually drives; every ADC in a used column group converts each
    phase, so ADC energy rounds used columns up to the group size. Input
    and output vectors (1 byte per element) cross the NoC and the tile
    buffers once each; the digital shift-and-add backend is charged per
    output element at peripheral_ns_per_element (default free).
    """

    if op.precision is not Precision.W1A8:
        raise ValueError(f"{op.role.value} is W8A8; it belongs on the systolic array")
    plan = plan_mapping(op.k, op.m, hw)
    ab = hw.act_bits
    cost = CostResult()
    cost.add("dac", latency_s=ab * hw.t_dac_ns * 1e-9)
    cost.add("xbar", latency_s=ab * hw.t_xbar_ns * 1e-9)
    adc_rounds = math.ceil(min(hw.xbar_cols, op.m) / hw.adcs_per_xbar)
    cost.add("adc", latency_s=ab * adc_rounds * hw.t_adc_ns * 1e-9)

    # sum of rows_used over a column of tiles is just weight_rows
    row_events = op.k * plan.tiles_c
    cost.add("dac", energy_j=ab * hw.e_dac_pj * row_events * 1e-12)
    cost.add("xbar", energy_j=ab * hw.e_xbar_pj_per_row * row_events * 1e-12)
    adc_units = sum(
        math.ceil(cu / hw.adcs_per_xbar) * hw.adcs_per_xbar
        for cu in plan.col_tile_widths(hw.xbar_cols)
    )
    cost.add("adc", energy_j=ab * hw.e_adc_pj * plan.tiles_r * adc_units * 1e-12)

    io_bytes = op.k + op.m
    cost.add(
        "communication",
        latency_s=io_bytes / hw.noc_bw_bytes_per_ns * 1e-9,
        energy_j=io_bytes * hw.noc_energy_pj_per_byte * 1e-12,
    )
    cost.add(
        "buffer",
        latency_s=io_bytes / hw.buffer_bw_bytes_per_ns * 1e-9,
        energy_j=io_bytes * hw.buffer_energy_pj_per_byte * 1e-12,
    )
    cost.add("peripheral", latency_s=hw.peripheral_ns_per_element * op.m * 1e-9)
    return cost


def crossbar_capacity(hw: PIMSpec) -> int:
    """Crossbars available across the bank/tile/PE hierarchy (one per PE)."""

    return hw.banks * hw.tiles_per_bank * hw.pes_per_tile


def crossbars_required(ops, hw: PIMSpec) -> int:
    """Crossbar tiles needed to hold every W1A8 weight matrix in ops."""

    total = 0
    for op in ops:
        if isinstance(op, MatMulOp) and op.precision is Precision.W1A8:
            total += plan_mapping(op.k, op.m, hw).total_tiles
    return total
