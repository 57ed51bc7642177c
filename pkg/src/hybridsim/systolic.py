"""Systolic-array cost models for 8-bit GEMMs.

Closed-form cycle estimates for the three classic dataflows plus a
cycle-accurate PE-grid oracle used to validate them. The GEMM orientation
is fixed throughout: the output is M x N, K is the inner dimension, and the
stationary operand of the WS dataflow is the K x N matrix.

Analytical model (fill/drain pipeline, per tile):

    OS: tiles = ceil(M/R) * ceil(N/C),  cycles = K + R + C - 2
    WS: tiles = ceil(K/R) * ceil(N/C),  cycles = R + (M + R + C - 2)
    IS: tiles = ceil(M/R) * ceil(K/C),  cycles = C + (N + R + C - 2)

Partial tiles are charged as full tiles; the per-tile overcharge relative to
the grid oracle is (R - rows_used) + (C - cols_used), so on shapes that fit
a single tile the analytic count exceeds the oracle by less than R + C.
Double buffering is modeled as stall = max(0, traffic_time - compute_time)
per op: transfers overlap compute perfectly up to the SRAM bandwidth.

All operands are 8-bit (1 byte per element) on this path. Each operand
element is charged one SRAM read per tile that consumes it; WS and IS spill
partial sums once per extra K-tile and read them back for accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .workload import MatMulOp, NonlinearKind, NonlinearOp, Precision

# Refuse grid simulations above this many MACs; the oracle is for validation
# at desk scale, not production sweeps.
SIM_MAC_GUARD = 2**24

_SIM_SEED = 20317


class Dataflow(Enum):
    OS = "OS"
    WS = "WS"
    IS = "IS"


def _default_sram_bytes() -> dict:
    # 8 MiB total on-chip, split across the three operand memories
    return {"input": 2 * 2**20, "weight": 4 * 2**20, "output": 2 * 2**20}


@dataclass
class TPUSpec:
    rows: int = 32
    cols: int = 32
    freq_hz: float = 100e6
    dataflow: Dataflow = Dataflow.OS
    sram_bytes: dict = field(default_factory=_default_sram_bytes)
    sram_bw_bytes_per_cycle: float = 64
    dram_bw_bytes_per_cycle: float = 128
    mac_energy_pj: float = 0.5
    sram_energy_pj_per_byte: float = 1.0
    dram_energy_pj_per_byte: float = 20.0
    nfu_cycles_per_element: float = 0.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array dimensions must be >= 1")
        if isinstance(self.dataflow, str):
            self.dataflow = Dataflow(self.dataflow)
        if self.freq_hz <= 0:
            raise ValueError("freq_hz must be positive")
        if set(self.sram_bytes) != {"input", "weight", "output"}:
            raise ValueError("sram_bytes needs exactly the keys input/weight/output")
        if min(self.sram_bytes.values()) < 0:
            raise ValueError("sram capacities must be nonnegative")
        if self.sram_bw_bytes_per_cycle <= 0 or self.dram_bw_bytes_per_cycle <= 0:
            raise ValueError("bandwidths must be positive")
        for fname in ("mac_energy_pj", "sram_energy_pj_per_byte", "dram_energy_pj_per_byte", "nfu_cycles_per_element"):
            if getattr(self, fname) < 0:
                raise ValueError(f"{fname} must be nonnegative")


@dataclass
class TileCost:
    compute_cycles: int = 0
    stall_cycles: int = 0
    sram_reads_bytes: int = 0
    sram_writes_bytes: int = 0
    dram_reads_bytes: int = 0
    macs: int = 0

    @property
    def total_cycles(self) -> int:
        return self.compute_cycles + self.stall_cycles

    def __add__(self, other: "TileCost") -> "TileCost":
        return TileCost(
            self.compute_cycles + other.compute_cycles,
            self.stall_cycles + other.stall_cycles,
            self.sram_reads_bytes + other.sram_reads_bytes,
            self.sram_writes_bytes + other.sram_writes_bytes,
            self.dram_reads_bytes + other.dram_reads_bytes,
            self.macs + other.macs,
        )


def _check_dims(m, k, n):
    if min(m, k, n) < 1:
        raise ValueError(f"GEMM dimensions must be positive, got ({m}, {k}, {n})")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _compute_cycles(m, k, n, hw: TPUSpec) -> int:
    R, C = hw.rows, hw.cols
    if hw.dataflow is Dataflow.OS:
        tiles = _ceil_div(m, R) * _ceil_div(n, C)
        per_tile = k + R + C - 2
    elif hw.dataflow is Dataflow.WS:
        tiles = _ceil_div(k, R) * _ceil_div(n, C)
        per_tile = R + (m + R + C - 2)
    else:
        tiles = _ceil_div(m, R) * _ceil_div(k, C)
        per_tile = C + (n + R + C - 2)
    return tiles * per_tile


def _traffic_bytes(m, k, n, hw: TPUSpec) -> tuple[int, int]:
    """(sram_reads, sram_writes) in bytes for one op under hw.dataflow."""

    R, C = hw.rows, hw.cols
    if hw.dataflow is Dataflow.OS:
        reads = m * k * _ceil_div(n, C) + k * n * _ceil_div(m, R)
        writes = m * n
    elif hw.dataflow is Dataflow.WS:
        kt = _ceil_div(k, R)
        # stationary weights load once; partial sums spill/reload per K-tile
        reads = k * n + m * k * _ceil_div(n, C) + m * n * (kt - 1)
        writes = m * n * kt
    else:
        kt = _ceil_div(k, C)
        reads = m * k + k * n * _ceil_div(m, R) + m * n * (kt - 1)
        writes = m * n * kt
    return reads, writes


def _stall_cycles(compute: int, reads: int, writes: int, hw: TPUSpec) -> int:
    traffic_time = math.ceil((reads + writes) / hw.sram_bw_bytes_per_cycle)
    return max(0, traffic_time - compute)


def analytic_cycles(m: int, k: int, n: int, hw: TPUSpec) -> TileCost:
    """Closed-form cost of one M x K x N GEMM on the R x C array."""

    _check_dims(m, k, n)
    compute = _compute_cycles(m, k, n, hw)
    reads, writes = _traffic_bytes(m, k, n, hw)
    return TileCost(
        compute_cycles=compute,
        stall_cycles=_stall_cycles(compute, reads, writes, hw),
        sram_reads_bytes=reads,
        sram_writes_bytes=writes,
        dram_reads_bytes=0,
        macs=m * k * n,
    )


def tile_energy_pj(cost: TileCost, hw: TPUSpec) -> float:
    """MAC + SRAM + DRAM energy of a TileCost, in picojoules."""

    return (
        hw.mac_energy_pj * cost.macs
        + hw.sram_energy_pj_per_byte * (cost.sram_reads_bytes + cost.sram_writes_bytes)
        + hw.dram_energy_pj_per_byte * cost.dram_reads_bytes
    )


# ---------------------------------------------------------------------------
# cycle-accurate grid oracle
# ---------------------------------------------------------------------------
#
# Each tile is stepped as a discrete-time R x C register grid with skewed
# operand injection. Tiles run back to back with full fill and drain (no
# cross-tile pipelining), matching the analytic model's per-tile charge.
# The sim also checks the numbers: it runs real operand values through the
# grid and asserts the outputs and the executed MAC count.


def _os_tile(a_blk: np.ndarray, b_blk: np.ndarray):
    """One output-stationary tile. A-rows enter from the west skewed by row,
    B-columns from the north skewed by column; products accumulate in place.
    Returns (cycle of the last MAC, MACs executed, accumulator contents)."""

    ru, kk = a_blk.shape
    cu = b_blk.shape[1]
    a_reg = np.zeros((ru, cu), dtype=np.int64)
    b_reg = np.zeros((ru, cu), dtype=np.int64)
    a_ok = np.zeros((ru, cu), dtype=bool)
    b_ok = np.zeros((ru, cu), dtype=bool)
    acc = np.zeros((ru, cu), dtype=np.int64)
    rows = np.arange(ru)
    cols = np.arange(cu)
    macs = 0
    last = 0
    # run two cycles past the theoretical drain to prove quiescence
    for t in range(1, kk + ru + cu + 1):
        a_reg[:, 1:] = a_reg[:, :-1]
        a_ok[:, 1:] = a_ok[:, :-1]
        ks = t - 1 - rows
        feed = (ks >= 0) & (ks < kk)
        a_reg[feed, 0] = a_blk[rows[feed], ks[feed]]
        a_ok[:, 0] = feed

        b_reg[1:, :] = b_reg[:-1, :]
        b_ok[1:, :] = b_ok[:-1, :]
        ks = t - 1 - cols
        feed = (ks >= 0) & (ks < kk)
        b_reg[0, feed] = b_blk[ks[feed], cols[feed]]
        b_ok[0, :] = feed

        fire = a_ok & b_ok
        hits = int(fire.sum())
        if hits:
            acc[fire] += a_reg[fire] * b_reg[fire]
            macs += hits
            last = t
    return last, macs, acc


def _ws_tile(x_blk: np.ndarray, w_blk: np.ndarray, R: int, C: int):
    """One weight-stationary tile. Weights sink from the north edge (one
    cycle per used row), activations stream west to east skewed by row, and
    partial sums ripple south through the full column depth before exiting.
    Returns (cycles including preload, MACs executed, M x cols_used block)."""

    mm, ku = x_blk.shape
    cu = w_blk.shape[1]
    w = np.zeros((R, C), dtype=np.int64)
    w[:ku, :cu] = w_blk
    w_ok = np.zeros((R, C), dtype=bool)
    w_ok[:ku, :cu] = True
    x_reg = np.zeros((R, C), dtype=np.int64)
    x_ok = np.zeros((R, C), dtype=bool)
    p_reg = np.zeros((R, C), dtype=np.int64)
    p_ok = np.zeros((R, C), dtype=bool)
    out = np.zeros((mm, cu), dtype=np.int64)
    got = np.zeros((mm, cu), dtype=bool)
    rows = np.arange(R)
    macs = 0
    last = 0
    for t in range(1, mm + R + cu + 2):
        x_reg[:, 1:] = x_reg[:, :-1]
        x_ok[:, 1:] = x_ok[:, :-1]
        ms = t - 1 - rows
        feed = (ms >= 0) & (ms < mm) & (rows < ku)
        x_reg[feed, 0] = x_blk[ms[feed], rows[feed]]
        x_ok[:, 0] = feed

        live = x_ok & w_ok
        contrib = np.where(live, x_reg * w, 0)
        macs += int(live.sum())
        new_p = np.empty_like(p_reg)
        new_ok = np.empty_like(p_ok)
        new_p[0, :] = contrib[0, :]
        new_ok[0, :] = x_ok[0, :]
        new_p[1:, :] = p_reg[:-1, :] + contrib[1:, :]
        new_ok[1:, :] = p_ok[:-1, :]
        p_reg, p_ok = new_p, new_ok

        exiting = p_ok[R - 1, :cu]
        if exiting.any():
            cs = np.nonzero(exiting)[0]
            out[t - R - cs, cs] = p_reg[R - 1, cs]
            got[t - R - cs, cs] = True
            last = t
    assert got.all(), "weight-stationary tile failed to drain every output"
    return ku + last, macs, out


def _is_tile(a_blk: np.ndarray, b_blk: np.ndarray, R: int, C: int):
    """One input-stationary tile: the WS pipeline transposed. The stationary
    A-block sinks from the west, weights stream north to south, and partial
    sums ripple east through the full row width."""

    cycles, macs, out_t = _ws_tile(
        np.ascontiguousarray(b_blk.T), np.ascontiguousarray(a_blk.T), C, R
    )
    return cycles, macs, out_t.T


def cycle_accurate_sim(m: int, k: int, n: int, hw: TPUSpec) -> TileCost:
    """Grid-oracle counterpart of analytic_cycles.

    Steps every tile of the op on the R x C PE grid with synthetic operand
    values, returning the exact cycle count at which the last output element
    of each tile is produced (summed over tiles). Asserts internally that
    the grid executed exactly M*K*N MACs and reproduced the reference
    product.
    """

    _check_dims(m, k, n)
    total_macs = m * k * n
    if total_macs > SIM_MAC_GUARD:
        raise ValueError(
            f"refusing to simulate {total_macs} MACs (guard is {SIM_MAC_GUARD}); "
            "use analytic_cycles for shapes this large"
        )
    R, C = hw.rows, hw.cols
    rng = np.random.default_rng(_SIM_SEED)
    a = rng.integers(-128, 128, size=(m, k), dtype=np.int64)
    b = rng.integers(-128, 128, size=(k, n), dtype=np.int64)
    out = np.zeros((m, n), dtype=np.int64)
    cycles = 0
    macs = 0
    if hw.dataflow is Dataflow.OS:
        for i0 in range(0, m, R):
            for j0 in range(0, n, C):
                cyc, mc, acc = _os_tile(a[i0 : i0 + R, :], b[:, j0 : j0 + C])
                out[i0 : i0 + R, j0 : j0 + C] = acc
                cycles += cyc
                macs += mc
    elif hw.dataflow is Dataflow.WS:
        for k0 in range(0, k, R):
            x_blk = a[:, k0 : k0 + R]
            for j0 in range(0, n, C):
                cyc, mc, part = _ws_tile(x_blk, b[k0 : k0 + R, j0 : j0 + C], R, C)
                # partial sums across K-tiles accumulate digitally
                out[:, j0 : j0 + C] += part
                cycles += cyc
                macs += mc
    else:
        for i0 in range(0, m, R):
            a_rows = a[i0 : i0 + R, :]
            for k0 in range(0, k, C):
                cyc, mc, part = _is_tile(a_rows[:, k0 : k0 + C], b[k0 : k0 + C, :], R, C)
                out[i0 : i0 + R, :] += part
                cycles += cyc
                macs += mc
    assert macs == total_macs, f"grid executed {macs} MACs, expected {total_macs}"
    assert np.array_equal(out, a @ b), "grid output does not match the reference product"
    reads, writes = _traffic_bytes(m, k, n, hw)
    return TileCost(
        compute_cycles=cycles,
        stall_cycles=_stall_cycles(cycles, reads, writes, hw),
        sram_reads_bytes=reads,
        sram_writes_bytes=writes,
        dram_reads_bytes=0,
        macs=macs,
    )


# ---------------------------------------------------------------------------
# attention block
# ---------------------------------------------------------------------------


def attention_block_cost(ops, hw: TPUSpec) -> TileCost:
    """Cost of one layer's attention MVMs plus Softmax on the array.

    Heads execute sequentially on the single array, so per-head costs sum.
    The K/V operands change every step and are re-read from the weight
    memory each token (no residency across steps); that is already how the
    per-op traffic accounting charges them. Softmax adds
    nfu_cycles_per_element * element_count cycles on the nonlinear unit
    (default 0).
    """

    total = TileCost()
    nfu_elements = 0
    for op in ops:
        if isinstance(op, MatMulOp):
            if op.precision is not Precision.W8A8:
                raise ValueError(f"{op.role.value} is not an attention-path op")
            total = total + analytic_cycles(op.m, op.k, op.n, hw)
        elif isinstance(op, NonlinearOp):
            if op.kind is not NonlinearKind.SOFTMAX:
                raise ValueError(f"{op.kind.value} does not belong to the attention block")
            nfu_elements += op.element_count
        else:
            raise TypeError(f"unexpected op {op!r}")
    total.compute_cycles += math.ceil(hw.nfu_cycles_per_element * nfu_elements)
    return total
