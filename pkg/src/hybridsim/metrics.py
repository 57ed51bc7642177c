"""Figures of merit derived from a token-step CostResult."""

from __future__ import annotations

from dataclasses import dataclass

from .cost import CostResult
from .engine import breakdown_percentages
from .workload import OpGraph, mac_counts

# "operations" are counted as 2 per MAC (multiply plus add), the usual GOPS
# convention
OPS_PER_MAC = 2


def tokens_per_second(cost: CostResult) -> float:
    if cost.total_latency_s <= 0:
        raise ValueError("total latency must be positive")
    return 1.0 / cost.total_latency_s


def tokens_per_joule(cost: CostResult) -> float:
    if cost.total_energy_j <= 0:
        raise ValueError("total energy must be positive")
    return 1.0 / cost.total_energy_j


def words_per_battery(
    cost: CostResult,
    battery_joules: float = 18000.0,
    tokens_per_word: float = 1.5,
) -> float:
    """Words generated on one battery charge (default 5 Wh = 18000 J)."""

    return battery_joules * tokens_per_joule(cost) / tokens_per_word


def gops_and_gops_per_watt(graph: OpGraph, cost: CostResult) -> tuple[float, float]:
    low, high = mac_counts(graph)
    ops_per_token = OPS_PER_MAC * (low + high)
    gops = ops_per_token / (cost.total_latency_s * 1e9)
    gops_per_watt = ops_per_token / (cost.total_energy_j * 1e9)
    return gops, gops_per_watt


@dataclass
class SimReport:
    """Everything reported for one (model, context length, mode) run."""

    model: str
    context_len: int
    mode: str
    dataflow: str
    tokens_per_s: float
    tokens_per_joule: float
    words_per_battery: float
    gops: float
    gops_per_watt: float
    speedup_vs_tpu: float
    total_latency_s: float
    total_energy_j: float
    latency_s: dict
    energy_j: dict
    breakdown_pct: dict


def build_report(model, hw, mode, graph, cost, baseline_latency_s) -> SimReport:
    gops, gpw = gops_and_gops_per_watt(graph, cost)
    return SimReport(
        model=model.name,
        context_len=model.context_len,
        mode=mode.value,
        dataflow=hw.tpu.dataflow.value,
        tokens_per_s=tokens_per_second(cost),
        tokens_per_joule=tokens_per_joule(cost),
        words_per_battery=words_per_battery(
            cost, hw.system.battery_joules, hw.system.tokens_per_word
        ),
        gops=gops,
        gops_per_watt=gpw,
        speedup_vs_tpu=baseline_latency_s / cost.total_latency_s,
        total_latency_s=cost.total_latency_s,
        total_energy_j=cost.total_energy_j,
        latency_s=dict(cost.latency_s),
        energy_j=dict(cost.energy_j),
        breakdown_pct=breakdown_percentages(cost),
    )
