"""Batch sweeps over (model, context length, mode) and record serialization.

Records carry a fixed, versioned column set so downstream tooling can rely
on the layout. Floats are written with six significant digits in both CSV
and JSON; the two formats always carry identical values for the same sweep.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, replace

from .cost import CATEGORIES
from .engine import ArchMode, simulate_token, tpu_layer_tilecost
from .metrics import SimReport, build_report
from .systolic import Dataflow
from .workload import ModelSpec, build_op_graph

SCHEMA_VERSION = 1

# column order is part of the schema; bump SCHEMA_VERSION if it changes
COLUMNS = (
    (
        "model",
        "context_len",
        "mode",
        "dataflow",
        "tokens_per_s",
        "tokens_per_joule",
        "words_per_battery",
        "gops",
        "gops_per_watt",
        "speedup_vs_tpu",
        "total_latency_s",
        "total_energy_j",
    )
    + tuple(f"latency_{c}_s" for c in CATEGORIES)
    + tuple(f"energy_{c}_j" for c in CATEGORIES)
    + tuple(f"pct_{c}" for c in CATEGORIES)
)


@dataclass
class RunRecord:
    """One sweep row; flattens a SimReport into the COLUMNS layout."""

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

    @classmethod
    def from_report(cls, report: SimReport) -> "RunRecord":
        return cls(
            model=report.model,
            context_len=report.context_len,
            mode=report.mode,
            dataflow=report.dataflow,
            tokens_per_s=report.tokens_per_s,
            tokens_per_joule=report.tokens_per_joule,
            words_per_battery=report.words_per_battery,
            gops=report.gops,
            gops_per_watt=report.gops_per_watt,
            speedup_vs_tpu=report.speedup_vs_tpu,
            total_latency_s=report.total_latency_s,
            total_energy_j=report.total_energy_j,
            latency_s=dict(report.latency_s),
            energy_j=dict(report.energy_j),
            breakdown_pct=dict(report.breakdown_pct),
        )

    def as_row(self) -> list:
        row = [
            self.model,
            self.context_len,
            self.mode,
            self.dataflow,
            self.tokens_per_s,
            self.tokens_per_joule,
            self.words_per_battery,
            self.gops,
            self.gops_per_watt,
            self.speedup_vs_tpu,
            self.total_latency_s,
            self.total_energy_j,
        ]
        row += [self.latency_s[c] for c in CATEGORIES]
        row += [self.energy_j[c] for c in CATEGORIES]
        row += [self.breakdown_pct[c] for c in CATEGORIES]
        return row

    def as_dict(self) -> dict:
        return dict(zip(COLUMNS, self.as_row()))


def _default_modes() -> tuple:
    return (ArchMode.HYBRID, ArchMode.TPU_ONLY)


def _coerce_mode(mode) -> ArchMode:
    return mode if isinstance(mode, ArchMode) else ArchMode(mode)


def run_sweep(models, hw, ctx_lens, modes=None) -> list:
    """Simulate every (model, context length, mode) combination, in order.

    The TpuOnly run at each (model, l) is the speedup baseline for both of
    that point's records, so it is computed once and reused. Any failure
    aborts the sweep with an error naming the offending combination.
    """

    modes = _default_modes() if modes is None else tuple(_coerce_mode(m) for m in modes)
    baselines: dict = {}
    records = []
    for model in models:
        for l in ctx_lens:
            for mode in modes:
                try:
                    records.append(_run_one(model, l, mode, hw, baselines))
                except Exception as e:
                    raise RuntimeError(
                        f"sweep run failed (model={model.name}, l={l}, "
                        f"mode={mode.value}): {e}"
                    ) from e
    return records


def _run_one(model: ModelSpec, l: int, mode: ArchMode, hw, baselines: dict) -> RunRecord:
    m = replace(model, context_len=l)
    key = (m.name, l)
    if key not in baselines:
        baselines[key] = simulate_token(m, hw, ArchMode.TPU_ONLY)
    baseline = baselines[key]
    cost = baseline if mode is ArchMode.TPU_ONLY else simulate_token(m, hw, mode)
    report = build_report(m, hw, mode, build_op_graph(m), cost, baseline.total_latency_s)
    return RunRecord.from_report(report)


def compare_dataflows(model: ModelSpec, hw, l: int | None = None) -> list:
    """Whole-model array cycles under each dataflow, TpuOnly mapping.

    Stall cycles are reported separately from compute so bandwidth-bound
    configurations are visible at a glance.
    """

    if l is not None:
        model = replace(model, context_len=l)
    layer_ops = build_op_graph(model).layer_ops(0)
    rows = []
    for df in Dataflow:
        tc = tpu_layer_tilecost(layer_ops, replace(hw.tpu, dataflow=df))
        rows.append(
            {
                "dataflow": df.value,
                "compute_cycles": tc.compute_cycles * model.n_layers,
                "stall_cycles": tc.stall_cycles * model.n_layers,
                "total_cycles": tc.total_cycles * model.n_layers,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _json_value(value):
    # round through the same 6-significant-digit rendering as the CSV so
    # both formats carry identical values
    if isinstance(value, float):
        return float(format(value, ".6g"))
    return value


def _write(f, records, fmt: str) -> None:
    if fmt == "csv":
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow([_csv_cell(v) for v in rec.as_row()])
    elif fmt == "json":
        payload = [
            {col: _json_value(v) for col, v in zip(COLUMNS, rec.as_row())}
            for rec in records
        ]
        json.dump(payload, f, indent=2)
        f.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r} (expected 'csv' or 'json')")


def emit(records, fmt: str = "csv", path=None) -> None:
    """Write records as CSV (RFC 4180, LF line endings) or JSON."""

    if path is None:
        _write(sys.stdout, records, fmt)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        _write(f, records, fmt)
