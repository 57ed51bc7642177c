"""Command-line front end.

Verbs: simulate (one run, human readable), sweep (batch to CSV/JSON),
dataflows (array mapping comparison), breakdown (latency shares), and
fractions (low-precision MAC share per context length).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import (
    DEFAULT_CTX_SWEEP,
    ConfigError,
    load_hardware,
    load_model,
    load_zoo,
    parse_configs,
)
from .cost import CATEGORIES
from .engine import ArchMode, simulate_token
from .metrics import build_report
from .sweep import SCHEMA_VERSION, compare_dataflows, emit, run_sweep
from .workload import build_op_graph, low_precision_fraction

# human-readable labels for the machine-level category keys
_LABELS = {
    "systolic": "Systolic",
    "xbar": "Xbar",
    "dac": "DAC",
    "adc": "ADC",
    "peripheral": "Peripheral",
    "communication": "Communication",
    "buffer": "Buffer",
}

_PLACEHOLDER_NOTE = (
    "note: defaults not stated by the modeled design are uncalibrated "
    "placeholders; pass --hw with measured values before trusting absolute numbers"
)


def _g(value: float) -> str:
    return format(value, ".6g")


def _models_arg(arg: str | None) -> list:
    """Comma-separated names/paths, or the whole zoo when absent."""

    if arg is None:
        return load_zoo()
    names = [tok.strip() for tok in arg.split(",") if tok.strip()]
    if not names:
        raise ConfigError("empty --model list")
    return [load_model(name) for name in names]


def _ctx_arg(arg: str | None) -> list:
    if arg is None:
        return list(DEFAULT_CTX_SWEEP)
    try:
        ctx = [int(tok) for tok in arg.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--ctx must be a comma-separated list of integers, got {arg!r}") from None
    if not ctx:
        raise ConfigError("empty --ctx list")
    return ctx


def _modes_arg(arg: str) -> list:
    modes = []
    for tok in arg.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            modes.append(ArchMode(tok))
        except ValueError:
            raise ConfigError(
                f"unknown mode {tok!r} (expected one of: "
                f"{', '.join(m.value for m in ArchMode)})"
            ) from None
    if not modes:
        raise ConfigError("empty --mode list")
    return modes


def _single_report(args):
    model, hw = parse_configs(args.model, args.hw)
    model = replace(model, context_len=args.ctx)
    mode = ArchMode(args.mode)
    baseline = simulate_token(model, hw, ArchMode.TPU_ONLY)
    cost = baseline if mode is ArchMode.TPU_ONLY else simulate_token(model, hw, mode)
    report = build_report(
        model, hw, mode, build_op_graph(model), cost, baseline.total_latency_s
    )
    return model, report


def _cmd_simulate(args) -> int:
    model, rep = _single_report(args)
    print(
        f"{rep.model}  d={model.d} h={model.h} d_ff={model.d_ff} "
        f"layers={model.n_layers}  context={rep.context_len}  mode={rep.mode}"
    )
    print(f"  tokens/s          {_g(rep.tokens_per_s)}")
    print(f"  tokens/joule      {_g(rep.tokens_per_joule)}")
    print(f"  words/battery     {_g(rep.words_per_battery)}")
    print(f"  gops              {_g(rep.gops)}")
    print(f"  gops/watt         {_g(rep.gops_per_watt)}")
    print(f"  speedup vs tpu-only  {_g(rep.speedup_vs_tpu)}")
    print(f"  total latency (s) {_g(rep.total_latency_s)}")
    print(f"  total energy (J)  {_g(rep.total_energy_j)}")
    print("latency breakdown (%):")
    for c in CATEGORIES:
        print(f"  {_LABELS[c]:<14}{_g(rep.breakdown_pct[c])}")
    print(_PLACEHOLDER_NOTE)
    return 0


def _cmd_sweep(args) -> int:
    models = _models_arg(args.model)
    hw = load_hardware(args.hw)
    records = run_sweep(models, hw, _ctx_arg(args.ctx), _modes_arg(args.mode))
    emit(records, fmt=args.format, path=args.out)
    if args.out is not None:
        print(f"wrote {len(records)} records (schema v{SCHEMA_VERSION}) to {args.out}")
    return 0


def _cmd_dataflows(args) -> int:
    model, hw = parse_configs(args.model, args.hw)
    rows = compare_dataflows(model, hw, args.ctx)
    lowest = min(rows, key=lambda r: r["total_cycles"])["dataflow"]
    print(f"{model.name}  context={args.ctx}  array cycles per token, all MatMuls on the array")
    print(f"{'dataflow':<10}{'compute_cycles':>16}{'stall_cycles':>14}{'total_cycles':>14}")
    for row in rows:
        print(
            f"{row['dataflow']:<10}{row['compute_cycles']:>16}"
            f"{row['stall_cycles']:>14}{row['total_cycles']:>14}"
        )
    print(f"note: the modeled design uses the output-stationary mapping; "
          f"lowest total here: {lowest}")
    print(_PLACEHOLDER_NOTE)
    return 0


def _cmd_breakdown(args) -> int:
    _, rep = _single_report(args)
    print(f"{rep.model}  context={rep.context_len}  mode={rep.mode}")
    print(f"{'category':<15}{'latency_s':>12}{'energy_j':>12}{'latency_pct':>12}")
    for c in CATEGORIES:
        print(
            f"{_LABELS[c]:<15}{_g(rep.latency_s[c]):>12}"
            f"{_g(rep.energy_j[c]):>12}{_g(rep.breakdown_pct[c]):>12}"
        )
    print(
        f"{'total':<15}{_g(rep.total_latency_s):>12}{_g(rep.total_energy_j):>12}"
        f"{_g(sum(rep.breakdown_pct.values())):>12}"
    )
    print(_PLACEHOLDER_NOTE)
    return 0


def _cmd_fractions(args) -> int:
    models = _models_arg(args.model)
    ctx = _ctx_arg(args.ctx)
    print("fraction of per-token MACs in the 1-bit projection/FF path")
    header = f"{'model':<12}" + "".join(f"{'l=' + str(l):>12}" for l in ctx)
    print(header)
    for model in models:
        cells = "".join(
            f"{_g(low_precision_fraction(replace(model, context_len=l))):>12}"
            for l in ctx
        )
        print(f"{model.name:<12}{cells}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridsim",
        description=(
            "Performance and energy model of a hybrid accelerator that runs "
            "1-bit projection/FF layers on analog crossbars and 8-bit "
            "attention on a digital systolic array."
        ),
    )
    parser.add_argument("--verbose", action="store_true", help="log defaulted config fields and other detail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one model at one context length, human readable")
    p.add_argument("--model", required=True, help="zoo name or path to a model YAML")
    p.add_argument("--hw", default=None, help="path to a hardware YAML (defaults otherwise)")
    p.add_argument("--ctx", type=int, default=128, help="decode context length (KV entries)")
    p.add_argument("--mode", default="hybrid", choices=[m.value for m in ArchMode])
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="batch runs over models x context lengths x modes")
    p.add_argument("--model", default=None, help="comma-separated zoo names/paths (default: whole zoo)")
    p.add_argument("--hw", default=None)
    p.add_argument("--ctx", default=None, help="comma-separated context lengths (default: 128..4096 doublings)")
    p.add_argument("--mode", default="hybrid,tpu-only", help="comma-separated modes")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("dataflows", help="compare os/ws/is array mappings for one model")
    p.add_argument("--model", required=True)
    p.add_argument("--hw", default=None)
    p.add_argument("--ctx", type=int, default=128)
    p.set_defaults(func=_cmd_dataflows)

    p = sub.add_parser("breakdown", help="per-category latency/energy for one run")
    p.add_argument("--model", required=True)
    p.add_argument("--hw", default=None)
    p.add_argument("--ctx", type=int, default=128)
    p.add_argument("--mode", default="hybrid", choices=[m.value for m in ArchMode])
    p.set_defaults(func=_cmd_breakdown)

    p = sub.add_parser("fractions", help="low-precision MAC fraction per context length")
    p.add_argument("--model", default=None, help="comma-separated zoo names/paths (default: whole zoo)")
    p.add_argument("--ctx", default=None, help="comma-separated context lengths")
    p.set_defaults(func=_cmd_fractions)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    # force so repeat in-process calls (tests, notebooks) honor the verbosity
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
