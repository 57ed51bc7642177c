"""Performance/energy model of a hybrid crossbar + systolic-array LLM accelerator."""

from .config import (
    DEFAULT_CTX_SWEEP,
    ConfigError,
    HardwareSpec,
    SystemSpec,
    load_hardware,
    load_model,
    load_zoo,
    parse_configs,
    zoo_names,
)
from .cost import CATEGORIES, CostResult
from .engine import ArchMode, breakdown_percentages, simulate_token, speedup
from .metrics import (
    SimReport,
    build_report,
    gops_and_gops_per_watt,
    tokens_per_joule,
    tokens_per_second,
    words_per_battery,
)
from .pim import (
    AdcMode,
    CrossbarTilePlan,
    PIMSpec,
    crossbar_capacity,
    crossbars_required,
    functional_mvm,
    pim_layer_cost,
    plan_mapping,
)
from .sweep import COLUMNS, RunRecord, compare_dataflows, emit, run_sweep
from .systolic import (
    Dataflow,
    TileCost,
    TPUSpec,
    analytic_cycles,
    attention_block_cost,
    cycle_accurate_sim,
    tile_energy_pj,
)
from .workload import (
    MatMulOp,
    ModelSpec,
    NonlinearKind,
    NonlinearOp,
    OpGraph,
    Placement,
    Precision,
    Role,
    build_op_graph,
    low_precision_fraction,
    mac_counts,
)

__version__ = "0.1.0"

__all__ = [
    "ArchMode",
    "AdcMode",
    "CATEGORIES",
    "COLUMNS",
    "ConfigError",
    "CostResult",
    "CrossbarTilePlan",
    "DEFAULT_CTX_SWEEP",
    "Dataflow",
    "HardwareSpec",
    "MatMulOp",
    "ModelSpec",
    "NonlinearKind",
    "NonlinearOp",
    "OpGraph",
    "PIMSpec",
    "Placement",
    "Precision",
    "Role",
    "RunRecord",
    "SimReport",
    "SystemSpec",
    "TPUSpec",
    "TileCost",
    "analytic_cycles",
    "attention_block_cost",
    "breakdown_percentages",
    "build_op_graph",
    "build_report",
    "compare_dataflows",
    "crossbar_capacity",
    "crossbars_required",
    "cycle_accurate_sim",
    "emit",
    "functional_mvm",
    "gops_and_gops_per_watt",
    "load_hardware",
    "load_model",
    "load_zoo",
    "low_precision_fraction",
    "mac_counts",
    "parse_configs",
    "pim_layer_cost",
    "plan_mapping",
    "run_sweep",
    "simulate_token",
    "speedup",
    "tile_energy_pj",
    "tokens_per_joule",
    "tokens_per_second",
    "words_per_battery",
    "zoo_names",
]
