"""Config ingestion: strict YAML schemas, tagged defaults, and the model zoo.

Model files hold a single ``model`` section; hardware files hold any subset
of ``tpu``, ``pim``, and ``system`` (an empty file means all defaults).
Unknown keys anywhere are hard errors. Every field left to its default is
logged with a provenance tag: ``design`` marks a constant stated by the
modeled design, ``placeholder`` marks an uncalibrated stand-in that should
be overridden with measured values before trusting absolute numbers.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .pim import PIMSpec
from .systolic import Dataflow, TPUSpec
from .workload import ModelSpec

log = logging.getLogger(__name__)

# context lengths swept by default
DEFAULT_CTX_SWEEP = (128, 256, 512, 1024, 2048, 4096)


class ConfigError(ValueError):
    pass


@dataclass
class SystemSpec:
    battery_joules: float = 18000.0
    tokens_per_word: float = 1.5
    lpddr_bw_bytes_per_ns: float = 12.8
    lpddr_energy_pj_per_byte: float = 20.0

    def __post_init__(self):
        for fname in ("battery_joules", "tokens_per_word", "lpddr_bw_bytes_per_ns"):
            if getattr(self, fname) <= 0:
                raise ConfigError(f"{fname} must be positive")
        if self.lpddr_energy_pj_per_byte < 0:
            raise ConfigError("lpddr_energy_pj_per_byte must be nonnegative")


@dataclass
class HardwareSpec:
    tpu: TPUSpec = field(default_factory=TPUSpec)
    pim: PIMSpec = field(default_factory=PIMSpec)
    system: SystemSpec = field(default_factory=SystemSpec)


# Provenance of every defaultable hardware field. "design" values are stated
# by the modeled design; "placeholder" values are uncalibrated stand-ins.
PROVENANCE = {
    "tpu.rows": "design",
    "tpu.cols": "design",
    "tpu.freq_hz": "design",
    "tpu.dataflow": "design",
    "tpu.sram_bytes": "design total, placeholder split",
    "tpu.sram_bw_bytes_per_cycle": "placeholder",
    "tpu.dram_bw_bytes_per_cycle": "placeholder",
    "tpu.mac_energy_pj": "placeholder",
    "tpu.sram_energy_pj_per_byte": "placeholder",
    "tpu.dram_energy_pj_per_byte": "placeholder",
    "tpu.nfu_cycles_per_element": "placeholder",
    "pim.xbar_rows": "design",
    "pim.xbar_cols": "design",
    "pim.adc_bits": "design",
    "pim.act_bits": "design",
    "pim.adcs_per_xbar": "placeholder",
    "pim.t_dac_ns": "placeholder",
    "pim.t_xbar_ns": "placeholder",
    "pim.t_adc_ns": "placeholder",
    "pim.e_dac_pj": "placeholder",
    "pim.e_xbar_pj_per_row": "placeholder",
    "pim.e_adc_pj": "placeholder",
    "pim.pes_per_tile": "placeholder",
    "pim.tiles_per_bank": "placeholder",
    "pim.banks": "placeholder",
    "pim.noc_bw_bytes_per_ns": "placeholder",
    "pim.noc_energy_pj_per_byte": "placeholder",
    "pim.buffer_bw_bytes_per_ns": "placeholder",
    "pim.buffer_energy_pj_per_byte": "placeholder",
    "pim.peripheral_ns_per_element": "placeholder",
    "system.battery_joules": "design",
    "system.tokens_per_word": "design",
    "system.lpddr_bw_bytes_per_ns": "placeholder",
    "system.lpddr_energy_pj_per_byte": "placeholder",
}


def _load_yaml(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"{p}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be a mapping of sections")
    return data


def _build_section(cls, section: str, data: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in section '{section}': {', '.join(unknown)}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            value = data[f.name]
            if f.name == "dataflow":
                try:
                    value = Dataflow(value)
                except ValueError:
                    raise ConfigError(
                        f"{section}.dataflow must be one of "
                        f"{[d.value for d in Dataflow]}, got {value!r}"
                    ) from None
            kwargs[f.name] = value
        else:
            tag = PROVENANCE.get(f"{section}.{f.name}", "placeholder")
            log.info("default %s.%s [%s]", section, f.name, tag)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"section '{section}': {e}") from e


def load_model(path_or_name) -> ModelSpec:
    """Load a model config from a path or a bundled zoo name."""

    data = _load_yaml(resolve_model_path(path_or_name))
    unknown = sorted(set(data) - {"model"})
    if unknown:
        raise ConfigError(f"unknown section(s) in model config: {', '.join(unknown)}")
    if "model" not in data:
        raise ConfigError("model config needs a 'model' section")
    section = data["model"]
    if not isinstance(section, dict):
        raise ConfigError("section 'model' must be a mapping")
    required = {"name", "d", "h", "d_ff", "n_layers"}
    missing = sorted(required - set(section))
    if missing:
        raise ConfigError(f"model section missing key(s): {', '.join(missing)}")
    unknown = sorted(set(section) - required)
    if unknown:
        raise ConfigError(f"unknown key(s) in section 'model': {', '.join(unknown)}")
    try:
        return ModelSpec(**section)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"section 'model': {e}") from e


def load_hardware(path=None) -> HardwareSpec:
    """Load a hardware config; None or an empty file yields all defaults."""

    data = _load_yaml(path) if path is not None else {}
    unknown = sorted(set(data) - {"tpu", "pim", "system"})
    if unknown:
        raise ConfigError(f"unknown section(s) in hardware config: {', '.join(unknown)}")
    return HardwareSpec(
        tpu=_build_section(TPUSpec, "tpu", data.get("tpu", {})),
        pim=_build_section(PIMSpec, "pim", data.get("pim", {})),
        system=_build_section(SystemSpec, "system", data.get("system", {})),
    )


def parse_configs(model_path, hw_path=None) -> tuple[ModelSpec, HardwareSpec]:
    return load_model(model_path), load_hardware(hw_path)


# ---------------------------------------------------------------------------
# bundled model zoo
# ---------------------------------------------------------------------------


def _zoo_dir():
    return resources.files("hybridsim.zoo")


def zoo_names() -> list:
    return sorted(p.name[: -len(".yaml")] for p in _zoo_dir().iterdir() if p.name.endswith(".yaml"))


def resolve_model_path(path_or_name):
    p = Path(path_or_name)
    if p.is_file():
        return p
    candidate = _zoo_dir() / f"{path_or_name}.yaml"
    if candidate.is_file():
        return candidate
    raise ConfigError(
        f"no such model config: {path_or_name!r} "
        f"(not a file, and the zoo has: {', '.join(zoo_names())})"
    )


def load_zoo() -> list:
    """All bundled models, in ascending parameter-count order."""

    models = [load_model(name) for name in zoo_names()]
    models.sort(key=lambda m: m.n_layers * (4 * m.d * m.d + 2 * m.d * m.d_ff))
    return models
