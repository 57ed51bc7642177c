"""Per-token-step cost accounting shared by the crossbar and engine layers."""

from __future__ import annotations

from dataclasses import dataclass, field

# Breakdown categories for one token step, in canonical report order.
CATEGORIES = (
    "systolic",
    "xbar",
    "dac",
    "adc",
    "peripheral",
    "communication",
    "buffer",
)


def _zero_categories() -> dict:
    return {c: 0.0 for c in CATEGORIES}


@dataclass
class CostResult:
    """Latency (seconds) and energy (joules) per category for one token step.

    Totals are derived as the category sums, never stored, so the additivity
    invariant (total == sum of categories) holds by construction.
    """

    latency_s: dict = field(default_factory=_zero_categories)
    energy_j: dict = field(default_factory=_zero_categories)

    @property
    def total_latency_s(self) -> float:
        return sum(self.latency_s[c] for c in CATEGORIES)

    @property
    def total_energy_j(self) -> float:
        return sum(self.energy_j[c] for c in CATEGORIES)

    def add(self, category: str, latency_s: float = 0.0, energy_j: float = 0.0) -> None:
        if category not in CATEGORIES:
            raise KeyError(f"unknown cost category {category!r}")
        if latency_s < 0.0 or energy_j < 0.0:
            raise ValueError("cost contributions must be nonnegative")
        self.latency_s[category] += latency_s
        self.energy_j[category] += energy_j

    def merge(self, other: "CostResult") -> None:
        for c in CATEGORIES:
            self.latency_s[c] += other.latency_s[c]
            self.energy_j[c] += other.energy_j[c]

    def scaled(self, factor: float) -> "CostResult":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return CostResult(
            latency_s={c: self.latency_s[c] * factor for c in CATEGORIES},
            energy_j={c: self.energy_j[c] * factor for c in CATEGORIES},
        )
