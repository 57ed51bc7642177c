"""Per-token operation graph of a decoder-only LLM in the decode phase.

One autoregressive step processes a single new token against a cached
key/value history of length ``context_len`` (the current token counts as
part of it), so every MatMul degenerates to a matrix-vector product.
Projection and feed-forward weights are binary/ternary with 8-bit
activations (W1A8); the two attention MatMuls per head touch the 8-bit KV
cache and stay at full W8A8 precision.

Per decoder layer the graph holds, in execution order: the Q/K/V input
projections, one attention-score MVM per head, a Softmax, one context MVM
per head, the output projection, LayerNorm, the two feed-forward MatMuls
around a GELU, and a second LayerNorm. Biases and residual additions carry
no MACs and are not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Precision(Enum):
    W1A8 = "W1A8"
    W8A8 = "W8A8"


class Role(Enum):
    PROJ_Q = "ProjQ"
    PROJ_K = "ProjK"
    PROJ_V = "ProjV"
    PROJ_X = "ProjX"
    FF_INTERMEDIATE = "FFIntermediate"
    FF_OUTPUT = "FFOutput"
    ATTN_SCORE = "AttnScore"
    ATTN_CONTEXT = "AttnContext"


# Projection and feed-forward weights are quantized to 1 bit (ternary);
# attention operates on the freshly produced 8-bit KV cache.
W1A8_ROLES = frozenset(
    {
        Role.PROJ_Q,
        Role.PROJ_K,
        Role.PROJ_V,
        Role.PROJ_X,
        Role.FF_INTERMEDIATE,
        Role.FF_OUTPUT,
    }
)


class NonlinearKind(Enum):
    SOFTMAX = "Softmax"
    GELU = "GELU"
    LAYER_NORM = "LayerNorm"


class Placement(Enum):
    TPU_NFU = "TPU_NFU"
    PIM_POST = "PIM_Post"


# Softmax runs on the systolic side's nonlinear functional unit; GELU and
# LayerNorm run in the crossbar banks' digital postprocessing units.
_KIND_PLACEMENT = {
    NonlinearKind.SOFTMAX: Placement.TPU_NFU,
    NonlinearKind.GELU: Placement.PIM_POST,
    NonlinearKind.LAYER_NORM: Placement.PIM_POST,
}


@dataclass(frozen=True)
class ModelSpec:
    """Decoder hyperparameters defining one token step's workload."""

    name: str
    d: int
    h: int
    d_ff: int
    n_layers: int
    context_len: int = 128

    def __post_init__(self):
        for fname in ("d", "h", "d_ff", "n_layers", "context_len"):
            v = getattr(self, fname)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{fname} must be a positive integer, got {v!r}")
        if self.d % self.h != 0:
            raise ValueError(f"d not divisible by h ({self.d} % {self.h} != 0)")

    @property
    def head_dim(self) -> int:
        return self.d // self.h


@dataclass(frozen=True)
class MatMulOp:
    """One (m x k) * (k x 1) MVM; the left operand holds the stationary data."""

    role: Role
    m: int
    k: int
    n: int
    precision: Precision
    layer_index: int
    head_index: int | None = None

    def __post_init__(self):
        if min(self.m, self.k, self.n) < 1:
            raise ValueError("MatMul dimensions must be positive")
        if self.n != 1:
            # decode phase: one token per step, every MatMul is an MVM
            raise ValueError(f"decode-phase op must have n == 1, got n={self.n}")
        expect = Precision.W1A8 if self.role in W1A8_ROLES else Precision.W8A8
        if self.precision is not expect:
            raise ValueError(f"{self.role.value} must be {expect.value}")

    def macs(self) -> int:
        return self.m * self.k * self.n


@dataclass(frozen=True)
class NonlinearOp:
    kind: NonlinearKind
    element_count: int
    layer_index: int
    placement: Placement

    def __post_init__(self):
        if self.element_count < 1:
            raise ValueError("element_count must be positive")
        if self.placement is not _KIND_PLACEMENT[self.kind]:
            raise ValueError(f"{self.kind.value} must be placed on {_KIND_PLACEMENT[self.kind].value}")


@dataclass(frozen=True)
class OpGraph:
    model: ModelSpec
    ops: tuple

    def matmuls(self):
        return [op for op in self.ops if isinstance(op, MatMulOp)]

    def layer_ops(self, layer_index: int):
        return [op for op in self.ops if op.layer_index == layer_index]


def build_op_graph(model: ModelSpec) -> OpGraph:
    """Enumerate every op of one decode step in execution order."""

    d, l, dh = model.d, model.context_len, model.head_dim
    ops = []
    for li in range(model.n_layers):
        def proj(role):
            return MatMulOp(role, d, d, 1, Precision.W1A8, li)

        ops += [proj(Role.PROJ_Q), proj(Role.PROJ_K), proj(Role.PROJ_V)]
        for hi in range(model.h):
            ops.append(MatMulOp(Role.ATTN_SCORE, l, dh, 1, Precision.W8A8, li, head_index=hi))
        # one Softmax covers all heads: l entries per head
        ops.append(NonlinearOp(NonlinearKind.SOFTMAX, l * model.h, li, Placement.TPU_NFU))
        for hi in range(model.h):
            ops.append(MatMulOp(Role.ATTN_CONTEXT, dh, l, 1, Precision.W8A8, li, head_index=hi))
        ops.append(proj(Role.PROJ_X))
        ops.append(NonlinearOp(NonlinearKind.LAYER_NORM, d, li, Placement.PIM_POST))
        ops.append(MatMulOp(Role.FF_INTERMEDIATE, model.d_ff, d, 1, Precision.W1A8, li))
        ops.append(NonlinearOp(NonlinearKind.GELU, model.d_ff, li, Placement.PIM_POST))
        ops.append(MatMulOp(Role.FF_OUTPUT, d, model.d_ff, 1, Precision.W1A8, li))
        ops.append(NonlinearOp(NonlinearKind.LAYER_NORM, d, li, Placement.PIM_POST))
    return OpGraph(model=model, ops=tuple(ops))


def mac_counts(graph: OpGraph) -> tuple[int, int]:
    """Exact (low_precision_macs, high_precision_macs) for one token step.

    Closed forms: low = N * (4*d^2 + 2*d*d_ff), high = N * 2*l*d.
    """

    low = 0
    high = 0
    for op in graph.matmuls():
        if op.precision is Precision.W1A8:
            low += op.macs()
        else:
            high += op.macs()
    return low, high


def low_precision_fraction(model: ModelSpec) -> float:
    """Share of MACs eligible for the 1-bit crossbar path; independent of N."""

    low = 4 * model.d * model.d + 2 * model.d * model.d_ff
    high = 2 * model.context_len * model.d
    return low / (low + high)
