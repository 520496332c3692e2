"""Kernel profiles for dense-layer training and data-parallel batch sweeps.

A stack of fully connected layers costs, per layer and per training phase,
one GEMM of shape (batch x in_features x out_features): 2*m*n*k flops and
one streaming pass over each operand plus the result. The three training
phases (forward, activation gradient, weight gradient) are costed
identically; bias adds, activations, transposes and weight updates are
low-order and ignored. Under data parallelism each node runs the local
mini-batch and synchronizes the weight gradients with an all-reduce, which
supplies the network bytes of the profile.
"""

from __future__ import annotations

import enum
import operator
from dataclasses import dataclass, replace
from typing import Iterable

from .model import (
    BottleneckReport,
    DEFAULT_TOLERANCE,
    IntensityPoint,
    KernelProfile,
    MachineSpec,
    intensities,
    project,
)


class Phase(enum.Enum):
    FORWARD = "forward"
    ACTIVATION_GRAD = "activation_grad"
    WEIGHT_GRAD = "weight_grad"


ALL_PHASES = frozenset(Phase)

_VALID_DTYPE_BYTES = (1, 2, 4, 8)


def _count(name: str, value) -> int:
    try:
        value = operator.index(value)
    except TypeError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class LayerSpec:
    """One fully connected layer: weight matrix is in_features x out_features."""

    in_features: int
    out_features: int

    def __post_init__(self):
        object.__setattr__(self, "in_features", _count("in_features", self.in_features))
        object.__setattr__(self, "out_features", _count("out_features", self.out_features))


@dataclass(frozen=True)
class MlpSpec:
    """Layer stack, element width in bytes, and the enabled training phases."""

    layers: tuple[LayerSpec, ...]
    dtype_bytes: int = 4
    phases: frozenset[Phase] = ALL_PHASES

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("MlpSpec needs at least one layer")
        for i in range(len(layers) - 1):
            if layers[i].out_features != layers[i + 1].in_features:
                raise ValueError(
                    f"layer {i} out_features={layers[i].out_features} does not match "
                    f"layer {i + 1} in_features={layers[i + 1].in_features}"
                )
        if self.dtype_bytes not in _VALID_DTYPE_BYTES:
            raise ValueError(
                f"dtype_bytes must be one of {_VALID_DTYPE_BYTES}, got {self.dtype_bytes!r}"
            )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "phases", frozenset(self.phases))

    def weight_bytes(self) -> int:
        """Total parameter bytes across layers (weight matrices; biases are low-order)."""
        return self.dtype_bytes * sum(l.in_features * l.out_features for l in self.layers)


class AllReduceAlgorithm(enum.Enum):
    RING = "ring"
    IDEAL = "ideal"
    FACTOR = "factor"


@dataclass(frozen=True)
class AllReduceModel:
    """Per-node traffic model of the gradient synchronization collective."""

    algorithm: AllReduceAlgorithm
    nodes: int = 1
    factor: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", _count("nodes", self.nodes))
        if self.algorithm is AllReduceAlgorithm.FACTOR:
            if self.factor is None or self.factor < 0:
                raise ValueError("factor algorithm needs factor >= 0")
            object.__setattr__(self, "factor", float(self.factor))
        elif self.factor is not None:
            raise ValueError(f"{self.algorithm.value} all-reduce takes no factor")


def gemm_profile(m: int, n: int, k: int, dtype_bytes: int = 4) -> KernelProfile:
    """Dense m-by-k times k-by-n matrix product, operands streamed once.

    2*m*n*k flops; memory traffic reads A and B once and writes C once:
    dtype_bytes * (m*k + k*n + m*n). No network traffic.
    """
    m, n, k = _count("m", m), _count("n", n), _count("k", k)
    if dtype_bytes not in _VALID_DTYPE_BYTES:
        raise ValueError(f"dtype_bytes must be one of {_VALID_DTYPE_BYTES}, got {dtype_bytes!r}")
    return KernelProfile(
        name=f"gemm_{m}x{n}x{k}",
        flops=2 * m * n * k,
        mem_bytes=dtype_bytes * (m * k + k * n + m * n),
        net_bytes=0,
    )


def mlp_phase_profile(mlp: MlpSpec, batch: int, phase: Phase) -> KernelProfile:
    """Cost of one phase over the whole stack at the given batch size.

    Each layer contributes the (batch x in x out) GEMM; all three phases
    share that cost since they multiply the same operand shapes.
    """
    batch = _count("batch", batch)
    if phase not in mlp.phases:
        raise ValueError(f"phase {phase.value} is not enabled for this MLP")
    flops = 0
    mem_bytes = 0
    for layer in mlp.layers:
        g = gemm_profile(batch, layer.out_features, layer.in_features, mlp.dtype_bytes)
        flops += g.flops
        mem_bytes += g.mem_bytes
    return KernelProfile(
        name=f"mlp_{phase.value}_b{batch}",
        flops=flops,
        mem_bytes=mem_bytes,
        net_bytes=0,
    )


def allreduce_volume(param_bytes: float, model: AllReduceModel) -> float:
    """Per-node network bytes to all-reduce a buffer of param_bytes."""
    if param_bytes < 0:
        raise ValueError(f"param_bytes must be >= 0, got {param_bytes!r}")
    if model.algorithm is AllReduceAlgorithm.RING:
        return 2.0 * param_bytes * (model.nodes - 1) / model.nodes
    if model.algorithm is AllReduceAlgorithm.IDEAL:
        return 2.0 * param_bytes
    return model.factor * param_bytes


def training_step_profile(
    mlp: MlpSpec, local_batch: int, allreduce: AllReduceModel
) -> KernelProfile:
    """One synchronization interval: all three phases plus the gradient all-reduce.

    Flops and memory bytes sum the forward, activation-gradient and
    weight-gradient phases at ``local_batch``; network bytes are the
    all-reduce volume over the total weight bytes.
    """
    if mlp.phases != ALL_PHASES:
        raise ValueError("training needs all three phases enabled")
    local_batch = _count("local_batch", local_batch)
    flops = 0.0
    mem_bytes = 0.0
    for phase in (Phase.FORWARD, Phase.ACTIVATION_GRAD, Phase.WEIGHT_GRAD):
        p = mlp_phase_profile(mlp, local_batch, phase)
        flops += p.flops
        mem_bytes += p.mem_bytes
    return KernelProfile(
        name=f"mlp_train_b{local_batch}",
        flops=flops,
        mem_bytes=mem_bytes,
        net_bytes=allreduce_volume(mlp.weight_bytes(), allreduce),
    )


def data_parallel_profile(
    mlp: MlpSpec, global_batch: int, nodes: int, allreduce: AllReduceModel
) -> KernelProfile:
    """Per-node training profile with the global batch split across nodes."""
    global_batch = _count("global_batch", global_batch)
    nodes = _count("nodes", nodes)
    if global_batch % nodes != 0:
        raise ValueError(f"nodes={nodes} does not divide global_batch={global_batch}")
    model = replace(allreduce, nodes=nodes)
    profile = training_step_profile(mlp, global_batch // nodes, model)
    return replace(profile, name=f"mlp_dp_b{global_batch}_p{nodes}")


@dataclass(frozen=True)
class SweepRow:
    batch: int
    profile: KernelProfile
    intensities: IntensityPoint
    report: BottleneckReport
    allreduce_compute_ratio: float


@dataclass(frozen=True)
class SweepTable:
    """Batch-sweep results, rows ordered by increasing batch size."""

    rows: tuple[SweepRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        batches = [r.batch for r in rows]
        if batches != sorted(batches):
            raise ValueError("sweep rows must be ordered by batch")
        object.__setattr__(self, "rows", rows)

    def crossover_batch(self) -> float | None:
        """Batch size where all-reduce time equals compute time.

        Compute time is exactly linear in batch while the all-reduce volume
        is batch-independent, so batch * ratio is the same for every row;
        returns None when there is no network traffic.
        """
        first = self.rows[0]
        if first.report.bounds.t_network == 0:
            return None
        return first.batch * first.allreduce_compute_ratio


def batch_sweep(
    mlp: MlpSpec,
    batches: Iterable[int],
    machine: MachineSpec,
    allreduce: AllReduceModel,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SweepTable:
    """Evaluate the training profile over a list of per-node batch sizes.

    Each row carries the profile, its intensities, the bottleneck report on
    ``machine`` and the all-reduce/compute time ratio t_network/t_compute.
    """
    batch_list = sorted(_count("batch", b) for b in batches)
    if not batch_list:
        raise ValueError("batch list is empty")
    rows = []
    for batch in batch_list:
        profile = training_step_profile(mlp, batch, allreduce)
        report = project(machine, profile, tolerance)
        rows.append(
            SweepRow(
                batch=batch,
                profile=profile,
                intensities=intensities(profile),
                report=report,
                allreduce_compute_ratio=report.bounds.t_network / report.bounds.t_compute,
            )
        )
    return SweepTable(rows=tuple(rows))
