"""Bottleneck modeling for kernels on distributed systems.

Classifies whether compute rate, memory bandwidth or network bandwidth
bounds a kernel on a given machine, projects the attainable performance,
builds training profiles for fully connected layer stacks, and renders
roofline and region plots as SVG.
"""

from ._kernels import BACKEND
from .mlp import (
    ALL_PHASES,
    AllReduceAlgorithm,
    AllReduceModel,
    LayerSpec,
    MlpSpec,
    Phase,
    SweepRow,
    SweepTable,
    allreduce_volume,
    batch_sweep,
    data_parallel_profile,
    gemm_profile,
    mlp_phase_profile,
    training_step_profile,
)
from .model import (
    BottleneckReport,
    Classification,
    Curve,
    CurveKind,
    DEFAULT_TOLERANCE,
    IntensityPoint,
    KernelProfile,
    MachineSpec,
    Region,
    REGION_PRIORITY,
    RidgelineGeometry,
    SurfaceGrid,
    TimeBounds,
    attainable_flops,
    classify_geometric,
    classify_time,
    intensities,
    project,
    ridgeline_geometry,
    roofline_curve,
    surface_grid,
    time_bounds,
)
from .svg import (
    DEFAULT_COLORS,
    PlotStyle,
    RidgelinePoint,
    RooflinePoint,
    export_surface,
    render_ridgeline,
    render_roofline,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_PHASES",
    "AllReduceAlgorithm",
    "AllReduceModel",
    "BACKEND",
    "BottleneckReport",
    "Classification",
    "Curve",
    "CurveKind",
    "DEFAULT_COLORS",
    "DEFAULT_TOLERANCE",
    "IntensityPoint",
    "KernelProfile",
    "LayerSpec",
    "MachineSpec",
    "MlpSpec",
    "Phase",
    "PlotStyle",
    "Region",
    "REGION_PRIORITY",
    "RidgelineGeometry",
    "RidgelinePoint",
    "RooflinePoint",
    "SurfaceGrid",
    "SweepRow",
    "SweepTable",
    "TimeBounds",
    "allreduce_volume",
    "attainable_flops",
    "batch_sweep",
    "classify_geometric",
    "classify_time",
    "data_parallel_profile",
    "export_surface",
    "gemm_profile",
    "intensities",
    "mlp_phase_profile",
    "project",
    "render_ridgeline",
    "render_roofline",
    "ridgeline_geometry",
    "roofline_curve",
    "surface_grid",
    "time_bounds",
    "training_step_profile",
]
