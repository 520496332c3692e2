"""Bottleneck model for kernels running on nodes of a distributed system.

A machine is described by its peak compute rate P (FLOP/s), memory
bandwidth BW_m (bytes/s) and network bandwidth BW_n (bytes/s). A kernel is
described by the work it performs per unit: F flops, B_M memory bytes and
B_N network bytes. Three derived intensities drive the analysis:

    i_a = F / B_M      arithmetic intensity, FLOP per memory byte
    i_m = B_M / B_N    memory intensity, memory byte per network byte
    i_n = F / B_N      network intensity, FLOP per network byte

so that i_n = i_a * i_m. The bounding resource follows either from the
three candidate times (F/P, B_M/BW_m, B_N/BW_n, the largest wins) or,
equivalently, from the position of (i_m, i_a) relative to the machine's
balance lines x* = BW_m/BW_n, y* = P/BW_m and the diagonal x*y = k with
k = P/BW_n.

All quantities are doubles in base units (FLOP/s, bytes/s, bytes); no
unit suffixes are parsed here. Everything in this module is a pure
function over immutable values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels

#: Default relative tolerance used to report co-limiting resources.
DEFAULT_TOLERANCE = 1e-9

_CONSISTENCY_RTOL = 1e-12


class Region(enum.Enum):
    """Bounding resource of a kernel on a machine."""

    COMPUTE = "compute"
    MEMORY = "memory"
    NETWORK = "network"


#: Tie-break priority; index doubles as the code used by the bulk kernels.
REGION_PRIORITY = (Region.COMPUTE, Region.MEMORY, Region.NETWORK)


def region_from_code(code: int) -> Region:
    return REGION_PRIORITY[code]


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def _check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be non-negative and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MachineSpec:
    """One node: peak FLOP rate, memory bandwidth, network bandwidth."""

    name: str
    peak_flops: float
    mem_bw: float
    net_bw: float

    def __post_init__(self):
        object.__setattr__(self, "peak_flops", _check_positive("peak_flops", self.peak_flops))
        object.__setattr__(self, "mem_bw", _check_positive("mem_bw", self.mem_bw))
        object.__setattr__(self, "net_bw", _check_positive("net_bw", self.net_bw))


@dataclass(frozen=True)
class KernelProfile:
    """Work per unit: flops, memory bytes, network bytes.

    ``net_bytes = 0`` models a purely local kernel. Profiles are additive:
    the cost of running two kernels is the componentwise sum, so any
    repetition count is folded into the fields.
    """

    name: str
    flops: float
    mem_bytes: float
    net_bytes: float

    def __post_init__(self):
        object.__setattr__(self, "flops", _check_nonnegative("flops", self.flops))
        object.__setattr__(self, "mem_bytes", _check_positive("mem_bytes", self.mem_bytes))
        object.__setattr__(self, "net_bytes", _check_nonnegative("net_bytes", self.net_bytes))


@dataclass(frozen=True)
class IntensityPoint:
    """Derived intensities of a kernel; i_m and i_n are ``inf`` iff B_N = 0."""

    i_a: float
    i_m: float
    i_n: float

    def __post_init__(self):
        for field_name in ("i_a", "i_m", "i_n"):
            value = float(getattr(self, field_name))
            if math.isnan(value) or value < 0:
                raise ValueError(f"{field_name} must be non-negative, got {value!r}")
            object.__setattr__(self, field_name, value)
        if self.finite:
            product = self.i_a * self.i_m
            if not math.isclose(self.i_n, product, rel_tol=_CONSISTENCY_RTOL):
                raise ValueError(
                    f"inconsistent intensities: i_n={self.i_n!r} but i_a*i_m={product!r}"
                )

    @property
    def finite(self) -> bool:
        return all(map(math.isfinite, (self.i_a, self.i_m, self.i_n)))


@dataclass(frozen=True)
class TimeBounds:
    """Per-resource lower bounds on runtime, in seconds."""

    t_compute: float
    t_memory: float
    t_network: float

    def __post_init__(self):
        object.__setattr__(self, "t_compute", _check_nonnegative("t_compute", self.t_compute))
        object.__setattr__(self, "t_memory", _check_nonnegative("t_memory", self.t_memory))
        object.__setattr__(self, "t_network", _check_nonnegative("t_network", self.t_network))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t_compute, self.t_memory, self.t_network)


@dataclass(frozen=True)
class RidgelineGeometry:
    """Balance lines of a machine: x* = BW_m/BW_n, y* = P/BW_m, k = P/BW_n."""

    x_star: float
    y_star: float
    k: float

    def __post_init__(self):
        _check_positive("x_star", self.x_star)
        _check_positive("y_star", self.y_star)
        _check_positive("k", self.k)
        if not math.isclose(self.k, self.x_star * self.y_star, rel_tol=_CONSISTENCY_RTOL):
            raise ValueError(
                f"k={self.k!r} does not equal x_star*y_star={self.x_star * self.y_star!r}"
            )


class Classification(NamedTuple):
    region: Region
    co_limiting: frozenset[Region]


@dataclass(frozen=True)
class BottleneckReport:
    """Classified bottleneck plus the projected runtime and FLOP rate."""

    region: Region
    bounds: TimeBounds
    runtime: float
    attained_flops: float
    co_limiting: frozenset[Region]
    tolerance: float


class CurveKind(enum.Enum):
    COMPUTE_MEMORY = "compute-memory"
    MEMORY_NETWORK = "memory-network"
    COMPUTE_NETWORK = "compute-network"


@dataclass(frozen=True, eq=False)
class Curve:
    """Sampled throughput ceiling as a function of one intensity.

    ``intensities`` is strictly increasing and ``throughput`` non-decreasing;
    ``knee`` is the intensity where the linear segment meets the flat ceiling.
    Arrays are treated as immutable.
    """

    kind: CurveKind
    intensities: np.ndarray
    throughput: np.ndarray
    knee: float

    def __post_init__(self):
        xs = np.asarray(self.intensities, dtype=np.float64)
        ys = np.asarray(self.throughput, dtype=np.float64)
        if xs.ndim != 1 or ys.shape != xs.shape or xs.size == 0:
            raise ValueError("curve needs matching 1-d intensity/throughput arrays")
        if xs.size > 1 and not np.all(np.diff(xs) > 0):
            raise ValueError("curve intensities must be strictly increasing")
        if ys.size > 1 and not np.all(np.diff(ys) >= 0):
            raise ValueError("curve throughput must be non-decreasing")
        object.__setattr__(self, "intensities", xs)
        object.__setattr__(self, "throughput", ys)
        object.__setattr__(self, "knee", _check_positive("knee", self.knee))

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.intensities.tolist(), self.throughput.tolist()))


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Attainable FLOP/s over a log-spaced (i_a, i_n) grid, one row per i_n."""

    i_a_values: np.ndarray
    i_n_values: np.ndarray
    flops: np.ndarray

    def __post_init__(self):
        i_a = np.asarray(self.i_a_values, dtype=np.float64)
        i_n = np.asarray(self.i_n_values, dtype=np.float64)
        grid = np.asarray(self.flops, dtype=np.float64)
        if grid.shape != (i_n.size, i_a.size):
            raise ValueError(
                f"grid shape {grid.shape} does not match axes ({i_n.size}, {i_a.size})"
            )
        object.__setattr__(self, "i_a_values", i_a)
        object.__setattr__(self, "i_n_values", i_n)
        object.__setattr__(self, "flops", grid)

    def row(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Fixed-i_n slice: a compute-memory roofline section."""
        return self.i_a_values, self.flops[index]

    def column(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Fixed-i_a slice: a compute-network roofline section."""
        return self.i_n_values, self.flops[:, index]


# -- operations ----------------------------------------------------------

def intensities(profile: KernelProfile) -> IntensityPoint:
    """Derive (i_a, i_m, i_n) from a profile; zero network bytes map to inf."""
    if profile.mem_bytes == 0:
        raise ValueError("profile has zero memory bytes; intensities undefined")
    i_a = profile.flops / profile.mem_bytes
    if profile.net_bytes == 0:
        return IntensityPoint(i_a=i_a, i_m=math.inf, i_n=math.inf)
    return IntensityPoint(
        i_a=i_a,
        i_m=profile.mem_bytes / profile.net_bytes,
        i_n=profile.flops / profile.net_bytes,
    )


def attainable_flops(machine: MachineSpec, point: IntensityPoint) -> float:
    """Ceiling min(P, i_a*BW_m, i_n*BW_n); infinite intensities drop their term."""
    bound = machine.peak_flops
    if math.isfinite(point.i_a):
        bound = min(bound, point.i_a * machine.mem_bw)
    if math.isfinite(point.i_n):
        bound = min(bound, point.i_n * machine.net_bw)
    return bound


def time_bounds(machine: MachineSpec, profile: KernelProfile) -> TimeBounds:
    """Per-resource time lower bounds: F/P, B_M/BW_m, B_N/BW_n."""
    return TimeBounds(
        t_compute=profile.flops / machine.peak_flops,
        t_memory=profile.mem_bytes / machine.mem_bw,
        t_network=profile.net_bytes / machine.net_bw,
    )


def classify_time(bounds: TimeBounds, tolerance: float = DEFAULT_TOLERANCE) -> Classification:
    """Pick the resource with the largest time bound.

    Exact ties resolve compute > memory > network. ``co_limiting`` collects
    every resource whose bound is within ``tolerance`` (relative) of the max.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance!r}")
    values = bounds.as_tuple()
    largest = max(values)
    if largest == 0:
        raise ValueError("all time bounds are zero: empty kernel")
    region = REGION_PRIORITY[values.index(largest)]
    cutoff = (1.0 - tolerance) * largest
    co_limiting = frozenset(
        r for r, v in zip(REGION_PRIORITY, values) if v >= cutoff
    )
    return Classification(region=region, co_limiting=co_limiting)


def ridgeline_geometry(machine: MachineSpec) -> RidgelineGeometry:
    """Balance lines separating the compute, memory and network regions."""
    return RidgelineGeometry(
        x_star=machine.mem_bw / machine.net_bw,
        y_star=machine.peak_flops / machine.mem_bw,
        k=machine.peak_flops / machine.net_bw,
    )


def classify_geometric(machine: MachineSpec, point: IntensityPoint) -> Region:
    """Classify by quadrant of (i_m, i_a) against x*, y* and the diagonal x*y = k.

    Points on a boundary resolve with the same compute > memory > network
    priority as :func:`classify_time`. Requires finite coordinates; kernels
    with zero network bytes classify through :func:`classify_time` instead.
    """
    if not point.finite:
        raise ValueError(
            "point has infinite intensity (zero network bytes); use classify_time"
        )
    g = ridgeline_geometry(machine)
    x, y = point.i_m, point.i_a
    if x >= g.x_star:
        return Region.COMPUTE if y >= g.y_star else Region.MEMORY
    if y >= g.y_star and x * y >= g.k:
        return Region.COMPUTE
    return Region.NETWORK


def project(
    machine: MachineSpec,
    profile: KernelProfile,
    tolerance: float = DEFAULT_TOLERANCE,
) -> BottleneckReport:
    """Full projection: bounds, bounding region, runtime and attained FLOP/s.

    Runtime is the max of the three bounds (full overlap model), so the
    attained rate F/runtime equals min(P, i_a*BW_m, i_n*BW_n).
    """
    bounds = time_bounds(machine, profile)
    classification = classify_time(bounds, tolerance)
    runtime = max(bounds.as_tuple())
    attained = profile.flops / runtime
    return BottleneckReport(
        region=classification.region,
        bounds=bounds,
        runtime=runtime,
        attained_flops=attained,
        co_limiting=classification.co_limiting,
        tolerance=tolerance,
    )


_CURVE_CEILINGS = {
    CurveKind.COMPUTE_MEMORY: lambda m: (m.peak_flops, m.mem_bw),
    CurveKind.MEMORY_NETWORK: lambda m: (m.mem_bw, m.net_bw),
    CurveKind.COMPUTE_NETWORK: lambda m: (m.peak_flops, m.net_bw),
}


def roofline_curve(
    machine: MachineSpec,
    kind: CurveKind,
    intensity_range: tuple[float, float],
    samples: int = 129,
) -> Curve:
    """Log-spaced samples of min(ceiling, intensity * bandwidth).

    Kinds: compute-memory caps P by i_a*BW_m, memory-network caps BW_m by
    i_m*BW_n, compute-network caps P by i_n*BW_n. The knee sits at
    ceiling/bandwidth.
    """
    low, high = intensity_range
    if not (0 < low < high) or not math.isfinite(high):
        raise ValueError(f"invalid intensity range ({low!r}, {high!r})")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    ceiling, bandwidth = _CURVE_CEILINGS[kind](machine)
    xs = np.geomspace(low, high, samples)
    ys = np.minimum(ceiling, xs * bandwidth)
    return Curve(kind=kind, intensities=xs, throughput=ys, knee=ceiling / bandwidth)


def _log_axis(name: str, axis_range: tuple[float, float], count: int) -> np.ndarray:
    low, high = axis_range
    if count < 1:
        raise ValueError(f"{name}: resolution must be >= 1, got {count}")
    if not (math.isfinite(low) and math.isfinite(high)) or low <= 0:
        raise ValueError(f"{name}: invalid log range ({low!r}, {high!r})")
    if count == 1:
        if low != high:
            raise ValueError(f"{name}: single-sample axis needs low == high")
        return np.asarray([float(low)])
    if low >= high:
        raise ValueError(f"{name}: range must satisfy low < high, got ({low!r}, {high!r})")
    return np.geomspace(low, high, count)


def surface_grid(
    machine: MachineSpec,
    i_a_range: tuple[float, float],
    i_n_range: tuple[float, float],
    resolution: int | tuple[int, int],
) -> SurfaceGrid:
    """Attainable-FLOP/s surface over log-spaced i_a (columns) and i_n (rows).

    ``resolution`` is the sample count per axis, either one int for both or
    ``(n_i_a, n_i_n)``. A single-sample axis (count 1, low == high) yields a
    roofline slice along the other axis.
    """
    if isinstance(resolution, tuple):
        n_a, n_n = resolution
    else:
        n_a = n_n = resolution
    i_a_values = _log_axis("i_a_range", i_a_range, n_a)
    i_n_values = _log_axis("i_n_range", i_n_range, n_n)
    grid = _kernels.attainable_grid(
        machine.peak_flops, machine.mem_bw, machine.net_bw, i_a_values, i_n_values
    )
    return SurfaceGrid(i_a_values=i_a_values, i_n_values=i_n_values, flops=grid)
