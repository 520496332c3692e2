"""Command-line front end: analyze kernels, sweep batches, render plots.

Configuration files are strict JSON (unknown keys rejected) in base units:
FLOP/s, bytes/s, bytes. Numbers may use scientific notation; no unit
suffixes are parsed. Outputs are deterministic: identical inputs produce
byte-identical JSON, CSV and SVG. Exit codes: 0 success, 1 validation
error, 2 I/O error; diagnostics go to stderr, never into output data.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .mlp import (
    AllReduceAlgorithm,
    AllReduceModel,
    LayerSpec,
    MlpSpec,
    SweepTable,
    batch_sweep,
    training_step_profile,
)
from .model import (
    KernelProfile,
    MachineSpec,
    REGION_PRIORITY,
    intensities,
    project,
    ridgeline_geometry,
    roofline_curve,
    surface_grid,
    CurveKind,
)
from .svg import (
    PlotStyle,
    RidgelinePoint,
    RooflinePoint,
    export_surface,
    render_ridgeline,
    render_roofline,
)


class ConfigError(ValueError):
    """Invalid configuration content; message names the offending field."""


SWEEP_CSV_HEADER = (
    "batch,flops,mem_bytes,net_bytes,i_a,i_m,i_n,region,runtime_s,"
    "attained_flops,allreduce_compute_ratio"
)


# -- config parsing -------------------------------------------------------

def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return value


def _take_fields(obj: dict, path: str, checkers: dict, optional: frozenset = frozenset()) -> dict:
    unknown = sorted(set(obj) - set(checkers))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    out = {}
    for key, check in checkers.items():
        if key not in obj:
            if key in optional:
                continue
            raise ConfigError(f"{path}.{key}: missing required field")
        out[key] = check(obj[key], f"{path}.{key}")
    return out


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string")
    return value


def _number(value, path: str, minimum: float | None = None, exclusive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if minimum is not None:
        if exclusive and value <= minimum:
            raise ConfigError(f"{path}: must be > {minimum}")
        if not exclusive and value < minimum:
            raise ConfigError(f"{path}: must be >= {minimum}")
    return value


def _positive(value, path: str) -> float:
    return _number(value, path, minimum=0.0, exclusive=True)


def _nonnegative(value, path: str) -> float:
    return _number(value, path, minimum=0.0)


def _pos_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer")
    if value < 1:
        raise ConfigError(f"{path}: must be >= 1")
    return value


def _loads(text: str, path: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None


def parse_machine_config(text: str) -> MachineSpec:
    """Parse {"name", "peak_flops", "mem_bw", "net_bw"} into a MachineSpec."""
    data = _as_object(_loads(text, "machine"), "machine")
    fields = _take_fields(
        data,
        "machine",
        {
            "name": _string,
            "peak_flops": _positive,
            "mem_bw": _positive,
            "net_bw": _positive,
        },
    )
    return MachineSpec(**fields)


@dataclass(frozen=True)
class MlpKernelConfig:
    """Parsed mlp-kind kernel: the layer stack plus run parameters.

    ``batch`` is the per-node mini-batch processed between synchronizations;
    ``nodes`` feeds the all-reduce volume model.
    """

    mlp: MlpSpec
    batch: int
    nodes: int
    allreduce: AllReduceModel

    def profile(self) -> KernelProfile:
        return training_step_profile(self.mlp, self.batch, self.allreduce)


def _parse_layer(value, path: str) -> LayerSpec:
    obj = _as_object(value, path)
    fields = _take_fields(obj, path, {"in": _pos_int, "out": _pos_int})
    return LayerSpec(in_features=fields["in"], out_features=fields["out"])


def _parse_allreduce(value, path: str, nodes: int) -> AllReduceModel:
    obj = _as_object(value, path)
    fields = _take_fields(
        obj,
        path,
        {"algorithm": _string, "factor": _nonnegative},
        optional=frozenset({"factor"}),
    )
    try:
        algorithm = AllReduceAlgorithm(fields["algorithm"])
    except ValueError:
        choices = ", ".join(a.value for a in AllReduceAlgorithm)
        raise ConfigError(
            f"{path}.algorithm: must be one of {choices}, got {fields['algorithm']!r}"
        ) from None
    factor = fields.get("factor")
    if algorithm is AllReduceAlgorithm.FACTOR and factor is None:
        raise ConfigError(f"{path}.factor: required for the factor algorithm")
    if algorithm is not AllReduceAlgorithm.FACTOR and factor is not None:
        raise ConfigError(f"{path}.factor: only valid for the factor algorithm")
    return AllReduceModel(algorithm=algorithm, nodes=nodes, factor=factor)


def parse_kernel_config(text: str) -> KernelProfile | MlpKernelConfig:
    """Parse a kernel config; kind "raw" gives a profile, "mlp" a layer bundle."""
    data = _as_object(_loads(text, "kernel"), "kernel")
    kind = data.get("kind")
    if kind == "raw":
        fields = _take_fields(
            data,
            "kernel",
            {
                "kind": _string,
                "flops": _nonnegative,
                "mem_bytes": _positive,
                "net_bytes": _nonnegative,
            },
        )
        return KernelProfile(
            name="raw",
            flops=fields["flops"],
            mem_bytes=fields["mem_bytes"],
            net_bytes=fields["net_bytes"],
        )
    if kind == "mlp":
        fields = _take_fields(
            data,
            "kernel",
            {
                "kind": _string,
                "layers": lambda v, p: v,
                "dtype_bytes": _pos_int,
                "batch": _pos_int,
                "nodes": _pos_int,
                "allreduce": lambda v, p: v,
            },
        )
        raw_layers = fields["layers"]
        if not isinstance(raw_layers, list) or not raw_layers:
            raise ConfigError("kernel.layers: expected a non-empty array")
        layers = tuple(
            _parse_layer(v, f"kernel.layers[{i}]") for i, v in enumerate(raw_layers)
        )
        try:
            mlp = MlpSpec(layers=layers, dtype_bytes=fields["dtype_bytes"])
        except ValueError as exc:
            raise ConfigError(f"kernel.layers: {exc}") from None
        allreduce = _parse_allreduce(fields["allreduce"], "kernel.allreduce", fields["nodes"])
        return MlpKernelConfig(
            mlp=mlp, batch=fields["batch"], nodes=fields["nodes"], allreduce=allreduce
        )
    raise ConfigError(f"kernel.kind: expected 'raw' or 'mlp', got {kind!r}")


# -- output helpers -------------------------------------------------------

def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_output(path: str | None, text: str) -> None:
    # Content is fully rendered before this call, so a failed command
    # never leaves a partial output file behind.
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json_number(value: float):
    # Strict JSON has no Infinity; the distinguished infinite intensity
    # (zero network bytes) serializes as null.
    return value if math.isfinite(value) else None


def _co_limiting_names(report) -> list[str]:
    return [r.value for r in REGION_PRIORITY if r in report.co_limiting]


def _resolve_profile(kernel) -> KernelProfile:
    return kernel if isinstance(kernel, KernelProfile) else kernel.profile()


def _analysis_payload(machine: MachineSpec, profile: KernelProfile) -> dict:
    point = intensities(profile)
    report = project(machine, profile)
    return {
        "machine": {
            "name": machine.name,
            "peak_flops": machine.peak_flops,
            "mem_bw": machine.mem_bw,
            "net_bw": machine.net_bw,
        },
        "kernel": {
            "flops": profile.flops,
            "mem_bytes": profile.mem_bytes,
            "net_bytes": profile.net_bytes,
        },
        "intensities": {
            "i_a": _json_number(point.i_a),
            "i_m": _json_number(point.i_m),
            "i_n": _json_number(point.i_n),
        },
        "bounds": {
            "t_compute": report.bounds.t_compute,
            "t_memory": report.bounds.t_memory,
            "t_network": report.bounds.t_network,
        },
        "region": report.region.value,
        "co_limiting": _co_limiting_names(report),
        "runtime_s": report.runtime,
        "attained_flops": report.attained_flops,
        "tolerance": report.tolerance,
    }


def _cmd_analyze(args) -> int:
    machine = parse_machine_config(_read(args.machine))
    profile = _resolve_profile(parse_kernel_config(_read(args.kernel)))
    payload = _analysis_payload(machine, profile)
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
        return 0
    point = payload["intensities"]
    bounds = payload["bounds"]
    lines = [
        f"machine: {machine.name}  peak_flops={machine.peak_flops!r}  "
        f"mem_bw={machine.mem_bw!r}  net_bw={machine.net_bw!r}",
        f"kernel: {profile.name}  flops={profile.flops!r}  "
        f"mem_bytes={profile.mem_bytes!r}  net_bytes={profile.net_bytes!r}",
        f"i_a={point['i_a']!r}  i_m={point['i_m']!r}  i_n={point['i_n']!r}",
        f"t_compute={bounds['t_compute']!r} s  t_memory={bounds['t_memory']!r} s  "
        f"t_network={bounds['t_network']!r} s",
        f"region={payload['region']}",
        f"co_limiting={','.join(payload['co_limiting'])}",
        f"runtime={payload['runtime_s']!r} s",
        f"attained_flops={payload['attained_flops']!r}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _parse_batches(text: str) -> list[int]:
    batches = []
    for item in text.split(","):
        item = item.strip()
        try:
            value = int(item)
        except ValueError:
            raise ConfigError(f"--batches: {item!r} is not an integer") from None
        if value < 1:
            raise ConfigError(f"--batches: batch sizes must be >= 1, got {value}")
        batches.append(value)
    if not batches:
        raise ConfigError("--batches: empty list")
    return batches


def _sweep_csv(table: SweepTable) -> str:
    lines = [SWEEP_CSV_HEADER]
    for row in table.rows:
        p, x, r = row.profile, row.intensities, row.report
        lines.append(
            f"{row.batch},{p.flops!r},{p.mem_bytes!r},{p.net_bytes!r},"
            f"{x.i_a!r},{x.i_m!r},{x.i_n!r},{r.region.value},{r.runtime!r},"
            f"{r.attained_flops!r},{row.allreduce_compute_ratio!r}"
        )
    return "\n".join(lines) + "\n"


def _require_mlp(kernel) -> MlpKernelConfig:
    if not isinstance(kernel, MlpKernelConfig):
        raise ConfigError("this command needs a kernel config of kind 'mlp'")
    return kernel


def _cmd_sweep(args) -> int:
    machine = parse_machine_config(_read(args.machine))
    kernel = _require_mlp(parse_kernel_config(_read(args.kernel)))
    batches = _parse_batches(args.batches)
    table = batch_sweep(kernel.mlp, batches, machine, kernel.allreduce)
    _write_output(args.out, _sweep_csv(table))
    return 0


_PLOT_CURVE_KINDS = {
    "roofline-cm": CurveKind.COMPUTE_MEMORY,
    "roofline-mn": CurveKind.MEMORY_NETWORK,
    "roofline-cn": CurveKind.COMPUTE_NETWORK,
}


def _plot_points(kernel, batches: list[int] | None, machine: MachineSpec):
    """Labeled profiles to overlay: sweep rows for mlp+batches, else one profile."""
    if batches is not None:
        kernel = _require_mlp(kernel)
        table = batch_sweep(kernel.mlp, batches, machine, kernel.allreduce)
        return [(f"b{row.batch}", row.profile) for row in table.rows]
    profile = _resolve_profile(kernel)
    label = f"b{kernel.batch}" if isinstance(kernel, MlpKernelConfig) else profile.name
    return [(label, profile)]


def _cmd_plot(args) -> int:
    machine = parse_machine_config(_read(args.machine))
    labeled: list[tuple[str, KernelProfile]] = []
    if args.kernel is not None:
        kernel = parse_kernel_config(_read(args.kernel))
        batches = _parse_batches(args.batches) if args.batches is not None else None
        labeled = _plot_points(kernel, batches, machine)
    elif args.batches is not None:
        raise ConfigError("--batches needs --kernel with an mlp config")

    style = PlotStyle()
    if args.kind == "ridgeline":
        geometry = ridgeline_geometry(machine)
        points = []
        for label, profile in labeled:
            point = intensities(profile)
            report = project(machine, profile)
            points.append(
                RidgelinePoint(
                    mem_intensity=point.i_m,
                    arith_intensity=point.i_a,
                    label=label,
                    region=report.region,
                    co_limited=len(report.co_limiting) > 1,
                )
            )
        text = render_ridgeline(geometry, points, style)
    else:
        kind = _PLOT_CURVE_KINDS[args.kind]
        curve = roofline_curve(
            machine, kind, _default_curve_range(machine, kind), samples=257
        )
        points = []
        for label, profile in labeled:
            point = intensities(profile)
            report = project(machine, profile)
            if kind is CurveKind.COMPUTE_MEMORY:
                coords = (point.i_a, report.attained_flops)
            elif kind is CurveKind.MEMORY_NETWORK:
                coords = (point.i_m, profile.mem_bytes / report.runtime)
            else:
                coords = (point.i_n, report.attained_flops)
            if not all(map(math.isfinite, coords)):
                raise ConfigError(
                    f"kernel {label!r} has no network traffic; it cannot be placed "
                    f"on a {args.kind} plot"
                )
            points.append(RooflinePoint(intensity=coords[0], throughput=coords[1], label=label))
        text = render_roofline(curve, points, style)
    _write_output(args.out, text)
    return 0


def _default_curve_range(machine: MachineSpec, kind: CurveKind) -> tuple[float, float]:
    knee = {
        CurveKind.COMPUTE_MEMORY: machine.peak_flops / machine.mem_bw,
        CurveKind.MEMORY_NETWORK: machine.mem_bw / machine.net_bw,
        CurveKind.COMPUTE_NETWORK: machine.peak_flops / machine.net_bw,
    }[kind]
    return (knee / 100.0, knee * 100.0)


def _cmd_surface(args) -> int:
    machine = parse_machine_config(_read(args.machine))
    if args.resolution < 2:
        raise ConfigError(f"--resolution: must be >= 2, got {args.resolution}")
    g = ridgeline_geometry(machine)
    grid = surface_grid(
        machine,
        i_a_range=(g.y_star / 100.0, g.y_star * 100.0),
        i_n_range=(g.k / 100.0, g.k * 100.0),
        resolution=args.resolution,
    )
    _write_output(args.out, export_surface(grid, "csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgeline",
        description="Bottleneck analysis and plots for kernels on distributed nodes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="classify one kernel on one machine")
    analyze.add_argument("--machine", required=True, help="machine config JSON path")
    analyze.add_argument("--kernel", required=True, help="kernel config JSON path")
    analyze.add_argument("--json", action="store_true", help="emit a JSON report")
    analyze.set_defaults(func=_cmd_analyze)

    sweep = sub.add_parser("sweep", help="batch sweep of an mlp kernel, CSV output")
    sweep.add_argument("--machine", required=True)
    sweep.add_argument("--kernel", required=True)
    sweep.add_argument("--batches", required=True, help="comma-separated batch sizes")
    sweep.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sweep.set_defaults(func=_cmd_sweep)

    plot = sub.add_parser("plot", help="render an SVG plot")
    plot.add_argument("--machine", required=True)
    plot.add_argument("--kernel", default=None)
    plot.add_argument(
        "--kind",
        required=True,
        choices=["ridgeline", "roofline-cm", "roofline-mn", "roofline-cn"],
    )
    plot.add_argument("--out", required=True, help="SVG output path")
    plot.add_argument(
        "--batches", default=None, help="overlay a batch sweep (mlp kernels only)"
    )
    plot.set_defaults(func=_cmd_plot)

    surface = sub.add_parser("surface", help="export the attainable-FLOPS surface")
    surface.add_argument("--machine", required=True)
    surface.add_argument("--out", required=True, help="CSV output path")
    surface.add_argument("--resolution", type=int, default=64, help="samples per axis")
    surface.set_defaults(func=_cmd_surface)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage or help; fold its exit code into
        # ours (bad flags are validation errors).
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError included
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
