"""Backend equivalence: numba and numpy kernel paths must agree bit-for-bit,
and the bulk paths must agree with the scalar model operations."""

import numpy as np
import pytest

import ridgeline as rl
from ridgeline import _kernels

RNG = np.random.default_rng(20240811)


def _random_corpus(n):
    def logu(size):
        return 10.0 ** RNG.uniform(-2, 10, size)

    peak, mem_bw, net_bw = logu(n), logu(n), logu(n)
    flops, mem_bytes, net_bytes = logu(n), logu(n), logu(n)
    i_a = flops / mem_bytes
    i_m = mem_bytes / net_bytes
    i_n = flops / net_bytes
    return {
        "peak": peak,
        "mem_bw": mem_bw,
        "net_bw": net_bw,
        "i_a": i_a,
        "i_m": i_m,
        "i_n": i_n,
        "x_star": mem_bw / net_bw,
        "y_star": peak / mem_bw,
        "k": peak / net_bw,
        "t_compute": flops / peak,
        "t_memory": mem_bytes / mem_bw,
        "t_network": net_bytes / net_bw,
    }


@pytest.fixture(scope="module")
def implementations():
    return _kernels.available_implementations()


def test_both_backends_present_when_numba_importable(implementations):
    pytest.importorskip("numba")
    assert set(implementations) == {"numpy", "numba"}


def test_backend_flag_is_exposed():
    assert _kernels.BACKEND in {"numba", "numpy"}


def test_grid_backends_identical(implementations):
    if "numba" not in implementations:
        pytest.skip("numba unavailable")
    i_a = 10.0 ** RNG.uniform(-3, 6, 64)
    i_n = 10.0 ** RNG.uniform(-3, 6, 48)
    grids = {
        name: impl["attainable_grid"](4.2e12, 105e9, 12e9, i_a, i_n)
        for name, impl in implementations.items()
    }
    assert np.array_equal(grids["numpy"], grids["numba"])


def test_bulk_backends_identical(implementations):
    if "numba" not in implementations:
        pytest.skip("numba unavailable")
    c = _random_corpus(5000)
    for fn, args in [
        ("attainable_many", ("peak", "mem_bw", "net_bw", "i_a", "i_n")),
        ("classify_geometric_codes", ("i_m", "i_a", "x_star", "y_star", "k")),
        ("classify_time_codes", ("t_compute", "t_memory", "t_network")),
    ]:
        results = {
            name: impl[fn](*(c[a] for a in args))
            for name, impl in implementations.items()
        }
        assert np.array_equal(results["numpy"], results["numba"]), fn


def test_grid_matches_pure_python_min():
    i_a = 10.0 ** RNG.uniform(-3, 6, 12)
    i_n = 10.0 ** RNG.uniform(-3, 6, 9)
    grid = _kernels.attainable_grid(4.2e12, 105e9, 12e9, i_a, i_n)
    for i, b in enumerate(i_n.tolist()):
        for j, a in enumerate(i_a.tolist()):
            assert grid[i, j] == min(4.2e12, a * 105e9, b * 12e9)


def test_bulk_classification_matches_scalar_model():
    c = _random_corpus(500)
    geo_codes = _kernels.classify_geometric_codes(
        c["i_m"], c["i_a"], c["x_star"], c["y_star"], c["k"]
    )
    time_codes = _kernels.classify_time_codes(
        c["t_compute"], c["t_memory"], c["t_network"]
    )
    for i in range(500):
        machine = rl.MachineSpec("m", c["peak"][i], c["mem_bw"][i], c["net_bw"][i])
        point = rl.IntensityPoint(
            i_a=c["i_a"][i], i_m=c["i_m"][i], i_n=c["i_a"][i] * c["i_m"][i]
        )
        assert rl.classify_geometric(machine, point) is rl.REGION_PRIORITY[geo_codes[i]]
        bounds = rl.TimeBounds(c["t_compute"][i], c["t_memory"][i], c["t_network"][i])
        assert rl.classify_time(bounds).region is rl.REGION_PRIORITY[time_codes[i]]


def test_bulk_attainable_matches_scalar_model():
    c = _random_corpus(500)
    values = _kernels.attainable_many(
        c["peak"], c["mem_bw"], c["net_bw"], c["i_a"], c["i_n"]
    )
    for i in range(500):
        machine = rl.MachineSpec("m", c["peak"][i], c["mem_bw"][i], c["net_bw"][i])
        point = rl.IntensityPoint(
            i_a=c["i_a"][i], i_m=c["i_n"][i] / c["i_a"][i], i_n=c["i_n"][i]
        )
        assert values[i] == rl.attainable_flops(machine, point)


def test_scalar_broadcast():
    codes = _kernels.classify_time_codes(3.0, 2.0, 1.0)
    assert codes.tolist() == [_kernels.COMPUTE_CODE]
    values = _kernels.attainable_many(10.0, 1.0, 1.0, np.array([1.0, 100.0]), 50.0)
    assert values.tolist() == [1.0, 10.0]
