"""MLP profile builder tests: GEMM counting oracles, case-study values, sweeps."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import ridgeline as rl

CLX = rl.MachineSpec("clx", 4.2e12, 105e9, 12e9)
IDEAL = rl.AllReduceModel(rl.AllReduceAlgorithm.IDEAL)

dims = st.integers(min_value=1, max_value=300)


def _gemm_flops_by_enumeration(m, n, k):
    # independent oracle: walk the multiply-adds of C[m,n] += A[m,k] B[k,n]
    flops = 0
    for _ in range(m):
        for _ in range(n):
            for _ in range(k):
                flops += 2
    return flops


def _gemm_bytes_by_enumeration(m, n, k, s):
    # every element of A, B and C touches memory exactly once
    return s * (m * k) + s * (k * n) + s * (m * n)


# -- gemm_profile -----------------------------------------------------------

def test_gemm_scalar_multiply_add():
    p = rl.gemm_profile(1, 1, 1, 4)
    assert (p.flops, p.mem_bytes, p.net_bytes) == (2.0, 12.0, 0.0)


def test_gemm_2x2_matches_enumeration():
    p = rl.gemm_profile(2, 2, 2, 4)
    assert p.flops == _gemm_flops_by_enumeration(2, 2, 2) == 16
    assert p.mem_bytes == _gemm_bytes_by_enumeration(2, 2, 2, 4) == 48


def test_gemm_case_study_shape():
    p = rl.gemm_profile(512, 4096, 4096, 4)
    assert p.flops == 17_179_869_184
    assert p.mem_bytes == 83_886_080
    assert p.net_bytes == 0


def test_gemm_rejects_zero_dimension():
    with pytest.raises(ValueError):
        rl.gemm_profile(0, 1, 1)
    with pytest.raises(ValueError):
        rl.gemm_profile(4, 4, 4, dtype_bytes=3)


@given(dims, dims, dims)
def test_gemm_flops_symmetric_bytes_swap_mn(m, n, k):
    base = rl.gemm_profile(m, n, k)
    for perm in [(m, k, n), (n, m, k), (n, k, m), (k, m, n), (k, n, m)]:
        assert rl.gemm_profile(*perm).flops == base.flops
    assert rl.gemm_profile(n, m, k).mem_bytes == base.mem_bytes


@given(st.integers(min_value=1, max_value=64), dims, dims)
def test_gemm_matches_enumeration_oracle(m, n, k):
    p = rl.gemm_profile(m, n, k, 8)
    assert p.flops == 2 * m * n * k
    assert p.mem_bytes == _gemm_bytes_by_enumeration(m, n, k, 8)


# -- mlp specs and phase profiles ---------------------------------------------

def test_mlp_spec_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match="does not match"):
        rl.MlpSpec(layers=(rl.LayerSpec(4096, 1024), rl.LayerSpec(4096, 4096)))


def test_mlp_spec_rejects_bad_dtype():
    with pytest.raises(ValueError, match="dtype_bytes"):
        rl.MlpSpec(layers=(rl.LayerSpec(4, 4),), dtype_bytes=3)


def test_mlp_spec_rejects_empty():
    with pytest.raises(ValueError, match="at least one layer"):
        rl.MlpSpec(layers=())


def test_phase_profile_single_layer_equals_gemm(mlp4096):
    p = rl.mlp_phase_profile(mlp4096, 512, rl.Phase.FORWARD)
    g = rl.gemm_profile(512, 4096, 4096, 4)
    assert (p.flops, p.mem_bytes, p.net_bytes) == (g.flops, g.mem_bytes, 0.0)


def test_phase_profile_trivial_layer():
    mlp = rl.MlpSpec(layers=(rl.LayerSpec(1, 1),))
    for phase in rl.Phase:
        p = rl.mlp_phase_profile(mlp, 1, phase)
        assert (p.flops, p.mem_bytes) == (2.0, 12.0)


def test_phase_profile_additivity():
    single = rl.MlpSpec(layers=(rl.LayerSpec(4096, 4096),))
    double = rl.MlpSpec(layers=(rl.LayerSpec(4096, 4096), rl.LayerSpec(4096, 4096)))
    one = rl.mlp_phase_profile(single, 256, rl.Phase.FORWARD)
    two = rl.mlp_phase_profile(double, 256, rl.Phase.FORWARD)
    assert two.flops == 2 * one.flops
    assert two.mem_bytes == 2 * one.mem_bytes


def test_training_profile_additive_across_layers():
    first = rl.MlpSpec(layers=(rl.LayerSpec(512, 1024),))
    second = rl.MlpSpec(layers=(rl.LayerSpec(1024, 256),))
    stacked = rl.MlpSpec(layers=(rl.LayerSpec(512, 1024), rl.LayerSpec(1024, 256)))
    a = rl.training_step_profile(first, 64, IDEAL)
    b = rl.training_step_profile(second, 64, IDEAL)
    whole = rl.training_step_profile(stacked, 64, IDEAL)
    assert whole.flops == a.flops + b.flops
    assert whole.mem_bytes == a.mem_bytes + b.mem_bytes
    assert whole.net_bytes == a.net_bytes + b.net_bytes


def test_phase_profile_rejects_disabled_phase():
    mlp = rl.MlpSpec(layers=(rl.LayerSpec(8, 8),), phases=frozenset({rl.Phase.FORWARD}))
    with pytest.raises(ValueError, match="not enabled"):
        rl.mlp_phase_profile(mlp, 4, rl.Phase.WEIGHT_GRAD)


# -- allreduce_volume -----------------------------------------------------------

def test_allreduce_ring_single_node_is_free():
    model = rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=1)
    assert rl.allreduce_volume(1000, model) == 0.0


def test_allreduce_ring_four_nodes():
    model = rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=4)
    assert rl.allreduce_volume(1000, model) == 1500.0


def test_allreduce_ideal_one_layer_weights():
    assert rl.allreduce_volume(4 * 4096 * 4096, IDEAL) == 134_217_728.0


def test_allreduce_factor():
    model = rl.AllReduceModel(rl.AllReduceAlgorithm.FACTOR, nodes=8, factor=1.5)
    assert rl.allreduce_volume(1000, model) == 1500.0


def test_allreduce_model_validation():
    with pytest.raises(ValueError, match="factor"):
        rl.AllReduceModel(rl.AllReduceAlgorithm.FACTOR)
    with pytest.raises(ValueError, match="factor"):
        rl.AllReduceModel(rl.AllReduceAlgorithm.RING, factor=2.0)
    with pytest.raises(ValueError, match="nodes"):
        rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=0)


@given(st.floats(min_value=1.0, max_value=1e12), st.integers(min_value=1, max_value=10_000))
def test_ring_below_ideal_and_monotone(param_bytes, p):
    ring_p = rl.allreduce_volume(param_bytes, rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=p))
    ring_next = rl.allreduce_volume(
        param_bytes, rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=p + 1)
    )
    ideal = rl.allreduce_volume(param_bytes, IDEAL)
    assert ring_p <= ring_next <= ideal
    huge = rl.allreduce_volume(
        param_bytes, rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=10**9)
    )
    assert math.isclose(huge, ideal, rel_tol=1e-6)


# -- training and data-parallel profiles -------------------------------------------

def test_training_step_case_study_batch512(mlp4096):
    p = rl.training_step_profile(mlp4096, 512, IDEAL)
    assert p.flops == 51_539_607_552.0
    assert p.mem_bytes == 251_658_240.0
    assert p.net_bytes == 134_217_728.0
    point = rl.intensities(p)
    assert point.i_n == 384.0
    # lands within 10% of the machine balance k = 350
    assert abs(point.i_n / 350.0 - 1.0) < 0.10


def test_training_step_batch1024_is_compute_bound(mlp4096):
    p = rl.training_step_profile(mlp4096, 1024, IDEAL)
    point = rl.intensities(p)
    assert point.i_n == 768.0
    assert rl.project(CLX, p).region is rl.Region.COMPUTE


def test_training_step_batch256_is_network_bound(mlp4096):
    p = rl.training_step_profile(mlp4096, 256, IDEAL)
    point = rl.intensities(p)
    assert point.i_n == 192.0
    assert point.i_m < 8.75
    assert rl.project(CLX, p).region is rl.Region.NETWORK


def test_training_step_needs_all_phases():
    mlp = rl.MlpSpec(layers=(rl.LayerSpec(8, 8),), phases=frozenset({rl.Phase.FORWARD}))
    with pytest.raises(ValueError, match="all three phases"):
        rl.training_step_profile(mlp, 4, IDEAL)


def test_data_parallel_composition(mlp4096):
    dp = rl.data_parallel_profile(mlp4096, 1024, 2, rl.AllReduceModel(rl.AllReduceAlgorithm.RING))
    local = rl.training_step_profile(
        mlp4096, 512, rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=2)
    )
    assert (dp.flops, dp.mem_bytes, dp.net_bytes) == (local.flops, local.mem_bytes, local.net_bytes)


def test_data_parallel_single_node_ring_never_network(mlp4096):
    ring = rl.AllReduceModel(rl.AllReduceAlgorithm.RING)
    for batch in (1, 16, 256):
        p = rl.data_parallel_profile(mlp4096, batch, 1, ring)
        assert p.net_bytes == 0.0
        assert rl.project(CLX, p).region is not rl.Region.NETWORK


def test_data_parallel_strong_scaling_direction(mlp4096):
    two = rl.data_parallel_profile(mlp4096, 1024, 2, IDEAL)
    four = rl.data_parallel_profile(mlp4096, 1024, 4, IDEAL)
    assert four.flops == two.flops / 2
    assert four.net_bytes >= two.net_bytes
    assert rl.intensities(four).i_a < rl.intensities(two).i_a


def test_data_parallel_rejects_non_divisible(mlp4096):
    with pytest.raises(ValueError, match="divide"):
        rl.data_parallel_profile(mlp4096, 100, 3, IDEAL)


@given(
    st.integers(min_value=1, max_value=64),
    st.integers(min_value=1, max_value=64),
    dims,
    dims,
)
def test_strong_scaling_exact_flops_split(p, m, d_in, d_out):
    mlp = rl.MlpSpec(layers=(rl.LayerSpec(d_in, d_out),))
    global_batch = p * m
    whole = rl.data_parallel_profile(mlp, global_batch, 1, IDEAL)
    split = rl.data_parallel_profile(mlp, global_batch, p, IDEAL)
    assert split.flops * p == whole.flops
    assert rl.intensities(split).i_a <= rl.intensities(whole).i_a
    assert split.mem_bytes <= whole.mem_bytes


# -- batch_sweep -----------------------------------------------------------------

def test_sweep_intensities_strictly_increase(mlp4096):
    batches = [64, 128, 256, 512, 1024, 2048, 4096]
    table = rl.batch_sweep(mlp4096, batches, CLX, IDEAL)
    i_a = [row.intensities.i_a for row in table.rows]
    i_n = [row.intensities.i_n for row in table.rows]
    assert all(a < b for a, b in zip(i_a, i_a[1:]))
    assert all(a < b for a, b in zip(i_n, i_n[1:]))


def test_sweep_ratio_crossover_in_expected_window(mlp4096):
    table = rl.batch_sweep(mlp4096, [64, 128, 256, 512, 1024], CLX, IDEAL)
    crossover = table.crossover_batch()
    assert 256 <= crossover <= 1024
    assert crossover == pytest.approx(1400 / 3, rel=1e-12)
    ratios = [row.allreduce_compute_ratio for row in table.rows]
    assert ratios[0] > 1 and ratios[-1] < 1


def test_sweep_regions_skip_memory(mlp4096):
    table = rl.batch_sweep(mlp4096, [2**i for i in range(6, 13)], CLX, IDEAL)
    regions = [row.report.region for row in table.rows]
    assert rl.Region.MEMORY not in regions
    assert regions == sorted(regions, key=[rl.Region.NETWORK, rl.Region.COMPUTE].index)


def test_sweep_orders_rows_and_rejects_empty(mlp4096):
    table = rl.batch_sweep(mlp4096, [512, 64, 256], CLX, IDEAL)
    assert [row.batch for row in table.rows] == [64, 256, 512]
    with pytest.raises(ValueError, match="empty"):
        rl.batch_sweep(mlp4096, [], CLX, IDEAL)


def test_sweep_crossover_none_without_network(mlp4096):
    ring1 = rl.AllReduceModel(rl.AllReduceAlgorithm.RING, nodes=1)
    table = rl.batch_sweep(mlp4096, [64, 128], CLX, ring1)
    assert table.crossover_batch() is None
