"""Vectorized evaluation kernels for intensity grids and point batches.

These are the hot loops behind surface generation, sweep evaluation, and
bulk classification. Public functions dispatch to numba-compiled loops
when numba is importable and to pure-numpy implementations otherwise; set
``RIDGELINE_BACKEND=numpy`` or ``=numba`` to force one (default ``auto``
prefers numba). Both backends produce bit-identical results;
``benchmarks/bench_kernels.py`` compares their throughput.

Region codes, in tie-break priority order: 0 = compute, 1 = memory,
2 = network.
"""

from __future__ import annotations

import os

import numpy as np

COMPUTE_CODE = 0
MEMORY_CODE = 1
NETWORK_CODE = 2


# -- pure numpy backend -------------------------------------------------

def _np_attainable_grid(peak, mem_bw, net_bw, i_a, i_n):
    mem_ceiling = np.minimum(peak, i_a * mem_bw)
    net_ceiling = i_n * net_bw
    return np.minimum(mem_ceiling[None, :], net_ceiling[:, None])


def _np_attainable_many(peak, mem_bw, net_bw, i_a, i_n):
    return np.minimum(np.minimum(peak, i_a * mem_bw), i_n * net_bw)


def _np_classify_geometric_codes(i_m, i_a, x_star, y_star, k):
    right = i_m >= x_star
    high = i_a >= y_star
    codes = np.full(i_m.shape, NETWORK_CODE, dtype=np.int8)
    codes[right & ~high] = MEMORY_CODE
    codes[(right & high) | (~right & high & (i_m * i_a >= k))] = COMPUTE_CODE
    return codes


def _np_classify_time_codes(t_compute, t_memory, t_network):
    codes = np.full(t_compute.shape, NETWORK_CODE, dtype=np.int8)
    codes[t_memory >= t_network] = MEMORY_CODE
    codes[(t_compute >= t_memory) & (t_compute >= t_network)] = COMPUTE_CODE
    return codes


_NUMPY_IMPL = {
    "attainable_grid": _np_attainable_grid,
    "attainable_many": _np_attainable_many,
    "classify_geometric_codes": _np_classify_geometric_codes,
    "classify_time_codes": _np_classify_time_codes,
}


# -- numba backend ------------------------------------------------------

def _build_numba_impl():
    from numba import njit

    # No fastmath: results must be bit-identical to the numpy backend.

    @njit(cache=True)
    def attainable_grid(peak, mem_bw, net_bw, i_a, i_n):
        out = np.empty((i_n.shape[0], i_a.shape[0]))
        for i in range(i_n.shape[0]):
            net_ceiling = i_n[i] * net_bw
            for j in range(i_a.shape[0]):
                v = i_a[j] * mem_bw
                if peak < v:
                    v = peak
                if net_ceiling < v:
                    v = net_ceiling
                out[i, j] = v
        return out

    @njit(cache=True)
    def attainable_many(peak, mem_bw, net_bw, i_a, i_n):
        out = np.empty(peak.shape[0])
        for i in range(peak.shape[0]):
            v = i_a[i] * mem_bw[i]
            if peak[i] < v:
                v = peak[i]
            net_ceiling = i_n[i] * net_bw[i]
            if net_ceiling < v:
                v = net_ceiling
            out[i] = v
        return out

    @njit(cache=True)
    def classify_geometric_codes(i_m, i_a, x_star, y_star, k):
        out = np.empty(i_m.shape[0], dtype=np.int8)
        for i in range(i_m.shape[0]):
            if i_m[i] >= x_star[i]:
                out[i] = COMPUTE_CODE if i_a[i] >= y_star[i] else MEMORY_CODE
            elif i_a[i] >= y_star[i] and i_m[i] * i_a[i] >= k[i]:
                out[i] = COMPUTE_CODE
            else:
                out[i] = NETWORK_CODE
        return out

    @njit(cache=True)
    def classify_time_codes(t_compute, t_memory, t_network):
        out = np.empty(t_compute.shape[0], dtype=np.int8)
        for i in range(t_compute.shape[0]):
            if t_compute[i] >= t_memory[i] and t_compute[i] >= t_network[i]:
                out[i] = COMPUTE_CODE
            elif t_memory[i] >= t_network[i]:
                out[i] = MEMORY_CODE
            else:
                out[i] = NETWORK_CODE
        return out

    return {
        "attainable_grid": attainable_grid,
        "attainable_many": attainable_many,
        "classify_geometric_codes": classify_geometric_codes,
        "classify_time_codes": classify_time_codes,
    }


def _select_backend():
    choice = os.environ.get("RIDGELINE_BACKEND", "auto").strip().lower() or "auto"
    if choice not in {"auto", "numba", "numpy"}:
        raise ValueError(
            f"RIDGELINE_BACKEND must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", _NUMPY_IMPL
    try:
        impl = _build_numba_impl()
    except ImportError:
        if choice == "numba":
            raise RuntimeError("RIDGELINE_BACKEND=numba but numba is not importable")
        return "numpy", _NUMPY_IMPL
    return "numba", impl


BACKEND, _IMPL = _select_backend()


def available_implementations():
    """Backend name -> kernel table, for benchmarks and equivalence tests."""
    impls = {"numpy": _NUMPY_IMPL}
    if BACKEND == "numba":
        impls["numba"] = _IMPL
    else:
        try:
            impls["numba"] = _build_numba_impl()
        except ImportError:
            pass
    return impls


def _float_arrays(*values):
    broadcast = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in values))
    return tuple(np.ascontiguousarray(np.atleast_1d(a)) for a in broadcast)


def attainable_grid(peak, mem_bw, net_bw, i_a_values, i_n_values):
    """Grid of min(peak, i_a*mem_bw, i_n*net_bw), one row per i_n value."""
    i_a = np.ascontiguousarray(np.asarray(i_a_values, dtype=np.float64))
    i_n = np.ascontiguousarray(np.asarray(i_n_values, dtype=np.float64))
    return _IMPL["attainable_grid"](float(peak), float(mem_bw), float(net_bw), i_a, i_n)


def attainable_many(peak, mem_bw, net_bw, i_a, i_n):
    """Elementwise min(peak, i_a*mem_bw, i_n*net_bw); scalars broadcast."""
    return _IMPL["attainable_many"](*_float_arrays(peak, mem_bw, net_bw, i_a, i_n))


def classify_geometric_codes(i_m, i_a, x_star, y_star, k):
    """Region codes for points (i_m, i_a) against balance lines; scalars broadcast."""
    return _IMPL["classify_geometric_codes"](
        *_float_arrays(i_m, i_a, x_star, y_star, k)
    )


def classify_time_codes(t_compute, t_memory, t_network):
    """Region codes from per-resource times: largest wins, ties by priority."""
    return _IMPL["classify_time_codes"](
        *_float_arrays(t_compute, t_memory, t_network)
    )
