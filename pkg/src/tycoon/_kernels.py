"""Hot inner-loop kernels.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
fallback. The active implementation is chosen once at import time from the
``TYCOON_NUMBA`` environment variable ("0"/"false" forces the numpy path;
anything else, or the variable being unset, uses numba when it is
importable). ``benchmarks/kernel_bench.py`` compares the two paths.
"""
from __future__ import annotations

import os

import numpy as np

_TWO_PI = 2.0 * np.pi


def _flag_enabled() -> bool:
    return os.environ.get("TYCOON_NUMBA", "1").strip().lower() not in ("0", "false", "no")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag_enabled()


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def soft_threshold_numpy(values, tau):
    """Complex soft threshold: shrink magnitudes by tau, keep phases."""
    mag = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > tau, 1.0 - tau / mag, 0.0)
    return values * scale


def transport_combine_numpy(dt_part, domega_part, values, omega, alpha):
    """dt_part - i*2*pi*omega x values + domega_part * alpha (columnwise)."""
    return dt_part - (1j * _TWO_PI) * omega[:, None] * values + domega_part * alpha[None, :]


def transport_combine_adj_numpy(dt_part, domega_part, values, omega, alpha):
    """dt_part + i*2*pi*omega x values + domega_part * alpha (columnwise)."""
    return dt_part + (1j * _TWO_PI) * omega[:, None] * values + domega_part * alpha[None, :]


def scatter_energy_numpy(power, target_rows, out):
    """Accumulate power[n, m] into out[target_rows[n, m], m]."""
    cols = np.broadcast_to(np.arange(power.shape[1]), power.shape)
    np.add.at(out, (target_rows, cols), power)
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def soft_threshold_numba(values, tau):
        out = np.empty_like(values)
        tau2 = tau * tau
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                v = values[i, j]
                mag2 = v.real * v.real + v.imag * v.imag
                if mag2 > tau2:
                    out[i, j] = v * (1.0 - tau / np.sqrt(mag2))
                else:
                    out[i, j] = 0.0
        return out

    @numba.njit(cache=True)
    def transport_combine_numba(dt_part, domega_part, values, omega, alpha):
        out = np.empty_like(values)
        for i in range(values.shape[0]):
            w = _TWO_PI * omega[i]
            for j in range(values.shape[1]):
                out[i, j] = dt_part[i, j] - 1j * w * values[i, j] + domega_part[i, j] * alpha[j]
        return out

    @numba.njit(cache=True)
    def transport_combine_adj_numba(dt_part, domega_part, values, omega, alpha):
        out = np.empty_like(values)
        for i in range(values.shape[0]):
            w = _TWO_PI * omega[i]
            for j in range(values.shape[1]):
                out[i, j] = dt_part[i, j] + 1j * w * values[i, j] + domega_part[i, j] * alpha[j]
        return out

    @numba.njit(cache=True)
    def scatter_energy_numba(power, target_rows, out):
        for i in range(power.shape[0]):
            for j in range(power.shape[1]):
                out[target_rows[i, j], j] += power[i, j]
        return out


if USE_NUMBA:
    soft_threshold = soft_threshold_numba
    transport_combine = transport_combine_numba
    transport_combine_adj = transport_combine_adj_numba
    scatter_energy = scatter_energy_numba
else:
    soft_threshold = soft_threshold_numpy
    transport_combine = transport_combine_numpy
    transport_combine_adj = transport_combine_adj_numpy
    scatter_energy = scatter_energy_numpy
