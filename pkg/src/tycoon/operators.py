"""Discrete TF-plane operators and the objective functional.

The reconstruction operator maps a TF matrix to the signal it represents
(factor 2 encodes the implicit negative-frequency half). The transport
residual measures how far each coefficient is from oscillating at its own
row frequency, corrected by a per-time chirp factor acting along the
frequency axis. Both come with exact discrete adjoints under the real
inner product Re<X, Y> = sum(Re X * Re Y + Im X * Im Y), which is what
the gradient expressions and the solver's convergence argument need.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from . import _kernels
from .types import ChirpTrack, SampledSignal, TFGrid, TFMatrix, TycoonParams

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# cached stencils
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _spectral_multiplier(n_cols: int, dt: float) -> np.ndarray:
    """i*2*pi*xi on the FFT frequency ladder of an n_cols-point transform.

    For even length the Nyquist bin's multiplier is zeroed, which keeps the
    operator exactly skew-adjoint and real-to-real.
    """
    mult = 1j * _TWO_PI * np.fft.fftfreq(n_cols, d=dt)
    if n_cols % 2 == 0:
        mult[n_cols // 2] = 0.0
    mult.setflags(write=False)
    return mult


@lru_cache(maxsize=64)
def _forward_diff_matrix(n_cols: int, dt: float) -> np.ndarray:
    """Right-multiplication matrix D with (F @ D) the forward difference.

    The last column uses the backward difference so the operator stays
    first-order accurate at the boundary.
    """
    d = np.zeros((n_cols, n_cols))
    idx = np.arange(n_cols - 1)
    d[idx, idx] = -1.0 / dt
    d[idx + 1, idx] = 1.0 / dt
    d[n_cols - 1, n_cols - 1] = 1.0 / dt
    d[n_cols - 2, n_cols - 1] = -1.0 / dt
    d.setflags(write=False)
    return d


@lru_cache(maxsize=64)
def _freq_diff_matrix(n_rows: int, dw: float) -> np.ndarray:
    """Left-multiplication matrix for d/dw: central differences inside,
    second-order one-sided stencils on the first and last rows (the
    frequency axis is not periodic)."""
    if n_rows < 3:
        raise ValueError(f"frequency derivative needs at least 3 rows, got {n_rows}")
    d = np.zeros((n_rows, n_rows))
    idx = np.arange(1, n_rows - 1)
    d[idx, idx - 1] = -0.5 / dw
    d[idx, idx + 1] = 0.5 / dw
    d[0, 0:3] = np.array([-1.5, 2.0, -0.5]) / dw
    d[-1, -3:] = np.array([0.5, -2.0, 1.5]) / dw
    d.setflags(write=False)
    return d


@lru_cache(maxsize=64)
def _freq_diff_sparse(n_rows: int, dw: float, transpose: bool):
    """CSR form of the frequency stencil (or its transpose): the matrix is
    banded, so sparse application beats the dense matmul by ~n_rows."""
    d = _freq_diff_matrix(n_rows, dw)
    return sparse.csr_matrix(d.T if transpose else d)


@lru_cache(maxsize=64)
def _time_diff_sparse(n_cols: int, dt: float, transpose: bool):
    d = _forward_diff_matrix(n_cols, dt)
    # applied from the left to the transposed matrix: F @ D == (D.T @ F.T).T
    return sparse.csr_matrix(d.T if transpose else d)


# ---------------------------------------------------------------------------
# ndarray-level operators (used directly by the solver's hot loop)
# ---------------------------------------------------------------------------

def _dt_vals(vals: np.ndarray, grid: TFGrid, method: str) -> np.ndarray:
    if method == "spectral":
        mult = _spectral_multiplier(grid.n_cols, grid.dt)
        return np.fft.ifft(np.fft.fft(vals, axis=1) * mult, axis=1)
    return (_time_diff_sparse(grid.n_cols, grid.dt, True) @ vals.T).T


def _dt_adj_vals(vals: np.ndarray, grid: TFGrid, method: str) -> np.ndarray:
    # the spectral derivative is exactly skew-adjoint; the finite-difference
    # one transposes its stencil
    if method == "spectral":
        return -_dt_vals(vals, grid, "spectral")
    return (_time_diff_sparse(grid.n_cols, grid.dt, False) @ vals.T).T


def _domega_vals(vals: np.ndarray, grid: TFGrid) -> np.ndarray:
    return _freq_diff_sparse(grid.n_rows, grid.dw, False) @ vals


def _domega_adj_vals(vals: np.ndarray, grid: TFGrid) -> np.ndarray:
    return _freq_diff_sparse(grid.n_rows, grid.dw, True) @ vals


def _a_vals(vals: np.ndarray, grid: TFGrid) -> np.ndarray:
    return 2.0 * grid.dw * np.sum(vals.real, axis=0)


def _a_adj_vals(g: np.ndarray, grid: TFGrid) -> np.ndarray:
    row = 2.0 * grid.dw * np.asarray(g, dtype=np.float64)
    return np.broadcast_to(row, (grid.n_rows, grid.n_cols))


def _b_vals(vals: np.ndarray, alpha: np.ndarray, grid: TFGrid, method: str) -> np.ndarray:
    dt_part = np.ascontiguousarray(_dt_vals(vals, grid, method))
    dom_part = np.ascontiguousarray(_domega_vals(vals, grid))
    return _kernels.transport_combine(dt_part, dom_part, vals, grid.omegas, alpha)


def _b_adj_vals(vals: np.ndarray, alpha: np.ndarray, grid: TFGrid, method: str) -> np.ndarray:
    dt_part = np.ascontiguousarray(_dt_adj_vals(vals, grid, method))
    dom_part = np.ascontiguousarray(_domega_adj_vals(vals, grid))
    return _kernels.transport_combine_adj(dt_part, dom_part, vals, grid.omegas, alpha)


def _grad_vals(vals: np.ndarray, alpha: np.ndarray, samples: np.ndarray,
               mu: float, grid: TFGrid, method: str) -> np.ndarray:
    residual = _a_vals(vals, grid) - samples
    grad = (2.0 * grid.dt) * _a_adj_vals(residual, grid)
    if mu > 0.0:
        b = _b_vals(vals, alpha, grid, method)
        grad = grad + (2.0 * grid.dt * grid.dw * mu) * _b_adj_vals(b, alpha, grid, method)
    else:
        grad = grad.astype(np.complex128)
    return grad


@dataclass(frozen=True)
class FunctionalTerms:
    """The objective split into its four summands."""

    total: float
    data_term: float
    transport_term: float
    l1_term: float
    alpha_term: float


def _h_terms(vals: np.ndarray, alpha: np.ndarray, samples: np.ndarray,
             mu_tilde: float, lambda_tilde: float, gamma: float,
             grid: TFGrid, method: str) -> FunctionalTerms:
    residual = _a_vals(vals, grid) - samples
    data = grid.dt * float(np.sum(residual**2))
    mu = mu_tilde * lambda_tilde
    if mu > 0.0:
        b = _b_vals(vals, alpha, grid, method)
        transport = mu * grid.dt * grid.dw * float(np.sum(b.real**2 + b.imag**2))
    else:
        transport = 0.0
    # the l1 term carries the same cell measure dt*dw as the l2 term so both
    # are Riemann sums and lambda_tilde's meaning is grid-independent
    l1 = mu_tilde * (1.0 - lambda_tilde) * grid.dt * grid.dw * float(np.sum(np.abs(vals)))
    alpha_term = gamma * grid.dt * float(np.sum(alpha**2))
    return FunctionalTerms(
        total=data + transport + l1 + alpha_term,
        data_term=data,
        transport_term=transport,
        l1_term=l1,
        alpha_term=alpha_term,
    )


# ---------------------------------------------------------------------------
# public API on the typed containers
# ---------------------------------------------------------------------------

def _alpha_values(alpha, n_cols: int) -> np.ndarray:
    vals = alpha.values if isinstance(alpha, ChirpTrack) else np.ascontiguousarray(alpha, dtype=np.float64)
    if vals.shape != (n_cols,):
        raise ValueError(f"chirp track length {vals.shape} does not match grid columns {n_cols}")
    return vals


def _signal_values(signal: SampledSignal, grid: TFGrid) -> np.ndarray:
    if signal.n_samples != grid.n_cols:
        raise ValueError(f"signal length {signal.n_samples} does not match grid columns {grid.n_cols}")
    if signal.dt != grid.dt:
        raise ValueError("signal sampling period does not match the grid")
    return signal.samples


def reconstruct(F: TFMatrix) -> np.ndarray:
    """Signal represented by F: out[m] = 2*dw*sum_n Re F[n, m].

    Real by construction; this is also the data-fidelity forward map.
    """
    return _a_vals(F.values, F.grid)


def reconstruct_adjoint(g, grid: TFGrid) -> TFMatrix:
    """Adjoint of :func:`reconstruct`: every row equals 2*dw*g."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (grid.n_cols,):
        raise ValueError(f"vector length {g.shape} does not match grid columns {grid.n_cols}")
    return TFMatrix(grid, _a_adj_vals(g, grid).astype(np.complex128))


def time_derivative(F: TFMatrix, method: str = "spectral") -> TFMatrix:
    """Partial derivative along the time axis (spectral by default)."""
    return TFMatrix(F.grid, _dt_vals(F.values, F.grid, method))


def frequency_derivative(F: TFMatrix) -> TFMatrix:
    """Partial derivative along the frequency axis (central differences)."""
    return TFMatrix(F.grid, _domega_vals(F.values, F.grid))


def transport_residual(F: TFMatrix, alpha, method: str = "spectral") -> TFMatrix:
    """d/dt F - i*2*pi*w*F + alpha(t) * d/dw F, entrywise on the lattice."""
    a = _alpha_values(alpha, F.grid.n_cols)
    return TFMatrix(F.grid, _b_vals(F.values, a, F.grid, method))


def transport_residual_adjoint(G: TFMatrix, alpha, method: str = "spectral") -> TFMatrix:
    """Exact discrete adjoint of :func:`transport_residual`."""
    a = _alpha_values(alpha, G.grid.n_cols)
    return TFMatrix(G.grid, _b_adj_vals(G.values, a, G.grid, method))


def functional_terms(F: TFMatrix, alpha, signal: SampledSignal,
                     params: TycoonParams, mu_tilde: float) -> FunctionalTerms:
    """Evaluate the objective at (F, alpha), split into its four terms."""
    a = _alpha_values(alpha, F.grid.n_cols)
    samples = _signal_values(signal, F.grid)
    return _h_terms(F.values, a, samples, mu_tilde, params.lambda_tilde,
                    params.gamma, F.grid, params.deriv_method)


def smooth_gradient(F: TFMatrix, alpha, signal: SampledSignal, mu: float,
                    method: str = "spectral") -> TFMatrix:
    """Gradient of the smooth part (data + transport terms) at F.

    Computed by operator composition with the exact adjoints:
    2*dt*A_adj(A F - f) + 2*dt*dw*mu*B_adj(B F).
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    a = _alpha_values(alpha, F.grid.n_cols)
    samples = _signal_values(signal, F.grid)
    return TFMatrix(F.grid, _grad_vals(F.values, a, samples, mu, F.grid, method))
