"""Evaluation: ideal power spectra, the 1-D optimal-transport distance, the
time-integrated transport score, and dynamic-range compression for rendering."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .synth import GIMTComponent
from .types import TFGrid, TFMatrix


@dataclass
class TvPS:
    """Nonnegative time-varying power spectrum on a TF lattice."""

    grid: TFGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        expect = (self.grid.n_rows, self.grid.n_cols)
        if vals.shape != expect:
            raise ValueError(f"values shape {vals.shape} does not match grid {expect}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("power spectrum contains non-finite entries")
        if np.any(vals < 0):
            raise ValueError("power spectrum must be nonnegative")
        self.values = vals


def ideal_tvps(components, grid: TFGrid) -> TvPS:
    """Rasterized ideal power spectrum of known components.

    At each in-support time, a component deposits mass amp^2 split linearly
    between the two frequency bins bracketing its finite-difference
    instantaneous frequency (the split keeps the score continuous in the
    IF). Samples whose IF falls outside [0, N*dw] are dropped and counted
    in a warning.
    """
    if isinstance(components, GIMTComponent):
        components = [components]
    out = np.zeros((grid.n_rows, grid.n_cols))
    dropped = 0
    for c in components:
        m0, m1 = c.support
        if c.amp.size != grid.n_cols:
            raise ValueError("component length does not match the grid")
        if m1 - m0 + 1 < 3:
            raise ValueError("support too short to differentiate the phase (< 3 samples)")
        sl = slice(m0, m1 + 1)
        if_hz = np.gradient(c.phase[sl], grid.dt)
        mass = c.amp[sl] ** 2
        x = if_hz / grid.dw
        cols = np.arange(m0, m1 + 1)
        valid = (x >= 0.0) & (x <= grid.N)
        dropped += int(np.count_nonzero(~valid))
        lo = np.floor(x[valid]).astype(np.int64)
        frac = x[valid] - lo
        np.add.at(out, (lo, cols[valid]), (1.0 - frac) * mass[valid])
        hi_mask = frac > 0.0
        np.add.at(out, (lo[hi_mask] + 1, cols[valid][hi_mask]), frac[hi_mask] * mass[valid][hi_mask])
    if dropped:
        warnings.warn(f"{dropped} component samples above the Nyquist frequency were dropped")
    return TvPS(grid, out)


def tvps_from_tfr(F: TFMatrix) -> TvPS:
    """Entrywise squared magnitude of a TF representation."""
    return TvPS(F.grid, F.values.real**2 + F.values.imag**2)


def ot1d(p, q, bin_width: float) -> float:
    """1-D optimal-transport (earth mover) distance between two histograms
    on a regular lattice: bin_width times the l1 gap of their CDFs."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("histograms must be 1-D vectors of equal length")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("histograms must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("histograms must each sum to 1 within 1e-9")
    return float(bin_width * np.sum(np.abs(np.cumsum(p - q))))


@dataclass(frozen=True)
class DMetricReport:
    """Score plus the per-column transport distances (NaN where skipped)."""

    value: float
    skipped_columns: int
    per_column: np.ndarray


def d_metric_profile(S: TvPS, S_tilde: TvPS, mass_floor: float = 1e-12) -> DMetricReport:
    """Column-resolved version of :func:`d_metric`.

    Columns where either side carries total mass below ``mass_floor`` are
    skipped (they hold no oscillation to compare) and counted, rather than
    being replaced by a uniform density that would inject distance unrelated
    to analyzer quality.
    """
    if S.grid != S_tilde.grid:
        raise ValueError("power spectra live on different grids")
    grid = S.grid
    mass_p = S.values.sum(axis=0)
    mass_q = S_tilde.values.sum(axis=0)
    valid = (mass_p > mass_floor) & (mass_q > mass_floor)
    skipped = int(np.count_nonzero(~valid))
    if skipped == grid.n_cols:
        raise ValueError("all columns are degenerate (no mass on either side)")
    P = S.values[:, valid] / mass_p[valid]
    Q = S_tilde.values[:, valid] / mass_q[valid]
    col_dist = grid.dw * np.sum(np.abs(np.cumsum(P - Q, axis=0)), axis=0)
    per_column = np.full(grid.n_cols, np.nan)
    per_column[valid] = col_dist
    value = 100.0 * grid.dt * float(col_dist.sum())
    return DMetricReport(value, skipped, per_column)


def d_metric(S: TvPS, S_tilde: TvPS) -> float:
    """100 times the time-integrated optimal-transport distance between the
    column-normalized power spectra. Smaller is better; 0 means the
    estimated spectrum concentrates exactly where the ideal one does."""
    return d_metric_profile(S, S_tilde).value


def compress_dynamic_range(S: TvPS, quantile: float = 0.999) -> np.ndarray:
    """Clip above the given quantile and rescale to [0, 1] (linear scale)."""
    if not 0.0 < quantile <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {quantile}")
    vals = S.values
    if not np.any(vals > 0):
        return np.zeros_like(vals)
    cap = float(np.quantile(vals, quantile))
    if cap <= 0.0:
        cap = float(vals.max())
    return np.minimum(vals, cap) / cap
