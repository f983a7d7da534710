"""Core containers: the TF lattice, TF matrices, chirp tracks, sampled
signals and solver hyperparameters."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DERIV_METHODS = ("spectral", "finite-difference")


@dataclass(frozen=True)
class TFGrid:
    """Uniform time-frequency lattice shared by every operator.

    Times are t_m = m*dt for m = 0..M and frequencies w_n = n*dw for
    n = 0..N, with dw = 1/(M*dt) and N = ceil(M/2). Only nonnegative
    frequencies are represented; for real signals the negative half is
    implied by Hermitian symmetry and accounted for by the factor 2 in
    the reconstruction operator.
    """

    M: int
    N: int
    dt: float
    dw: float

    def __post_init__(self):
        if self.M < 4:
            raise ValueError(f"grid too small: M={self.M} < 4")
        if self.dt <= 0:
            raise ValueError(f"sampling period must be positive, got {self.dt}")
        if self.N != math.ceil(self.M / 2):
            raise ValueError(f"N must equal ceil(M/2)={math.ceil(self.M / 2)}, got {self.N}")
        if self.dw != 1.0 / (self.M * self.dt):
            raise ValueError("dw must equal 1/(M*dt) exactly")

    @property
    def n_rows(self) -> int:
        return self.N + 1

    @property
    def n_cols(self) -> int:
        return self.M + 1

    @cached_property
    def times(self) -> np.ndarray:
        t = np.arange(self.n_cols) * self.dt
        t.setflags(write=False)
        return t

    @cached_property
    def omegas(self) -> np.ndarray:
        w = np.arange(self.n_rows) * self.dw
        w.setflags(write=False)
        return w


def make_grid(M: int, dt: float) -> TFGrid:
    """Build the lattice for a signal of M+1 samples at period dt."""
    if M < 4:
        raise ValueError(f"grid too small: M={M} < 4")
    if dt <= 0:
        raise ValueError(f"sampling period must be positive, got {dt}")
    return TFGrid(M=int(M), N=math.ceil(M / 2), dt=float(dt), dw=1.0 / (M * dt))


@dataclass
class TFMatrix:
    """Complex (N+1) x (M+1) time-frequency representation.

    Entry (n, m) is the coefficient at frequency n*dw and time m*dt.
    """

    grid: TFGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        expect = (self.grid.n_rows, self.grid.n_cols)
        if vals.shape != expect:
            raise ValueError(f"values shape {vals.shape} does not match grid {expect}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("TF matrix contains non-finite entries")
        self.values = vals

    @classmethod
    def zeros(cls, grid: TFGrid) -> "TFMatrix":
        return cls(grid, np.zeros((grid.n_rows, grid.n_cols), dtype=np.complex128))


@dataclass
class ChirpTrack:
    """Per-time chirp factor estimate, in Hz per second."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("chirp track must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("chirp track contains non-finite entries")
        self.values = vals

    @classmethod
    def zeros(cls, grid: TFGrid) -> "ChirpTrack":
        return cls(np.zeros(grid.n_cols))


@dataclass
class SampledSignal:
    """Real signal sampled uniformly at period dt."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        vals = np.ascontiguousarray(self.samples, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 5:
            raise ValueError("signal must be a 1-D vector of at least 5 samples")
        if not np.all(np.isfinite(vals)):
            raise ValueError("signal contains non-finite samples")
        if self.dt <= 0:
            raise ValueError(f"sampling period must be positive, got {self.dt}")
        self.samples = vals

    @property
    def n_samples(self) -> int:
        return self.samples.size

    def grid(self) -> TFGrid:
        return make_grid(self.n_samples - 1, self.dt)


@dataclass
class TycoonParams:
    """Hyperparameters for the alternating solver.

    ``mu_schedule`` is the decreasing continuation schedule for the
    combined regularization weight; ``lambda_tilde`` splits it between
    the transport penalty (weight mu_tilde*lambda_tilde) and the l1
    sparsity penalty (weight mu_tilde*(1-lambda_tilde)). ``eps1``/``eps2``
    stop the outer alternation on the relative changes of the TF matrix
    and the chirp track; ``eps_inner`` stops the FISTA inner loop, and is
    tighter by default because cross-row phase coherence (what the chirp
    update reads) is carried by low-curvature directions that a loosely
    stopped inner loop never develops.
    """

    mu_schedule: np.ndarray
    lambda_tilde: float = 0.99
    gamma: float = 1e-3
    eps1: float = 5e-4
    eps2: float = 5e-4
    eps_inner: float = 1e-5
    max_inner_iters: int = 2000
    max_outer_iters: int = 20
    deriv_method: str = "spectral"

    def __post_init__(self):
        sched = np.ascontiguousarray(self.mu_schedule, dtype=np.float64)
        if sched.ndim != 1 or sched.size == 0:
            raise ValueError("mu_schedule must be a non-empty 1-D sequence")
        if np.any(sched <= 0):
            raise ValueError("mu_schedule entries must be positive")
        if sched.size > 1 and np.any(np.diff(sched) >= 0):
            raise ValueError("mu_schedule must be strictly decreasing")
        if not 0.0 <= self.lambda_tilde <= 1.0:
            raise ValueError(f"lambda_tilde must lie in [0, 1], got {self.lambda_tilde}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.eps1 <= 0 or self.eps2 <= 0 or self.eps_inner <= 0:
            raise ValueError("stopping tolerances must be positive")
        if self.max_inner_iters < 1 or self.max_outer_iters < 1:
            raise ValueError("iteration caps must be positive")
        if self.deriv_method not in DERIV_METHODS:
            raise ValueError(f"deriv_method must be one of {DERIV_METHODS}")
        self.mu_schedule = sched


def default_params(signal: SampledSignal, stages: int = 9, span=(1e1, 1e-7), **overrides) -> TycoonParams:
    """Default hyperparameters for a given signal.

    The schedule holds ``stages`` values, log-uniform between
    span[0]*E and span[1]*E where E = dt*||f||^2 is the energy of the
    input. The first stage is regularization-dominated, so the iterate
    emerges from zero under full transport pressure and settles into a
    phase-coherent ridge whose chirp track is readable; by the last
    stage the penalty is negligible and the fit is tight. A zero signal
    has no energy scale, so it falls back to a single unit stage (the
    solve is trivial there).
    """
    energy = signal.dt * float(np.sum(signal.samples**2))
    if energy == 0.0:
        warnings.warn("zero signal: falling back to a single-stage schedule")
        schedule = np.array([1.0])
    else:
        schedule = np.geomspace(span[0] * energy, span[1] * energy, stages)
    return TycoonParams(mu_schedule=schedule, **overrides)
