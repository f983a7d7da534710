"""The alternating solver: monotone FISTA for the TF matrix, a closed-form
chirp-track update, and warm-started continuation over a decreasing
regularization schedule."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .operators import (
    FunctionalTerms,
    _a_adj_vals,
    _a_vals,
    _alpha_values,
    _b_adj_vals,
    _b_vals,
    _domega_vals,
    _dt_vals,
    _h_terms,
    _signal_values,
)
from .types import ChirpTrack, SampledSignal, TFGrid, TFMatrix, TycoonParams, default_params

_TWO_PI = 2.0 * np.pi


class SolverError(RuntimeError):
    """Raised when an iteration produces non-finite values or an invalid
    step size; carries whatever trace was accumulated before the abort."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------------------
# Lipschitz constant
# ---------------------------------------------------------------------------

def power_iteration(alpha, grid: TFGrid, mu: float, iters: int = 100, seed: int = 0,
                    tol: float = 1e-7, method: str = "spectral", operator=None,
                    v0: np.ndarray | None = None, return_vector: bool = False):
    """Largest eigenvalue of the smooth-term curvature map by power iteration.

    The map F -> 2*dt*A_adj(A F) + 2*dt*dw*mu*B_adj(B F) is self-adjoint and
    positive semidefinite on the real embedding of the matrix space, so the
    Rayleigh quotient of the iterates converges to its spectral norm. Returns
    (estimate, converged), plus the final vector when ``return_vector`` is
    set (useful to warm-start the next estimate). ``operator`` overrides the
    map (test hook); ``v0`` overrides the seeded random start.
    """
    a = _alpha_values(alpha, grid.n_cols)

    if operator is None:
        def operator(x):
            out = (2.0 * grid.dt) * _a_adj_vals(_a_vals(x, grid), grid)
            if mu > 0.0:
                out = out + (2.0 * grid.dt * grid.dw * mu) * _b_adj_vals(
                    _b_vals(x, a, grid, method), a, grid, method)
            return out

    if v0 is None:
        rng = np.random.default_rng(seed)
        shape = (grid.n_rows, grid.n_cols)
        v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    else:
        v = np.array(v0, dtype=np.complex128)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    converged = False
    for _ in range(iters):
        w = operator(v)
        lam = float(np.vdot(v, w).real)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            lam, converged = 0.0, True
            break
        v = w / nrm
        if abs(lam - lam_prev) <= tol * max(abs(lam), 1e-30):
            converged = True
            break
        lam_prev = lam
    out = (lam, converged)
    return out + (v,) if return_vector else out


def estimate_lipschitz(alpha, grid: TFGrid, mu: float, iters: int = 50, seed: int = 0,
                       method: str = "spectral", safety: float = 1.05,
                       v0: np.ndarray | None = None, return_vector: bool = False):
    """Step-size bound for FISTA: power-iteration eigenvalue estimate of the
    curvature map, inflated by a small safety factor."""
    if iters < 20:
        raise ValueError(f"power iteration needs at least 20 iterations, got {iters}")
    lam, converged, v = power_iteration(alpha, grid, mu, iters=iters, seed=seed,
                                        method=method, v0=v0, return_vector=True)
    if not converged:
        warnings.warn("power iteration did not converge; using last Rayleigh quotient")
    if return_vector:
        return safety * lam, v
    return safety * lam


# ---------------------------------------------------------------------------
# proximal operator
# ---------------------------------------------------------------------------

def prox_l1(F: TFMatrix, tau: float) -> TFMatrix:
    """Complex soft threshold: each entry's magnitude shrinks by tau with the
    phase preserved; entries with |F| <= tau become 0."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    return TFMatrix(F.grid, _kernels.soft_threshold(F.values, float(tau)))


# ---------------------------------------------------------------------------
# monotone FISTA inner loop
# ---------------------------------------------------------------------------

def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    num = float(np.linalg.norm(new - old))
    den = float(np.linalg.norm(old))
    if num < 1e-14 and den < 1e-14:
        return 0.0
    return num / (den + 1e-30)


def _fista_vals(F0: np.ndarray, alpha: np.ndarray, samples: np.ndarray,
                params: TycoonParams, mu_tilde: float, grid: TFGrid, L: float,
                h_trace=None):
    if L <= 0:
        raise SolverError(f"nonpositive Lipschitz estimate L={L}")
    method = params.deriv_method
    mu = mu_tilde * params.lambda_tilde
    lam_l1 = mu_tilde * (1.0 - params.lambda_tilde) * grid.dt * grid.dw
    thresh = lam_l1 / L
    alpha_term = params.gamma * grid.dt * float(np.sum(alpha**2))
    cell = grid.dt * grid.dw

    # forward images A(x) and B(x) are tracked alongside the iterates:
    # the relaxation is linear, so only the fresh proximal candidate needs
    # new transforms (one B application for its image, one adjoint for the
    # gradient), roughly halving the FFT work per iteration
    def images(x):
        a_img = _a_vals(x, grid)
        b_img = _b_vals(x, alpha, grid, method) if mu > 0.0 else None
        return a_img, b_img

    def h_from_images(x, a_img, b_img):
        total = grid.dt * float(np.sum((a_img - samples) ** 2)) + alpha_term
        total += lam_l1 * float(np.sum(np.abs(x)))
        if b_img is not None:
            total += mu * cell * float(np.sum(b_img.real**2 + b_img.imag**2))
        return total

    F = F0.copy()
    aF, bF = images(F)
    h_curr = h_from_images(F, aF, bF)
    if h_trace is not None:
        h_trace.append(h_curr)
    z, aZ, bZ = F, aF, bF
    for k in range(params.max_inner_iters):
        grad = (2.0 * grid.dt) * _a_adj_vals(aZ - samples, grid)
        if bZ is not None:
            grad = grad + (2.0 * cell * mu) * _b_adj_vals(bZ, alpha, grid, method)
        cand = _kernels.soft_threshold(np.ascontiguousarray(z - grad / L), thresh)
        aC, bC = images(cand)
        h_cand = h_from_images(cand, aC, bC)
        if not np.isfinite(h_cand):
            raise SolverError(f"non-finite objective at inner iteration {k}")
        # monotone step plus the relaxation: with the candidate accepted the
        # probe point is the standard k/(k+2) momentum extrapolation; with it
        # rejected the candidate still steers the next probe
        accept = h_cand < h_curr
        c = (k / (k + 2)) if accept else ((k + 1) / (k + 2))
        z = (cand if accept else F) + c * (cand - F)
        aZ = (aC if accept else aF) + c * (aC - aF)
        if bZ is not None:
            bZ = (bC if accept else bF) + c * (bC - bF)
        # progress is measured against the proximal candidate: on accepted
        # steps this is exactly ||F_{k+1} - F_k||, and on rejected steps it
        # keeps a transient overshoot of the relaxation from stopping the
        # loop while real progress is still available
        delta = float(np.linalg.norm(cand - F))
        base = float(np.linalg.norm(F))
        if accept:
            F, h_curr, aF, bF = cand, h_cand, aC, bC
        if h_trace is not None:
            h_trace.append(h_curr)
        if delta <= params.eps_inner * (base + 1e-30):
            return F, k + 1
    return F, params.max_inner_iters


def fista(F0: TFMatrix, alpha, signal: SampledSignal, params: TycoonParams,
          mu_tilde: float, h_trace=None, power_seed: int = 0):
    """Minimize the objective over F at fixed alpha. Returns (F, iterations).

    Each proximal candidate is accepted only if it decreases the objective,
    so the recorded objective sequence is non-increasing.
    """
    a = _alpha_values(alpha, F0.grid.n_cols)
    samples = _signal_values(signal, F0.grid)
    mu = mu_tilde * params.lambda_tilde
    L = estimate_lipschitz(a, F0.grid, mu, seed=power_seed, method=params.deriv_method)
    vals, iters = _fista_vals(F0.values, a, samples, params, mu_tilde, F0.grid, L,
                              h_trace=h_trace)
    return TFMatrix(F0.grid, vals), iters


# ---------------------------------------------------------------------------
# closed-form chirp update
# ---------------------------------------------------------------------------

def _update_chirp_vals(vals: np.ndarray, grid: TFGrid, gamma_over_mu: float,
                       method: str) -> np.ndarray:
    dom = _domega_vals(vals, grid)
    drift = _dt_vals(vals, grid, method) - (1j * _TWO_PI) * grid.omegas[:, None] * vals
    num = -np.sum((dom.conj() * drift).real, axis=0)
    den = np.sum(dom.real**2 + dom.imag**2, axis=0) + gamma_over_mu
    return num / den


def update_chirp(F: TFMatrix, gamma_over_mu: float, method: str = "spectral") -> ChirpTrack:
    """Exact minimizer of the per-time quadratic in the chirp factor.

    For each column the transport term is a quadratic in alpha(t_m) whose
    unique minimizer is -sum_n Re(conj(dwF) * (dtF - i*2*pi*w*F)) divided by
    sum_n |dwF|^2 + gamma/mu; the ridge term keeps the denominator positive.
    """
    if gamma_over_mu <= 0:
        raise ValueError(f"gamma/mu must be positive, got {gamma_over_mu}")
    return ChirpTrack(_update_chirp_vals(F.values, F.grid, gamma_over_mu, method))


# ---------------------------------------------------------------------------
# alternating outer loop with continuation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OuterRecord:
    """One alternating iteration: which stage it belongs to, the inner
    iteration count, the objective terms at the new iterate, and the
    relative changes of F and alpha."""

    mu_tilde: float
    inner_iterations: int
    terms: FunctionalTerms
    rel_change_f: float
    rel_change_alpha: float


@dataclass
class SolveTrace:
    records: list = field(default_factory=list)
    lipschitz: float = 0.0

    def stages(self):
        """Records grouped by schedule stage, in solve order."""
        grouped: list = []
        for rec in self.records:
            if not grouped or grouped[-1][0] != rec.mu_tilde:
                grouped.append((rec.mu_tilde, []))
            grouped[-1][1].append(rec)
        return grouped


@dataclass
class TycoonResult:
    F: TFMatrix
    alpha: ChirpTrack
    trace: SolveTrace
    chosen_mu_tilde: float


def select_stage_discrepancy(trace: SolveTrace, noise_std: float, grid: TFGrid) -> int:
    """Stage index whose final data residual first reaches the noise floor.

    Scans stages from the largest regularization weight down and returns the
    first whose data term is at most dt*(M+1)*noise_std^2; if none qualifies,
    the last (least regularized) stage is returned.
    """
    stages = trace.stages()
    if not stages:
        raise ValueError("empty solve trace")
    if noise_std < 0:
        raise ValueError("noise level must be nonnegative")
    threshold = grid.dt * grid.n_cols * noise_std**2
    for i, (_, recs) in enumerate(stages):
        if recs[-1].terms.data_term <= threshold:
            return i
    return len(stages) - 1


def solve(signal: SampledSignal, params: TycoonParams | None = None,
          noise_std: float | None = None, power_seed: int = 0) -> TycoonResult:
    """Run the full alternating scheme on a signal.

    Starts from F = 0 and alpha = 0, then for each stage of the decreasing
    schedule alternates the FISTA step with the closed-form chirp update
    until both relative-change criteria are met, warm-starting every stage
    from the previous one. By default the last stage's iterate is returned;
    when ``noise_std`` is given, the stage picked by the discrepancy
    principle is returned instead.
    """
    if params is None:
        params = default_params(signal)
    grid = signal.grid()
    samples = signal.samples
    method = params.deriv_method

    F = np.zeros((grid.n_rows, grid.n_cols), dtype=np.complex128)
    alpha = np.zeros(grid.n_cols)
    trace = SolveTrace()
    snapshots = []
    L = 0.0
    power_v = None  # warm start: alpha moves little between outer iterations
    for mu_tilde in params.mu_schedule:
        mu = mu_tilde * params.lambda_tilde
        for _ in range(params.max_outer_iters):
            L, power_v = estimate_lipschitz(alpha, grid, mu, seed=power_seed, method=method,
                                            v0=power_v, return_vector=True)
            try:
                F_new, inner = _fista_vals(F, alpha, samples, params, mu_tilde, grid, L)
            except SolverError as err:
                raise SolverError(str(err), trace=trace) from None
            if mu > 0.0:
                alpha_new = _update_chirp_vals(F_new, grid, params.gamma / mu, method)
            else:
                alpha_new = np.zeros(grid.n_cols)
            rel_f = _rel_change(F_new, F)
            rel_a = _rel_change(alpha_new, alpha)
            terms = _h_terms(F_new, alpha_new, samples, mu_tilde, params.lambda_tilde,
                             params.gamma, grid, method)
            trace.records.append(OuterRecord(float(mu_tilde), inner, terms, rel_f, rel_a))
            F, alpha = F_new, alpha_new
            if rel_f <= params.eps1 and rel_a <= params.eps2:
                break
        snapshots.append((float(mu_tilde), F.copy(), alpha.copy()))
    trace.lipschitz = L

    if noise_std is not None:
        idx = select_stage_discrepancy(trace, noise_std, grid)
    else:
        idx = len(snapshots) - 1
    mu_chosen, F_out, alpha_out = snapshots[idx]
    return TycoonResult(TFMatrix(grid, F_out), ChirpTrack(alpha_out), trace, mu_chosen)
