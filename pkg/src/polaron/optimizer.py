"""Energy minimization over the coherent-state expansion.

At fixed N the weights and displacements are optimized jointly with
L-BFGS (quasi-Newton with inverse-curvature memory) using the exact
analytic gradient.  N is grown incrementally: the new row is seeded as an
antipolaron copy of the leading row, sign-flipped below a candidate
crossover frequency; a log-spaced grid of crossover candidates is
optimized and the lowest-energy result kept, falling back to the previous
state if no candidate improves, so the energy is nonincreasing in N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from . import kernels
from .ansatz import (
    ModelParams,
    VariationalState,
    energy_and_gradient,
    norm_squared,
    pair_kernels,
    sh_solve,
)
from .bath import DiscretizedBath
from .errors import ConvergenceError, ParameterError

__all__ = ["OptimizerConfig", "SolveReport", "optimize", "grow", "solve_sequence"]

_PENALTY_ENERGY = 1e6  # returned when the line search hits a degenerate norm


@dataclass
class OptimizerConfig:
    grad_tol: float = 1e-9
    max_iters: int = 50_000
    num_restarts: int = 4
    crossover_grid: np.ndarray | None = None
    seed: int = 0
    prune_tol: float = 1e-10
    max_polish_rounds: int = 6
    trace: bool = False

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ParameterError(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class SolveReport:
    state: VariationalState
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    energy_history_per_N: list = field(default_factory=list)
    message: str = ""
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "num_polarons": self.state.num_polarons,
            "energy_history_per_N": list(self.energy_history_per_N),
            "message": self.message,
            "state": self.state.to_json(),
        }


def _pack(state: VariationalState) -> np.ndarray:
    return np.concatenate([state.C, state.F.ravel()])


def _unpack(x: np.ndarray, n: int, m: int) -> VariationalState:
    return VariationalState(x[:n].copy(), x[n:].reshape(n, m).copy())


def _objective(x, n, m, delta, omegas, couplings):
    e, norm, g_c, g_f = kernels.energy_norm_gradient(
        delta, omegas, couplings, x[:n], x[n:].reshape(n, m)
    )
    if not np.isfinite(e):
        return _PENALTY_ENERGY, np.zeros_like(x)
    return e, np.concatenate([g_c, g_f.ravel()])


def _normalize_gauge(state: VariationalState) -> VariationalState:
    """Canonical gauge: rows sorted by descending |C|, C_1 > 0, unit norm.

    All three operations leave the Rayleigh quotient and every observable
    unchanged (permutation, global sign, and scale invariance).
    """
    order = np.argsort(-np.abs(state.C), kind="stable")
    c = state.C[order].copy()
    f = state.F[order].copy()
    if c[0] < 0:
        c = -c
    scale = np.sqrt(norm_squared(VariationalState(c, f)))
    if scale > 0 and np.isfinite(scale):
        c = c / scale
    return VariationalState(c, f)


def _best_weights(F, bath, params):
    """Exact optimal weights at fixed displacements.

    With the displacements frozen the Rayleigh quotient is minimized by the
    lowest eigenvector of the generalized problem A C = E (2 K^-) C where
    A collects the tunneling and bath matrix elements.  Used as a polish
    step between quasi-Newton rounds; it jumps straight to the weight
    optimum the line search only approaches.
    """
    Km, Kp = pair_kernels(F)
    fg = F @ bath.couplings
    B = 2.0 * (F * bath.omegas) @ F.T - (fg[:, None] + fg[None, :])
    A = -params.delta * Kp + Km * B
    try:
        w, v = scipy.linalg.eigh(A, 2.0 * Km)
    except scipy.linalg.LinAlgError:
        return None, None
    return float(w[0]), v[:, 0]


def _prune(state: VariationalState, tol: float) -> VariationalState:
    """Drop rows whose weighted overlap contribution is negligible."""
    if state.num_polarons == 1:
        return state
    Km, _ = pair_kernels(state.F)
    norm = float(2.0 * state.C @ Km @ state.C)
    score = np.abs(state.C) * np.max(np.abs(state.C)[None, :] * Km, axis=1)
    keep = 2.0 * score >= tol * abs(norm)
    keep[np.argmax(np.abs(state.C))] = True
    if keep.all():
        return state
    return VariationalState(state.C[keep], state.F[keep])


def optimize(initial, bath, params, config=None) -> SolveReport:
    """Minimize the variational energy at fixed N from the given state.

    Returns a SolveReport whose energy never exceeds energy(initial); the
    run is flagged non-converged (with the optimizer message retained)
    when the gradient max-norm tolerance is not met.
    """
    config = config or OptimizerConfig()
    n, m = initial.num_polarons, initial.num_modes
    args = (n, m, params.delta, bath.omegas, bath.couplings)
    e0 = _objective(_pack(initial), *args)[0]

    trace = []
    callback = None
    if config.trace:
        def callback(xk):
            e, g = _objective(xk, *args)
            trace.append((len(trace) + 1, e, float(np.max(np.abs(g)))))

    # Alternate L-BFGS rounds with the exact weight eigensolve.  A fresh
    # round resets the curvature memory, which reliably pushes the gradient
    # below tolerances the ftol stopping rule would otherwise floor out at.
    x = _pack(initial)
    total_iters = 0
    message = ""
    prev_gnorm = np.inf
    for _ in range(config.max_polish_rounds):
        res = minimize(
            _objective,
            x,
            args=args,
            method="L-BFGS-B",
            jac=True,
            callback=callback,
            options={
                "maxiter": config.max_iters,
                "maxfun": 10 * config.max_iters,
                "gtol": config.grad_tol,
                "ftol": 1e-18,
                "maxcor": 20,
                "maxls": 100,
            },
        )
        x = res.x
        total_iters += int(res.nit)
        message = str(res.message)
        e_round, g = _objective(x, *args)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= config.grad_tol:
            break
        st = _unpack(x, n, m)
        e_weights, c_weights = _best_weights(st.F, bath, params)
        if e_weights is not None and e_weights < e_round:
            x = np.concatenate([c_weights, st.F.ravel()])
        if gnorm >= 0.7 * prev_gnorm:
            break  # stalled: the gradient is no longer shrinking
        prev_gnorm = gnorm

    state = _unpack(x, n, m)
    if _objective(x, *args)[0] > e0:  # pathologies must never raise the energy
        state = initial.copy()
    state = _prune(_normalize_gauge(state), config.prune_tol)
    e, g_c, g_f = energy_and_gradient(state, bath, params)
    grad_norm = float(max(np.max(np.abs(g_c)), np.max(np.abs(g_f))))
    converged = grad_norm <= config.grad_tol
    return SolveReport(
        state=state,
        energy=float(e),
        grad_norm=grad_norm,
        iterations=total_iters,
        converged=converged,
        energy_history_per_N=[float(e)],
        message=message,
        trace=trace,
    )


def _crossover_grid(bath, params, config) -> np.ndarray:
    if config.crossover_grid is not None:
        return np.asarray(config.crossover_grid, dtype=float)
    _, delta_r = sh_solve(bath, params)
    lo = min(delta_r, params.delta)
    hi = max(params.delta, lo * (1 + 1e-12))
    npts = max(config.num_restarts, 4)
    # always include a crossover above the whole spectrum (fully flipped
    # row), which is the only antipolaron available to few-mode instances
    return np.append(np.geomspace(lo, hi, npts), 2.0 * bath.omega_c)


def grow(report, bath, params, config=None) -> SolveReport:
    """Extend a converged solution from N to N+1 polarons.

    The new row is seeded as f^(N+1)_k = f^(1)_k * sign(omega_k - omega_x)
    for each candidate crossover omega_x (antipolaron below, polaron
    above), with a small weight C_{N+1} = 0.05 C_1.  Every candidate is
    re-optimized jointly; the best is returned, or the input solution if
    no candidate lowers the energy.
    """
    config = config or OptimizerConfig()
    grid = _crossover_grid(bath, params, config)
    best = None
    for wx in grid:
        signs = np.where(bath.omegas >= wx, 1.0, -1.0)
        c = np.append(report.state.C, 0.05 * report.state.C[0])
        f = np.vstack([report.state.F, report.state.F[0] * signs])
        cand = optimize(VariationalState(c, f), bath, params, config)
        if best is None or cand.energy < best.energy:
            best = cand
    history = list(report.energy_history_per_N)
    if best is None or best.energy >= report.energy:
        # keep the old state; monotonicity in N is enforced here
        history.append(report.energy)
        return SolveReport(
            state=report.state.copy(),
            energy=report.energy,
            grad_norm=report.grad_norm,
            iterations=0,
            converged=report.converged,
            energy_history_per_N=history,
            message="grow: no candidate improved; previous state kept",
        )
    history.append(best.energy)
    best.energy_history_per_N = history
    return best


def solve_sequence(bath, params, n_max, config=None) -> list[SolveReport]:
    """Solve for N = 1 .. n_max, growing incrementally.

    Returns one report per N; energies are nonincreasing along the list.
    """
    config = config or OptimizerConfig()
    try:
        f_sh, _ = sh_solve(bath, params)
        init = VariationalState(np.array([1.0]), f_sh[None, :])
    except ConvergenceError:
        init = VariationalState.zero(bath.num_modes)
    report = optimize(init, bath, params, config)
    if not report.converged and config.num_restarts > 1:
        rng = np.random.default_rng(config.seed)
        for _ in range(config.num_restarts - 1):
            init = VariationalState(
                np.array([1.0]), 1e-3 * rng.standard_normal((1, bath.num_modes))
            )
            retry = optimize(init, bath, params, config)
            if retry.converged or retry.energy < report.energy:
                report = retry
            if report.converged:
                break
    reports = [report]
    for _ in range(1, n_max):
        report = grow(report, bath, params, config)
        reports.append(report)
    return reports
