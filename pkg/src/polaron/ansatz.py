"""Coherent-state expansion of the spin-boson ground state.

The trial state is

    |Psi> = sum_n C_n ( |up> (x) |+f^(n)>  -  |down> (x) |-f^(n)> ),

with real weights C_n and real displacement rows f^(n)_k, one column per
bath mode.  The Z2-symmetric up/down structure with relative minus sign is
fixed by construction; the state is stored unnormalized with the gauge
C_1 > 0.  Energy and gradient are exact closed forms over Gaussian
coherent-state overlap kernels, evaluated by the selected kernel backend.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bath import DiscretizedBath
from .errors import (
    ConvergenceError,
    DegenerateStateError,
    DimensionError,
    ParameterError,
)

__all__ = [
    "ModelParams",
    "VariationalState",
    "overlap",
    "pair_kernels",
    "norm_squared",
    "energy",
    "gradient",
    "energy_and_gradient",
    "sh_solve",
    "sh_displacements",
]


@dataclass(frozen=True)
class ModelParams:
    """Spin-boson model parameters in units of the bath cutoff."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError(f"delta must be > 0, got {self.delta}")


@dataclass
class VariationalState:
    """Weights C (N,) and displacement matrix F (N, M) of the expansion."""

    C: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        self.C = np.atleast_1d(np.asarray(self.C, dtype=float))
        self.F = np.atleast_2d(np.asarray(self.F, dtype=float))
        if self.C.ndim != 1 or self.F.ndim != 2 or self.F.shape[0] != self.C.size:
            raise DimensionError(
                f"inconsistent state shapes C{self.C.shape}, F{self.F.shape}"
            )

    @property
    def num_polarons(self) -> int:
        return self.C.size

    @property
    def num_modes(self) -> int:
        return self.F.shape[1]

    def copy(self) -> "VariationalState":
        return VariationalState(self.C.copy(), self.F.copy())

    @classmethod
    def zero(cls, num_modes: int) -> "VariationalState":
        """Single undisplaced polaron, the standard N=1 starting point."""
        return cls(np.array([1.0]), np.zeros((1, num_modes)))

    def to_json(self, bath_file=None) -> dict:
        doc = {"C": self.C.tolist(), "f": self.F.tolist()}
        if bath_file is not None:
            doc["bath_file"] = str(bath_file)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "VariationalState":
        return cls(np.array(doc["C"]), np.array(doc["f"]))

    def save(self, path, bath_file=None):
        with open(path, "w") as fh:
            json.dump(self.to_json(bath_file=bath_file), fh)

    @classmethod
    def load(cls, path) -> "VariationalState":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _check_match(state: VariationalState, bath: DiscretizedBath):
    if state.num_modes != bath.num_modes:
        raise DimensionError(
            f"state has {state.num_modes} modes, bath has {bath.num_modes}"
        )


def overlap(f, g) -> float:
    """Gaussian overlap <f|g> = exp(-1/2 sum_k (f_k - g_k)^2) of two
    real product coherent states."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise DimensionError(f"displacement shapes differ: {f.shape} vs {g.shape}")
    d = f - g
    with np.errstate(under="ignore"):
        return float(np.exp(-0.5 * np.dot(d.ravel(), d.ravel())))


def pair_kernels(F):
    """Pairwise kernels (Km, Kp) with Km_nm = exp(-1/2 sum_q (f_n - f_m)^2)
    and Kp_nm on the sum f_n + f_m.  Used by the observables."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    diff = F[:, None, :] - F[None, :, :]
    summ = F[:, None, :] + F[None, :, :]
    with np.errstate(under="ignore"):
        Km = np.exp(-0.5 * np.einsum("nmk,nmk->nm", diff, diff))
        Kp = np.exp(-0.5 * np.einsum("nmk,nmk->nm", summ, summ))
    return Km, Kp


def norm_squared(state: VariationalState) -> float:
    """<Psi|Psi> = 2 sum_nm C_n C_m Km_nm."""
    Km, _ = pair_kernels(state.F)
    return float(2.0 * state.C @ Km @ state.C)


def energy_and_gradient(state, bath, params):
    """Rayleigh quotient energy and its exact gradient (dE/dC, dE/dF)."""
    _check_match(state, bath)
    e, norm, g_c, g_f = kernels.energy_norm_gradient(
        params.delta, bath.omegas, bath.couplings, state.C, state.F
    )
    if norm < 1e-12:
        raise DegenerateStateError(f"state norm {norm:g} below 1e-12")
    return e, g_c, g_f


def energy(state, bath, params) -> float:
    """Variational energy <Psi|H|Psi> / <Psi|Psi>."""
    return energy_and_gradient(state, bath, params)[0]


def gradient(state, bath, params):
    """Exact partial derivatives (dE/dC_n, dE/df^(n)_k)."""
    _, g_c, g_f = energy_and_gradient(state, bath, params)
    return g_c, g_f


def sh_displacements(bath: DiscretizedBath, delta_r: float) -> np.ndarray:
    """Silbey-Harris displacements f_k = (g_k/2)/(omega_k + delta_r)."""
    return (bath.couplings / 2.0) / (bath.omegas + delta_r)


def sh_solve(bath, params, tol=1e-12, max_iters=100_000):
    """Self-consistent Silbey-Harris fixed point.

    Iterates Delta_R <- Delta * exp(-2 sum_k (g_k/2)^2 / (omega_k+Delta_R)^2)
    from Delta_R = Delta until the relative change drops below tol.

    Returns
    -------
    f_sh : (M,) array of displacements
    delta_r : float, renormalized tunneling amplitude
    """
    delta = params.delta
    delta_r = delta
    half_g2 = (bath.couplings / 2.0) ** 2
    for _ in range(max_iters):
        with np.errstate(under="ignore"):
            new = delta * np.exp(
                -2.0 * np.sum(half_g2 / (bath.omegas + delta_r) ** 2)
            )
        if abs(new - delta_r) <= tol * max(abs(new), 1e-300):
            return sh_displacements(bath, new), float(new)
        delta_r = new
    raise ConvergenceError(
        f"Silbey-Harris iteration did not converge in {max_iters} steps",
        last_iterate=(sh_displacements(bath, delta_r), float(delta_r)),
    )
