"""Ohmic spectral density and its logarithmic-shell discretization.

The continuum bath J(omega) = 2*alpha*omega up to a hard cutoff omega_c is
collapsed onto a finite set of representative modes, one per logarithmic
shell [omega_c*Lambda^-(n+1), omega_c*Lambda^-n].  Each shell carries the
full integrated coupling weight of J over the shell, and its representative
frequency is the J-weighted mean, so the first two moments of J are
preserved shell by shell.  Both integrals have closed forms for the Ohmic
case and are evaluated exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "SpectralDensity",
    "DiscretizedBath",
    "spectral_density",
    "discretize",
    "default_num_modes",
]


@dataclass(frozen=True)
class SpectralDensity:
    """Ohmic spectral density J(omega) = 2*alpha*omega for omega <= omega_c.

    Parameters
    ----------
    alpha : float
        Dimensionless dissipation strength, > 0.
    omega_c : float
        Hard cutoff frequency; sets the global energy scale (default 1).
    """

    alpha: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not self.omega_c > 0:
            raise ParameterError(f"omega_c must be > 0, got {self.omega_c}")

    def __call__(self, omega):
        return spectral_density(self, omega)


def spectral_density(sd: SpectralDensity, omega):
    """Evaluate J(omega); zero beyond the cutoff, error for omega < 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density requires omega >= 0")
    vals = np.where(w <= sd.omega_c, 2.0 * sd.alpha * w, 0.0)
    if np.isscalar(omega) or w.ndim == 0:
        return float(vals)
    return vals


@dataclass(frozen=True)
class DiscretizedBath:
    """Finite mode set from logarithmic shell blocking of an Ohmic bath.

    Modes are ordered by strictly decreasing frequency.  ``couplings[k]``
    is g_k >= 0 with g_k^2 the integrated spectral weight of shell k.
    """

    omegas: np.ndarray
    couplings: np.ndarray
    lam: float
    alpha: float
    omega_c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=float))
        object.__setattr__(self, "couplings", np.asarray(self.couplings, dtype=float))
        self.omegas.setflags(write=False)
        self.couplings.setflags(write=False)
        if self.omegas.shape != self.couplings.shape or self.omegas.ndim != 1:
            raise ParameterError("omegas and couplings must be matching 1-d arrays")
        if np.any(np.diff(self.omegas) >= 0):
            raise ParameterError("mode frequencies must be strictly decreasing")
        if np.any(self.omegas <= 0) or np.any(self.omegas > self.omega_c):
            raise ParameterError("mode frequencies must lie in (0, omega_c]")
        if np.any(self.couplings < 0):
            raise ParameterError("couplings must be nonnegative")

    @property
    def num_modes(self) -> int:
        return self.omegas.size

    @property
    def modes(self):
        """List of (omega_k, g_k) pairs, descending in omega_k."""
        return list(zip(self.omegas.tolist(), self.couplings.tolist()))

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "omega_c": self.omega_c,
            "lambda": self.lam,
            "modes": [
                {"omega": w, "g": g}
                for w, g in zip(self.omegas.tolist(), self.couplings.tolist())
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DiscretizedBath":
        omegas = np.array([m["omega"] for m in doc["modes"]])
        gs = np.array([m["g"] for m in doc["modes"]])
        return cls(
            omegas=omegas,
            couplings=gs,
            lam=doc["lambda"],
            alpha=doc["alpha"],
            omega_c=doc.get("omega_c", 1.0),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "DiscretizedBath":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def discretize(sd: SpectralDensity, lam: float, num_modes: int) -> DiscretizedBath:
    """Collapse J onto one representative mode per logarithmic shell.

    Shell n (0-indexed) covers [omega_c*lam^-(n+1), omega_c*lam^-n].
    g_n^2 = integral of J over the shell = alpha*(b^2 - a^2) and
    omega_n = integral of omega*J / integral of J = (2/3)(b^3-a^3)/(b^2-a^2),
    both exact for the linear Ohmic form.
    """
    if not lam > 1:
        raise ParameterError(f"lambda must be > 1, got {lam}")
    num_modes = int(num_modes)
    if num_modes < 1:
        raise ParameterError(f"num_modes must be >= 1, got {num_modes}")
    n = np.arange(num_modes)
    upper = sd.omega_c * lam ** (-n.astype(float))
    lower = sd.omega_c * lam ** (-(n + 1.0))
    g2 = sd.alpha * (upper**2 - lower**2)
    omega = (2.0 / 3.0) * (upper**3 - lower**3) / (upper**2 - lower**2)
    return DiscretizedBath(
        omegas=omega,
        couplings=np.sqrt(g2),
        lam=lam,
        alpha=sd.alpha,
        omega_c=sd.omega_c,
    )


def default_num_modes(
    sd: SpectralDensity, delta: float, lam: float, ir_factor: float = 0.01,
    max_modes: int = 2000,
) -> int:
    """Number of shells needed to reach ir_factor times the estimated Delta_R.

    Uses the weak-coupling continuum estimate
    Delta_R ~ Delta*(Delta*e/omega_c)^(alpha/(1-alpha)); modes below
    ir_factor of that scale contribute negligibly to converged observables.
    """
    if not lam > 1:
        raise ParameterError(f"lambda must be > 1, got {lam}")
    if not delta > 0:
        raise ParameterError(f"delta must be > 0, got {delta}")
    if sd.alpha >= 1.0:
        return max_modes
    exponent = sd.alpha / (1.0 - sd.alpha)
    delta_r_est = delta * (delta * math.e / sd.omega_c) ** exponent
    target = ir_factor * delta_r_est
    m = math.ceil(math.log(sd.omega_c / target) / math.log(lam))
    return int(min(max(m, 1), max_modes))
