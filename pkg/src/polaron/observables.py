"""Ground-state observables of the coherent-state expansion.

Spin coherence, single-mode Wigner slices along the real-displacement
axis X (spin-diagonal and spin-off-diagonal channels), and normal-ordered
single-mode moment tables together with the Wigner reconstruction from
those moments.

Conventions
-----------
Two Wigner normalizations coexist and are reported, never silently
rescaled:

* the closed-form curves carry an overall 1/pi prefactor, so an
  undisplaced N=1 state peaks at 1/(2*pi) in the diagonal channel;
* the moment-series reconstruction carries 2/pi and corresponds to
  W_upup = (W_identity + W_sigma_z)/2, which is exactly twice the
  closed-form diagonal curve (and minus twice the off-diagonal one for
  the sigma_x channel).

WignerCurve.convention records which one applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .ansatz import VariationalState, pair_kernels
from .bath import DiscretizedBath
from .errors import DegenerateStateError, DimensionError, ParameterError

__all__ = [
    "WignerCurve",
    "MomentTable",
    "coherence",
    "sigma_z",
    "wigner_diag",
    "wigner_offdiag",
    "mode_moments",
    "wigner_from_moments",
    "default_x_grid",
]

CHANNELS = ("identity", "sigma_x", "sigma_y", "sigma_z")


@dataclass
class WignerCurve:
    """Sampled single-mode Wigner slice W(X) with mode metadata."""

    mode_index: int
    omega_k: float
    X_grid: np.ndarray
    values: np.ndarray
    channel: str
    convention: str = "closed-form-1/pi"
    tail_magnitude: float | None = None

    def __post_init__(self):
        self.X_grid = np.asarray(self.X_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.X_grid) <= 0):
            raise ParameterError("X grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Wigner values must be finite")


@dataclass
class MomentTable:
    """Normal-ordered moments A_{m,m'} = <sigma_i (a_k^dag)^m a_k^m'> / <Psi|Psi>.

    Entries are real; for the sigma_y channel (purely imaginary,
    antisymmetric for this real state family) the imaginary part is stored.
    """

    channel: str
    mode_index: int
    entries: np.ndarray

    @property
    def m_max(self) -> int:
        return self.entries.shape[0]


def _norm_sums(state: VariationalState):
    Km, Kp = pair_kernels(state.F)
    c = state.C
    s_minus = float(c @ Km @ c)
    s_plus = float(c @ Kp @ c)
    if 2.0 * s_minus < 1e-12:
        raise DegenerateStateError(f"state norm {2.0 * s_minus:g} below 1e-12")
    return Km, Kp, s_minus, s_plus


def coherence(state, bath=None, params=None) -> float:
    """Ground-state spin coherence <sigma_x> = -S_plus / S_minus.

    S_plus and S_minus are the weighted tunneling and overlap kernel sums;
    the value lies in [-1, 0] for optimized states.  (The bath and model
    parameters do not enter; they are accepted for interface symmetry.)
    """
    _, _, s_minus, s_plus = _norm_sums(state)
    return -s_plus / s_minus


def sigma_z(state, bath=None, params=None) -> float:
    """<sigma_z>, computed from the two spin branches separately.

    The up and down branch norms are identical sums, so the result is an
    exact zero for every state of this Z2-symmetric family.
    """
    Km, _, s_minus, _ = _norm_sums(state)
    up = float(state.C @ Km @ state.C)
    down = float(state.C @ Km @ state.C)
    return (up - down) / (2.0 * s_minus)


def default_x_grid(state: VariationalState, npts: int = 301) -> np.ndarray:
    """Uniform grid spanning +-(1.5*max|f| + 1), symmetric about 0."""
    half = 1.5 * float(np.max(np.abs(state.F))) + 1.0
    return np.linspace(-half, half, npts)


def _cross_kernels_excluding(F, k, sign):
    """exp(-1/2 sum_{q != k} (f_n +- f_m)^2) for all pairs."""
    Fq = np.delete(F, k, axis=1)
    pair = Fq[:, None, :] + sign * Fq[None, :, :]
    with np.errstate(under="ignore"):
        return np.exp(-0.5 * np.einsum("nmk,nmk->nm", pair, pair))


def wigner_diag(state, bath, k, X_grid=None) -> WignerCurve:
    """Spin-diagonal Wigner slice W_upup^(k)(X).

    Sum of Gaussians exp(-2(X - (f_n+f_m)/2)^2) at displacement midpoints,
    weighted by C_n C_m and the cross kernel over all other modes, with
    overall prefactor 1/(pi <Psi|Psi>).
    """
    k = _check_mode(state, bath, k)
    if X_grid is None:
        X_grid = default_x_grid(state)
    X_grid = np.asarray(X_grid, dtype=float)
    _, _, s_minus, _ = _norm_sums(state)
    ker = _cross_kernels_excluding(state.F, k, -1.0)
    w = np.outer(state.C, state.C) * ker
    centers = 0.5 * (state.F[:, None, k] + state.F[None, :, k])
    with np.errstate(under="ignore"):
        gauss = np.exp(-2.0 * (X_grid[None, None, :] - centers[:, :, None]) ** 2)
    vals = np.einsum("nm,nmx->x", w, gauss) / (np.pi * 2.0 * s_minus)
    return WignerCurve(
        mode_index=k,
        omega_k=float(bath.omegas[k]),
        X_grid=X_grid,
        values=vals,
        channel="diag",
    )


def wigner_offdiag(state, bath, k, X_grid=None) -> WignerCurve:
    """Spin-off-diagonal Wigner slice W_updown^(k)(X).

    Gaussians at +-(f_n - f_m)/2 weighted by the cross kernel on the
    displacement sums; both signed terms are included, so the curve is
    even in X by construction.
    """
    k = _check_mode(state, bath, k)
    if X_grid is None:
        X_grid = default_x_grid(state)
    X_grid = np.asarray(X_grid, dtype=float)
    _, _, s_minus, _ = _norm_sums(state)
    ker = _cross_kernels_excluding(state.F, k, +1.0)
    w = np.outer(state.C, state.C) * ker
    centers = 0.5 * (state.F[:, None, k] - state.F[None, :, k])
    with np.errstate(under="ignore"):
        gauss = np.exp(
            -2.0 * (X_grid[None, None, :] - centers[:, :, None]) ** 2
        ) + np.exp(-2.0 * (X_grid[None, None, :] + centers[:, :, None]) ** 2)
    vals = np.einsum("nm,nmx->x", w, gauss) / (np.pi * 2.0 * s_minus)
    return WignerCurve(
        mode_index=k,
        omega_k=float(bath.omegas[k]),
        X_grid=X_grid,
        values=vals,
        channel="offdiag",
    )


def _check_mode(state, bath, k) -> int:
    if state.num_modes != bath.num_modes:
        raise DimensionError(
            f"state has {state.num_modes} modes, bath has {bath.num_modes}"
        )
    k = int(k)
    if not 0 <= k < bath.num_modes:
        raise DimensionError(f"mode index {k} out of range [0, {bath.num_modes})")
    return k


def mode_moments(state, bath, k, m_max=10, channel="identity") -> MomentTable:
    """Normal-ordered moments of mode k on the normalized state.

    Per coherent-state pair, <f|(a^dag)^m a^m'|g> = f_k^m g_k^m' <f|g>,
    with the full overlap kernel over all modes.  Summing the up and down
    spin branches of the Z2-symmetric state gives:

    identity : sum C_n C_m Km f^m f^m' (1 + (-1)^(m+m')) / norm
    sigma_z  : same with (1 - (-1)^(m+m'))
    sigma_x  : -sum C_n C_m Kp f^m f^m' ((-1)^m + (-1)^m') / norm
    sigma_y  : purely imaginary; the imaginary part
               -sum C_n C_m Kp f^m f^m' ((-1)^m' - (-1)^m) / norm is stored.
    """
    if m_max < 1:
        raise ParameterError(f"m_max must be >= 1, got {m_max}")
    if channel not in CHANNELS:
        raise ParameterError(f"channel must be one of {CHANNELS}, got {channel!r}")
    k = _check_mode(state, bath, k)
    Km, Kp, s_minus, _ = _norm_sums(state)
    c = state.C
    fk = state.F[:, k]
    powers = fk[:, None] ** np.arange(m_max)[None, :]  # (N, m_max)
    parity = (-1.0) ** np.arange(m_max)

    if channel in ("identity", "sigma_z"):
        base = np.einsum("n,m,nm,ni,mj->ij", c, c, Km, powers, powers)
        pp = np.outer(parity, parity)  # (-1)^(m+m')
        factor = (1.0 + pp) if channel == "identity" else (1.0 - pp)
        entries = base * factor / (2.0 * s_minus)
    else:
        base = np.einsum("n,m,nm,ni,mj->ij", c, c, Kp, powers, powers)
        if channel == "sigma_x":
            factor = parity[:, None] + parity[None, :]
        else:  # sigma_y, imaginary part
            factor = parity[None, :] - parity[:, None]
        entries = -base * factor / (2.0 * s_minus)
    return MomentTable(channel=channel, mode_index=k, entries=entries)


def wigner_from_moments(table: MomentTable, X_grid) -> WignerCurve:
    """Reconstruct W(X) from a moment table via the Hermite derivative series.

    W(X) = (2/pi) sum_{m,m'} A_{m,m'} (-1)^(m+m') / (m! m'! 2^(m+m'))
           d^(m+m') / dX^(m+m') exp(-2 X^2),

    using d^j/dX^j exp(-2X^2) = (-1)^j 2^(j/2) H_j(sqrt(2) X) exp(-2X^2)
    with physicists' Hermite polynomials, so each total order j carries a
    net kernel 2^(-j/2) H_j(sqrt(2) X).  The series is truncated at the
    table's m_max; tail_magnitude reports the largest absolute
    contribution of the highest retained total order, a cheap divergence
    diagnostic for large displacements.

    Convention factors against the closed-form slices (exact for a single
    coherent-state pair, where mode k factorizes): the identity channel
    reconstructs both spin branches, 2 * (diag(X) + diag(-X)); the
    (identity + sigma_z)/2 combination gives 2 * diag(X); sigma_x gives
    -2 * exp(-2 f_k^2) * offdiag(X), the extra factor being the mode-k
    overlap the off-diagonal closed form excludes from its kernel.
    """
    X = np.asarray(X_grid, dtype=float)
    m_max = table.m_max
    j_max = 2 * (m_max - 1)
    u = np.sqrt(2.0) * X
    with np.errstate(under="ignore"):
        env = np.exp(-2.0 * X**2)
    herm = np.empty((j_max + 1, X.size))
    herm[0] = 1.0
    if j_max >= 1:
        herm[1] = 2.0 * u
    for j in range(2, j_max + 1):
        herm[j] = 2.0 * u * herm[j - 1] - 2.0 * (j - 1) * herm[j - 2]

    coeff = np.zeros(j_max + 1)
    for m in range(m_max):
        for mp in range(m_max):
            j = m + mp
            # (-1)^j from the series times (-1)^j from the derivative: +1
            coeff[j] += table.entries[m, mp] * 2.0 ** (-j / 2.0) / (
                factorial(m) * factorial(mp)
            )
    vals = (2.0 / np.pi) * env * (coeff @ herm)
    tail = (2.0 / np.pi) * np.max(np.abs(env * coeff[j_max] * herm[j_max]))
    return WignerCurve(
        mode_index=table.mode_index,
        omega_k=float("nan"),
        X_grid=X,
        values=vals,
        channel=table.channel,
        convention="moment-series-2/pi",
        tail_magnitude=float(tail),
    )
