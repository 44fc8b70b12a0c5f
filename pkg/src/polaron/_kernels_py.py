"""Pure-NumPy evaluation of the variational energy and its gradient.

This is the fallback backend; `polaron._kernels_cy` implements the same
entry point in Cython.  Both compute, for weights C_n and displacements
f^(n)_k, the Rayleigh quotient

    E = [ -Delta * sum_nm C_n C_m Kp_nm
          + sum_nm C_n C_m Km_nm * B_nm ] / norm,

    Kp_nm = exp(-1/2 sum_q (f_nq + f_mq)^2)   (tunneling kernel)
    Km_nm = exp(-1/2 sum_q (f_nq - f_mq)^2)   (overlap kernel)
    B_nm  = sum_k [ 2 w_k f_nk f_mk - g_k (f_nk + f_mk) ]
    norm  = 2 sum_nm C_n C_m Km_nm

together with the exact partial derivatives of E with respect to every
C_n and f^(n)_k.  Kernel exponents below about -700 underflow to an exact
zero, which is physical (orthogonal coherent states).
"""

import numpy as np

BACKEND_NAME = "python"


def energy_norm_gradient(delta, omega, g, C, F):
    """Energy, squared norm, and analytic gradient of the Rayleigh quotient.

    Parameters
    ----------
    delta : float
        Tunneling amplitude.
    omega, g : (M,) arrays
        Bath mode frequencies and couplings.
    C : (N,) array
        Coherent-state weights.
    F : (N, M) array
        Displacement matrix.

    Returns
    -------
    energy : float
        nan if the norm is degenerate (norm < 1e-12); caller decides.
    norm : float
        <Psi|Psi>.
    grad_C : (N,) array
    grad_F : (N, M) array
    """
    C = np.asarray(C, dtype=float)
    F = np.asarray(F, dtype=float)
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)

    diff = F[:, None, :] - F[None, :, :]
    summ = F[:, None, :] + F[None, :, :]
    with np.errstate(under="ignore"):
        Km = np.exp(-0.5 * np.einsum("nmk,nmk->nm", diff, diff))
        Kp = np.exp(-0.5 * np.einsum("nmk,nmk->nm", summ, summ))

    Fg = F @ g
    B = 2.0 * (F * omega) @ F.T - (Fg[:, None] + Fg[None, :])

    CC = np.outer(C, C)
    W1 = CC * Kp
    W2 = CC * Km
    W3 = W2 * B

    H = -delta * W1.sum() + W3.sum()
    norm = 2.0 * W2.sum()
    if norm < 1e-12:
        n, m = C.size, omega.size
        return np.nan, norm, np.zeros(n), np.zeros((n, m))
    energy = H / norm

    # d/dC: each row index appears twice in the symmetric double sums.
    dH_C = 2.0 * (-delta * (Kp @ C) + (Km * B) @ C)
    dN_C = 4.0 * (Km @ C)
    grad_C = (dH_C - energy * dN_C) / norm

    r1 = W1.sum(axis=1)
    r2 = W2.sum(axis=1)
    r3 = W3.sum(axis=1)
    dH_F = 2.0 * (
        delta * (r1[:, None] * F + W1 @ F)
        + 2.0 * (W2 @ F) * omega[None, :]
        - np.outer(r2, g)
        - (r3[:, None] * F - W3 @ F)
    )
    dN_F = -4.0 * (r2[:, None] * F - W2 @ F)
    grad_F = (dH_F - energy * dN_F) / norm

    return energy, norm, grad_C, grad_F
