import numpy as np
import pytest

from polaron import (
    ModelParams,
    SpectralDensity,
    VariationalState,
    coherence,
    default_x_grid,
    discretize,
    mode_moments,
    sh_solve,
    sigma_z,
    wigner_diag,
    wigner_from_moments,
    wigner_offdiag,
)
from polaron.errors import ParameterError


@pytest.fixture(scope="module")
def bath():
    # weak coupling keeps every |f_k| <= 0.3, inside the moment-series
    # convergence radius probed below
    return discretize(SpectralDensity(0.2, 1.0), 2.0, 6)


@pytest.fixture(scope="module")
def sh_state(bath):
    f_sh, _ = sh_solve(bath, ModelParams(0.1))
    return VariationalState(np.array([1.0]), f_sh[None, :])


def test_coherence_limits(bath):
    # undisplaced bath: full coherence <sigma_x> = -1
    assert coherence(VariationalState.zero(bath.num_modes)) == pytest.approx(-1.0)
    # Silbey-Harris point: <sigma_x> = -Delta_R / Delta
    params = ModelParams(0.1)
    f_sh, delta_r = sh_solve(bath, params)
    state = VariationalState(np.array([1.0]), f_sh[None, :])
    assert coherence(state) == pytest.approx(-delta_r / params.delta, rel=1e-12)


def test_sigma_z_vanishes_by_symmetry(bath, sh_state):
    assert sigma_z(sh_state) == 0.0
    rng = np.random.default_rng(2)
    state = VariationalState(
        rng.uniform(0.2, 1.0, 3), 0.3 * rng.standard_normal((3, bath.num_modes))
    )
    assert sigma_z(state) == 0.0


def test_diag_slice_gaussian_at_classical_displacement(bath, sh_state):
    k = int(np.argmax(bath.omegas))
    grid = np.linspace(-1.0, 1.0, 801)
    curve = wigner_diag(sh_state, bath, k, grid)
    peak = grid[np.argmax(curve.values)]
    assert peak == pytest.approx(sh_state.F[0, k], abs=grid[1] - grid[0])
    assert np.max(curve.values) == pytest.approx(1.0 / (2 * np.pi), rel=2e-2)


def test_diag_slice_undisplaced_closed_form(bath):
    state = VariationalState.zero(bath.num_modes)
    grid = np.linspace(-2.0, 2.0, 101)
    curve = wigner_diag(state, bath, 0, grid)
    assert np.allclose(curve.values, np.exp(-2 * grid**2) / (2 * np.pi), rtol=1e-12)


def test_offdiag_slice_symmetric(bath, sh_state):
    grid = default_x_grid(sh_state)
    for k in range(bath.num_modes):
        curve = wigner_offdiag(sh_state, bath, k, grid)
        assert np.max(np.abs(curve.values - curve.values[::-1])) < 1e-12


def test_offdiag_n1_suppression_factor(bath, sh_state):
    k = int(np.argmax(bath.omegas))
    grid = np.linspace(-1.0, 1.0, 2001)
    amp = np.max(wigner_offdiag(sh_state, bath, k, grid).values)
    suppression = np.exp(-2 * (np.sum(sh_state.F[0] ** 2) - sh_state.F[0, k] ** 2))
    assert amp * np.pi == pytest.approx(suppression, rel=1e-3)


def test_moment_reconstruction_matches_closed_form(bath, sh_state):
    # displacements here are all below 0.3, so m_max=10 converges; the
    # convention factors below are the ones documented in
    # wigner_from_moments and are exact for a single coherent-state pair
    from polaron.observables import MomentTable

    assert np.max(np.abs(sh_state.F)) <= 0.3
    grid = np.linspace(-1.0, 1.0, 201)
    for k in (0, bath.num_modes - 1):
        t_id = mode_moments(sh_state, bath, k, m_max=10, channel="identity")
        t_z = mode_moments(sh_state, bath, k, m_max=10, channel="sigma_z")
        closed = wigner_diag(sh_state, bath, k, grid)
        rec_id = wigner_from_moments(t_id, grid)
        both_branches = 2.0 * (closed.values + closed.values[::-1])
        assert np.max(np.abs(rec_id.values - both_branches)) < 1e-6
        upup = MomentTable("identity", k, (t_id.entries + t_z.entries) / 2.0)
        rec_up = wigner_from_moments(upup, grid)
        assert np.max(np.abs(rec_up.values - 2.0 * closed.values)) < 1e-6
        t_x = mode_moments(sh_state, bath, k, m_max=10, channel="sigma_x")
        rec_x = wigner_from_moments(t_x, grid)
        closed_x = wigner_offdiag(sh_state, bath, k, grid)
        f_k = sh_state.F[0, k]
        scale = 2.0 * np.exp(-2.0 * f_k**2)
        assert np.max(np.abs(rec_x.values + scale * closed_x.values)) < 1e-6


def test_moment_series_divergence_flagged(bath):
    # |f| = 2 is far outside the m_max=10 convergence radius: the retained
    # tail must be large, signalling an unreliable reconstruction
    F = np.zeros((1, bath.num_modes))
    F[0, 0] = 2.0
    state = VariationalState(np.array([1.0]), F)
    table = mode_moments(state, bath, 0, m_max=10)
    rec = wigner_from_moments(table, np.linspace(-3, 3, 61))
    assert rec.tail_magnitude is not None
    assert rec.tail_magnitude > 1.0


def test_bad_channel_rejected(bath, sh_state):
    with pytest.raises(ParameterError):
        mode_moments(sh_state, bath, 0, channel="sigma_w")


def test_curve_grid_validation():
    with pytest.raises(ParameterError):
        from polaron.observables import WignerCurve

        WignerCurve(0, 1.0, np.array([0.0, 0.0, 1.0]), np.zeros(3), "identity")
