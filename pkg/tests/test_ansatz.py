import numpy as np
import pytest

from polaron import (
    ModelParams,
    SpectralDensity,
    VariationalState,
    discretize,
    energy,
    energy_and_gradient,
    gradient,
    norm_squared,
    overlap,
    pair_kernels,
    sh_displacements,
    sh_solve,
)
from polaron.errors import ConvergenceError, DegenerateStateError, DimensionError


def naive_energy(delta, omega, g, C, F):
    """Deliberately slow reference: explicit loops, no shared kernels."""
    num = 0.0
    den = 0.0
    n = len(C)
    for i in range(n):
        for j in range(n):
            kp = np.exp(-0.5 * np.sum((F[i] + F[j]) ** 2))
            km = np.exp(-0.5 * np.sum((F[i] - F[j]) ** 2))
            bath = np.sum(2.0 * omega * F[i] * F[j] - g * (F[i] + F[j]))
            num += C[i] * C[j] * (-delta * kp + km * bath)
            den += C[i] * C[j] * km
    return num / (2.0 * den)


@pytest.fixture
def small_bath():
    return discretize(SpectralDensity(0.5, 1.0), 2.0, 5)


def test_overlap_closed_form():
    f = np.array([0.1, -0.2])
    g = np.array([0.3, 0.4])
    expect = np.exp(-0.5 * ((0.1 - 0.3) ** 2 + (-0.2 - 0.4) ** 2))
    assert overlap(f, g) == pytest.approx(expect, rel=1e-14)
    assert overlap(f, f) == pytest.approx(1.0)


def test_pair_kernels_symmetric_unit_diagonal():
    rng = np.random.default_rng(0)
    F = rng.standard_normal((4, 6))
    Km, Kp = pair_kernels(F)
    assert np.allclose(Km, Km.T) and np.allclose(Kp, Kp.T)
    assert np.allclose(np.diag(Km), 1.0)
    assert np.all(Kp <= 1.0 + 1e-15) and np.all(Kp > 0)


def test_single_undisplaced_polaron_energy(small_bath):
    # C=(1), f=0: the Rayleigh quotient reduces to -delta/2
    state = VariationalState.zero(small_bath.num_modes)
    assert energy(state, small_bath, ModelParams(0.2)) == pytest.approx(-0.1)
    assert norm_squared(state) == pytest.approx(2.0)


def test_energy_matches_naive_reference(small_bath):
    rng = np.random.default_rng(3)
    params = ModelParams(0.15)
    for _ in range(20):
        n = rng.integers(1, 4)
        C = rng.uniform(0.2, 1.0, n) * rng.choice([-1.0, 1.0], n)
        F = 0.4 * rng.standard_normal((n, small_bath.num_modes))
        e = energy(VariationalState(C, F), small_bath, params)
        ref = naive_energy(params.delta, small_bath.omegas, small_bath.couplings, C, F)
        assert e == pytest.approx(ref, rel=1e-12)


def test_gradient_matches_finite_differences(small_bath):
    rng = np.random.default_rng(11)
    params = ModelParams(0.15)
    h = 1e-6
    worst = 0.0
    draws = 0
    while draws < 120:
        n = rng.integers(1, 4)
        C = rng.uniform(-1.0, 1.0, n)
        F = 0.5 * rng.standard_normal((n, small_bath.num_modes))
        state = VariationalState(C, F)
        if norm_squared(state) < 1e-4:
            continue
        draws += 1
        _, g_c, g_f = energy_and_gradient(state, small_bath, params)
        flat = np.concatenate([C, F.ravel()])
        grad = np.concatenate([g_c, g_f.ravel()])
        idx = rng.integers(0, flat.size, 4)
        for i in idx:
            for sgn, store in ((1, "p"), (-1, "m")):
                x = flat.copy()
                x[i] += sgn * h
                e = energy(
                    VariationalState(x[:n], x[n:].reshape(n, -1)),
                    small_bath, params,
                )
                if sgn == 1:
                    ep = e
                else:
                    em = e
            fd = (ep - em) / (2 * h)
            # floor at the typical gradient scale: some directions (e.g. the
            # weight at N=1) have exactly zero gradient by scale invariance
            scale = max(abs(fd), abs(grad[i]), 1e-4)
            worst = max(worst, abs(fd - grad[i]) / scale)
    assert worst < 1e-5


def test_energy_invariances(small_bath):
    rng = np.random.default_rng(5)
    params = ModelParams(0.1)
    C = rng.uniform(0.2, 1.0, 3)
    F = 0.3 * rng.standard_normal((3, small_bath.num_modes))
    e0 = energy(VariationalState(C, F), small_bath, params)
    perm = np.array([2, 0, 1])
    assert energy(VariationalState(C[perm], F[perm]), small_bath, params) == pytest.approx(e0, rel=1e-13)
    assert energy(VariationalState(-C, F), small_bath, params) == pytest.approx(e0, rel=1e-13)
    assert energy(VariationalState(3.7 * C, F), small_bath, params) == pytest.approx(e0, rel=1e-13)


def test_degenerate_state_raises(small_bath):
    C = np.array([1.0, -1.0])
    F = np.zeros((2, small_bath.num_modes))
    with pytest.raises(DegenerateStateError):
        energy_and_gradient(VariationalState(C, F), small_bath, ModelParams(0.1))


def test_dimension_mismatch_raises(small_bath):
    state = VariationalState(np.array([1.0]), np.zeros((1, 3)))
    with pytest.raises(DimensionError):
        energy(state, small_bath, ModelParams(0.1))


def test_sh_solve_fixed_point(small_bath):
    params = ModelParams(0.1)
    f_sh, delta_r = sh_solve(small_bath, params)
    # self-consistency: f = (g/2)/(omega + Delta_R), Delta_R = Delta e^{-2 sum f^2}
    assert np.allclose(
        f_sh, small_bath.couplings / (2.0 * (small_bath.omegas + delta_r))
    )
    assert delta_r == pytest.approx(0.1 * np.exp(-2 * np.sum(f_sh**2)), rel=1e-12)
    assert np.array_equal(f_sh, sh_displacements(small_bath, delta_r))
    # the fixed point is a stationary point of the variational energy
    state = VariationalState(np.array([1.0]), f_sh[None, :])
    _, g_f = gradient(state, small_bath, params)
    assert np.max(np.abs(g_f)) < 1e-12


def test_sh_solve_nonconvergence_reports_last_iterate(small_bath):
    with pytest.raises(ConvergenceError) as err:
        sh_solve(small_bath, ModelParams(0.1), tol=1e-16, max_iters=2)
    assert err.value.last_iterate is not None


def test_state_roundtrip_json(tmp_path):
    state = VariationalState(np.array([0.8, 0.2]), np.array([[0.1, 0.2], [-0.3, 0.4]]))
    path = tmp_path / "state.json"
    state.save(path, bath_file="bath.json")
    loaded = VariationalState.load(path)
    assert np.array_equal(loaded.C, state.C)
    assert np.array_equal(loaded.F, state.F)
