import json

import numpy as np
import pytest

from polaron import (
    DiscretizedBath,
    SpectralDensity,
    default_num_modes,
    discretize,
    spectral_density,
)
from polaron.errors import DomainError, ParameterError


def test_spectral_density_values():
    sd = SpectralDensity(0.5, 1.0)
    assert spectral_density(sd, 0.3) == pytest.approx(2 * 0.5 * 0.3)
    assert spectral_density(sd, 1.5) == 0.0  # above the hard cutoff
    vals = spectral_density(sd, np.array([0.0, 0.5, 2.0]))
    assert np.allclose(vals, [0.0, 0.5, 0.0])


def test_spectral_density_negative_frequency_rejected():
    sd = SpectralDensity(0.5)
    with pytest.raises(DomainError):
        spectral_density(sd, -0.1)
    with pytest.raises(DomainError):
        spectral_density(sd, np.array([0.2, -0.3]))


@pytest.mark.parametrize("alpha", [-0.1, 0.0])
def test_spectral_density_invalid_alpha(alpha):
    with pytest.raises(ParameterError):
        SpectralDensity(alpha)


def test_discretize_shell_sum_rule():
    # each mode carries the exact shell weight: sum g^2 = integral of J
    sd = SpectralDensity(0.7, 2.0)
    lam, M = 1.5, 12
    bath = discretize(sd, lam, M)
    total = np.sum(bath.couplings**2)
    a_min = 2.0 * lam ** (-M)
    exact = 0.7 * (2.0**2 - a_min**2)
    assert total == pytest.approx(exact, rel=1e-13)


def test_discretize_mode_frequencies_are_shell_means():
    sd = SpectralDensity(0.5, 1.0)
    bath = discretize(sd, 2.0, 6)
    edges_hi = 1.0 * 2.0 ** -np.arange(6)
    edges_lo = edges_hi / 2.0
    expect = (2.0 / 3.0) * (edges_hi**3 - edges_lo**3) / (edges_hi**2 - edges_lo**2)
    assert np.allclose(np.sort(bath.omegas)[::-1], np.sort(expect)[::-1])
    # every representative frequency lies inside its shell
    order = np.argsort(-bath.omegas)
    for w, lo, hi in zip(bath.omegas[order], edges_lo, edges_hi):
        assert lo < w < hi


def test_discretize_rejects_bad_lambda():
    sd = SpectralDensity(0.5)
    with pytest.raises(ParameterError):
        discretize(sd, 1.0, 5)
    with pytest.raises(ParameterError):
        discretize(sd, 2.0, 0)


def test_bath_roundtrip_json(tmp_path):
    sd = SpectralDensity(0.5, 1.0)
    bath = discretize(sd, 1.5, 10)
    path = tmp_path / "bath.json"
    bath.save(path)
    loaded = DiscretizedBath.load(path)
    assert np.array_equal(loaded.omegas, bath.omegas)
    assert np.array_equal(loaded.couplings, bath.couplings)
    assert loaded.lam == bath.lam
    assert loaded.alpha == bath.alpha
    doc = json.loads(path.read_text())
    assert {"alpha", "omega_c", "lambda", "modes"} <= set(doc)


def test_bath_arrays_write_locked():
    bath = discretize(SpectralDensity(0.5), 2.0, 4)
    with pytest.raises(ValueError):
        bath.omegas[0] = 1.0


def test_bath_invariants_checked():
    with pytest.raises(ParameterError):
        DiscretizedBath(np.array([1.0, -0.5]), np.array([0.1, 0.1]),
                        lam=2.0, alpha=0.5, omega_c=1.0)


def test_default_num_modes_reaches_infrared_cut():
    sd = SpectralDensity(0.5, 1.0)
    delta, lam = 0.01, 1.05
    M = default_num_modes(sd, delta, lam)
    bath = discretize(sd, lam, M)
    # lowest shell edge sits below 1% of the estimated renormalized splitting
    delta_r_est = delta * (delta * np.e) ** (0.5 / (1 - 0.5))
    assert lam ** (-M) <= 0.01 * delta_r_est
    assert bath.omegas.min() < 0.01 * delta_r_est * lam
