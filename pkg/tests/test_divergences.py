import math

import numpy as np
import pytest

from drlearn import CHI2, KL, divergence_by_name, rho_bar, rho_inflated


@pytest.mark.parametrize("div", [CHI2, KL], ids=["chi2", "kl"])
def test_phi_basic_shape(div):
    assert div.phi(1.0) == pytest.approx(0.0, abs=1e-15)
    grid = np.linspace(0.0, 10.0, 101)
    assert np.all(div.phi(grid) >= -1e-15)


@pytest.mark.parametrize("div", [CHI2, KL], ids=["chi2", "kl"])
def test_phi_prime_inverse_roundtrip(div):
    for s in (0.1, 0.5, 1.0, 2.0, 10.0):
        assert div.phi_prime_inv(div.phi_prime(s)) == pytest.approx(s, rel=1e-12)


def test_phi_at_zero_limits():
    assert CHI2.phi(0.0) == 1.0
    assert CHI2.phi_at_zero == 1.0
    # s log s - s + 1 -> 1 as s -> 0+
    assert KL.phi(0.0) == pytest.approx(1.0, abs=1e-15)
    assert KL.phi(1e-300) == pytest.approx(1.0, rel=1e-12)
    assert KL.phi_at_zero == 1.0


def test_phi_prime_at_zero_sentinels():
    assert CHI2.phi_prime_at_zero == -2.0
    assert KL.phi_prime_at_zero == -math.inf


def test_chi2_inverse_matches_newton():
    # phi'(s) = 2(s-1); invert by Newton from s=1 and compare to 1 + y/2
    for y in (-1.5, -0.3, 0.0, 0.7, 4.0):
        s = 1.0
        for _ in range(50):
            s -= (CHI2.phi_prime(s) - y) / 2.0
        assert CHI2.phi_prime_inv(y) == pytest.approx(s, rel=1e-12, abs=1e-12)


def test_divergence_by_name():
    assert divergence_by_name("chi2") is CHI2
    assert divergence_by_name("KL") is KL
    with pytest.raises(ValueError):
        divergence_by_name("wasserstein")


def test_rho_bar_frozen_values():
    # direct evaluations: 0.5*(2-1)^2 + 0.5*(0-1)^2 and 0.5*(2 ln 2 - 1) + 0.5
    assert rho_bar(CHI2, 2) == pytest.approx(1.0, abs=1e-15)
    assert rho_bar(KL, 2) == pytest.approx(math.log(2.0), rel=1e-12)


def test_rho_bar_monotone_decreasing_to_zero():
    values = [rho_bar(CHI2, n) for n in (2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-2


def test_rho_bar_rejects_small_n():
    with pytest.raises(ValueError):
        rho_bar(CHI2, 1)


def test_rho_inflated_values():
    assert rho_inflated(0.3, 16, 16) == 0.3  # m = n: no inflation
    expected = 0.1 + (1.0 / 512 - 1.0 / 1024) ** (0.99 / 2)
    assert rho_inflated(0.1, 512, 1024, c=1.0, delta=0.01) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.132352, abs=1e-6)


def test_rho_inflated_decreasing_in_m():
    n = 64
    values = [rho_inflated(0.1, m, n) for m in range(1, n + 1)]
    assert all(a > b for a, b in zip(values, values[1:-1]))
    assert values[-1] == 0.1


def test_rho_inflated_validation():
    with pytest.raises(ValueError):
        rho_inflated(0.1, 10, 5)
    with pytest.raises(ValueError):
        rho_inflated(0.1, 2, 4, c=0.0)
    with pytest.raises(ValueError):
        rho_inflated(0.1, 2, 4, delta=1.0)
    with pytest.raises(ValueError):
        rho_inflated(-0.1, 2, 4)
