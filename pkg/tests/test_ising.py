import numpy as np
import pytest

from privtherm import (IsingParams, QuadratureConfig, QuadratureError, ValidationError,
                       d2_chiE_eigensum, d2_chiE_ising, d2_Iab_ising, key_length_ising,
                       parse_pauli, scaling_fit, x_mean, xx_correlator)
from privtherm._numerics import bose_kernel
from privtherm.ising import _nodes_1d, bogoliubov, dispersion, time_autocorrelator, time_autocorrelators

from conftest import thermal


def test_dispersion_examples():
    assert np.isclose(dispersion(np.pi / 2, 1.0), 2 * np.sqrt(2))
    phi = np.linspace(0, np.pi, 101)
    assert np.allclose(dispersion(phi, 1.0), 4 * np.abs(np.sin(phi / 2)))
    for g in (0.3, 1.0, 1.7):
        nodes, _ = _nodes_1d(QuadratureConfig(), 5.0, g)
        c, s = bogoliubov(nodes, g)
        assert np.allclose(c ** 2 + s ** 2, 1.0)


def test_params_validation():
    with pytest.raises(ValidationError):
        IsingParams(-1.0, 1.0)
    with pytest.raises(ValidationError):
        IsingParams(1.0, -0.5)


def test_infinite_temperature_limits():
    p = IsingParams(1.3, 0.0)
    assert abs(x_mean(p)) < 1e-14
    assert all(abs(xx_correlator(p, x)) < 1e-14 for x in (1, 2, 5))
    assert abs(time_autocorrelator(p, 0.0) - 1.0) < 1e-12
    assert abs(d2_chiE_ising(p) - 1.0) < 1e-12
    assert key_length_ising(p, 4).x_K == 0


def test_equal_time_autocorrelator():
    for g, beta in [(0.5, 2.0), (1.0, 1.0), (1.5, 5.0)]:
        p = IsingParams(g, beta)
        assert abs(time_autocorrelator(p, 0.0) - (1 - x_mean(p) ** 2)) < 1e-12


def test_ground_state_transverse_magnetization():
    # <X> at T = 0 and g = 1 is 2/pi
    assert abs(x_mean(IsingParams(1.0, 2000.0)) - 2 / np.pi) < 1e-6


def test_time_autocorrelator_matches_ed():
    st = thermal("tfim", 12, 2.0, "periodic", 1.0)
    xt = st.in_eigenbasis(parse_pauli("X@0", 12))
    mean = float(np.dot(st.weights, np.diag(xt).real))
    t = 0.7
    phase = np.exp(1j * (st.energies[:, None] - st.energies[None, :]) * t)
    ed = np.sum(st.weights[:, None] * np.abs(xt) ** 2 * phase) - mean ** 2
    exact = time_autocorrelator(IsingParams(2.0, 1.0), t)
    assert abs(exact - ed) / abs(ed) < 0.03


@pytest.mark.parametrize("g,beta", [(2.0, 1.0), (1.0, 2.0)])
def test_kernel_normalization_against_time_fourier_transform(g, beta):
    # Gaussian-windowed transform of <X_0(t) X_0>_c, then the B-weighted frequency integral
    p = IsingParams(g, beta)
    dt, sigma = 0.05, 12.0
    ts = np.arange(0, 60.0 + dt / 2, dt)
    c = time_autocorrelators(p, ts)
    wt = np.full(ts.size, dt)
    wt[[0, -1]] = dt / 2
    window = np.exp(-ts ** 2 / (2 * sigma ** 2))
    om = np.linspace(-4 * (1 + g) - 3, 4 * (1 + g) + 3, 4001)
    spectrum = 2 * np.real(np.exp(1j * np.outer(om, ts)) @ (wt * window * c))
    oracle = np.trapezoid(bose_kernel(beta * om) * spectrum, om) / (2 * np.pi)
    assert abs(oracle - d2_chiE_ising(p)) / d2_chiE_ising(p) < 1e-2


def test_quadrature_self_consistency():
    p = IsingParams(1.1, 3.0)
    base = QuadratureConfig(check=False)
    fine = base.doubled()
    for f in (lambda q: d2_chiE_ising(p, q), lambda q: x_mean(p, q),
              lambda q: xx_correlator(p, 3, q)):
        a, b = f(base), f(fine)
        assert abs(a - b) <= 1e-6 * abs(b)


def test_quadrature_failure_is_reported():
    p = IsingParams(1.0, 5.0)
    coarse = QuadratureConfig(nodes_1d=16, min_panels_per_oscillation=1)
    with pytest.raises(QuadratureError) as info:
        key_length_ising(p, 200, coarse)
    assert info.value.nodes > 0


def test_d2_chie_decreases_with_beta():
    for g in (1.0, 1.1, 1.5):
        vals = [d2_chiE_ising(IsingParams(g, b)) for b in (0.5, 1, 2, 4, 8)]
        assert np.all(np.diff(vals) < 0)


def test_d2_iab_nonnegative():
    for g, beta in [(0.8, 1.0), (1.0, 4.0), (1.5, 10.0)]:
        assert np.all(d2_Iab_ising(IsingParams(g, beta), np.arange(1, 9)) >= 0)


def test_key_length_scan_records_every_x():
    rep = key_length_ising(IsingParams(1.0, 20.0), 8)
    assert [r[0] for r in rep.scan] == list(range(1, 9))
    positive = [x for x, _, k in rep.scan if k > 1e-9]
    assert rep.x_K == (max(positive) if positive else 0)
    assert rep.x_K >= 1


def test_ising_matches_ed_in_paramagnet():
    g, beta = 2.0, 1.0
    st = thermal("tfim", 12, g, "periodic", beta)
    ed = d2_chiE_eigensum(st, parse_pauli("X@0", 12))
    assert abs(d2_chiE_ising(IsingParams(g, beta)) - ed) / ed < 0.01


def test_scaling_fit_recovers_synthetic_exponents():
    x = np.geomspace(1, 100, 12)
    fit = scaling_fit(x, 3.0 * x ** 1.7)
    assert fit.exponent == pytest.approx(1.7)
    assert fit.prefactor == pytest.approx(3.0)
    fit = scaling_fit(x, 2.0 * np.exp(-0.4 * x), model="exponential")
    assert fit.rate == pytest.approx(0.4)
    fit = scaling_fit(x, x ** 2, window=(5, 50))
    assert 5 <= fit.window[0] < fit.window[1] <= 50
    with pytest.raises(ValidationError):
        scaling_fit(x, -x)
