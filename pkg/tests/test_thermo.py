"""Equation-of-state and scaling-map tests.

Numeric expectations are frozen closed-form values computed by hand (or a
central difference of the law itself), never read back from the code.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from puretone.thermo import GammaLawGas, QuietState


def test_specific_volume_reference_point():
    gas = GammaLawGas(1.4)
    # 2**(-1/1.4), frozen.
    assert gas.specific_volume(2.0, 0.0) == pytest.approx(0.6095068271022377, abs=1e-15)
    assert gas.specific_volume(1.0, 0.0) == 1.0


def test_pressure_inverts_specific_volume():
    gas = GammaLawGas(1.4)
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = rng.uniform(0.1, 10.0)
        s = rng.uniform(-1.0, 1.0)
        v = gas.specific_volume(p, s)
        assert gas.pressure(v, s) == pytest.approx(p, rel=1e-13)


def test_volume_derivatives_match_finite_differences():
    gas = GammaLawGas(1.6, c_v=0.8)
    rng = np.random.default_rng(2)
    for _ in range(25):
        p = rng.uniform(0.2, 5.0)
        s = rng.uniform(-1.0, 1.0)
        h = 1e-5 * p
        fd1 = (gas.specific_volume(p + h, s) - gas.specific_volume(p - h, s)) / (2 * h)
        fd2 = (
            gas.specific_volume(p + h, s)
            - 2 * gas.specific_volume(p, s)
            + gas.specific_volume(p - h, s)
        ) / h**2
        assert gas.dv_dp(p, s) == pytest.approx(fd1, rel=1e-6)
        assert gas.d2v_dp2(p, s) == pytest.approx(fd2, rel=1e-5)


def test_genuine_nonlinearity_signs():
    rng = np.random.default_rng(3)
    for _ in range(25):
        gas = GammaLawGas(rng.uniform(1.1, 3.0))
        p = rng.uniform(0.1, 10.0)
        s = rng.uniform(-2.0, 2.0)
        assert gas.dv_dp(p, s) < 0.0
        assert gas.d2v_dp2(p, s) > 0.0


def test_nu_exponent():
    assert GammaLawGas(2.0).nu == pytest.approx(3.0)
    assert GammaLawGas(3.0).nu == pytest.approx(2.0)


def test_jump_ratio_reference_value():
    # gamma = 1.4, c_v = 1: c_p = 1.4; ds = 0.7 gives exp(-0.25), frozen.
    gas = GammaLawGas(1.4)
    assert gas.jump_ratio(0.0, 0.7) == pytest.approx(0.7788007830714049, abs=1e-15)
    assert gas.jump_ratio(0.3, 0.3) == 1.0


def test_sigma_squared_reference_point():
    # gamma = 2, p_bar = 1, s = 0: sigma^2 = -v_p = 1/2 exactly.
    quiet = QuietState(GammaLawGas(2.0), 1.0)
    assert quiet.sigma_squared(0.0) == pytest.approx(0.5, abs=1e-15)
    assert quiet.sigma(0.0) == pytest.approx(0.7071067811865475, abs=1e-15)


def test_convexity_ratio_is_entropy_independent():
    # v_pp / sigma^2 at the quiet pressure depends only on gamma and p_bar.
    rng = np.random.default_rng(4)
    for _ in range(20):
        gamma = rng.uniform(1.2, 2.5)
        p_bar = rng.uniform(0.5, 3.0)
        quiet = QuietState(GammaLawGas(gamma), p_bar)
        expected = (gamma + 1.0) / (gamma * p_bar)
        for s in rng.uniform(-1.5, 1.5, size=4):
            ratio = quiet.gas.d2v_dp2(p_bar, s) / quiet.sigma_squared(s)
            assert ratio == pytest.approx(expected, rel=1e-13)


def test_nondim_forward_reference_point():
    # gamma = 2, p = 4 p_bar: w = 4**(1/4) - 1 = sqrt(2) - 1, frozen.
    quiet = QuietState(GammaLawGas(2.0), 1.0)
    w, wstar = quiet.nondim_forward(4.0, 0.0, 0.0)
    assert w == pytest.approx(0.41421356237309515, abs=1e-15)
    assert wstar == 0.0


def test_nondim_quiet_state_maps_to_origin():
    quiet = QuietState(GammaLawGas(1.7), 2.3)
    for s in (-1.0, 0.0, 0.5):
        w, wstar = quiet.nondim_forward(2.3, 0.0, s)
        assert w == pytest.approx(0.0, abs=1e-15)
        assert wstar == 0.0


def test_nondim_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(50):
        quiet = QuietState(GammaLawGas(rng.uniform(1.2, 2.5)), rng.uniform(0.5, 2.0))
        p = rng.uniform(0.3, 4.0)
        u = rng.uniform(-1.0, 1.0)
        s = rng.uniform(-1.0, 1.0)
        w, wstar = quiet.nondim_forward(p, u, s)
        p2, u2 = quiet.nondim_inverse(w, wstar, s)
        assert p2 == pytest.approx(p, rel=1e-13)
        assert u2 == pytest.approx(u, rel=1e-13, abs=1e-13)


def test_nondim_inverse_rejects_vacuum():
    quiet = QuietState(GammaLawGas(1.4), 1.0)
    with pytest.raises(ValueError):
        quiet.nondim_inverse(-1.0, 0.0, 0.0)


def test_scaled_width_uses_slowness():
    quiet = QuietState(GammaLawGas(2.0), 1.0)
    assert quiet.scaled_width(2.0, 0.0) == pytest.approx(2.0 * quiet.sigma(0.0))


def test_constructor_validation():
    with pytest.raises(ValueError):
        GammaLawGas(1.0)
    with pytest.raises(ValueError):
        GammaLawGas(1.4, c_v=0.0)
    with pytest.raises(ValueError):
        QuietState(GammaLawGas(1.4), 0.0)
