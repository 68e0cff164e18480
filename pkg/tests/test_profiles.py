"""Entropy profiles: geometry, levels, perturbations, exact L1 distances."""

from __future__ import annotations

import math

import numpy as np
import pytest

from puretone.profiles import (
    PiecewiseConstantProfile,
    SampledProfile,
    l1_distance,
    physical_from_scaled,
    profile_from_json,
    sigma_of_x,
)
from puretone.thermo import GammaLawGas, QuietState

from _support import random_profile


def test_constructor_validation():
    with pytest.raises(ValueError):
        PiecewiseConstantProfile(())
    with pytest.raises(ValueError):
        PiecewiseConstantProfile((1.0, 1.0), ())  # missing jump
    with pytest.raises(ValueError):
        PiecewiseConstantProfile((1.0, -1.0), (1.0,))
    with pytest.raises(ValueError):
        PiecewiseConstantProfile((1.0, 1.0), (0.0,))


def test_geometry_accessors():
    p = PiecewiseConstantProfile((0.5, 1.0, 0.25), (2.0, 0.5))
    assert p.n_pieces == 3
    assert p.n_jumps == 2
    assert p.total_width == pytest.approx(1.75)
    assert p.jump_positions == pytest.approx((0.5, 1.5))
    assert p.piece_index(0.0) == 0
    assert p.piece_index(0.5) == 1  # right-continuous at the jump
    assert p.piece_index(1.75) == 2
    with pytest.raises(ValueError):
        p.piece_index(2.0)


def test_normalized_total_width():
    rng = np.random.default_rng(30)
    for _ in range(10):
        p = random_profile(rng).normalized()
        assert p.total_width == pytest.approx(1.0, rel=1e-14)


def test_levels_invert_interface_factors():
    gas = GammaLawGas(1.4, c_v=0.9)
    rng = np.random.default_rng(31)
    for _ in range(20):
        p = random_profile(rng, n_jumps=3)
        lev = p.levels(gas)
        for m, j in enumerate(p.jumps, start=1):
            assert gas.jump_ratio(lev[m - 1], lev[m]) == pytest.approx(j, rel=1e-13)


def test_entropy_at_is_right_continuous():
    gas = GammaLawGas(2.0)
    p = PiecewiseConstantProfile((1.0, 1.0), (0.5,))
    lev = p.levels(gas)
    assert p.entropy_at(1.0, gas) == pytest.approx(lev[1])
    assert p.entropy_at(1.0 - 1e-12, gas) == pytest.approx(lev[0])


def test_scaled_widths_and_inverse():
    gas = GammaLawGas(1.6)
    quiet = QuietState(gas, 1.3)
    rng = np.random.default_rng(32)
    for _ in range(20):
        scaled = rng.uniform(0.4, 1.5, size=3)
        jumps = tuple(rng.uniform(0.5, 2.0, size=2))
        phys = physical_from_scaled(scaled, jumps, quiet, s_base=0.2)
        assert np.allclose(phys.scaled_widths(quiet), scaled, rtol=1e-13)
        sig = phys.sigma_pieces(quiet)
        assert np.allclose(sig * np.asarray(phys.widths), scaled, rtol=1e-13)


def test_bv_entropy_formula():
    gas = GammaLawGas(1.4)
    p = PiecewiseConstantProfile((1.0, 1.0, 1.0), (2.0, 0.25))
    expected = 2.0 * gas.c_p * (abs(math.log(2.0)) + abs(math.log(0.25)))
    assert p.bv_entropy(gas) == pytest.approx(expected, rel=1e-14)


def test_perturb_jump_position_distance():
    gas = GammaLawGas(1.4)
    p = PiecewiseConstantProfile((1.0, 1.0, 1.0), (2.0, 0.7))
    eta = 0.125
    q = p.perturb_jump_position(1, eta)
    assert q.total_width == pytest.approx(p.total_width, rel=1e-15)
    expected = 2.0 * gas.c_p * abs(math.log(2.0)) * abs(eta)
    assert l1_distance(p, q, gas) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        p.perturb_jump_position(1, 1.5)  # collapses the first piece


def test_perturb_level_distance_and_conservation():
    gas = GammaLawGas(1.4)
    p = PiecewiseConstantProfile((1.0, 0.5, 1.0), (2.0, 0.7))
    h = 0.2
    q = p.perturb_level(1, h)
    assert np.prod(q.jumps) == pytest.approx(np.prod(p.jumps), rel=1e-14)
    expected = 2.0 * gas.c_p * 0.5 * abs(h)
    assert l1_distance(p, q, gas) == pytest.approx(expected, rel=1e-12)


def test_l1_distance_piecewise_vs_sampled_linear():
    # A piecewise-constant profile against its own midpoint staircase is 0;
    # against a linear ramp the integral is computable by hand.
    gas = GammaLawGas(1.4)
    flat = PiecewiseConstantProfile((2.0,), ())
    ramp = SampledProfile((0.0, 2.0), (0.0, 1.0), "linear")
    # s_base = 0 flat vs ramp from 0 to 1: integral of |x/2| over [0,2] = 1.
    assert l1_distance(flat, ramp, gas) == pytest.approx(1.0, rel=1e-13)


def test_sampled_profile_interp_rules():
    lin = SampledProfile((0.0, 1.0, 2.0), (0.0, 1.0, 0.0), "linear")
    assert lin.level(0.5) == pytest.approx(0.5)
    mid = SampledProfile((0.0, 1.0, 2.0), (0.0, 1.0, 0.0), "midpoint")
    assert mid.level(0.4) == pytest.approx(0.0)
    assert mid.level(0.6) == pytest.approx(1.0)
    assert mid.bv_entropy() == pytest.approx(2.0)


def test_sampled_refined_preserves_rule():
    lin = SampledProfile((0.0, 1.0, 2.0), (0.0, 1.0, 0.0), "linear")
    fine = lin.refined()
    assert len(fine.x) == 5
    xq = np.linspace(0.0, 2.0, 41)
    assert np.allclose(fine.level(xq), lin.level(xq), atol=1e-14)


def test_sampled_validation():
    with pytest.raises(ValueError):
        SampledProfile((0.5, 1.0), (0.0, 0.0))  # must start at 0
    with pytest.raises(ValueError):
        SampledProfile((0.0, 0.0), (0.0, 0.0))  # strictly increasing
    with pytest.raises(ValueError):
        SampledProfile((0.0, 1.0), (0.0, 0.0), "cubic")


def test_sigma_of_x_one_sided_limits():
    gas = GammaLawGas(1.4)
    p = PiecewiseConstantProfile((1.0, 1.0), (2.0,))
    quiet = QuietState(gas, 1.0)
    field = sigma_of_x(p, gas, 1.0)
    sig = p.sigma_pieces(quiet)
    assert field.jump_positions == pytest.approx((1.0,))
    assert field.sigma_left == pytest.approx((sig[0],))
    assert field.sigma_right == pytest.approx((sig[1],))
    # J = sigma_left / sigma_right at the quiet state
    assert sig[0] / sig[1] == pytest.approx(2.0, rel=1e-13)
    assert field.tv_log_sigma() == pytest.approx(abs(math.log(2.0)), rel=1e-12)


def test_json_round_trips():
    rng = np.random.default_rng(33)
    p = random_profile(rng, n_jumps=2)
    q = profile_from_json(p.to_json())
    assert isinstance(q, PiecewiseConstantProfile)
    assert q.widths == pytest.approx(p.widths)
    assert q.jumps == pytest.approx(p.jumps)
    s = SampledProfile((0.0, 0.5, 1.5), (0.1, -0.2, 0.4), "midpoint")
    s2 = profile_from_json(s.to_json())
    assert isinstance(s2, SampledProfile)
    assert s2.x == pytest.approx(s.x)
    assert s2.interp == "midpoint"
