"""Trigonometric series: sampling, parity, the delay/interface operators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from puretone.series import TrigSeries


def _random_series(rng: np.random.Generator, n_modes: int = 6, period: float = 2 * math.pi) -> TrigSeries:
    cos = rng.normal(size=n_modes + 1)
    sin = rng.normal(size=n_modes + 1)
    sin[0] = 0.0
    return TrigSeries(period, tuple(cos), tuple(sin))


def test_constructors_and_mode_access():
    y = TrigSeries.pure_cosine(3, 8, 2.0, amplitude=0.5)
    assert y.n_modes == 8
    assert y.mode(3) == (0.5, 0.0)
    assert y.mode(2) == (0.0, 0.0)
    z = TrigSeries.constant(1.25, 4, 2.0)
    assert z.mode(0) == (1.25, 0.0)
    assert TrigSeries.zeros(4, 2.0).coeff_norm() == 0.0
    s = TrigSeries.pure_sine(2, 4, 2.0, amplitude=-2.0)
    assert s.mode(2) == (0.0, -2.0)


def test_constant_sine_term_rejected():
    with pytest.raises(ValueError):
        TrigSeries(2.0, (0.0, 1.0), (1.0, 0.0))


def test_sample_at_matches_explicit_sum():
    rng = np.random.default_rng(10)
    y = _random_series(rng)
    omega = y.omega
    t = rng.uniform(-5.0, 5.0, size=13)
    expected = np.zeros_like(t)
    for j in range(y.n_modes + 1):
        a, b = y.mode(j)
        expected += a * np.cos(j * omega * t) + b * np.sin(j * omega * t)
    assert np.allclose(y.sample_at(t), expected, atol=1e-13)


def test_values_is_uniform_grid_of_sample_at():
    rng = np.random.default_rng(11)
    y = _random_series(rng, n_modes=5)
    n = 32
    grid = y.values(n)
    t = np.arange(n) * y.period / n
    assert np.allclose(grid, y.sample_at(t), atol=1e-12)


def test_values_requires_enough_samples():
    y = TrigSeries.pure_cosine(4, 7, 1.0)
    with pytest.raises(ValueError):
        y.values(15)  # needs at least 2*7 + 2


def test_from_values_round_trip():
    rng = np.random.default_rng(12)
    y = _random_series(rng, n_modes=7, period=3.0)
    n = 64
    back = TrigSeries.from_values(y.values(n), 3.0, n_modes=7)
    assert np.allclose(back.cos, y.cos, atol=1e-12)
    assert np.allclose(back.sin, y.sin, atol=1e-12)


def test_shift_is_time_delay():
    rng = np.random.default_rng(13)
    y = _random_series(rng)
    theta = 0.7321
    t = rng.uniform(0.0, y.period, size=9)
    assert np.allclose(y.shift(theta).sample_at(t), y.sample_at(t - theta), atol=1e-12)


def test_quarter_period_shift_on_pure_modes():
    # Delay by T/4 sends cos_k to the k-dependent quadrant image:
    # k % 4 == 0: cos_k; 1: sin_k; 2: -cos_k; 3: -sin_k.
    T = 2 * math.pi
    for k, (a, b) in [(4, (1, 0)), (1, (0, 1)), (2, (-1, 0)), (3, (0, -1))]:
        got = TrigSeries.pure_cosine(k, 6, T).shift(T / 4.0)
        assert got.mode(k)[0] == pytest.approx(a, abs=1e-14)
        assert got.mode(k)[1] == pytest.approx(b, abs=1e-14)


def test_reflect_reverses_time():
    rng = np.random.default_rng(14)
    y = _random_series(rng)
    t = rng.uniform(-2.0, 2.0, size=7)
    assert np.allclose(y.reflect().sample_at(t), y.sample_at(-t), atol=1e-13)


def test_parity_projections_split_identity():
    rng = np.random.default_rng(15)
    y = _random_series(rng)
    even, odd = y.project_even(), y.project_odd()
    assert even.is_even()
    assert odd.is_odd()
    total = even + odd
    assert np.allclose(total.cos, y.cos, atol=1e-15)
    assert np.allclose(total.sin, y.sin, atol=1e-15)
    t = rng.uniform(0.0, y.period, size=5)
    assert np.allclose(even.sample_at(-t), even.sample_at(t), atol=1e-13)
    assert np.allclose(odd.sample_at(-t), -odd.sample_at(t), atol=1e-13)


def test_apply_scalar_jump_scales_odd_part_only():
    rng = np.random.default_rng(16)
    y = _random_series(rng)
    out = y.apply_scalar_jump(1.7)
    assert np.allclose(out.cos, y.cos, atol=1e-15)
    assert np.allclose(out.sin, 1.7 * np.asarray(y.sin), atol=1e-15)
    with pytest.raises(ValueError):
        y.apply_scalar_jump(0.0)


def test_derivative_matches_finite_difference():
    rng = np.random.default_rng(17)
    y = _random_series(rng)
    t = rng.uniform(0.0, y.period, size=7)
    h = 1e-6
    fd = (y.sample_at(t + h) - y.sample_at(t - h)) / (2 * h)
    assert np.allclose(y.derivative().sample_at(t), fd, atol=1e-7)


def test_derivative_of_pure_cosine():
    y = TrigSeries.pure_cosine(3, 6, 2 * math.pi)
    d = y.derivative()
    assert d.mode(3) == pytest.approx((0.0, -3.0))


def test_inner_product_orthogonality():
    T = 2.0
    n = 6
    c2 = TrigSeries.pure_cosine(2, n, T)
    c3 = TrigSeries.pure_cosine(3, n, T)
    s2 = TrigSeries.pure_sine(2, n, T)
    one = TrigSeries.constant(1.0, n, T)
    assert c2.inner_product(c2) == pytest.approx(T / 2)
    assert s2.inner_product(s2) == pytest.approx(T / 2)
    assert c2.inner_product(c3) == pytest.approx(0.0, abs=1e-15)
    assert c2.inner_product(s2) == pytest.approx(0.0, abs=1e-15)
    assert one.inner_product(one) == pytest.approx(T)


def test_inner_product_matches_quadrature():
    rng = np.random.default_rng(18)
    a = _random_series(rng)
    b = _random_series(rng)
    n = 512
    t = np.arange(n) * a.period / n
    quad = float(np.sum(a.sample_at(t) * b.sample_at(t))) * a.period / n
    assert a.inner_product(b) == pytest.approx(quad, rel=1e-12)


def test_truncated_and_with_mode():
    rng = np.random.default_rng(19)
    y = _random_series(rng, n_modes=8)
    t4 = y.truncated(4)
    assert t4.n_modes == 4
    assert np.allclose(t4.cos, np.asarray(y.cos)[:5])
    t12 = y.truncated(12)
    assert t12.n_modes == 12
    assert t12.mode(11) == (0.0, 0.0)
    z = y.with_mode(2, 5.0, -1.0)
    assert z.mode(2) == (5.0, -1.0)
    assert z.mode(3) == y.mode(3)


def test_arithmetic():
    rng = np.random.default_rng(20)
    a = _random_series(rng)
    b = _random_series(rng)
    t = rng.uniform(0.0, a.period, size=6)
    assert np.allclose((a + b).sample_at(t), a.sample_at(t) + b.sample_at(t), atol=1e-13)
    assert np.allclose((a - b).sample_at(t), a.sample_at(t) - b.sample_at(t), atol=1e-13)
    assert np.allclose((a * 2.5).sample_at(t), 2.5 * a.sample_at(t), atol=1e-13)
    assert np.allclose((-a).sample_at(t), -a.sample_at(t), atol=1e-13)


def test_max_abs_and_tail_fraction():
    y = TrigSeries.pure_cosine(1, 8, 2 * math.pi, amplitude=2.0)
    assert y.max_abs() == pytest.approx(2.0, rel=1e-9)
    assert y.tail_fraction() == pytest.approx(0.0, abs=1e-30)
    top = TrigSeries.pure_cosine(8, 8, 2 * math.pi)
    assert top.tail_fraction() == pytest.approx(1.0)


def test_json_round_trip():
    rng = np.random.default_rng(21)
    y = _random_series(rng)
    back = TrigSeries.from_json(y.to_json())
    assert back.period == y.period
    assert np.array_equal(back.cos, y.cos)
    assert np.array_equal(back.sin, y.sin)
