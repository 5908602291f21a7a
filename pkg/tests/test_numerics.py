import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from ridgelab.numerics import summation
from ridgelab.numerics.activations import ActivationProfile, get_activation
from ridgelab.numerics.fourier import AdmissibilityUnknownError, fourier_1d
from ridgelab.numerics.parallel import chunked_map, get_threads, set_threads, threads
from ridgelab.numerics.quadrature import (
    SizingError,
    build_grid,
    discrete_factor,
    integrate,
    interval_factor,
    product_grid,
    sphere_factor,
)
from ridgelab.numerics.sampling import random_orthogonal, rng, sample_group_element
from ridgelab.numerics.summation import NonFiniteError, compensated_reduce, neumaier_sum, weighted_sum


# -- grids --------------------------------------------------------------------


def test_midpoint_two_points():
    g = build_grid([0, 1], 2, "midpoint")
    assert np.allclose(g.nodes[:, 0], [0.25, 0.75])
    assert np.allclose(g.weights, [0.5, 0.5])


def test_midpoint_tensor_product():
    g = build_grid([[0, 1], [0, 1]], 2, "midpoint")
    assert g.size == 4
    assert np.allclose(g.weights, 0.25)


def test_trapezoid_three_points():
    g = build_grid([-1, 1], 3, "trapezoid")
    assert np.allclose(g.nodes[:, 0], [-1, 0, 1])
    assert np.allclose(g.weights, [0.5, 1.0, 0.5])


def test_last_axis_fastest():
    g = build_grid([[0, 1], [0, 1]], [2, 3], "midpoint")
    assert g.shape == (2, 3)
    assert g.nodes[0, 0] == g.nodes[1, 0] == g.nodes[2, 0]
    assert g.nodes[0, 1] < g.nodes[1, 1] < g.nodes[2, 1]


def test_grid_errors():
    with pytest.raises(ValueError):
        build_grid([1, 1], 4)
    with pytest.raises(ValueError):
        build_grid([0, 1], 1, "trapezoid")
    with pytest.raises(SizingError):
        build_grid([[0, 1]] * 4, 100, cap=10 ** 6)


def test_refined_counts():
    g = build_grid([[0, 1], [0, 1]], [4, 5], ["midpoint", "trapezoid"]).refined(2)
    assert g.shape == (8, 9)


def test_sphere_and_discrete_factors():
    s = sphere_factor(3)
    assert s.nodes.shape == (6, 3)
    assert math.isclose(s.weights.sum(), 4 * math.pi)
    s1 = sphere_factor(1)
    assert sorted(s1.nodes[:, 0]) == [-1.0, 1.0]
    g = product_grid(interval_factor(0, 1, 2), discrete_factor([0.0, 2.0], [1.0, 3.0]))
    assert g.dim == 2 and g.size == 4
    assert np.allclose(g.weights, [0.5, 1.5, 0.5, 1.5])


# -- integration --------------------------------------------------------------


def test_integrate_constant():
    assert integrate(np.ones(7), build_grid([0, 1], 7)) == pytest.approx(1.0, abs=1e-15)


def test_integrate_square():
    g = build_grid([-1, 1], 2049, "trapezoid")
    assert abs(integrate(g.nodes[:, 0] ** 2, g) - 2 / 3) <= 1e-6


def test_integrate_gaussian():
    g = build_grid([-8, 8], 4097, "trapezoid")
    assert abs(integrate(np.exp(-g.nodes[:, 0] ** 2), g) - math.sqrt(math.pi)) <= 1e-9


def test_integrate_vector_values():
    g = build_grid([0, 1], 64)
    x = g.nodes[:, 0]
    out = integrate(np.stack([x, x ** 2], axis=1), g)
    assert out.shape == (2,)
    assert out[0] == pytest.approx(0.5, abs=1e-12)


def test_integrate_rejects_nan():
    g = build_grid([0, 1], 4)
    with pytest.raises(NonFiniteError):
        integrate(np.array([1.0, np.nan, 1.0, 1.0]), g)


# -- summation ----------------------------------------------------------------


def test_neumaier_recovers_cancellation():
    vals = np.array([1.0, 1e100, 1.0, -1e100])
    assert neumaier_sum(vals) == 2.0
    assert np.sum(vals) != 2.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300))
def test_neumaier_close_to_fsum(values):
    exact = math.fsum(values)
    scale = sum(abs(v) for v in values)
    assert abs(neumaier_sum(np.array(values)) - exact) <= 4e-16 * scale + 1e-300


def test_reduce_block_size_does_not_change_bits(monkeypatch):
    data = rng(0).standard_normal((20000, 3)) * 10.0 ** rng(1).integers(-8, 8, (20000, 1))
    ref = compensated_reduce(lambda a, b: data[a:b], data.shape[0], (3,))
    for block in (1 << 9, 1 << 13, 1 << 24):
        monkeypatch.setattr(summation, "BLOCK_ELEMENTS", block)
        out = compensated_reduce(lambda a, b: data[a:b], data.shape[0], (3,))
        assert out.tobytes() == ref.tobytes()


def test_reduce_complex_and_scalar():
    z = np.array([1 + 2j, 3 - 1j, -0.5j])
    out = compensated_reduce(lambda a, b: z[a:b], 3)
    assert out == 4 + 0.5j
    assert compensated_reduce(lambda a, b: np.ones(b - a), 5) == 5.0


def test_weighted_sum_matches_fsum():
    w = rng(3).uniform(size=1000)
    v = rng(4).standard_normal(1000)
    assert weighted_sum(w, v) == pytest.approx(math.fsum(w * v), rel=1e-15, abs=1e-15)


def test_lane_count():
    assert summation.lane_count(8192) == 1
    assert summation.lane_count(8193) == summation.LANE_WIDTH


# -- threads ------------------------------------------------------------------


def test_thread_setting(monkeypatch):
    monkeypatch.setenv("RIDGELAB_THREADS", "3")
    assert get_threads() == 3
    with threads(5):
        assert get_threads() == 5
    assert get_threads() == 3
    monkeypatch.setenv("RIDGELAB_THREADS", "zero")
    with pytest.raises(ValueError):
        get_threads()
    with pytest.raises(ValueError):
        set_threads(0)


def test_chunked_map_order_independent_of_threads():
    fn = lambda a, b: list(range(a, b))
    with threads(1):
        one = chunked_map(fn, 103, 10)
    with threads(8):
        many = chunked_map(fn, 103, 10)
    assert one == many


# -- Fourier transforms -------------------------------------------------------


def test_gaussian_fourier_at_zero_and_one():
    g = get_activation("gauss")
    assert fourier_1d(g, 0.0) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    assert fourier_1d(g, 1.0) == pytest.approx(math.sqrt(2 * math.pi) * math.exp(-0.5), rel=1e-14)


def test_numerical_fourier_matches_closed_form():
    g = get_activation("gauss")
    numeric = ActivationProfile("gauss_numeric", g.eval)
    w = np.array([0.0, 0.7, 2.0])
    assert np.allclose(fourier_1d(numeric, w, support_radius=12.0, points=4097), fourier_1d(g, w), atol=1e-10)


def test_even_profile_conjugate_symmetry():
    numeric = ActivationProfile("r", get_activation("ricker").eval)
    a = fourier_1d(numeric, 1.3, support_radius=10.0)
    b = fourier_1d(numeric, -1.3, support_radius=10.0)
    assert a == pytest.approx(np.conj(b), abs=1e-14)


def test_fourier_needs_radius_without_closed_form():
    with pytest.raises(AdmissibilityUnknownError):
        fourier_1d(get_activation("tanh"), 1.0)


def test_ricker_closed_form_against_quadrature():
    r = get_activation("ricker")
    for w in (0.0, 0.5, 1.7):
        val, _ = sci_integrate.quad(lambda t: r.eval(np.array(t)) * math.cos(w * t), -30, 30, limit=200)
        assert fourier_1d(r, w).real == pytest.approx(val, abs=1e-9)


# -- sampling -----------------------------------------------------------------


def test_sampling_is_deterministic():
    a = sample_group_element("ortho_affine", 3, 11)
    b = sample_group_element("ortho_affine", 3, 11)
    assert a.dumps() == b.dumps()


def test_affine_sample_positive_det():
    gen = rng(0)
    for _ in range(200):
        g = sample_group_element("affine", 2, gen)
        assert np.linalg.det(g.L) > 0


def test_cyclic_sample_range():
    shifts = {sample_group_element("cyclic", 5, s).shift for s in range(50)}
    assert shifts <= set(range(5))


def test_random_orthogonal():
    q = random_orthogonal(4, rng(2))
    assert np.allclose(q.T @ q, np.eye(4), atol=1e-12)


def test_sampler_rejects_unknown_family():
    with pytest.raises(ValueError):
        sample_group_element("spin", 2, 0)
