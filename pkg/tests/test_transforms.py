import math

import numpy as np
import pytest
from scipy.special import dawsn

from ridgelab import groups as G
from ridgelab.features import fc2_spec, fc_stack_spec, gconv_spec
from ridgelab.numerics.activations import ActivationProfile, get_activation
from ridgelab.numerics.quadrature import build_grid, discrete_factor, interval_factor, product_grid
from ridgelab.numerics.sampling import rng
from ridgelab.transforms.admissibility import (
    AdmissibilityError,
    admissibility_constant,
    matched_rho,
    resolve_activation,
)
from ridgelab.transforms.diagnostics import intertwine_check_R, intertwine_check_S, kernel_l2_diagnostic
from ridgelab.transforms.functions import ParamDistribution, gaussian_bump, gaussian_target, zero_target
from ridgelab.transforms.gcn import gcn_network_apply, gcn_ridgelet_apply
from ridgelab.transforms.operators import (
    duality_gap,
    network_apply,
    rayleigh_constant,
    reconstruct,
    ridgelet_apply,
    uniform_residual,
)

GAUSS = get_activation("gauss")
X_GRID = build_grid([-8, 8], 257, "trapezoid")


def _raw_oracle(t):
    # inverse transform of |w| sqrt(2 pi) exp(-w^2/2), written with Dawson's integral
    t = np.asarray(t, dtype=float)
    return math.sqrt(2 / math.pi) * (1 - math.sqrt(2) * t * dawsn(t / math.sqrt(2)))


# -- synthesis and analysis ---------------------------------------------------


def test_network_apply_zero_gamma():
    grid = build_grid([[-2, 2], [-2, 2]], 8)
    gamma = ParamDistribution(grid, np.zeros(grid.size))
    out = network_apply(gamma, fc2_spec(1, GAUSS), np.linspace(-1, 1, 5))
    assert np.all(out == 0.0)


def test_network_apply_linear_integrand_midpoint():
    # a = 0 and b in [-1, 0], identity activation: phi(x, xi) = -b sweeps [0, 1]
    grid = product_grid(discrete_factor([0.0]), interval_factor(-1.0, 0.0, 7))
    gamma = ParamDistribution(grid, np.ones(grid.size))
    out = network_apply(gamma, fc2_spec(1, "identity"), np.array([-3.0, 0.0, 2.5]))
    assert np.allclose(out, 0.5, rtol=0, atol=1e-15)


def test_ridgelet_of_zero():
    xi = rng(0).standard_normal((10, 2))
    assert np.all(ridgelet_apply(zero_target(1), fc2_spec(1, GAUSS), xi, X_GRID) == 0.0)


def test_ridgelet_gaussian_at_origin():
    # R[f](0, 0) = sigma(0) * int exp(-x^2) dx
    f = gaussian_target([0.0])
    assert ridgelet_apply(f, fc2_spec(1, GAUSS), np.array([0.0, 0.0]), X_GRID) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_linearity_bitwise():
    f = gaussian_target([0.3], 0.8)
    spec = fc2_spec(1, GAUSS)
    xi = rng(1).standard_normal((17, 2))
    assert np.array_equal(ridgelet_apply(f.scaled(2.0), spec, xi, X_GRID), 2.0 * ridgelet_apply(f, spec, xi, X_GRID))
    grid = build_grid([[-3, 3], [-3, 3]], 12)
    gamma = ParamDistribution.from_callable(grid, gaussian_bump([0.5, 0.0], 1.0))
    x = np.linspace(-2, 2, 9)
    assert np.array_equal(network_apply(gamma.scaled(2.0), spec, x), 2.0 * network_apply(gamma, spec, x))


def test_rayleigh_constant_scale_invariant_bitwise():
    f = gaussian_target([0.0])
    spec = fc2_spec(1, GAUSS)
    xi_grid = build_grid([[-6, 6], [-6, 6]], 24)
    pts = np.linspace(-1, 1, 7)
    one = reconstruct(f, spec, spec, X_GRID, xi_grid, pts)
    two = reconstruct(f.scaled(2.0), spec, spec, X_GRID, xi_grid, pts)
    assert one.constant == two.constant


def test_rayleigh_degenerate():
    assert rayleigh_constant(np.ones(3), np.zeros(3)) is None
    assert uniform_residual(np.ones(3), np.ones(3), None) is None
    assert rayleigh_constant([2.0, 4.0], [1.0, 2.0]) == 2.0
    assert uniform_residual([2.0, 4.5], [1.0, 2.0], 2.0) == pytest.approx(0.125)


def test_reconstruct_zero_target():
    spec = fc2_spec(1, GAUSS)
    rec = reconstruct(zero_target(1), spec, spec, X_GRID, build_grid([[-4, 4], [-4, 4]], 8), np.linspace(-1, 1, 5))
    assert np.all(rec.t_values == 0.0)
    assert rec.constant is None


def test_duality_same_grids():
    f = gaussian_target([0.2], 0.9)
    spec = fc2_spec(1, GAUSS)
    grid = build_grid([[-5, 5], [-5, 5]], 20)
    gamma = ParamDistribution.from_callable(grid, gaussian_bump([0.4, -0.2], 1.3))
    assert duality_gap(gamma, f, spec, build_grid([-6, 6], 97, "trapezoid")) <= 1e-10


# -- admissibility --------------------------------------------------------------


def test_constant_closed_form():
    rho = ActivationProfile("ft_only", lambda t: np.zeros_like(t),
                            lambda w: np.abs(w) * np.sqrt(2 * np.pi) * np.exp(-0.5 * np.asarray(w) ** 2))
    c = admissibility_constant(GAUSS, rho, 1)
    assert abs(c - 2 * math.pi ** 1.5) / (2 * math.pi ** 1.5) <= 1e-6


def test_constant_zero_profile_and_bilinearity():
    assert admissibility_constant(GAUSS, get_activation("zero"), 1) == 0.0
    rho = matched_rho(GAUSS, 1)
    c1 = admissibility_constant(GAUSS, rho, 1)
    c2 = admissibility_constant(GAUSS, rho.scaled(2.0), 1)
    assert c2 == pytest.approx(2.0 * c1, rel=1e-14)


def test_constant_divergence_detected():
    with pytest.raises(AdmissibilityError):
        admissibility_constant(GAUSS, GAUSS, 1)


def test_matched_rho_against_dawson_oracle():
    rho = matched_rho(GAUSS, 1)
    t = np.array([0.0, 0.3, 1.0, 2.5, 7.0, 30.0, 80.0])
    assert rho(0.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)
    assert np.allclose(rho(t), _raw_oracle(t), rtol=1e-6, atol=1e-9)
    assert np.array_equal(rho(t), rho(-t))


def test_normalized_matched_pair_has_unit_constant():
    rho = resolve_activation("matched", 1, "gauss")
    assert admissibility_constant(GAUSS, rho, 1) == pytest.approx(1.0, rel=1e-12)


def test_matched_name_parsing():
    assert resolve_activation("matched:raw", 2, "gauss").name == "matched:gauss:2:raw"
    assert resolve_activation("matched:gauss:1").name == "matched:gauss:1"
    with pytest.raises(ValueError):
        resolve_activation("matched")


# -- kernel diagnostic ----------------------------------------------------------


def test_kernel_zero():
    x = build_grid([-2, 2], 5)
    xi = build_grid([[-2, 2], [-2, 2]], 4)
    assert kernel_l2_diagnostic(fc2_spec(1, GAUSS), fc2_spec(1, "zero"), x, x, xi) == 0.0


def test_kernel_two_point_by_hand():
    # Xi = {(1, 0), (0, -1)} with unit weights: phi(x, .) = {x, 1}, so k(x, y) = x y + 1
    xi = product_grid(discrete_factor([[1.0, 0.0], [0.0, -1.0]]))
    x = product_grid(discrete_factor([0.0, 1.0]))
    spec = fc2_spec(1, "identity")
    assert kernel_l2_diagnostic(spec, spec, x, x, xi) == 7.0


def test_kernel_symmetry():
    x = build_grid([-2, 2], 6)
    y = build_grid([-1, 3], 5)
    xi = build_grid([[-3, 3], [-3, 3]], 6)
    phi, psi = fc2_spec(1, GAUSS), fc2_spec(1, "tanh")
    a = kernel_l2_diagnostic(phi, psi, x, y, xi)
    b = kernel_l2_diagnostic(psi, phi, y, x, xi)
    assert a == pytest.approx(b, rel=1e-12)


# -- intertwining ---------------------------------------------------------------


def _fc2_gamma(points):
    grid = build_grid([[-8, 8], [-8, 8]], points)
    return ParamDistribution.from_callable(grid, gaussian_bump([0.8, 0.3], 0.7))


def test_intertwining_identity_is_zero():
    spec = fc2_spec(1, GAUSS)
    e = G.identity("affine", 1)
    assert intertwine_check_S(_fc2_gamma(16), spec, e, np.linspace(-2, 2, 5)) == 0.0
    xi = rng(2).standard_normal((6, 2))
    assert intertwine_check_R(gaussian_target([0.0]), spec, e, xi, X_GRID) == 0.0


def test_intertwining_moderate_element_and_refinement():
    spec = fc2_spec(1, GAUSS)
    g = G.affine([[1.5]], [0.3])
    x = np.linspace(-2, 2, 21)
    coarse = intertwine_check_S(_fc2_gamma(48), spec, g, x)
    fine = intertwine_check_S(_fc2_gamma(96), spec, g, x)
    assert coarse <= 1e-2
    assert fine < coarse
    xi = rng(3).uniform(-3, 3, (20, 2))
    assert intertwine_check_R(gaussian_target([0.2]), spec, g, xi, X_GRID) <= 1e-2


# -- group-convolutional network -------------------------------------------------


def test_gcn_identity_shift_bitwise():
    base = fc_stack_spec(3, [(1, 3)], ["gauss"])
    grid = build_grid([[-1, 1]] * base.param_dim, 2)
    gamma = ParamDistribution(grid, rng(4).standard_normal(grid.size))
    x = rng(5).standard_normal((4, 3))
    e = G.cyclic(0, 3)
    assert np.array_equal(gcn_network_apply(gamma, gconv_spec(base), x, e), network_apply(gamma, base, x))
    f1 = gaussian_target(np.zeros(3), vector=[1.0, 0.5, 0.25])
    xg = build_grid([[-3, 3]] * 3, 5, "trapezoid")
    assert np.array_equal(gcn_ridgelet_apply(f1, gconv_spec(base), grid.nodes[:5], xg),
                          ridgelet_apply(f1, base, grid.nodes[:5], xg))
