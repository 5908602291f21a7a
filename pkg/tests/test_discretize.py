import math

import numpy as np
import pytest

from ridgelab.discretize import (
    FiniteNetwork,
    discretization_study,
    finite_apply,
    load_network,
    partition_box,
    synthesize,
    uniform_error,
)
from ridgelab.features import fc2_spec
from ridgelab.numerics.quadrature import SizingError
from ridgelab.numerics.sampling import rng
from ridgelab.transforms.functions import ParamDistribution, gaussian_bump
from ridgelab.transforms.operators import network_apply

SPEC = fc2_spec(1, "gauss")
BUMP = gaussian_bump([0.5, -0.3], 1.2)


def test_partition_1d():
    p = partition_box([0, 1], 2)
    assert p.centers[:, 0].tolist() == [0.25, 0.75]
    assert p.volumes.tolist() == [0.5, 0.5]


def test_partition_2d():
    p = partition_box([[0, 1], [0, 1]], 2)
    assert len(p) == 4
    assert np.allclose(p.volumes, 0.25)
    assert p.max_diameter == pytest.approx(math.sqrt(2) / 2)


@pytest.mark.parametrize("n", [1, 3, 7])
def test_partition_volume_and_diameter(n):
    box = [[-2, 1], [0, 5], [3, 3.5]]
    p = partition_box(box, n)
    assert abs(p.volumes.sum() - 7.5) <= 1e-10 * 7.5
    diam = math.sqrt(9 + 25 + 0.25)
    assert p.max_diameter <= diam / n + 1e-12


def test_partition_errors():
    with pytest.raises(ValueError):
        partition_box([0, 1], 0)
    with pytest.raises(SizingError):
        partition_box([[0, 1]] * 3, 100, cap=1000)


def test_synthesize_zero_and_unit():
    p = partition_box([[-1, 1], [-1, 1]], 3)
    net = synthesize(lambda xi: np.zeros(len(xi)), SPEC, p)
    assert np.all(net.weights == 0.0)
    assert len(net) == len(p)
    q = partition_box([0, 1], 4)
    unit = synthesize(lambda xi: np.ones(len(xi)), SPEC, q)
    assert unit.weights.tolist() == [0.25] * 4


def test_total_weight_is_midpoint_integral():
    p = partition_box([[-3, 3], [-3, 3]], 9)
    net = synthesize(BUMP, SPEC, p)
    grid = p.as_grid()
    assert net.weights.sum() == pytest.approx(float(np.sum(grid.weights * BUMP(grid.nodes))), rel=1e-13)


def test_finite_apply_empty_and_single_term():
    x = np.linspace(-1, 1, 5)
    empty = FiniteNetwork(np.zeros(3), rng(0).standard_normal((3, 2)), SPEC).pruned()
    assert len(empty) == 0
    assert np.all(finite_apply(empty, x) == 0.0)
    xi = np.array([0.7, -0.2])
    one = FiniteNetwork(np.array([2.0]), xi[None, :], SPEC)
    assert np.array_equal(finite_apply(one, x), 2.0 * SPEC.evaluate_flat(x[:, None], xi))


def test_finite_apply_matches_network_apply_bitwise():
    p = partition_box([[-4, 4], [-4, 4]], 10)
    net = synthesize(BUMP, SPEC, p)
    gamma = ParamDistribution.from_callable(p.as_grid(), BUMP)
    x = np.linspace(-2, 2, 11)
    assert np.array_equal(finite_apply(net, x), network_apply(gamma, SPEC, x))
    assert uniform_error(net, BUMP, SPEC, p.as_grid(), x) == 0.0


def test_exactness_for_affine_integrand():
    # identity activation: phi = a x - b is affine in xi; gamma is constant
    spec = fc2_spec(1, "identity")
    p = partition_box([[0, 0.5], [-1, 1]], 5)
    net = synthesize(lambda xi: np.full(len(xi), 2.0), spec, p)
    x = np.array([0.0, 1.0, -3.0])
    # 2 * int_0^0.5 int_-1^1 (a x - b) db da = 2 * x * (1/8) * 2
    assert np.allclose(finite_apply(net, x)[:, 0], 0.5 * x, rtol=0, atol=1e-12)


def test_network_json_round_trip(tmp_path):
    net = synthesize(BUMP, SPEC, partition_box([[-2, 2], [-2, 2]], 4))
    path = tmp_path / "net.json"
    net.save(path)
    back = load_network(str(path))
    x = np.linspace(-1, 1, 7)
    assert np.array_equal(finite_apply(back, x), finite_apply(net, x))
    assert back.dumps() == net.dumps()


def test_pruning_keeps_export_small():
    w = np.array([1.0, 1e-320, 0.0])
    net = FiniteNetwork(w, np.zeros((3, 2)), SPEC)
    assert len(net.to_json()["terms"]) == 1
    assert len(net) == 3


def test_nonfinite_gamma_rejected():
    with pytest.raises(ValueError):
        synthesize(lambda xi: np.full(len(xi), np.nan), SPEC, partition_box([0, 1], 2))


def test_study_on_smooth_gamma_converges():
    test = np.linspace(-2, 2, 9)
    out = discretization_study(BUMP, SPEC, [[-6, 6], [-6, 6]], [4, 8, 16, 32], 96, test)
    e = out["errors"]
    assert all(b <= 1.1 * a for a, b in zip(e, e[1:]))
    assert e[-1] <= 0.5 * e[0]
    assert out["observed_order"] >= 1.0
