#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
双曲模型测试：Ω、horocycle 括号、哈尔密度、P 函数与 σ 曲线
"""

import logging
import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy import integrate

from hyperbolic_models import (
    BoundaryPoint,
    DecompositionError,
    DomainError,
    Model,
    a_element,
    boundary_curve_sigma,
    complex_point,
    crown_omega,
    crown_point,
    haar_kak_density,
    horocycle_a,
    in_hat_domain,
    k_rotation,
    omega_contains,
    origin,
    p_function,
    pair_invariant,
    random_group_element,
    random_k,
    sigma_curve_point,
    translate,
)
from special_functions import gauss_legendre

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

MODELS = [Model.SL2R, Model.SL2C]


def _random_boundary(model, rng):
    if model is Model.SL2R:
        return BoundaryPoint(model, angle=rng.uniform(0.0, 2.0 * math.pi))
    n = rng.standard_normal(3)
    return BoundaryPoint(model, direction=n / np.linalg.norm(n))


def test_crown_omega_interval():
    print("\n" + "=" * 60)
    print("测试 Ω 区间")
    print("=" * 60)
    for model in MODELS:
        assert crown_omega(model) == (-math.pi / 4, math.pi / 4)
        assert omega_contains(model, 0.0)
        assert not omega_contains(model, math.pi / 4)
        assert omega_contains(model, math.pi / 4 - 1e-6)


@pytest.mark.parametrize("model", MODELS)
def test_horocycle_at_origin_vanishes(model):
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert abs(horocycle_a(origin(model), _random_boundary(model, rng))) < 1e-15


def test_horocycle_matches_disk_poisson_kernel():
    """实点 a_r·x_o：2·Re log a = log((1-|w|²)/|w-e^{iβ}|²)，w = tanh r"""
    r = 0.4
    z = crown_point(Model.SL2R, a_element(Model.SL2R, r))
    w = math.tanh(r)
    for beta in np.linspace(0.0, 2.0 * math.pi, 37):
        poisson = (1 - w * w) / abs(w - np.exp(1j * beta)) ** 2
        value = horocycle_a(z, BoundaryPoint(Model.SL2R, angle=beta))
        assert abs(value.imag) < 1e-15
        assert abs(2.0 * value.real - math.log(poisson)) < 1e-12


def test_horocycle_matches_ball_poisson_kernel():
    """H³：e^{4 Re log a} 等于球模型 Poisson 核 ((1-|x|²)/|x-b|²)²"""
    r = 0.7
    z = crown_point(Model.SL2C, a_element(Model.SL2C, r))
    x = np.array([0.0, 0.0, math.tanh(r)])
    rng = np.random.default_rng(5)
    for _ in range(20):
        b = _random_boundary(Model.SL2C, rng)
        poisson = ((1 - x @ x) / np.sum((x - b.direction) ** 2)) ** 2
        value = horocycle_a(z, b)
        assert abs(math.exp(4.0 * value.real) - poisson) <= 1e-11 * poisson


@pytest.mark.parametrize("model", MODELS)
def test_complex_convexity_sampled(model):
    """10³ 个随机 (g, Y)：Im log a(g·exp(iY)·x_o) ∈ [-|Y|, |Y|]"""
    rng = np.random.default_rng(17)
    for _ in range(1000):
        Y = rng.uniform(-0.78, 0.78)
        z = crown_point(model, random_group_element(model, rng), 1j * Y)
        value = horocycle_a(z, _random_boundary(model, rng))
        assert abs(value.imag) <= abs(Y) + 1e-10


def test_decomposition_failure():
    z = complex_point(np.array([[1.0, 0.0], [1j, 1.0]]))
    with pytest.raises(DecompositionError):
        horocycle_a(z, BoundaryPoint(Model.SL2R, angle=0.0))


@seed(23)
@settings(max_examples=100, deadline=None)
@given(seed_value=st.integers(min_value=0, max_value=2 ** 31 - 1),
       Y=st.floats(min_value=-0.78, max_value=0.78),
       model=st.sampled_from(MODELS))
def test_det_preserved(seed_value, Y, model):
    rng = np.random.default_rng(seed_value)
    g = random_group_element(model, rng)
    z = crown_point(model, g, 1j * Y)
    assert abs(np.linalg.det(g.m) - 1) <= 1e-12 * max(1.0, np.sum(np.abs(g.m) ** 2))
    assert abs(np.linalg.det(z.rep) - 1) <= 1e-12 * max(1.0, np.sum(np.abs(z.rep) ** 2))
    assert abs(np.linalg.det(z.gram) - 1) <= 1e-12 * max(1.0, np.sum(np.abs(z.gram) ** 2))


@pytest.mark.parametrize("model", MODELS)
def test_haar_density(model):
    assert haar_kak_density(model, 0.0) == 0.0
    # 小 r 行为：J(r)/r^{dim-1} → 8π (H²) 或 32π (H³)
    limit = 8.0 * math.pi if model is Model.SL2R else 32.0 * math.pi
    ratio = haar_kak_density(model, 1e-5) / 1e-5 ** (model.dim - 1)
    assert abs(ratio - limit) <= 1e-8 * limit


@pytest.mark.parametrize("model", MODELS)
def test_haar_total_mass_matches_geodesic_polar(model):
    """KAK 坐标积分与测地极坐标积分一致"""
    r, wr = gauss_legendre(200, 0.0, 3.0)
    via_kak = np.sum(wr * haar_kak_density(model, r) * np.exp(-(2.0 * r) ** 2))
    sphere = 2.0 * math.pi if model is Model.SL2R else 4.0 * math.pi

    def polar(d):
        return sphere * math.sinh(d) ** (model.dim - 1) * math.exp(-d * d)

    via_polar, _ = integrate.quad(polar, 0.0, 6.0, epsabs=0, epsrel=1e-13)
    assert abs(via_kak - via_polar) <= 1e-8 * via_polar


def test_p_function_examples():
    assert abs(p_function(origin(Model.SL2R)) - 2.0) < 1e-15
    t = 1.7
    z = complex_point(np.diag([t, 1.0 / t]))
    assert abs(p_function(z) - (t * t + 1.0 / t ** 2)) < 1e-13
    z = complex_point(np.diag([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)]))
    assert abs(p_function(z)) < 1e-15
    r = 0.3
    assert abs(p_function(crown_point(Model.SL2R, a_element(Model.SL2R, r))) - 2 * math.cosh(2 * r)) < 1e-14


@pytest.mark.parametrize("model", MODELS)
def test_p_function_k_invariant(model):
    rng = np.random.default_rng(29)
    for _ in range(1000):
        z = crown_point(model, random_group_element(model, rng), 1j * rng.uniform(-0.7, 0.7))
        moved = translate(random_k(model, rng), z)
        scale = max(1.0, float(np.max(np.abs(z.gram))))
        assert abs(p_function(moved) - p_function(z)) <= 1e-12 * scale


def test_in_hat_domain():
    print("\n" + "=" * 60)
    print("测试 X̂_{ℂ,Ω} 与 X̂_{ℂ,2Ω}")
    print("=" * 60)
    x_o = origin(Model.SL2R)
    assert in_hat_domain(x_o, "omega") and in_hat_domain(x_o, "2omega")

    rng = np.random.default_rng(31)
    for _ in range(10000):
        z = crown_point(Model.SL2R, random_group_element(Model.SL2R, rng, 2.0),
                        1j * rng.uniform(-0.785, 0.785))
        assert in_hat_domain(z, "omega")

    # σ 曲线延伸到 P = -3
    phi = 3 * math.pi / 8
    c = -math.cos(2 * phi)
    root = math.sqrt(c)
    a = math.sqrt(3.0 / (2.0 * c))
    s = 0.5 * (1.0 + (a * root - root) / (1.0 - root))
    z = sigma_curve_point(phi, s, allow_extension=True)
    assert abs(p_function(z) + 3.0) < 1e-12
    assert not in_hat_domain(z, "2omega")
    assert not in_hat_domain(z, "omega")


def test_sigma_curve_endpoints():
    for phi in (0.8, 3 * math.pi / 8, -1.3, 1.5):
        assert abs(boundary_curve_sigma(phi, 0.0) - 2.0) < 1e-14
        assert abs(boundary_curve_sigma(phi, 0.5) - 2 * math.cos(2 * phi)) < 1e-13
        assert abs(boundary_curve_sigma(phi, 1.0) + 2.0) < 1e-12


def test_sigma_curve_monotone_and_real():
    phi = 3 * math.pi / 8
    values = np.array([boundary_curve_sigma(phi, s) for s in np.linspace(0.0, 1.0, 1000)])
    assert np.max(np.abs(values.imag)) < 1e-10
    assert np.all(np.diff(values.real) < 0)


def test_sigma_curve_domain_errors():
    with pytest.raises(DomainError):
        boundary_curve_sigma(0.3, 0.5)
    with pytest.raises(DomainError):
        boundary_curve_sigma(1.0, 1.2)


def test_pair_invariant():
    rng = np.random.default_rng(41)
    for model in MODELS:
        g = random_group_element(model, rng)
        h = random_group_element(model, rng)
        x = crown_point(model, g)
        y = crown_point(model, h)
        # 实点：对称且 ≥ 1（cosh 距离）
        d = pair_invariant(x, y)
        assert abs(d - pair_invariant(y, x)) <= 1e-12 * abs(d)
        assert abs(d.imag) <= 1e-12 * abs(d) and d.real >= 1.0 - 1e-12
        # 冠点：Hermite 对称；与原点配对给出冠不变量
        z = crown_point(model, g, 0.2 + 0.3j)
        w = crown_point(model, h, -0.1 + 0.25j)
        assert abs(pair_invariant(z, w) - np.conj(pair_invariant(w, z))) <= 1e-11 * abs(pair_invariant(z, w))
        assert abs(pair_invariant(z, origin(model)) - z.invariant) <= 1e-12 * abs(z.invariant)


def test_k_rotation_acts_on_boundary():
    """k_θ 平移后的括号等于边界角平移 2θ 的括号"""
    z = crown_point(Model.SL2R, a_element(Model.SL2R, 0.5), 0.3j)
    theta = 0.37
    moved = translate(k_rotation(theta), z)
    for beta in np.linspace(0.0, 2 * math.pi, 9):
        lhs = horocycle_a(moved, BoundaryPoint(Model.SL2R, angle=beta))
        rhs = horocycle_a(z, BoundaryPoint(Model.SL2R, angle=beta - 2 * theta))
        assert abs(lhs - rhs) < 1e-12


def test_boundary_point_validation():
    with pytest.raises(ValueError):
        BoundaryPoint(Model.SL2C, direction=np.array([1.0, 1.0, 0.0]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
