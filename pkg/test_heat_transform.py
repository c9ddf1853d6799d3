#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
热核变换测试：热核、冠上延拓、H_t、轨道积分、D、Abel 变换、权函数、范数恒等式与像集判别
"""

import logging
import math

import numpy as np
import pytest
from scipy import integrate

from helgason_fourier import GridSpec, HelgasonBasis, XFunction, random_family_member, reference_bump, rotate
from heat_transform import (
    AmplificationOverflow,
    CrownFunction,
    DecayViolation,
    MuCutoffError,
    RadialProfile,
    SpectralDensity,
    Verdict,
    abel_resynthesis,
    abel_transform,
    continuity_constant,
    heat_convolve_direct,
    heat_kernel,
    heat_kernel_closed,
    heat_kernel_crown,
    heat_kernel_profile,
    half_time_kernel,
    heat_mu_cutoff,
    heat_transform_apply,
    image_membership,
    membership_from_density,
    norm_identity_check,
    orbital_integral_direct,
    orbital_integral_spectral,
    shift_D,
    surjectivity_construct,
    translated_heat_crown,
    weight_w,
)
from hyperbolic_models import CrownBoundaryError, Model, crown_point, haar_kak_density
from special_functions import gauss_legendre

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)

MODELS = [Model.SL2R, Model.SL2C]
C_X = 1.0 / (2.0 * math.pi ** 2)
GRID = GridSpec()
T = 0.1


@pytest.fixture(scope="module")
def bases():
    return {model: HelgasonBasis(model, GRID) for model in MODELS}


def _rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# ==================== 热核 ====================

@pytest.mark.parametrize("t", [0.1, 0.5])
@pytest.mark.parametrize("model", MODELS)
def test_heat_kernel_total_mass(model, t):
    """∫_X k_t = 1"""
    r, wr = gauss_legendre(600, 0.0, 4.5)
    total = np.sum(wr * haar_kak_density(model, r) * heat_kernel(model, t, r, C_X))
    assert abs(total - 1.0) <= 1e-8


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_heat_kernel_h3_closed_form(t):
    r = np.linspace(0.0, 2.0, 21)
    spectral = heat_kernel(Model.SL2C, t, r, C_X)
    closed = np.real(heat_kernel_closed(t, r))
    peak = closed[0]
    assert np.all(np.abs(spectral - closed) <= 1e-8 * np.abs(closed) + 1e-13 * peak)


def test_heat_kernel_scalar_and_validation():
    assert isinstance(heat_kernel(Model.SL2R, T, 0.3, C_X), float)
    with pytest.raises(ValueError):
        heat_kernel(Model.SL2R, T, -0.1, C_X)
    with pytest.raises(ValueError):
        heat_kernel(Model.SL2R, 0.0, 0.1, C_X)


def test_heat_kernel_mu_cutoff_error():
    with pytest.raises(MuCutoffError):
        heat_kernel(Model.SL2C, T, 0.5, C_X, mu_cutoff=2.0)


def test_heat_mu_cutoff():
    value = heat_mu_cutoff(0.1, 1.0)
    assert abs(0.1 * (value ** 2 + 1.0) - math.log(1e12)) < 1e-10
    assert heat_mu_cutoff(100.0, 1.0) == 0.0


@pytest.mark.parametrize("model", MODELS)
def test_heat_semigroup(model, bases):
    """k_s ∗ k_t = k_{s+t}"""
    s = 0.1
    k_s = XFunction.from_callable(model, GRID, lambda r, a: heat_kernel(model, s, r, C_X) + 0 * a)
    F = heat_transform_apply(k_s, T, C_X, basis=bases[model])
    r = GRID.radial_nodes()[0]
    expected = heat_kernel(model, s + T, r, C_X)
    got = F.values[0]
    assert np.abs(got - expected[:, None]).max() <= 1e-6 * expected.max()


def test_heat_kernel_profile_spline():
    profile = heat_kernel_profile(Model.SL2C, T, C_X)
    d = np.array([0.0, 0.05, 0.4, 1.3])
    closed = np.real(heat_kernel_closed(T, d / 2.0))
    assert np.allclose(profile(d), closed, rtol=1e-6, atol=1e-12 * closed[0])
    assert profile(profile.d_max + 1.0) == 0.0
    assert profile.edge_ratio() < 1e-10


# ==================== 冠上热核 ====================

@pytest.mark.parametrize("model", MODELS)
def test_crown_kernel_restricts_to_heat_kernel(model):
    for r in (0.0, 0.3, 1.1):
        value = heat_kernel_crown(model, T, crown_point(model, Z=r), C_X)
        expected = heat_kernel(model, T, r, C_X)
        assert abs(value - expected) <= 1e-10 * abs(expected) + 1e-14


@pytest.mark.parametrize("model", MODELS)
def test_crown_kernel_grows_along_imaginary_axis(model):
    values = [heat_kernel_crown(model, T, crown_point(model, Z=1j * Y), C_X) for Y in (0.0, 0.2, 0.4, 0.6)]
    assert all(abs(v.imag) <= 1e-10 * abs(v) for v in values)
    assert all(b.real > a.real > 0 for a, b in zip(values, values[1:]))


def test_crown_kernel_h3_matches_closed_continuation():
    for Z in (0.4 + 0.2j, 0.8 + 0.5j, 0.1 + 0.7j):
        value = heat_kernel_crown(Model.SL2C, T, crown_point(Model.SL2C, Z=Z), C_X)
        closed = complex(heat_kernel_closed(T, Z))
        assert abs(value - closed) <= 1e-6 * abs(closed)


def test_crown_kernel_boundary():
    with pytest.raises(CrownBoundaryError):
        heat_kernel_crown(Model.SL2R, T, crown_point(Model.SL2R, Z=0.1 + 1j * math.pi / 4), C_X)
    with pytest.raises(ValueError):
        heat_kernel_crown(Model.SL2R, T, crown_point(Model.SL2C, Z=0.1), C_X)


# ==================== H_t ====================

@pytest.mark.parametrize("model", MODELS)
def test_heat_transform_of_zero(model, bases):
    zero = XFunction(model, GRID, np.zeros((GRID.radial_points, GRID.angular_points)))
    F = heat_transform_apply(zero, T, C_X, y_grid=(0.0, 0.3), basis=bases[model])
    assert np.all(F.values == 0)
    assert F.crown_norm2() == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS)
def test_heat_transform_matches_direct_convolution(model, bases):
    print("\n" + "=" * 60)
    print(f"测试 H_t 与直接卷积 {model.value}")
    print("=" * 60)
    rng = np.random.default_rng(21)
    f = random_family_member(model, GRID, rng)
    F = heat_transform_apply(f, T, C_X, basis=bases[model])
    r = GRID.radial_nodes()[0]
    angle = GRID.angle_nodes(model)[0]
    picks = [(10, 0), (30, 7), (45, 20), (60, 33)]
    direct = heat_convolve_direct(f, T, C_X, [(r[i], angle[j]) for i, j in picks])
    spectral = np.array([F.values[0, i, j] for i, j in picks])
    scale = np.abs(F.values[0]).max()
    assert np.abs(direct - spectral).max() <= 1e-4 * scale
    logger.info(f"[OK] 直接卷积最大偏差 {np.abs(direct - spectral).max() / scale:.2e}")


def test_heat_transform_rotation_equivariance(bases):
    rng = np.random.default_rng(4)
    f = random_family_member(Model.SL2R, GRID, rng)
    steps = 5
    moved = heat_transform_apply(rotate(f, steps), T, C_X, y_grid=(0.0, 0.3), basis=bases[Model.SL2R])
    base = heat_transform_apply(f, T, C_X, y_grid=(0.0, 0.3), basis=bases[Model.SL2R])
    shifted = np.roll(base.values, steps, axis=2)
    assert np.abs(moved.values - shifted).max() <= 1e-10 * np.abs(shifted).max()


@pytest.mark.parametrize("model", MODELS)
def test_injectivity_round_trip(model, bases):
    """H_t f 的 X 限制经 e^{t(μ²+|ρ|²)} 放大后回到 f"""
    rng = np.random.default_rng(17)
    for _ in range(2):
        f = random_family_member(model, GRID, rng)
        F = heat_transform_apply(f, T, C_X, basis=bases[model])
        back = surjectivity_construct(F, T, C_X, bases[model])
        assert _rel_l2(back.values, f.values) <= 1e-4


@pytest.mark.parametrize("model", MODELS)
def test_translated_kernel_preimage(model, bases):
    """k_{2t}(d(c, ·)) 的原像为 k_t(d(c, ·))"""
    F = translated_heat_crown(model, 2 * T, 0.15, GRID, [0.0], C_X)
    expected = translated_heat_crown(model, T, 0.15, GRID, [0.0], C_X).x_slice()
    recovered = surjectivity_construct(F, T, C_X, bases[model])
    assert _rel_l2(recovered.values, expected.values) <= 1e-4


def test_translated_kernel_crown_slice_matches_heat_transform(bases):
    """中心取基点时，独立采样与 H_t 作用于 k_t 一致"""
    model = Model.SL2C
    y_grid = (0.0, 0.3)
    sampled = translated_heat_crown(model, 2 * T, 0.0, GRID, y_grid, C_X)
    k_t = XFunction.from_callable(model, GRID, lambda r, a: heat_kernel(model, T, r, C_X) + 0 * a)
    F = heat_transform_apply(k_t, T, C_X, y_grid=y_grid, basis=bases[model])
    assert np.abs(F.values - sampled.values).max() <= 1e-6 * np.abs(sampled.values).max()


@pytest.mark.parametrize("model", MODELS)
def test_surjectivity_amplification_overflow(model, bases):
    """窄峰在 t = 1 下需要超过 1e12 的放大"""
    F = CrownFunction.from_xfunction(reference_bump(model, GRID, sigma=0.3))
    with pytest.raises(AmplificationOverflow):
        surjectivity_construct(F, 1.0, C_X, bases[model])


def test_surjectivity_of_zero(bases):
    zero = CrownFunction.from_xfunction(
        XFunction(Model.SL2C, GRID, np.zeros((GRID.radial_points, GRID.angular_points))))
    assert np.all(surjectivity_construct(zero, T, C_X, bases[Model.SL2C]).values == 0)


def test_crown_function_validation():
    values = np.zeros((1, GRID.radial_points, GRID.angular_points))
    with pytest.raises(ValueError):
        CrownFunction(Model.SL2R, GRID, [math.pi / 4], values)
    with pytest.raises(ValueError):
        CrownFunction(Model.SL2R, GRID, [0.0, 0.1], values)
    with pytest.raises(ValueError):
        CrownFunction(Model.SL2R, GRID, [0.2], values).x_slice()


# ==================== 轨道积分与 D ====================

@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS)
def test_gutzmer_identity(model, bases):
    """KAK 直接求积与谱公式一致，且关于 Y 单调"""
    print("\n" + "=" * 60)
    print(f"测试轨道积分恒等式 {model.value}")
    print("=" * 60)
    F = heat_transform_apply(reference_bump(model, GRID), T, C_X, basis=bases[model])
    assert F.is_radial()
    previous = 0.0
    for Y in (0.0, 0.3, 0.6):
        direct = orbital_integral_direct(F, Y)
        spectral = orbital_integral_spectral(F.table, T, 1j * Y, C_X)
        assert abs(spectral.imag) <= 1e-10 * abs(spectral)
        assert abs(direct - spectral.real) <= 1e-3 * spectral.real
        assert direct > previous
        previous = direct
        logger.info(f"[OK] Y={Y:.1f} 直接 {direct:.8e} 谱 {spectral.real:.8e}")
    assert abs(orbital_integral_direct(F, 0.0) - F.x_slice().norm2()) <= 1e-6 * F.x_slice().norm2()


@pytest.mark.slow
def test_gutzmer_identity_non_radial_h2(bases):
    """非径向 F：k₁ 上按冠切片角向模积分，与谱公式一致"""
    print("\n" + "=" * 60)
    print("测试非径向轨道积分恒等式 h2")
    print("=" * 60)
    rng = np.random.default_rng(2)
    F = heat_transform_apply(random_family_member(Model.SL2R, GRID, rng, max_order=2), T, C_X,
                             basis=bases[Model.SL2R])
    assert not F.is_radial()
    previous = 0.0
    for Y in (0.0, 0.15, 0.3, 0.45, 0.6):
        direct = orbital_integral_direct(F, Y)
        spectral = orbital_integral_spectral(F.table, T, 1j * Y, C_X)
        logger.info(f"[OK] Y={Y:.2f} 直接 {direct:.8e} 谱 {spectral.real:.8e}")
        assert abs(direct - spectral.real) <= 1e-3 * spectral.real
        assert direct > previous
        previous = direct


def test_orbital_direct_non_radial_at_origin(bases):
    rng = np.random.default_rng(2)
    F = heat_transform_apply(random_family_member(Model.SL2R, GRID, rng, max_order=2), T, C_X,
                             basis=bases[Model.SL2R])
    norm2 = F.x_slice().norm2()
    assert abs(orbital_integral_direct(F, 0.0) - norm2) <= 1e-6 * norm2


def test_orbital_direct_preconditions(bases):
    rng = np.random.default_rng(2)
    F = heat_transform_apply(random_family_member(Model.SL2C, GRID, rng, max_order=2), T, C_X,
                             basis=bases[Model.SL2C])
    assert not F.is_radial()
    with pytest.raises(ValueError):
        orbital_integral_direct(F, 0.2)
    bare = CrownFunction.from_xfunction(reference_bump(Model.SL2R, GRID))
    with pytest.raises(ValueError):
        orbital_integral_direct(bare, 0.2)
    radial = heat_transform_apply(reference_bump(Model.SL2R, GRID), T, C_X, basis=bases[Model.SL2R])
    with pytest.raises(CrownBoundaryError):
        orbital_integral_direct(radial, math.pi / 2)


@pytest.mark.parametrize("model", MODELS)
def test_orbital_spectral_at_origin_and_positivity(model, bases):
    f = reference_bump(model, GRID)
    F = heat_transform_apply(f, T, C_X, basis=bases[model])
    at_zero = orbital_integral_spectral(F.table, T, 0.0, C_X)
    norm2 = F.x_slice().norm2()
    assert abs(at_zero - norm2) <= 1e-4 * norm2
    values = [orbital_integral_spectral(F.table, T, 1j * Y, C_X) for Y in (0.2, 0.5, 1.0)]
    assert all(abs(v.imag) <= 1e-10 * abs(v) for v in values)
    assert at_zero.real < values[0].real < values[1].real < values[2].real
    with pytest.raises(CrownBoundaryError):
        orbital_integral_spectral(F.table, T, 1j * math.pi / 2, C_X)


@pytest.mark.parametrize("model", MODELS)
def test_shift_D_at_origin(model, bases):
    f = reference_bump(model, GRID)
    gdens = SpectralDensity.from_function(f, T, C_X, bases[model])
    table = heat_transform_apply(f, T, C_X, basis=bases[model]).table
    expected = 2.0 * orbital_integral_spectral(table, T, 0.0, C_X)
    assert abs(shift_D(gdens, 0.0) - expected) <= 1e-12 * abs(expected)


def test_shift_D_single_shell():
    mu, wmu = GRID.mu_nodes()
    values = np.zeros(mu.size)
    values[40] = 1.0
    gdens = SpectralDensity(Model.SL2R, mu, wmu, values, C_X)
    for z in (0.0, 0.7, 0.5j):
        expected = wmu[40] * gdens.density()[40] * 2.0 * np.cos(mu[40] * z)
        assert abs(shift_D(gdens, z) - expected) <= 1e-13 * abs(expected)


def test_shift_D_single_node_grid():
    gdens = SpectralDensity(Model.SL2C, np.array([1.5]), np.array([0.1]), np.array([2.0]), C_X)
    expected = 0.1 * gdens.density()[0] * 2.0 * 2.0 * np.cos(1.5 * 0.4)
    assert abs(shift_D(gdens, 0.4) - expected) <= 1e-13 * abs(expected)


def test_shift_D_h3_is_second_derivative_of_abel_resynthesis(bases):
    """H³: D = -2π·c_X·(d/dy)² A"""
    f = reference_bump(Model.SL2C, GRID)
    gdens = SpectralDensity.from_function(f, T, C_X, bases[Model.SL2C])
    h = 1e-3
    for y in (0.0, 0.3, 0.6):
        A = abel_resynthesis(gdens.values, gdens.mu, gdens.weights, np.array([y - h, y, y + h]))
        second = (A[2] - 2 * A[1] + A[0]) / h ** 2
        value = shift_D(gdens, y)
        assert abs(value.imag) <= 1e-12 * abs(value)
        assert abs(value.real + 2 * math.pi * C_X * second) <= 1e-5 * abs(value.real)


def test_spectral_density_validation():
    mu, wmu = GRID.mu_nodes()
    with pytest.raises(ValueError):
        SpectralDensity(Model.SL2R, mu, wmu, -np.ones(mu.size))
    with pytest.raises(ValueError):
        SpectralDensity(Model.SL2R, mu, wmu[:-1], np.ones(mu.size))


# ==================== Abel 变换 ====================

@pytest.mark.parametrize("model", MODELS)
def test_abel_transform_of_heat_kernel_is_gaussian(model):
    t = 0.2
    y = np.array([0.0, 0.5, 1.0, 1.5])
    profile = heat_kernel_profile(model, t, C_X)
    oracle = math.exp(-t * model.rho2) / math.sqrt(4 * math.pi * t) * np.exp(-y ** 2 / (4 * t))
    assert np.allclose(abel_transform(model, profile, y), oracle, rtol=1e-4, atol=0)

    mu, wmu = gauss_legendre(256, 0.0, 24.0)
    g = np.exp(-t * (mu ** 2 + model.rho2))
    assert np.allclose(abel_resynthesis(g, mu, wmu, y), oracle, rtol=1e-8, atol=0)


@pytest.mark.parametrize("model", MODELS)
def test_abel_transform_weyl_invariance(model):
    profile = heat_kernel_profile(model, 0.3, C_X)
    for y in (0.3, 0.9):
        assert abel_transform(model, profile, y) == abel_transform(model, profile, -y)


def test_abel_transform_of_xfunction():
    f = XFunction.from_callable(Model.SL2C, GRID, lambda r, a: heat_kernel(Model.SL2C, T, r, C_X) + 0 * a)
    oracle = math.exp(-T) / math.sqrt(4 * math.pi * T)
    assert abs(abel_transform(Model.SL2C, f, 0.0) - oracle) <= 1e-3 * oracle


def test_abel_transform_zero_and_decay_violation():
    d = np.linspace(0.0, 6.0, 200)
    zero = RadialProfile.from_values(d, np.zeros(d.size))
    assert np.all(abel_transform(Model.SL2R, zero, np.array([0.0, 1.0])) == 0)
    slow = RadialProfile.from_values(d, np.exp(-d))
    with pytest.raises(DecayViolation):
        abel_transform(Model.SL2R, slow, 0.5)


# ==================== 权函数 ====================

@pytest.mark.parametrize("model", MODELS)
def test_weight_values_and_mass(model):
    t = 0.3
    assert abs(weight_w(t, 0.0, model) - 0.5 * math.exp(2 * t * model.rho2) / math.sqrt(2 * math.pi * t)) < 1e-15
    y = np.linspace(0.1, 3.0, 7)
    assert np.array_equal(weight_w(t, y, model), weight_w(t, -y, model))
    mass, _ = integrate.quad(lambda s: weight_w(t, s, model), -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    assert abs(mass - 0.5 * math.exp(2 * t * model.rho2)) <= 1e-10 * mass


@pytest.mark.parametrize("mu", [0.0, 1.0, 2.5])
@pytest.mark.parametrize("model", MODELS)
def test_weight_moment_identity(model, mu):
    """∫ w_t(y)·ψ_λ(i2y) dy = e^{2t(μ²+|ρ|²)}"""
    t = T
    span = 2 * t * mu + 15 * math.sqrt(t)
    value, _ = integrate.quad(lambda y: weight_w(t, y, model) * 2 * math.cosh(2 * mu * y), -span, span,
                              epsabs=0, epsrel=1e-13, limit=200)
    expected = math.exp(2 * t * (mu ** 2 + model.rho2))
    assert abs(value - expected) <= 1e-10 * expected


def test_weighted_functional_on_single_node():
    mu, wmu = GRID.mu_nodes()
    values = np.zeros(mu.size)
    values[30] = 1e-4
    gdens = SpectralDensity(Model.SL2C, mu, wmu, values, C_X)
    report = membership_from_density(gdens, T)
    expected = gdens.masses()[30] * math.exp(2 * T * (mu[30] ** 2 + 1.0))
    assert abs(report.value - expected) <= 1e-10 * expected


# ==================== 范数恒等式 ====================

@pytest.mark.parametrize("model", MODELS)
def test_norm_identity_zero(model, bases):
    zero = XFunction(model, GRID, np.zeros((GRID.radial_points, GRID.angular_points)))
    assert norm_identity_check(zero, T, C_X, bases[model]) == (0.0, 0.0)


@pytest.mark.parametrize("model", MODELS)
def test_norm_identity_single(model, bases):
    rng = np.random.default_rng(8)
    lhs, rhs = norm_identity_check(random_family_member(model, GRID, rng), T, C_X, bases[model])
    assert abs(lhs - rhs) <= 1e-4 * lhs


@pytest.mark.slow
@pytest.mark.parametrize("t", [0.25, 1.0])
@pytest.mark.parametrize("model,tolerance", [(Model.SL2C, 1e-4), (Model.SL2R, 1e-3)])
def test_norm_identity_family(model, tolerance, t, bases):
    print("\n" + "=" * 60)
    print(f"测试范数恒等式 {model.value} t={t}")
    print("=" * 60)
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(10):
        lhs, rhs = norm_identity_check(random_family_member(model, GRID, rng), T, C_X, bases[model])
        worst = max(worst, abs(lhs - rhs) / lhs)
    logger.info(f"[OK] {model.value} 范数恒等式最大相对误差 {worst:.2e}")
    assert worst <= tolerance


# ==================== 像集判别 ====================

@pytest.mark.parametrize("model", MODELS)
def test_image_membership_of_member(model, bases):
    f = reference_bump(model, GRID)
    F = heat_transform_apply(f, T, C_X, basis=bases[model])
    report = image_membership(F, T, C_X, basis=bases[model])
    assert report.verdict is Verdict.MEMBER
    assert abs(report.value - f.norm2()) <= 1e-4 * f.norm2()
    assert set(report.crown_growth) == {0.0, 0.2, 0.4, 0.6}
    assert report.diagnostics


@pytest.mark.parametrize("model", MODELS)
def test_image_membership_synthetic_non_member(model):
    """|F̂|² ~ e^{-t(μ²+|ρ|²)}（对应 H_{t/2} 的像）不在 im H_t 中"""
    mu, wmu = GRID.mu_nodes()
    gdens = SpectralDensity(model, mu, wmu, np.exp(-T * (mu ** 2 + model.rho2)), C_X)
    report = membership_from_density(gdens, T)
    assert report.verdict is Verdict.NON_MEMBER
    assert report.growth > 10


@pytest.mark.parametrize("model", MODELS)
def test_image_membership_of_half_time_kernel(model, bases):
    """k_{t/2} 走完整的 image_membership 流程：截断加倍后发散"""
    F = half_time_kernel(model, GRID, T, C_X)
    assert F.table is None
    report = image_membership(F, T, C_X, basis=bases[model])
    logger.info(f"[OK] {model.value} k_(t/2) 增长 {report.growth:.3g}")
    assert report.verdict is Verdict.NON_MEMBER
    assert report.growth > 10
    # k_{2t} = H_t k_t
    member = image_membership(half_time_kernel(model, GRID, 4 * T, C_X), T, C_X, basis=bases[model])
    assert member.verdict is Verdict.MEMBER


def test_image_membership_of_zero(bases):
    zero = CrownFunction.from_xfunction(
        XFunction(Model.SL2R, GRID, np.zeros((GRID.radial_points, GRID.angular_points))))
    report = image_membership(zero, T, C_X, basis=bases[Model.SL2R])
    assert report.verdict is Verdict.MEMBER
    assert report.value == 0.0


def test_image_membership_rejects_boundary_y():
    mu, wmu = GRID.mu_nodes()
    gdens = SpectralDensity(Model.SL2R, mu, wmu, np.exp(-mu ** 2), C_X)
    with pytest.raises(CrownBoundaryError):
        membership_from_density(gdens, T, y_grid=(0.0, math.pi / 4))


# ==================== 连续性常数 ====================

@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS)
def test_continuity_constant_stable_under_refinement(model):
    def family(spec):
        rng = np.random.default_rng(12)
        return [random_family_member(model, spec, rng) for _ in range(3)]

    C, change = continuity_constant(family, GRID, T, C_X)
    assert C > 0
    assert change < 1e-4


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
