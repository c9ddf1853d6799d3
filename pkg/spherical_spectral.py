"""
球函数与谱数据
φ_λ（实点与冠上）、ψ_λ、c-函数与 Plancherel 密度、复群闭式、增长界检查，
以及各角谐波阶的广义球函数（Helgason 变换的径向核）

约定: λ = iμ，|λ|² = μ²；H² 中 |ρ|² = 1/4，H³ 中 |ρ|² = 1
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from hyperbolic_models import (
    CrownBoundaryError,
    Model,
    circle_vectors,
    bracket_q,
    exp_h0,
    log_a_from_q,
    sphere_vectors,
)
from special_functions import gauss_legendre, legendre_conical, loggamma_complex

logger = logging.getLogger(__name__)

K_INTEGRAL_POINTS = 1024
SPHERE_POINTS = 512
BOUNDARY_MARGIN = 1e-9


@dataclass
class SpectralParam:
    """谱参数 λ = iμ（取 Weyl 代表 μ >= 0）"""
    mu: float
    model: Model

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"μ 必须非负: {self.mu}")

    @property
    def norm2(self) -> float:
        return self.mu * self.mu

    @property
    def rho2(self) -> float:
        return self.model.rho2


def _check_crown(Y: float):
    if abs(Y) >= math.pi / 4.0 - BOUNDARY_MARGIN:
        raise CrownBoundaryError(f"|Y|={abs(Y)} 过于接近 π/4")


def psi(mu, Z):
    """ψ_λ(Z) = e^{iμZ} + e^{-iμZ}；Z = iy 时为 2cosh(μy)"""
    mu = np.asarray(mu, dtype=float)
    Z = np.asarray(Z, dtype=complex)
    value = np.exp(1j * mu * Z) + np.exp(-1j * mu * Z)
    return value[()] if value.ndim == 0 else value


def harish_chandra_c(model: Model, mu):
    """
    Harish-Chandra c-函数 c(iμ)

    H²: Γ(iμ)/(√π·Γ(½+iμ))；H³: ρ/(iμ) = 1/(iμ)
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(mu == 0):
        raise ValueError("c(λ) 在 μ = 0 处有极点")
    if model is Model.SL2R:
        log_c = loggamma_complex(1j * mu) - loggamma_complex(0.5 + 1j * mu)
        value = np.exp(log_c) / math.sqrt(math.pi)
    else:
        value = model.rho / (1j * mu)
    return value[()] if np.ndim(value) == 0 else value


def plancherel_density(model: Model, mu, c_x: float = 1.0):
    """
    Plancherel 密度 c_X/|c(λ)|²

    H²: |c|^{-2} = πμ·tanh(πμ)，由 Γ 商计算；H³: |c|^{-2} = μ²

    Args:
        model: 模型
        mu: 谱参数（可为数组）
        c_x: 全局归一化常数（见 helgason_fourier.calibrate_cx）

    Returns:
        密度值，μ = 0 处为 0
    """
    mu = np.abs(np.asarray(mu, dtype=float))
    out = np.zeros(mu.shape)
    nz = mu > 0
    if model is Model.SL2R:
        out[nz] = 1.0 / np.abs(harish_chandra_c(model, mu[nz])) ** 2
    else:
        out[nz] = mu[nz] ** 2
    out = c_x * out
    return out[()] if out.ndim == 0 else out


def phi_complex_group(mu, logA):
    """
    复群闭式 φ_λ(exp(s·H₀)) = sin(2μs)/(μ·sinh 2s)，s 可为复数

    μ → 0 用 sinc 处理；|sinh 2s| < 1e-6 时 2s/sinh 2s 用六阶 Taylor 展开。
    """
    mu, s = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(logA, dtype=complex))
    x = 2.0 * s
    numerator = np.sinc(mu * x / math.pi)
    sinh_x = np.sinh(x)
    small = np.abs(sinh_x) < 1e-6
    safe = np.where(small, 1.0, sinh_x)
    ratio = np.where(small, 1.0 / (1.0 + x ** 2 / 6.0 + x ** 4 / 120.0 + x ** 6 / 5040.0), x / safe)
    value = numerator * ratio
    return value[()] if value.ndim == 0 else value


def spherical_value(model: Model, mu, w):
    """
    Φ_μ(w)：只依赖冠不变量 w = tr(p)/2 的球函数

    H²: P_{-1/2+iμ}(w)；H³: sin(μζ)/(μ·sinh ζ)，ζ = arccosh w（主值）
    """
    if model is Model.SL2R:
        return legendre_conical(mu, w)
    zeta = np.arccosh(np.asarray(w, dtype=complex))
    return phi_complex_group(mu, zeta / 2.0)


def _log_sinhc(y: np.ndarray) -> np.ndarray:
    """log(sinh y / y)，对 Re y >= 0 的代表元取连续分支"""
    y = np.where(y.real < 0, -y, y)
    small = np.abs(y) < 1e-6
    safe = np.where(small, 1.0, y)
    return np.where(small, y * y / 6.0, np.log(np.sinh(safe)) - np.log(safe))


def _orders_chebyshev(c: np.ndarray, max_order: int) -> np.ndarray:
    out = np.empty((max_order + 1,) + c.shape, dtype=complex)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = c
    for m in range(1, max_order):
        out[m + 1] = 2.0 * c * out[m] - out[m - 1]
    return out


def _orders_legendre(c: np.ndarray, max_order: int) -> np.ndarray:
    out = np.empty((max_order + 1,) + c.shape, dtype=complex)
    out[0] = 1.0
    if max_order >= 1:
        out[1] = c
    for l in range(1, max_order):
        out[l + 1] = ((2 * l + 1) * c * out[l] - l * out[l - 1]) / (l + 1)
    return out


def _cos_of_log_q(Z: complex, v: np.ndarray) -> np.ndarray:
    """q = e^v 时的 cos 值：c = (cosh 2Z - e^v)/sinh 2Z"""
    return (2.0 * np.sinh(Z) ** 2 - np.expm1(v)) / np.sinh(2.0 * Z)


def _table_single_z(model: Model, max_order: int, mu: np.ndarray, Z: complex, sign: int) -> np.ndarray:
    alpha = model.rho + sign * 1j * mu
    size = abs(Z)
    if model is Model.SL2R:
        count = 32 + int(3.0 * (mu.max(initial=0.0) + max_order + 3.0) * size)
        count += count % 2
        theta = np.linspace(0.0, math.pi, count + 1)
        weights = np.full(count + 1, 1.0 / count)
        weights[[0, -1]] *= 0.5
        v = -2.0 * Z * np.cos(theta)
        log_root = 0.5 * (_log_sinhc(Z * (1.0 - np.cos(theta))) + _log_sinhc(Z * (1.0 + np.cos(theta))))
        base = np.exp(np.outer(-alpha, v) + v / 2.0 - log_root)
        harmonics = _orders_chebyshev(_cos_of_log_q(Z, v), max_order)
    else:
        count = 24 + int(2.0 * (mu.max(initial=0.0) + max_order + 2.0) * size)
        x, weights = gauss_legendre(count, -1.0, 1.0)
        v = 2.0 * Z * x
        base = np.exp(np.outer(1.0 - alpha, v)) * (Z / np.sinh(2.0 * Z))
        harmonics = _orders_legendre(_cos_of_log_q(Z, v), max_order)
    return np.einsum("mk,jk,k->mj", harmonics, base, weights)


def generalized_spherical_table(model: Model, max_order: int, mu, Z, sign: int = 1) -> np.ndarray:
    """
    广义球函数表

    H²: k_m(Z) = (1/2π)∫ q(ψ)^{-(ρ+sign·iμ)} e^{imψ} dψ
    H³: κ_l(Z) = ½∫_{-1}^{1} q(c)^{-(ρ+sign·iμ)} P_l(c) dc
    其中 q = cosh 2Z - sinh 2Z·cos。沿直线路径 log q = -2Z·cos θ 换元后，
    H² 被积函数为偶周期函数（梯形法谱收敛），H³ 为整函数（Gauss-Legendre）。
    Z 可为复数，要求 |Im Z| < π/2。

    Args:
        model: 模型
        max_order: 最高阶 M（或 L）
        mu: μ 数组
        Z: Z 数组（复）
        sign: ±1

    Returns:
        形状 (max_order+1, len(mu), len(Z)) 的复数组
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    if np.any(np.abs(Z.imag) >= math.pi / 2.0):
        raise CrownBoundaryError("广义球函数要求 |Im Z| < π/2")
    table = np.empty((max_order + 1, mu.size, Z.size), dtype=complex)
    parity = (-1.0) ** np.arange(max_order + 1)
    for i, z in enumerate(Z):
        if abs(z) < 1e-14:
            table[:, :, i] = 0.0
            table[0, :, i] = 1.0
            continue
        # k_m(-Z) = (-1)^m k_m(Z)
        flip = z.real < 0 or (z.real == 0 and z.imag < 0)
        column = _table_single_z(model, max_order, mu, -z if flip else z, sign)
        table[:, :, i] = column * parity[:, None] if flip else column
    return table


def generalized_spherical(model: Model, order: int, mu: float, Z: complex, sign: int = 1) -> complex:
    """单点广义球函数；order = 0 时等于 φ_λ(exp(Z·H₀)·x_o)"""
    return complex(generalized_spherical_table(model, order, [mu], [Z], sign)[order, 0, 0])


def _k_integral(model: Model, gram_h: np.ndarray, gram_g: np.ndarray, mu: float) -> complex:
    """∫_K a(k·h)^{ρ+λ}·a(k·g)^{ρ-λ} dk，由 horocycle 括号直接求积"""
    rho = model.rho
    if model is Model.SL2R:
        count = K_INTEGRAL_POINTS * (2 if mu > 20 else 1)
        beta = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        vectors = circle_vectors(beta)
        weights = np.full(count, 1.0 / count)
    else:
        tau, weights = gauss_legendre(SPHERE_POINTS, 0.0, 1.0)
        vectors = sphere_vectors(2.0 * np.arcsin(np.sqrt(tau)), 0.0)
    s_h = log_a_from_q(bracket_q(model, gram_h, vectors))
    s_g = log_a_from_q(bracket_q(model, gram_g, vectors))
    integrand = np.exp((rho + 1j * mu) * 2.0 * s_h + (rho - 1j * mu) * 2.0 * s_g)
    return complex(np.sum(weights * integrand))


def phi_real(model: Model, mu: float, r: float, method: str = "closed") -> float:
    """
    φ_λ(a_r·x_o)

    Args:
        model: 模型
        mu: 谱参数
        r: r >= 0
        method: "closed"（H² 为锥 Legendre，H³ 为闭式）或 "k_integral"

    Returns:
        实数值
    """
    if r < 0:
        raise ValueError(f"r 必须非负: {r}")
    if method == "k_integral":
        identity = np.eye(2, dtype=complex)
        return _k_integral(model, exp_h0(2.0 * r), identity, mu).real
    if model is Model.SL2R:
        return float(np.real(legendre_conical(mu, math.cosh(2.0 * r))))
    return float(np.real(phi_complex_group(mu, r)))


def phi_crown(model: Model, mu: float, Y: float, u: float = 0.0) -> complex:
    """
    φ_λ(a_u·exp(i2Y)·x_o)

    乘积公式 φ_λ(g⁻¹h) = ∫_K a(kh)^{ρ+λ}·a(kg)^{ρ-λ} dk，h = a_u·exp(iY)，g = exp(-iY)；
    u = 0 时被积函数为 |a(k·exp(iY))^{ρ+λ}|²。H³ 在 u <= 1.5 内保持 Gauss 精度。

    Raises:
        CrownBoundaryError: |Y| >= π/4 - 1e-9
    """
    _check_crown(Y)
    gram_h = exp_h0(2.0 * (u + 1j * Y))
    gram_g = exp_h0(-2.0j * Y)
    return _k_integral(model, gram_h, gram_g, mu)


def phi_at_crown_origin(model: Model, mu, Y: float) -> np.ndarray:
    """φ_λ(exp(i2Y)·x_o) 在 μ 网格上的值（H² 走广义球函数，H³ 走闭式）"""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if model is Model.SL2C:
        return np.real(phi_complex_group(mu, 2.0j * Y))
    return np.real(generalized_spherical_table(model, 0, mu, [2.0j * Y])[0, :, 0])


def esa_bound_check(model: Model, mu_grid, Y: float) -> Tuple[float, bool]:
    """
    C_Y = max_μ φ_λ(exp(i2Y))/ψ_λ(i2Y)，ψ 在度量坐标 y = 2Y 上取值 2cosh(4μY)

    ok 表示 μ 网格最高十分之一段内比值不增长

    Returns:
        (C_Y, ok)
    """
    _check_crown(Y)
    mu = np.sort(np.atleast_1d(np.asarray(mu_grid, dtype=float)))
    ratio = phi_at_crown_origin(model, mu, Y) / np.real(psi(mu, 4.0j * Y))
    if not np.all(np.isfinite(ratio)):
        return float("nan"), False
    top = ratio[mu >= mu[0] + 0.9 * (mu[-1] - mu[0])]
    ok = bool(top.max() <= top[0] * (1.0 + 1e-9))
    c_y = float(ratio.max())
    logger.debug(f"[QUAD] esa Y={Y:.3f} C_Y={c_y:.6f} ok={ok}")
    return c_y, ok
