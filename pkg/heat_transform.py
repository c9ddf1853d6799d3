"""
热核与热核变换

k_t 与冠上全纯延拓 k_t^∼、H_t f、G-轨道积分（直接求积与 Gutzmer 谱公式）、
平移算子 D、Abel 变换、权函数 w_t、范数恒等式、像集判别与满射构造。

约定:
  谱积分 c_X ∫ (...) |c(μ)|^{-2} dμ 中的 c_X 由调用方传入（见 helgason_fourier.calibrate_cx）
  𝔞 上的谱对象用度量坐标 y = 2Y：ψ_λ(i2Y) = psi(μ, 2i·y) = 2cosh(2μy)
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import interpolate

from helgason_fourier import (
    CutoffViolation,
    FourierTable,
    GridSpec,
    HelgasonBasis,
    MASS_CUTOFF,
    XFunction,
    fourier_forward,
    fourier_invert,
    legendre_matrix,
)
from hyperbolic_models import CrownBoundaryError, CrownPoint, Model, haar_kak_density
from special_functions import CrownheatError, gauss_legendre
from spherical_spectral import generalized_spherical_table, phi_complex_group, plancherel_density, psi

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-12
AMPLIFICATION_CAP = 1e12
NOISE_FLOOR = 1e-13
GROWTH_DIVERGENT = 10.0
GROWTH_FINITE = 1.01
WINDOW_SIGMAS = 12.0
_TAIL_LOG = math.log(1e16)


class MuCutoffError(CrownheatError):
    """谱积分在 μ 截断处未衰减"""


class AmplificationOverflow(CrownheatError):
    """反演所需的 e^{t(μ²+|ρ|²)} 放大超过上限"""


class DecayViolation(CrownheatError):
    """径向剖面在积分窗口端点未衰减"""


def _check_t(t: float):
    if not t > 0:
        raise ValueError(f"t 必须为正: {t}")


def _zero_order_index(model: Model, grid: GridSpec) -> int:
    return grid.angular_modes if model is Model.SL2R else 0


def _invariant_to_log(w) -> np.ndarray:
    """cosh 2Z = w 的主值解 Z：Re Z >= 0，|Im Z| < π/2"""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    on_cut = (np.abs(w.imag) <= 1e-14 * np.maximum(1.0, np.abs(w))) & (w.real <= -1.0)
    if np.any(on_cut):
        raise CrownBoundaryError("冠不变量落在割线 (-∞, -1] 上")
    return np.arccosh(w) / 2.0


def _phi_table(model: Model, mu: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Φ_μ(cosh 2Z)，形状 (len(mu), len(Z))"""
    if model is Model.SL2C:
        return np.asarray(phi_complex_group(mu[:, None], Z[None, :]), dtype=complex)
    return generalized_spherical_table(model, 0, mu, Z)[0]


def heat_mu_cutoff(t: float, rho2: float, cap: float = AMPLIFICATION_CAP) -> float:
    """满足 e^{t(Λ²+|ρ|²)} <= cap 的最大 Λ"""
    _check_t(t)
    value = math.log(cap) / t - rho2
    return math.sqrt(value) if value > 0 else 0.0


def _heat_spectral(model: Model, t: float, Z, c_x: float,
                   mu_cutoff: Optional[float] = None, mu_points: Optional[int] = None) -> np.ndarray:
    """
    c_X ∫ e^{-t(μ²+|ρ|²)}·Φ_μ(cosh 2Z)·|c(μ)|^{-2} dμ，对每个 Z

    默认截断满足 tΛ² - 2|Im Z|Λ = log(1e16)（Φ_μ 按 e^{2μ|Im Z|} 增长）

    Raises:
        MuCutoffError: 截断处被积函数超过峰值的 1e-12
    """
    _check_t(t)
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    growth = 2.0 * float(np.abs(Z.imag).max(initial=0.0))
    if mu_cutoff is None:
        mu_cutoff = (growth + math.sqrt(growth ** 2 + t * _TAIL_LOG)) / t
    if mu_points is None:
        mu_points = 64 + int(2.0 * mu_cutoff * (1.0 + 2.0 * float(np.abs(Z).max(initial=0.0))))
    mu, wmu = gauss_legendre(mu_points, 0.0, mu_cutoff)
    profile = plancherel_density(model, mu, c_x) * np.exp(-t * (mu ** 2 + model.rho2))
    integrand = profile[:, None] * _phi_table(model, mu, Z)
    peak = np.abs(integrand).max(axis=0)
    edge = np.abs(integrand[-1])
    if np.any(edge > TAIL_TOL * peak):
        worst = float(np.max(edge / np.where(peak > 0, peak, 1.0)))
        raise MuCutoffError(f"Λ={mu_cutoff:.2f} 处被积函数相对值 {worst:.2e} > {TAIL_TOL:.0e}")
    logger.debug(f"[QUAD] 热核谱积分 Λ={mu_cutoff:.2f} 节点 {mu_points} 点数 {Z.size}")
    return wmu @ integrand


def heat_kernel(model: Model, t: float, r, c_x: float,
                mu_cutoff: Optional[float] = None, mu_points: Optional[int] = None):
    """
    热核 k_t(a_r·x_o) 的谱积分

    Args:
        model: 模型
        t: 时间 t > 0
        r: KAK 径向坐标（可为数组），测地距离 d = 2r
        c_x: Plancherel 归一化常数

    Returns:
        与 r 同形状的实数值

    Raises:
        MuCutoffError: μ 截断过小
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r 必须非负")
    values = np.real(_heat_spectral(model, t, r_arr.ravel(), c_x, mu_cutoff, mu_points))
    values = values.reshape(r_arr.shape)
    return float(values) if values.ndim == 0 else values


def heat_kernel_closed(t: float, Z):
    """H³ 闭式 (4πt)^{-3/2}·(2Z/sinh 2Z)·e^{-t-Z²/t}；Z 取复数即为冠上延拓"""
    _check_t(t)
    Z = np.asarray(Z, dtype=complex)
    return (4.0 * math.pi * t) ** -1.5 * phi_complex_group(0.0, Z) * np.exp(-t - Z ** 2 / t)


def heat_kernel_crown(model: Model, t: float, z: CrownPoint, c_x: float) -> complex:
    """
    k_t^∼(z) = c_X ∫ e^{-t(μ²+|ρ|²)} φ_λ(z) |c|^{-2} dμ

    Raises:
        CrownBoundaryError: z 的 Ω 坐标越界或冠不变量在割线上
    """
    if z.model is not model:
        raise ValueError(f"冠点模型 {z.model.value} 与 {model.value} 不符")
    if z.Z is not None and abs(z.Z.imag) >= math.pi / 4.0:
        raise CrownBoundaryError(f"|Y|={abs(z.Z.imag)} 不在 Ω 内")
    return complex(_heat_spectral(model, t, _invariant_to_log(z.invariant), c_x)[0])


def heat_kernel_invariant(model: Model, t: float, w, c_x: float):
    """
    k_t^∼ 作为冠不变量 w = cosh 2Z 的函数（谱积分，Z 取主值）

    Raises:
        CrownBoundaryError: w 落在割线 (-∞, -1] 上
    """
    w_arr = np.asarray(w, dtype=complex)
    values = _heat_spectral(model, t, _invariant_to_log(w_arr.ravel()), c_x).reshape(w_arr.shape)
    return complex(values) if values.ndim == 0 else values


@dataclass
class RadialProfile:
    """径向函数 H(d)，d 为到基点的测地距离；在 d² 上做三次样条，d > d_max 处为 0"""
    spline: interpolate.CubicSpline
    d_max: float

    @classmethod
    def from_values(cls, d, values) -> "RadialProfile":
        d = np.asarray(d, dtype=float)
        values = np.asarray(values)
        if np.iscomplexobj(values) and np.abs(values.imag).max() <= 1e-14 * np.abs(values).max(initial=0.0):
            values = values.real
        order = np.argsort(d)
        return cls(interpolate.CubicSpline(d[order] ** 2, values[order]), float(d.max()))

    @classmethod
    def from_xfunction(cls, f: XFunction) -> "RadialProfile":
        """K-不变函数：取零阶角向模"""
        radial = f.modes(check=False)[_zero_order_index(f.model, f.grid)]
        return cls.from_values(2.0 * f.radii, radial)

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        inside = self.spline(np.minimum(d, self.d_max) ** 2)
        return np.where(d <= self.d_max, inside, 0.0)

    def edge_ratio(self) -> float:
        grid = np.linspace(0.0, self.d_max, 512)
        peak = float(np.abs(self(grid)).max())
        return 0.0 if peak == 0.0 else float(abs(self(self.d_max))) / peak


def heat_kernel_profile(model: Model, t: float, c_x: float, d_max: Optional[float] = None,
                        points: int = 1201) -> RadialProfile:
    """k_t 作为测地距离的函数；默认 d_max = √(160t) + 2"""
    _check_t(t)
    if d_max is None:
        d_max = math.sqrt(160.0 * t) + 2.0
    d = np.linspace(0.0, d_max, points)
    return RadialProfile.from_values(d, heat_kernel(model, t, d / 2.0, c_x))


def heat_convolve_direct(f: XFunction, t: float, c_x: float, targets: Sequence[Tuple[float, float]],
                         angular_points: int = 512) -> np.ndarray:
    """
    (k_t ∗ f)(x) = ∫_X k_t(d(x, y))·f(y) dy 的直接空间求积

    cosh d 由双曲余弦定理给出；f 在细角向网格上由其角向模重建。

    Args:
        f: X 上的函数
        t: 时间
        c_x: 归一化常数
        targets: (r, angle) 序列，H² 的 angle 为 φ，H³ 为 cos ϑ
        angular_points: 源点角向节点数（H³ 中 cos ϑ 用一半的 Gauss 节点，方位角用全数）

    Returns:
        各目标点处的卷积值
    """
    model, grid = f.model, f.grid
    kernel = heat_kernel_profile(model, t, c_x)
    r, wr = grid.radial_nodes()
    radial_w = wr * haar_kak_density(model, r)
    ch, sh = np.cosh(2.0 * r), np.sinh(2.0 * r)
    f_modes = f.modes()
    results = []

    if model is Model.SL2R:
        phi = 2.0 * math.pi * np.arange(angular_points) / angular_points
        samples = f_modes.T @ np.exp(1j * np.outer(grid.mode_orders(model), phi))
        for r0, a0 in targets:
            w = math.cosh(2 * r0) * ch[:, None] - math.sinh(2 * r0) * sh[:, None] * np.cos(phi - a0)[None, :]
            k = kernel(np.arccosh(np.maximum(w, 1.0)))
            results.append(np.sum(radial_w[:, None] * k * samples) / angular_points)
        return np.array(results)

    c, cw = gauss_legendre(angular_points // 2, -1.0, 1.0)
    s = np.sqrt(1.0 - c ** 2)
    az_cos = np.cos(2.0 * math.pi * np.arange(angular_points) / angular_points)
    samples = f_modes.T @ legendre_matrix(c, grid.angular_modes)
    weight = radial_w[:, None] * np.abs(samples)
    active = weight.max(axis=1) > 1e-16 * weight.max()
    for r0, c0 in targets:
        s0 = math.sqrt(max(0.0, 1.0 - c0 * c0))
        cos_gamma = c[:, None] * c0 + s[:, None] * s0 * az_cos[None, :]
        total = 0.0 + 0.0j
        for i in np.flatnonzero(active):
            w = math.cosh(2 * r0) * ch[i] - math.sinh(2 * r0) * sh[i] * cos_gamma
            k = kernel(np.arccosh(np.maximum(w, 1.0))).mean(axis=1)
            total += radial_w[i] * np.sum(0.5 * cw * samples[i] * k)
        results.append(total)
    return np.array(results)


@dataclass
class CrownFunction:
    """
    Ξ 上的函数 F 在冠网格 k·exp((r_i + iY_a)·H₀)·x_o 上的取值

    values[a, i, j] 对应 Y_a、r_i 与角向节点 j（与 XFunction 相同的角向约定）。
    table/t/c_x 为生成 F 的谱数据（由 heat_transform_apply 附带），用于网格外求值。
    """
    model: Model
    grid: GridSpec
    y_grid: np.ndarray
    values: np.ndarray
    radii: Optional[np.ndarray] = None
    table: Optional[FourierTable] = None
    t: Optional[float] = None
    c_x: Optional[float] = None

    def __post_init__(self):
        self.y_grid = np.atleast_1d(np.asarray(self.y_grid, dtype=float))
        if np.any(np.abs(self.y_grid) >= math.pi / 4.0):
            raise ValueError("冠网格的 Y 必须严格位于 Ω = (-π/4, π/4) 内")
        if self.radii is None:
            self.radii = self.grid.radial_nodes()[0]
        self.values = np.asarray(self.values, dtype=complex)
        expected = (self.y_grid.size, len(self.radii), self.grid.angular_points)
        if self.values.shape != expected:
            raise ValueError(f"values 形状 {self.values.shape} 与冠网格 {expected} 不符")

    @classmethod
    def from_xfunction(cls, f: XFunction) -> "CrownFunction":
        """只含 Y = 0 切片的冠函数"""
        return cls(f.model, f.grid, [0.0], f.values[None], radii=f.radii)

    def slice(self, index: int) -> XFunction:
        return XFunction(self.model, self.grid, self.values[index], radii=self.radii)

    def x_slice(self) -> XFunction:
        hits = np.flatnonzero(self.y_grid == 0.0)
        if hits.size == 0:
            raise ValueError("冠网格不含 Y = 0")
        return self.slice(int(hits[0]))

    def crown_norm2(self) -> float:
        """各 Y 切片 X-求积范数平方之和"""
        return float(sum(self.slice(a).norm2() for a in range(self.y_grid.size)))

    def is_radial(self, tol: float = 1e-12) -> bool:
        if self.table is None:
            return False
        modes = self.table.modes()
        zero = _zero_order_index(self.model, self.grid)
        rest = np.delete(modes, zero, axis=0)
        return bool(np.abs(rest).max(initial=0.0) <= tol * max(np.abs(modes).max(initial=0.0), 1e-300))

    def spectral_modes(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns:
            (f̂_m(μ_k)·e^{-t(μ²+|ρ|²)}, c_X·|c(μ_k)|^{-2}·w_k)

        Raises:
            ValueError: F 缺少谱数据
        """
        if self.table is None or self.t is None or self.c_x is None:
            raise ValueError("F 缺少谱数据")
        mu, wmu = self.grid.mu_nodes()
        heat = np.exp(-self.t * (mu ** 2 + self.model.rho2))
        return self.table.modes() * heat[None, :], self.c_x * plancherel_density(self.model, mu) * wmu

    def evaluate_radial(self, w) -> np.ndarray:
        """K-不变 F 在冠不变量为 w 的点上的值（谱表示求值）"""
        F_modes, weights = self.spectral_modes()
        w = np.asarray(w, dtype=complex)
        mu, _ = self.grid.mu_nodes()
        coeffs = weights * F_modes[_zero_order_index(self.model, self.grid)]
        Z = _invariant_to_log(w.ravel())
        out = np.empty(Z.size, dtype=complex)
        for start in range(0, Z.size, 2048):
            chunk = Z[start:start + 2048]
            out[start:start + chunk.size] = coeffs @ _phi_table(self.model, mu, chunk)
        return out.reshape(w.shape)


def _crown_modes(model: Model, grid: GridSpec, F_modes: np.ndarray, weights: np.ndarray,
                 orders: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """冠切片角向模 Σ_k F_m(μ_k)·k_{|m|}^{(+)}(μ_k, Z)·w_k，形状 (len(orders), len(Z))"""
    mu, _ = grid.mu_nodes()
    top = int(np.abs(orders).max(initial=0))
    kernel = generalized_spherical_table(model, top, mu, Z, sign=1)[np.abs(orders)]
    return np.einsum("nk,nki,k->ni", F_modes, kernel, weights)


def heat_transform_apply(f: XFunction, t: float, c_x: float, y_grid: Sequence[float] = (0.0,),
                         basis: Optional[HelgasonBasis] = None,
                         crown_radii: Optional[np.ndarray] = None) -> CrownFunction:
    """
    H_t f 的谱计算：F(k·exp((r+iY)H₀)) = Σ_m e^{imφ} c_X ∫ f̂_m(μ) e^{-t(μ²+|ρ|²)} k_m^{(+)}(μ, r+iY) dμ/|c|²

    Args:
        f: X 上的函数
        t: 时间 t > 0
        c_x: 归一化常数
        y_grid: 冠网格的 Y 值（须在 Ω 内）
        basis: 标准网格上的基表
        crown_radii: 冠网格径向节点（默认与 X 网格相同）

    Returns:
        CrownFunction（附带 f̂）

    Raises:
        CutoffViolation: f 的质量或角向截断不满足
    """
    _check_t(t)
    model, grid = f.model, f.grid
    basis = basis or HelgasonBasis(model, grid)
    table = fourier_forward(f, basis)
    heat = np.exp(-t * (basis.mu ** 2 + model.rho2))
    F_modes = table.modes() * heat[None, :]
    weights = c_x * basis.density * basis.mu_weights
    orders = grid.mode_orders(model)
    radii = basis.radii if crown_radii is None else np.asarray(crown_radii, dtype=float)

    values = []
    for Y in np.atleast_1d(np.asarray(y_grid, dtype=float)):
        if Y == 0.0 and crown_radii is None:
            modes = np.einsum("nk,nki,k->ni", F_modes, np.conj(basis.kernel), weights)
        else:
            modes = _crown_modes(model, grid, F_modes, weights, orders, radii + 1j * Y)
        values.append(XFunction.from_modes(model, grid, modes, radii=radii).values)
    logger.debug(f"[QUAD] H_t 冠网格 {len(values)} 个 Y 切片")
    return CrownFunction(model, grid, y_grid, np.array(values), radii=radii, table=table, t=t, c_x=c_x)


def translated_heat_crown(model: Model, t: float, center_r: float, grid: GridSpec,
                          y_grid: Sequence[float], c_x: float,
                          radii: Optional[np.ndarray] = None) -> CrownFunction:
    """
    平移热核 k_t^∼(c⁻¹·z) 的独立采样，c = a_{r₁}·x_o

    冠不变量 w = cosh 2Z·cosh 2r₁ - sinh 2r₁·sinh 2Z·cos γ，Z = r + iY，γ 为角向与 c 方向的夹角。
    Y = 0 切片走热核剖面样条，其余切片走谱积分。
    """
    r = grid.radial_nodes()[0] if radii is None else np.asarray(radii, dtype=float)
    angle = grid.angle_nodes(model)[0]
    cos_gamma = np.cos(angle) if model is Model.SL2R else angle
    y_grid = np.atleast_1d(np.asarray(y_grid, dtype=float))
    values = np.empty((y_grid.size, r.size, angle.size), dtype=complex)
    profile = None
    for a, Y in enumerate(y_grid):
        Z = r + 1j * Y
        w = (np.cosh(2.0 * Z)[:, None] * math.cosh(2.0 * center_r)
             - math.sinh(2.0 * center_r) * np.sinh(2.0 * Z)[:, None] * cos_gamma[None, :])
        if Y == 0.0:
            profile = profile or heat_kernel_profile(model, t, c_x)
            values[a] = profile(np.arccosh(np.maximum(w.real, 1.0)))
        else:
            values[a] = _heat_spectral(model, t, _invariant_to_log(w.ravel()), c_x).reshape(w.shape)
    return CrownFunction(model, grid, y_grid, values, radii=r)


@dataclass
class SpectralDensity:
    """μ 网格上的谱密度 g(μ_k) >= 0 及其求积权重"""
    model: Model
    mu: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    c_x: float = 1.0

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not (self.mu.shape == self.weights.shape == self.values.shape):
            raise ValueError("mu、weights、values 形状必须一致")
        if np.any(self.values < 0):
            raise ValueError("谱密度必须非负")

    @classmethod
    def from_function(cls, f: XFunction, t: float, c_x: float,
                      basis: Optional[HelgasonBasis] = None) -> "SpectralDensity":
        """g(μ) = e^{-2t(μ²+|ρ|²)}·∫_B |f̂(b, μ)|² db"""
        _check_t(t)
        table = fourier_forward(f, basis)
        mu, wmu = f.grid.mu_nodes()
        values = np.exp(-2.0 * t * (mu ** 2 + f.model.rho2)) * table.boundary_mean_abs2()
        return cls(f.model, mu, wmu, values, c_x)

    @classmethod
    def from_crown(cls, F: CrownFunction, c_x: float,
                   basis: Optional[HelgasonBasis] = None) -> "SpectralDensity":
        """
        由 F|_X 的 Fourier 表得到 |F|² 的轨道积分谱密度

        低于噪声底（峰值的 1e-13，按模长）的节点置零：这些节点在 e^{2t(μ²+|ρ|²)} 加权下只放大舍入误差
        """
        table = fourier_forward(F.x_slice(), basis)
        mu, wmu = F.grid.mu_nodes()
        values = table.boundary_mean_abs2()
        values = np.where(values > NOISE_FLOOR ** 2 * values.max(initial=0.0), values, 0.0)
        return cls(F.model, mu, wmu, values, c_x)

    def density(self) -> np.ndarray:
        return plancherel_density(self.model, self.mu, self.c_x)

    def masses(self) -> np.ndarray:
        """每个节点的 g·dμ/|c|² 质量"""
        return self.weights * self.density() * self.values


def orbital_integral_spectral(table: FourierTable, t: float, Z: complex, c_x: float) -> complex:
    """
    𝒪_{|H_t f|²}(Z) = ∬ |f̂|² e^{-2t(μ²+|ρ|²)} φ_λ(exp Z) dμ(b,λ)

    Raises:
        CrownBoundaryError: |Im Z| >= π/2
    """
    _check_t(t)
    if abs(complex(Z).imag) >= math.pi / 2.0:
        raise CrownBoundaryError(f"|Im Z|={abs(complex(Z).imag)} 超出 2Ω")
    model = table.model
    mu, wmu = table.grid.mu_nodes()
    mass = (wmu * plancherel_density(model, mu, c_x) * np.exp(-2.0 * t * (mu ** 2 + model.rho2))
            * table.boundary_mean_abs2())
    return complex(mass @ _phi_table(model, mu, np.array([complex(Z)]))[:, 0])


def _h2_orbital_angular(F: CrownFunction, Y: float, r: np.ndarray, angle_points: int) -> np.ndarray:
    """
    H² 上 ∫_K∫_K |F(k₁ a_r k₂·exp(iY/2)·x_o)|² dk₁dk₂，对每个 r

    p = a_r·k₂e^{iYH₀}k₂ᵀ·a_r 写成 k_θ·e^{2ZH₀}·k_θᵀ（θ 为复角），于是
    F(k₁·z) = Σ_m e^{2im(θ₁+θ)}·F_m(Z)，F_m 为冠切片的角向模；对 k₁ 用 Parseval 得
    Σ_m |e^{2iθ}|^{2m}·|F_m(Z)|²，其中 e^{±2iθ} = (p₁₁ - p₂₂ ∓ 2ip₁₂)/(2 sinh 2Z)。
    k₂ 取半步偏移的均匀节点，θ₂ 与 π - θ₂ 共用同一个 Z。
    """
    if angle_points % 2:
        raise ValueError(f"angle_points 必须为偶数: {angle_points}")
    F_modes, weights = F.spectral_modes()
    orders = F.grid.mode_orders(F.model)
    magnitude = np.abs(F_modes).max(axis=1)
    active = magnitude > NOISE_FLOOR * magnitude.max(initial=0.0)
    if not np.any(active):
        return np.zeros(r.size)
    orders = orders[active]

    theta = math.pi * (np.arange(angle_points) + 0.5) / angle_points
    half = angle_points // 2
    m11 = math.cos(Y) + 1j * math.sin(Y) * np.cos(2.0 * theta)
    m22 = math.cos(Y) - 1j * math.sin(Y) * np.cos(2.0 * theta)
    p12 = np.broadcast_to(-1j * math.sin(Y) * np.sin(2.0 * theta), (r.size, angle_points))
    p11 = np.exp(2.0 * r)[:, None] * m11[None, :]
    p22 = np.exp(-2.0 * r)[:, None] * m22[None, :]

    Z_half = _invariant_to_log(((p11 + p22) / 2.0)[:, :half].ravel()).reshape(r.size, half)
    Z = np.concatenate([Z_half, Z_half[:, ::-1]], axis=1)
    modes = _crown_modes(F.model, F.grid, F_modes[active], weights, orders, Z_half.ravel())
    modes = modes.reshape(orders.size, r.size, half)
    modes = np.concatenate([modes, modes[:, :, ::-1]], axis=2)

    sh = 2.0 * np.sinh(2.0 * Z)
    forward = np.abs((p11 - p22 - 2j * p12) / sh)
    backward = np.abs((p11 - p22 + 2j * p12) / sh)
    m = orders[:, None, None]
    scale = np.where(m > 0, forward[None] ** (2 * np.abs(m)), backward[None] ** (2 * np.abs(m)))
    return (scale * np.abs(modes) ** 2).sum(axis=0).mean(axis=1)


def orbital_integral_direct(F: CrownFunction, Y: float, angle_points: int = 64) -> float:
    """
    𝒪_{|F|²}(iY) = ∫_G |F(g·exp(iY/2)·x_o)|² dg 的 KAK 求积，g = k₁ a_r k₂

    H²: 任意带谱数据的 F，k₁ 与 k₂ 都做积分（见 _h2_orbital_angular）。
    H³: K-不变的 F 只依赖冠不变量 w = cos Y·cosh 2r + i·ν·sin Y·sinh 2r，
    ν = k₂H₀k₂⁻¹ 的 H₀ 分量在 [-1, 1] 上均匀。

    Raises:
        ValueError: F 缺少谱数据，或 H³ 上 F 不是 K-不变的
        CrownBoundaryError: |Y| >= π/2
        CutoffViolation: r > R - 1 上的质量过大
    """
    if F.table is None:
        raise ValueError("直接轨道积分需要带谱数据的 F")
    if F.model is Model.SL2C and not F.is_radial():
        raise ValueError("H³ 上的直接轨道积分需要 K-不变的 F")
    if abs(Y) >= math.pi / 2.0:
        raise CrownBoundaryError(f"|Y|={abs(Y)} 超出 2Ω")
    r, wr = F.grid.radial_nodes()
    if F.model is Model.SL2R:
        angular = _h2_orbital_angular(F, Y, r, angle_points)
    else:
        nu, nw = gauss_legendre(angle_points, -1.0, 1.0)
        w = (math.cos(Y) * np.cosh(2.0 * r)[:, None]
             + 1j * math.sin(Y) * np.sinh(2.0 * r)[:, None] * nu[None, :])
        angular = np.abs(F.evaluate_radial(w)) ** 2 @ (nw / 2.0)
    density = wr * haar_kak_density(F.model, r) * angular
    total = float(density.sum())
    outer = float(density[r > F.grid.radial_cutoff - 1.0].sum())
    if total > 0 and outer > MASS_CUTOFF * total:
        raise CutoffViolation(f"轨道积分在 r > R-1 的质量占比 {outer / total:.2e}")
    return total


def shift_D(gdens: SpectralDensity, z: complex) -> complex:
    """
    (Dh)(z) = ∫ g(μ)·ψ_μ(z) dμ/|c|²，z 为 𝔞_ℂ 上的度量坐标

    截断处被积函数仍在增长时记录 [WARNING]
    """
    integrand = gdens.density() * gdens.values * psi(gdens.mu, complex(z))
    magnitude = np.abs(integrand)
    peak = magnitude.max(initial=0.0)
    if peak > 0 and magnitude.size > 1 and magnitude[-1] > 1e-8 * peak and magnitude[-1] >= magnitude[-2]:
        logger.warning(f"[WARNING] D 在 μ 截断处被积函数仍在增长: 相对值 {magnitude[-1] / peak:.2e}")
    return complex(np.sum(gdens.weights * integrand))


def abel_resynthesis(g, mu, weights, y):
    """(1/2π)∫ g(μ)·ψ_μ(y) dμ，y 为度量坐标"""
    g = np.asarray(g)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    value = (np.asarray(weights) * g) @ np.real(psi(np.asarray(mu)[:, None], y_arr[None, :])) / (2.0 * math.pi)
    return float(value[0]) if np.ndim(y) == 0 else value


def abel_transform(model: Model, H, y, points: int = 1024):
    """
    Abel 变换 (𝒜H)(y) = e^{ρy}∫_N H(a_y n·x_o) dn

    上半空间坐标中 cosh d(a_y n_v x_o, x_o) = cosh y + |s|²/2（v = e^{-y/2}s），因此
      H²: (𝒜H)(y) = 2∫_0^∞ H(d(s)) ds
      H³: (𝒜H)(y) = 2π∫_0^∞ H(d(s)) s ds
    结果关于 y 为偶函数。

    Args:
        model: 模型
        H: RadialProfile 或 K-不变的 XFunction
        y: 度量坐标（可为数组）
        points: s 方向 Gauss 节点数

    Raises:
        DecayViolation: 剖面在 d_max 处未衰减到峰值的 1e-10 以下
    """
    profile = H if isinstance(H, RadialProfile) else RadialProfile.from_xfunction(H)
    ratio = profile.edge_ratio()
    if ratio > 1e-10:
        raise DecayViolation(f"剖面在 d_max={profile.d_max:.2f} 处相对值 {ratio:.2e}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros(y_arr.shape)
    for i, yy in enumerate(y_arr):
        gap = math.cosh(profile.d_max) - math.cosh(yy)
        if gap <= 0:
            continue
        s, ws = gauss_legendre(points, 0.0, math.sqrt(2.0 * gap))
        values = np.real(profile(np.arccosh(math.cosh(yy) + s * s / 2.0)))
        if model is Model.SL2R:
            out[i] = 2.0 * np.sum(ws * values)
        else:
            out[i] = 2.0 * math.pi * np.sum(ws * values * s)
    return float(out[0]) if np.ndim(y) == 0 else out


def weight_w(t: float, y, model: Model):
    """w_t(y) = ½·e^{2t|ρ|²}·(2πt)^{-1/2}·e^{-y²/2t}"""
    _check_t(t)
    y = np.asarray(y, dtype=float)
    value = 0.5 * math.exp(2.0 * t * model.rho2) / math.sqrt(2.0 * math.pi * t) * np.exp(-y * y / (2.0 * t))
    return float(value) if value.ndim == 0 else value


def _weighted_functional(gdens: SpectralDensity, t: float, mu_max: Optional[float] = None) -> float:
    """
    ∫ [∫ g(μ) ψ_μ(i2y) dμ/|c|²] w_t(y) dy 的对数域求积

    y 窗口 ±(2tΛ + 12√t)，步长 √t/4 的梯形法
    """
    _check_t(t)
    mask = np.ones(gdens.mu.shape, dtype=bool) if mu_max is None else gdens.mu <= mu_max
    masses = gdens.masses()[mask]
    mu = gdens.mu[mask]
    positive = masses > 0
    if not np.any(positive):
        return 0.0
    mu, log_mass = mu[positive], np.log(masses[positive])
    sqrt_t = math.sqrt(t)
    half = 2.0 * t * float(mu.max()) + WINDOW_SIGMAS * sqrt_t
    count = int(math.ceil(2.0 * half / (sqrt_t / 4.0))) + 1
    y = np.linspace(-half, half, count)
    step = y[1] - y[0]
    log_w = (math.log(0.5) + 2.0 * t * gdens.model.rho2 - 0.5 * math.log(2.0 * math.pi * t)
             - y * y / (2.0 * t))
    log_psi = np.logaddexp(2.0 * mu[:, None] * y[None, :], -2.0 * mu[:, None] * y[None, :])
    terms = np.exp(log_mass[:, None] + log_psi + log_w[None, :])
    per_node = step * (terms.sum(axis=1) - 0.5 * (terms[:, 0] + terms[:, -1]))
    return float(per_node.sum())


def norm_identity_check(f: XFunction, t: float, c_x: float,
                        basis: Optional[HelgasonBasis] = None) -> Tuple[float, float]:
    """
    范数恒等式 ‖f‖² = ∫_𝔞 [∫ g(λ) ψ_λ(i2Y) dμ/|c|²] w_t(Y) dY

    Returns:
        (lhs, rhs)
    """
    lhs = f.norm2()
    if lhs == 0.0:
        return 0.0, 0.0
    rhs = _weighted_functional(SpectralDensity.from_function(f, t, c_x, basis), t)
    logger.debug(f"[QUAD] 范数恒等式 {f.model.value} t={t}: lhs={lhs:.10g} rhs={rhs:.10g}")
    return lhs, rhs


class Verdict(Enum):
    MEMBER = "member"
    NON_MEMBER = "non-member"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MembershipReport:
    """像集判别结果；增长因子为 μ 截断由 Λ/2 加倍到 Λ 时估计值的倍数"""
    verdict: Verdict
    value: float
    growth: float
    crown_growth: Dict[float, float] = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)


def _growth(half: float, full: float) -> float:
    if full == 0.0:
        return 1.0
    if half == 0.0:
        return math.inf
    return full / half


def membership_from_density(gdens: SpectralDensity, t: float,
                            y_grid: Sequence[float] = (0.0, 0.2, 0.4, 0.6)) -> MembershipReport:
    """
    由轨道积分谱密度判别 im H_t 成员资格

    (i) 𝒢(Ξ)：每个 Y 上 ∫ g ψ_λ(i2Y) dμ/|c|² 的截断加倍增长；
    (ii) ∫(D𝒪)(iy) w_t(y) dy 的截断加倍增长。
    最大增长 > 10 判为非成员，< 1.01 判为成员，其余不确定。
    """
    cutoff = float(gdens.mu.max())
    value = _weighted_functional(gdens, t)
    growth = _growth(_weighted_functional(gdens, t, mu_max=cutoff / 2.0), value)

    masses = gdens.masses()
    lower = gdens.mu <= cutoff / 2.0
    crown = {}
    for Y in y_grid:
        if abs(Y) >= math.pi / 4.0:
            raise CrownBoundaryError(f"|Y|={abs(Y)} 不在 Ω 内")
        terms = masses * np.real(psi(gdens.mu, 4.0j * Y))
        crown[float(Y)] = _growth(float(terms[lower].sum()), float(terms.sum()))

    worst = max([growth] + list(crown.values()))
    diagnostics = [f"Λ={cutoff:.2f} 加权积分 {value:.6e} 增长 {growth:.3g}"]
    diagnostics += [f"Y={Y:.3f} 𝒢(Ξ) 增长 {g:.3g}" for Y, g in crown.items()]
    if worst > GROWTH_DIVERGENT:
        verdict = Verdict.NON_MEMBER
    elif worst < GROWTH_FINITE:
        verdict = Verdict.MEMBER
    else:
        verdict = Verdict.INCONCLUSIVE
    tag = "[OK]" if verdict is Verdict.MEMBER else "[WARNING]"
    logger.info(f"{tag} 像集判别 {gdens.model.value} t={t}: {verdict.value} 最大增长 {worst:.3g}")
    return MembershipReport(verdict, value, growth, crown, diagnostics)


def image_membership(F: CrownFunction, t: float, c_x: float,
                     y_grid: Sequence[float] = (0.0, 0.2, 0.4, 0.6),
                     basis: Optional[HelgasonBasis] = None) -> MembershipReport:
    """F ∈ im H_t 的有限网格判别；成员的 value 等于 ‖f‖²"""
    _check_t(t)
    return membership_from_density(SpectralDensity.from_crown(F, c_x, basis), t, y_grid)


def half_time_kernel(model: Model, grid: GridSpec, t: float, c_x: float) -> CrownFunction:
    """k_{t/2} 的 Y = 0 冠函数：|F̂|² = e^{-t(μ²+|ρ|²)}，属于 im H_{t/2} 而不属于 im H_t"""
    _check_t(t)
    r, _ = grid.radial_nodes()
    profile = heat_kernel(model, t / 2.0, r, c_x)
    values = np.repeat(np.asarray(profile)[:, None], grid.angular_points, axis=1)
    return CrownFunction.from_xfunction(XFunction(model, grid, values, radii=r))


def surjectivity_construct(F: CrownFunction, t: float, c_x: float,
                           basis: Optional[HelgasonBasis] = None) -> XFunction:
    """
    由 F ∈ im H_t 构造原像：F|_X 的 Fourier 变换乘以 e^{t(μ²+|ρ|²)} 后反演

    噪声底（峰值的 1e-13）以上的最高 μ 决定所需放大；更高的 μ 分量视为噪声丢弃。

    Raises:
        AmplificationOverflow: 所需放大超过 1e12
    """
    _check_t(t)
    model, grid = F.model, F.grid
    basis = basis or HelgasonBasis(model, grid)
    table = fourier_forward(F.x_slice(), basis)
    magnitude = np.abs(table.values).max(axis=0)
    peak = magnitude.max(initial=0.0)
    if peak == 0.0:
        return XFunction(model, grid, np.zeros((grid.radial_points, grid.angular_points)))
    mu = basis.mu
    mu_eff = float(mu[magnitude > NOISE_FLOOR * peak].max())
    exponent = t * (mu_eff ** 2 + model.rho2)
    if exponent > math.log(AMPLIFICATION_CAP):
        raise AmplificationOverflow(
            f"μ={mu_eff:.2f} 处谱数据仍高于噪声底，放大 e^{exponent:.1f} > {AMPLIFICATION_CAP:.0e}")
    factor = np.where(mu <= mu_eff, np.exp(t * (mu ** 2 + model.rho2)), 0.0)
    logger.debug(f"[QUAD] 满射构造 μ_eff={mu_eff:.2f} 放大 e^{exponent:.2f}")
    return fourier_invert(FourierTable(model, grid, table.values * factor[None, :]), c_x, basis)


def continuity_constant(family_factory: Callable[[GridSpec], Sequence[XFunction]], grid: GridSpec,
                        t: float, c_x: float,
                        y_grid: Sequence[float] = (0.0, 0.3, 0.6)) -> Tuple[float, float]:
    """
    ‖H_t f‖_{冠网格} <= C·‖f‖ 中 C 的估计，并在加密网格上复核

    Returns:
        (C, 加密后的相对变化)
    """
    estimates = []
    for spec in (grid, grid.refined()):
        family = list(family_factory(spec))
        basis = HelgasonBasis(family[0].model, spec)
        ratios = [math.sqrt(heat_transform_apply(f, t, c_x, y_grid, basis).crown_norm2() / f.norm2())
                  for f in family]
        estimates.append(max(ratios))
    change = abs(estimates[1] - estimates[0]) / estimates[0]
    logger.info(f"[QUAD] 连续性常数 C={estimates[0]:.6g} 加密变化 rel={change:.2e}")
    return estimates[0], change
