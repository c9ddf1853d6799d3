"""
Helgason Fourier 变换
f̂(b, λ) = ∫_X f(x)·a(bx)^{ρ-λ} dx 及其反演、Plancherel 等距检查与 c_X 标定

离散化:
  H²: X 上 (r_i, φ_j)，φ 均匀；边界 β 与 φ 共用均匀网格，角向按 FFT 展开到 |m| <= M
  H³: 绕极轴对称的函数，(r_i, cos ϑ_j) 中 cos ϑ 取 Gauss 节点，按 Legendre 模 l <= L 展开；保持此类的旋转为绕水平轴的半圈
  r 与 μ 均为 Gauss-Legendre 网格（两个被积函数在原点都是奇函数）
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from hyperbolic_models import Model, haar_kak_density
from special_functions import CrownheatError, gauss_legendre
from spherical_spectral import generalized_spherical_table, plancherel_density

logger = logging.getLogger(__name__)

MASS_CUTOFF = 1e-10
DECAY_CUTOFF = 1e-10
SUPPORT_TOL = 1e-12
REFERENCE_SIGMA = 0.5


class CutoffViolation(CrownheatError):
    """函数质量或谱数据在截断处未衰减"""


class SupportViolation(CrownheatError):
    """带限系数在 Λ_PW 之外非零"""


class CalibrationError(CrownheatError):
    """c_X 在网格加密下不稳定"""


@dataclass
class GridSpec:
    """求积网格描述"""
    radial_cutoff: float = 4.0
    radial_points: int = 128
    angular_points: int = 64
    angular_modes: int = 16
    mu_cutoff: float = 24.0
    mu_points: int = 128
    azimuth_points: int = 8

    def __post_init__(self):
        if self.radial_cutoff <= 1.0:
            raise ValueError(f"径向截断必须 > 1: {self.radial_cutoff}")
        if self.mu_cutoff <= 0:
            raise ValueError(f"μ 截断必须为正: {self.mu_cutoff}")
        for name in ("radial_points", "angular_points", "mu_points", "azimuth_points"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} 必须为正")
        if self.angular_modes < 0:
            raise ValueError("angular_modes 不能为负")

    def radial_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        return gauss_legendre(self.radial_points, 0.0, self.radial_cutoff)

    def mu_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        return gauss_legendre(self.mu_points, 0.0, self.mu_cutoff)

    def angle_nodes(self, model: Model) -> Tuple[np.ndarray, np.ndarray]:
        """H²: 均匀 φ 与权重 1/N；H³: cos ϑ 的 Gauss 节点与权重（和为 2）"""
        if model is Model.SL2R:
            n = self.angular_points
            return 2.0 * math.pi * np.arange(n) / n, np.full(n, 1.0 / n)
        return gauss_legendre(self.angular_points, -1.0, 1.0)

    def mode_orders(self, model: Model) -> np.ndarray:
        M = self.angular_modes
        return np.arange(-M, M + 1) if model is Model.SL2R else np.arange(M + 1)

    def refined(self) -> "GridSpec":
        return GridSpec(**{**asdict(self), "radial_points": 2 * self.radial_points,
                           "mu_points": 2 * self.mu_points})

    def to_dict(self) -> Dict:
        return asdict(self)


def legendre_matrix(c: np.ndarray, max_order: int) -> np.ndarray:
    out = np.empty((max_order + 1, c.size))
    out[0] = 1.0
    if max_order >= 1:
        out[1] = c
    for l in range(1, max_order):
        out[l + 1] = ((2 * l + 1) * c * out[l] - l * out[l - 1]) / (l + 1)
    return out


@dataclass
class XFunction:
    """X 上的函数：values[i, j] 为 (r_i, 角向节点 j) 处取值"""
    model: Model
    grid: GridSpec
    values: np.ndarray
    radii: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.radii is None:
            self.radii = self.grid.radial_nodes()[0]
        expected = (len(self.radii), self.grid.angular_points)
        if self.values.shape != expected:
            raise ValueError(f"values 形状 {self.values.shape} 与网格 {expected} 不符")

    @classmethod
    def from_callable(cls, model: Model, grid: GridSpec, func: Callable) -> "XFunction":
        """func(r, angle)：H² 的 angle 为 φ，H³ 的 angle 为 cos ϑ"""
        r = grid.radial_nodes()[0]
        angle = grid.angle_nodes(model)[0]
        rr, aa = np.meshgrid(r, angle, indexing="ij")
        return cls(model, grid, func(rr, aa))

    @classmethod
    def from_modes(cls, model: Model, grid: GridSpec, modes: np.ndarray,
                   radii: Optional[np.ndarray] = None) -> "XFunction":
        orders = grid.mode_orders(model)
        angle = grid.angle_nodes(model)[0]
        if model is Model.SL2R:
            basis = np.exp(1j * np.outer(orders, angle))
        else:
            basis = legendre_matrix(angle, grid.angular_modes)
        return cls(model, grid, modes.T @ basis, radii=radii)

    def modes(self, check: bool = True) -> np.ndarray:
        """
        角向模系数 f_m(r_i)（H²: m = -M..M）或 f_l(r_i)（H³）

        Raises:
            CutoffViolation: 截断阶之外仍有显著分量
        """
        orders = self.grid.mode_orders(self.model)
        if self.model is Model.SL2R:
            n = self.grid.angular_points
            spectrum = np.fft.fft(self.values, axis=1) / n
            kept = spectrum[:, orders % n].T
            if check and n > 2 * self.grid.angular_modes + 1:
                mask = np.ones(n, dtype=bool)
                mask[orders % n] = False
                leak = np.abs(spectrum[:, mask]).max(initial=0.0)
                if leak > 1e-10 * max(np.abs(kept).max(initial=0.0), 1e-300):
                    raise CutoffViolation(f"角向模超出 |m| <= {self.grid.angular_modes}: 泄漏 {leak:.2e}")
            return kept
        c, w = self.grid.angle_nodes(self.model)
        P = legendre_matrix(c, self.grid.angular_modes)
        factor = (2 * np.arange(self.grid.angular_modes + 1) + 1) / 2.0
        return factor[:, None] * (P * w) @ self.values.T

    def _angular_mean_abs2(self) -> np.ndarray:
        _, w = self.grid.angle_nodes(self.model)
        scale = 1.0 if self.model is Model.SL2R else 0.5
        return scale * (np.abs(self.values) ** 2) @ w

    def norm2(self) -> float:
        """‖f‖²_{L²(X)}"""
        _, wr = self.grid.radial_nodes()
        return float(np.sum(wr * haar_kak_density(self.model, self.radii) * self._angular_mean_abs2()))

    def check_mass_cutoff(self):
        """r > R - 1 上的质量必须低于总质量的 1e-10"""
        _, wr = self.grid.radial_nodes()
        density = wr * haar_kak_density(self.model, self.radii) * self._angular_mean_abs2()
        total = density.sum()
        outer = density[self.radii > self.grid.radial_cutoff - 1.0].sum()
        if total > 0 and outer > MASS_CUTOFF * total:
            raise CutoffViolation(f"r > R-1 的质量占比 {outer / total:.2e} > {MASS_CUTOFF:.0e}")


@dataclass
class FourierTable:
    """f̂(b_j, μ_k)：values[j, k]，b 为边界网格（H² 的 β 或 H³ 的极角节点）"""
    model: Model
    grid: GridSpec
    values: np.ndarray
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = (self.grid.angular_points, self.grid.mu_points)
        if self.values.shape != expected:
            raise ValueError(f"values 形状 {self.values.shape} 与网格 {expected} 不符")

    @classmethod
    def from_modes(cls, model: Model, grid: GridSpec, modes: np.ndarray) -> "FourierTable":
        orders = grid.mode_orders(model)
        angle = grid.angle_nodes(model)[0]
        if model is Model.SL2R:
            basis = np.exp(1j * np.outer(angle, orders))
        else:
            basis = legendre_matrix(angle, grid.angular_modes).T
        return cls(model, grid, basis @ modes)

    def modes(self) -> np.ndarray:
        """边界角向模 F_m(μ_k)"""
        orders = self.grid.mode_orders(self.model)
        if self.model is Model.SL2R:
            n = self.grid.angular_points
            return (np.fft.fft(self.values, axis=0) / n)[orders % n]
        c, w = self.grid.angle_nodes(self.model)
        P = legendre_matrix(c, self.grid.angular_modes)
        factor = (2 * np.arange(self.grid.angular_modes + 1) + 1) / 2.0
        return factor[:, None] * (P * w) @ self.values

    def boundary_mean_abs2(self) -> np.ndarray:
        """∫_B |f̂(b, μ_k)|² db"""
        _, w = self.grid.angle_nodes(self.model)
        scale = 1.0 if self.model is Model.SL2R else 0.5
        return scale * w @ (np.abs(self.values) ** 2)

    def check_decay(self):
        """μ 截断处的谱数据必须衰减到最大值的 1e-10 以下"""
        peak = np.abs(self.values).max(initial=0.0)
        edge = np.abs(self.values[:, -2:]).max(initial=0.0)
        if peak > 0 and edge > DECAY_CUTOFF * peak:
            raise CutoffViolation(f"μ = Λ 处谱数据 {edge / peak:.2e} 未衰减")


class HelgasonBasis:
    """
    缓存给定网格上的广义球函数表

    kernel[n, k, i] = k_{|m|}^{(-)}(μ_k, r_i)，正变换核；实 r 上 k^{(+)} = conj(k^{(-)})
    """

    def __init__(self, model: Model, grid: GridSpec, radii: Optional[np.ndarray] = None):
        self.model = model
        self.grid = grid
        r_nodes, self.radial_weights = grid.radial_nodes()
        self.radii = r_nodes if radii is None else np.asarray(radii, dtype=float)
        self.mu, self.mu_weights = grid.mu_nodes()
        self.jacobian = haar_kak_density(model, self.radii)
        self.density = plancherel_density(model, self.mu)
        table = generalized_spherical_table(model, grid.angular_modes, self.mu, self.radii, sign=-1)
        orders = np.abs(grid.mode_orders(model))
        self.kernel = table[orders]
        logger.debug(f"[QUAD] 基表 {model.value} 形状 {self.kernel.shape}")

    def forward_modes(self, f_modes: np.ndarray) -> np.ndarray:
        """F_m(μ_k) = Σ_i f_m(r_i)·k_m^{(-)}(μ_k, r_i)·J(r_i)·w_i"""
        if len(self.radii) != self.grid.radial_points:
            raise ValueError("正变换需要标准径向网格")
        weights = self.radial_weights * self.jacobian
        return np.einsum("ni,nki,i->nk", f_modes, self.kernel, weights)

    def invert_modes(self, F_modes: np.ndarray, c_x: float) -> np.ndarray:
        """f_m(r_i) = c_X Σ_k F_m(μ_k)·k_m^{(+)}(μ_k, r_i)·|c(μ_k)|^{-2}·w_k"""
        weights = c_x * self.density * self.mu_weights
        return np.einsum("nk,nki,k->ni", F_modes, np.conj(self.kernel), weights)


def fourier_forward(f: XFunction, basis: Optional[HelgasonBasis] = None,
                    check_cutoff: bool = True) -> FourierTable:
    """
    Helgason 正变换

    Args:
        f: X 上的函数
        basis: 预先计算的基表（可选）
        check_cutoff: 是否检查质量截断

    Returns:
        FourierTable

    Raises:
        CutoffViolation: 质量或角向模截断不满足
    """
    if check_cutoff:
        f.check_mass_cutoff()
    basis = basis or HelgasonBasis(f.model, f.grid)
    F_modes = basis.forward_modes(f.modes(check=check_cutoff))
    return FourierTable.from_modes(f.model, f.grid, F_modes)


def fourier_invert(F: FourierTable, c_x: float, basis: Optional[HelgasonBasis] = None,
                   check_cutoff: bool = True) -> XFunction:
    """
    Helgason 反演 f(x) = ∬ f̂(b,λ)·a(bx)^{ρ+λ} dμ(b,λ)

    Raises:
        CutoffViolation: μ 截断处未衰减
    """
    if check_cutoff:
        F.check_decay()
    basis = basis or HelgasonBasis(F.model, F.grid)
    f_modes = basis.invert_modes(F.modes(), c_x)
    return XFunction.from_modes(F.model, F.grid, f_modes, radii=basis.radii)


def plancherel_check(f: XFunction, c_x: float,
                     basis: Optional[HelgasonBasis] = None) -> Tuple[float, float]:
    """
    Returns:
        (lhs, rhs) = (‖f‖²_{L²(X)}, ∬|f̂|² dμ(b,λ))
    """
    lhs = f.norm2()
    if lhs == 0.0:
        return 0.0, 0.0
    table = fourier_forward(f, basis)
    mu, wmu = f.grid.mu_nodes()
    rhs = float(np.sum(wmu * plancherel_density(f.model, mu, c_x) * table.boundary_mean_abs2()))
    return lhs, rhs


def band_limited_synth(model: Model, coeffs: np.ndarray, grid: GridSpec, mu_pw: float, c_x: float,
                       basis: Optional[HelgasonBasis] = None) -> XFunction:
    """
    由 μ <= Λ_PW 上的模系数合成 X 上函数（Paley-Wiener 族的数值版本）

    Args:
        coeffs: 模系数 F_m(μ_k)，形状 (模数, mu_points)
        mu_pw: 支撑上界 Λ_PW < Λ

    Raises:
        SupportViolation: Λ_PW 之外的系数超过 1e-12
    """
    if not 0 < mu_pw < grid.mu_cutoff:
        raise ValueError(f"Λ_PW={mu_pw} 必须位于 (0, Λ) 内")
    coeffs = np.array(coeffs, dtype=complex)
    mu, _ = grid.mu_nodes()
    outside = mu > mu_pw
    if np.any(np.abs(coeffs[:, outside]) > SUPPORT_TOL):
        raise SupportViolation(f"系数在 μ > {mu_pw} 处非零: max={np.abs(coeffs[:, outside]).max():.2e}")
    coeffs[:, outside] = 0.0
    basis = basis or HelgasonBasis(model, grid)
    return XFunction.from_modes(model, grid, basis.invert_modes(coeffs, c_x), radii=basis.radii)


def rotate(f: XFunction, steps: int) -> XFunction:
    """
    绕基点的旋转 k，(k·f)(x) = f(k⁻¹x)；Fourier 侧对应 f̂ 在边界上做同一旋转（见 rotate_table）

    H²: 旋转角 φ₀ = steps·2π/N，(k·f)(r, φ) = f(r, φ - φ₀)
    H³: 网格只承载轴对称函数，保持这一类的非平凡旋转是绕水平轴的半圈；
        steps 计半圈个数，奇数次 cos ϑ → -cos ϑ，偶数次为恒等
    """
    if f.model is Model.SL2C:
        values = f.values[:, ::-1] if steps % 2 else f.values
        return XFunction(f.model, f.grid, values.copy(), radii=f.radii)
    return XFunction(f.model, f.grid, np.roll(f.values, steps, axis=1), radii=f.radii)


def rotate_table(table: FourierTable, steps: int) -> FourierTable:
    """边界上的同一旋转：H² 平移 β，H³ 半圈翻转极角节点（Legendre 模乘 (-1)^l）"""
    if table.model is Model.SL2C:
        values = table.values[::-1] if steps % 2 else table.values
    else:
        values = np.roll(table.values, steps, axis=0)
    return FourierTable(table.model, table.grid, values.copy(), dict(table.meta))


def reference_bump(model: Model, grid: GridSpec, sigma: float = REFERENCE_SIGMA) -> XFunction:
    return XFunction.from_callable(model, grid, lambda r, a: np.exp(-r ** 2 / sigma ** 2) + 0 * a)


def random_family_member(model: Model, grid: GridSpec, rng: np.random.Generator,
                         sigma_range: Tuple[float, float] = (0.3, 0.6),
                         max_order: Optional[int] = None) -> XFunction:
    """
    随机光滑测试函数 Σ c_m (tanh r)^{|m|}·e^{-r²/σ²}·(1 + a·r²)·Y_m

    Y_m 为 e^{imφ}（H²）或 P_l(cos ϑ)（H³）；阶数不超过 max_order（默认 M/2）
    """
    top = grid.angular_modes // 2 if max_order is None else max_order
    orders = np.arange(-top, top + 1) if model is Model.SL2R else np.arange(top + 1)
    coeff = rng.standard_normal(orders.size) + 1j * rng.standard_normal(orders.size)
    sigma = rng.uniform(*sigma_range, orders.size)
    poly = rng.uniform(-0.5, 0.5, orders.size)

    def func(r, angle):
        out = np.zeros(r.shape, dtype=complex)
        for m, c, s, a in zip(orders, coeff, sigma, poly):
            radial = np.tanh(r) ** abs(m) * np.exp(-r ** 2 / s ** 2) * (1.0 + a * r ** 2)
            if model is Model.SL2R:
                out += c * radial * np.exp(1j * m * angle)
            else:
                out += c * radial * legendre_matrix(angle.ravel(), m)[m].reshape(angle.shape)
        return out

    return XFunction.from_callable(model, grid, func)


def calibrate_cx(model: Model, grid: GridSpec, tolerance: float = 1e-6) -> Tuple[float, float]:
    """
    在参考函数 e^{-r²/σ²}（σ = 0.5）上强制 Plancherel 等距以确定 c_X，并在加密网格上复核

    Returns:
        (c_X, 加密网格下的相对变化)

    Raises:
        CalibrationError: 相对变化超过 tolerance
    """
    values = []
    for spec in (grid, grid.refined()):
        lhs, rhs = plancherel_check(reference_bump(model, spec), 1.0)
        values.append(lhs / rhs)
    c_x, refined = values
    change = abs(refined - c_x) / abs(c_x)
    logger.info(f"[CALIBRATE] {model.value}: c_X={c_x:.12g} 加密变化 rel={change:.2e}")
    if change > tolerance:
        raise CalibrationError(f"c_X 加密后变化 {change:.2e} > {tolerance:.0e}")
    return c_x, change
