"""
复群冠上的非 Bergman 障碍（H³ = SL(2,ℂ)/SU(2)）

弯曲再生核 𝒦^t(z, w) = k_{2t}^∼(w̄⁻¹z)，关于 a、Y 的积分恒等式，
以及由假想的 G-不变权 w_t 推出的谱恒等式

    e^{2t(μ²+1)} = ∫_{Ω⁺} φ_λ(exp 2iY) w_t(Y) dY,  φ_λ(exp 2iY) = sinh(4μY)/(μ sin 4Y)

的两种否证：最小二乘拟合 + 外推残差，以及解析包络增长证书。

约定:
  δ(exp 2iY) = 2i·sin 4Y，W_t = δ⁻¹·w_t；候选权以实值 V = 2i·W_t = w_t/sin 4Y 存储于 Ω⁺
  展开后恒等式右端为 ∫_0^{π/4} (sinh 4μY/μ)·V(Y) dY
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from heat_transform import heat_kernel_closed, heat_kernel_invariant
from hyperbolic_models import CrownPoint, Model, haar_kak_density, pair_invariant
from special_functions import CrownheatError, gauss_legendre
from spherical_spectral import harish_chandra_c, phi_complex_group, plancherel_density

logger = logging.getLogger(__name__)

OMEGA_PLUS = math.pi / 4.0
COND_WARN = 1e12
RATIO_TARGET = 1e6
FIT_BAND = (0.0, 4.0)
HOLDOUT_START = 4.0
HOLDOUT_MIN_END = 12.0
_TAIL_LOG = math.log(1e16)


class ValidityError(CrownheatError):
    """w̄⁻¹z 不在核的有效区域内，或参数越出 Ω"""


def _check_t(t: float):
    if not t > 0:
        raise ValueError(f"t 必须为正: {t}")


# ==================== 弯曲再生核 ====================

def _reduced_log(model: Model, w: complex) -> complex:
    """w̄⁻¹z 的不变量 w 约化到 A_ℂ 坐标 Z（cosh 2Z = w）"""
    if model is Model.SL2R:
        # X̂_{ℂ,2Ω}：P = 2w ∉ (-∞, -2]
        if abs(w.imag) <= 1e-12 * max(1.0, abs(w)) and w.real <= -1.0:
            raise ValidityError(f"P = {2 * w} 落在 (-∞, -2] 上")
    Z = complex(np.arccosh(w)) / 2.0
    if abs(Z.imag) >= math.pi / 2.0 - 1e-9:
        raise ValidityError(f"约化坐标 |Im Z| = {abs(Z.imag):.6f} 到达 π/2")
    return Z


def curved_repro_kernel(t: float, z: CrownPoint, w: CrownPoint, c_x: float) -> complex:
    """
    𝒦^t(z, w) = k_{2t}^∼(w̄⁻¹z)

    Args:
        t: 时间
        z, w: 同一模型的冠点
        c_x: Plancherel 归一化常数

    Raises:
        ValidityError: w̄⁻¹z 越出有效区域
    """
    _check_t(t)
    if z.model is not w.model:
        raise ValueError("z 与 w 的模型不一致")
    invariant = pair_invariant(z, w)
    _reduced_log(z.model, invariant)
    return complex(heat_kernel_invariant(z.model, 2.0 * t, invariant, c_x))


# ==================== 恒等式 (a, Y) ====================

def _rotated_axis(beta: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """k₂·σ_z·k₂† = n·σ，返回 n₁、n₃"""
    return np.sin(beta) * np.cos(phi), np.cos(beta)


def _kernel_at(t: float, w: np.ndarray) -> np.ndarray:
    return heat_kernel_closed(t, np.arccosh(w) / 2.0)


def lemma_aa_check(t: float, r: float, Y: float, c_x: float,
                   radial_cutoff: float = 4.0, radial_points: int = 64,
                   angle_points: int = 32, mu_points: int = 256) -> Tuple[float, float]:
    """
    ∫_G k_{2t}^∼(a⁻¹g·exp(iY))·k_{2t}^∼(g·exp(-iY)) dg 与
    c_X ∫ e^{-4t(μ²+1)}·φ_λ(a_r)·φ_λ(exp 2iY)·μ² dμ

    左端在 M\\G/M 上做四维求积：g = R_y(α)·a_σ·R_z(ϕ)R_y(β)，
    σ ∈ [0, R] 带 Haar 密度，α、β 带 sin/2，ϕ 均匀（只经 cos ϕ 进入）。

    Args:
        t: 时间
        r: a = a_r
        Y: |Y| < π/4
        c_x: Plancherel 归一化常数

    Returns:
        (左端, 右端)

    Raises:
        ValidityError: |Y| >= π/4
    """
    _check_t(t)
    if abs(Y) >= OMEGA_PLUS:
        raise ValidityError(f"|Y|={abs(Y)} 不在 Ω 内")
    sigma, w_sigma = gauss_legendre(radial_points, 0.0, radial_cutoff)
    alpha, w_alpha = gauss_legendre(angle_points, 0.0, math.pi)
    beta, w_beta = gauss_legendre(angle_points, 0.0, math.pi)
    phi, w_phi = gauss_legendre(angle_points, 0.0, math.pi)
    w_alpha = w_alpha * np.sin(alpha) / 2.0
    w_beta = w_beta * np.sin(beta) / 2.0
    w_phi = w_phi / math.pi

    ca = np.cos(alpha / 2.0)[:, None, None]
    sa = np.sin(alpha / 2.0)[:, None, None]
    n1, n3 = _rotated_axis(beta[None, :, None], phi[None, None, :])
    c, s = math.cos(2.0 * Y), math.sin(2.0 * Y)
    e_minus, e_plus = math.exp(-2.0 * r), math.exp(2.0 * r)
    weights = w_alpha[:, None, None] * w_beta[None, :, None] * w_phi[None, None, :]

    lhs = 0.0 + 0.0j
    for sg, ws in zip(sigma, w_sigma * haar_kak_density(Model.SL2C, sigma)):
        # a_σ·X·a_σ，X = k₂·exp(2iY·H₀)·k₂†
        q11 = math.exp(2.0 * sg) * (c + 1j * s * n3)
        q22 = math.exp(-2.0 * sg) * (c - 1j * s * n3)
        cross = 2j * s * n1
        r11 = ca ** 2 * q11 - ca * sa * cross + sa ** 2 * q22
        r22 = sa ** 2 * q11 + ca * sa * cross + ca ** 2 * q22
        w_left = (e_minus * r11 + e_plus * r22) / 2.0
        w_right = c * math.cosh(2.0 * sg) - 1j * s * n3 * math.sinh(2.0 * sg)
        integrand = _kernel_at(2.0 * t, w_left) * _kernel_at(2.0 * t, w_right)
        lhs += ws * np.sum(weights * integrand)

    growth = 4.0 * abs(Y)
    cutoff = (growth + math.sqrt(growth ** 2 + 16.0 * t * (_TAIL_LOG + 4.0 * t))) / (8.0 * t)
    mu, w_mu = gauss_legendre(mu_points, 0.0, cutoff)
    spectral = (plancherel_density(Model.SL2C, mu, c_x) * np.exp(-4.0 * t * (mu ** 2 + 1.0))
                * np.real(phi_complex_group(mu, r)) * np.real(phi_complex_group(mu, 2j * Y)))
    rhs = float(w_mu @ spectral)

    if abs(lhs.imag) > 1e-8 * max(abs(lhs), 1e-300):
        logger.warning(f"[WARNING] 左端虚部 {lhs.imag:.2e} 未消去")
    gap = abs(lhs.real - rhs) / max(abs(rhs), 1e-300)
    logger.info(f"[QUAD] (a,Y) 恒等式 t={t} r={r} Y={Y}: lhs={lhs.real:.8e} rhs={rhs:.8e} rel={gap:.2e}")
    return float(lhs.real), rhs


# ==================== 候选权 ====================

@dataclass
class WeightCandidate:
    """
    Ω⁺ = (0, π/4) 上的候选权 V = 2i·W_t（实值，符号不限）

    Y 为求积节点，weights 为对应的求积权
    """
    Y: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if not (self.Y.shape == self.values.shape == self.weights.shape) or self.Y.ndim != 1:
            raise ValueError("Y、values、weights 形状必须一致且为一维")
        if np.any(self.Y <= 0) or np.any(self.Y >= OMEGA_PLUS):
            raise ValueError("节点必须位于 (0, π/4) 内")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("候选权含非有限值")

    @classmethod
    def zeros(cls, points: int = 64) -> "WeightCandidate":
        Y, q = gauss_legendre(points, 0.0, OMEGA_PLUS)
        return cls(Y, np.zeros(points), q)

    def l1(self) -> float:
        """∫_{Ω⁺} |V| dY"""
        return float(self.weights @ np.abs(self.values))

    def unfolded(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        奇延拓到 Ω：W(-Y) = -W(Y)，W = V/(2i)

        Returns:
            (Y, W, 求积权)，Y 递增
        """
        W = self.values / 2j
        Y = np.concatenate([-self.Y[::-1], self.Y])
        return Y, np.concatenate([-W[::-1], W]), np.concatenate([self.weights[::-1], self.weights])


def delta_exp_2iY(Y):
    """δ(exp 2iY) = e^{4iY} - e^{-4iY} = 2i·sin 4Y"""
    Y = np.asarray(Y, dtype=float)
    return np.exp(4j * Y) - np.exp(-4j * Y)


def unfolded_weight(w: Callable, Y) -> np.ndarray:
    """W_t(Y) = δ(exp 2iY)⁻¹·w_t(Y)，Y 可正可负（不含 0）"""
    Y = np.asarray(Y, dtype=float)
    return np.asarray(w(Y), dtype=complex) / delta_exp_2iY(Y)


def weight_from_w(w: Callable, points: int = 64) -> WeightCandidate:
    """由偶函数 w_t 构造候选 V = w_t/sin 4Y（Gauss 节点）"""
    Y, q = gauss_legendre(points, 0.0, OMEGA_PLUS)
    return WeightCandidate(Y, np.asarray(w(Y), dtype=float) / np.sin(4.0 * Y), q)


def harish_chandra_form(mu, Y):
    """
    c(λ)/δ(exp 2iY)·Σ_w ε(w)·e^{λ(w·2iY)}，λ = iμ，log a = 2iY·H₀

    应等于 φ_λ(exp 2iY) = sinh(4μY)/(μ·sin 4Y)
    """
    mu, Y = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(Y, dtype=float))
    exponent = 1j * mu * 2.0 * (2j * Y)
    alternating = np.exp(exponent) - np.exp(-exponent)
    value = harish_chandra_c(Model.SL2C, mu) * alternating / delta_exp_2iY(Y)
    return value[()] if value.ndim == 0 else value


# ==================== 谱恒等式残差 ====================

def _log_lhs(t: float, mu: np.ndarray) -> np.ndarray:
    return 2.0 * t * (mu ** 2 + 1.0)


def _scaled_matrix(t: float, mu: np.ndarray, W: WeightCandidate) -> np.ndarray:
    """M[i, j] = q_j·sinh(4μ_iY_j)/μ_i / e^{2t(μ_i²+1)}，按对数计算"""
    mu = np.asarray(mu, dtype=float)[:, None]
    x = 4.0 * mu * W.Y[None, :]
    log_l = _log_lhs(t, mu)
    safe_mu = np.where(mu > 0, mu, 1.0)
    scaled = np.exp(x - log_l) * (-np.expm1(-2.0 * x)) / (2.0 * safe_mu)
    scaled = np.where(mu > 0, scaled, 4.0 * W.Y[None, :] * np.exp(-log_l))
    return scaled * W.weights[None, :]


def weight_equation_rhs(mu, W: WeightCandidate) -> np.ndarray:
    """∫_{Ω⁺} φ_λ(exp 2iY)·w_t(Y) dY = ∫ sinh(4μY)/μ·V dY"""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    x = 4.0 * mu[:, None] * W.Y[None, :]
    kernel = np.where(mu[:, None] > 0, np.sinh(x) / np.where(mu[:, None] > 0, mu[:, None], 1.0),
                      4.0 * W.Y[None, :])
    return kernel @ (W.weights * W.values)


def unfolded_rhs(mu, W: WeightCandidate) -> np.ndarray:
    """展开形式 ∫_Ω c(λ)·e^{λ(i2Y)}·W_t(Y) dY，μ > 0"""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    Y, values, q = W.unfolded()
    phase = np.exp(1j * mu[:, None] * 2.0 * (2j * Y[None, :]))
    return harish_chandra_c(Model.SL2C, mu) * (phase @ (q * values))


def weight_equation_residual(t: float, W: WeightCandidate, mu_grid: Sequence[float]) -> float:
    """
    sup_μ |e^{2t(μ²+1)} - RHS(μ)| / e^{2t(μ²+1)}

    W = 0 时为 1
    """
    _check_t(t)
    mu = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    ratio = _scaled_matrix(t, mu, W) @ W.values
    return float(np.max(np.abs(1.0 - ratio)))


def fit_weight(t: float, y_points: int = 64, fit_band: Tuple[float, float] = FIT_BAND,
               mu_points: int = 64) -> Tuple[WeightCandidate, float]:
    """
    拟合带上按相对误差的最小二乘候选权（最小范数解）

    Returns:
        (候选权, 拟合带上的归一化残差)
    """
    _check_t(t)
    lo, hi = fit_band
    if not 0.0 <= lo < hi:
        raise ValueError(f"拟合带无效: {fit_band}")
    template = WeightCandidate.zeros(y_points)
    mu = np.linspace(lo, hi, mu_points)
    A = _scaled_matrix(t, mu, template)
    condition = float(np.linalg.cond(A))
    if condition > COND_WARN:
        logger.warning(f"[WARNING] 权方程病态: cond(A) = {condition:.2e}")
    values, *_ = np.linalg.lstsq(A, np.ones(mu_points), rcond=None)
    candidate = WeightCandidate(template.Y, values, template.weights)
    residual = weight_equation_residual(t, candidate, mu)
    logger.info(f"[QUAD] 权方程拟合 t={t} 带 [{lo}, {hi}] Y 点数 {y_points}: rel={residual:.2e}")
    return candidate, residual


def holdout_grid(t: float, points: int = 256) -> np.ndarray:
    """外推带 (4, max(12, 2μ*)]"""
    mu_star, _ = growth_mismatch_certificate(t)
    end = max(HOLDOUT_MIN_END, 2.0 * mu_star)
    return np.linspace(HOLDOUT_START, end, points + 1)[1:]


# ==================== 增长证书 ====================

def log_envelope(mu) -> np.ndarray:
    """log(sinh(πμ)/μ)：∫|V| = 1 时 |RHS(μ)| 的上界；μ = 0 处为 log π"""
    mu = np.asarray(mu, dtype=float)
    x = math.pi * mu
    safe = np.where(mu > 0, mu, 1.0)
    value = np.where(mu > 0, x + np.log1p(-np.exp(-2.0 * np.where(mu > 0, x, 1.0))) - math.log(2.0)
                     - np.log(safe), math.log(math.pi))
    return value[()] if value.ndim == 0 else value


def log_growth_ratio(t: float, mu) -> np.ndarray:
    """log(e^{2t(μ²+1)} / 包络)"""
    _check_t(t)
    mu = np.asarray(mu, dtype=float)
    return _log_lhs(t, mu) - log_envelope(mu)


def growth_mismatch_certificate(t: float, ratio_target: float = RATIO_TARGET,
                                mu_step: float = 0.01) -> Tuple[float, float]:
    """
    左端 e^{2t(μ²+1)} 与包络 sinh(πμ)/μ·∫|V| 之比首次达到 ratio_target 的网格点 μ*

    只在比值的极小点 μ_turn 之后搜索（其后比值严格递增）

    Returns:
        (μ*, 比值)
    """
    _check_t(t)
    target = math.log(ratio_target)
    bound = (math.pi + math.sqrt(math.pi ** 2 + 8.0 * t * target)) / (4.0 * t)
    mu = mu_step * np.arange(int(math.ceil((2.0 * bound + 1.0) / mu_step)) + 1)
    log_ratio = log_growth_ratio(t, mu)
    turn = int(np.argmin(log_ratio))
    hits = np.flatnonzero(log_ratio[turn:] >= target)
    index = turn + int(hits[0])
    mu_star = float(mu[index])
    logger.info(f"[OK] 增长证书 t={t}: μ_turn={mu[turn]:.2f} μ*={mu_star:.2f} "
                f"比值 10^{log_ratio[index] / math.log(10.0):.2f}")
    return mu_star, float(math.exp(log_ratio[index]))


def mu_turn(t: float, mu_step: float = 0.01, mu_max: Optional[float] = None) -> float:
    """比值 e^{2t(μ²+1)}/包络 的网格极小点"""
    _check_t(t)
    mu_max = mu_max or (math.pi / (2.0 * t) + 2.0)
    mu = mu_step * np.arange(int(math.ceil(mu_max / mu_step)) + 1)
    return float(mu[int(np.argmin(log_growth_ratio(t, mu)))])
