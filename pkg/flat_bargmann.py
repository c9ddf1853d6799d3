"""
直线上的热核变换与 Bargmann 空间

k_t 及其整函数延拓、H_t f = (f∗k_t)^∼、再生核 k_{2t}^∼(z - w̄)、Bargmann 权 w_t(y)，
以及带状区域上平移不变权不存在性的最小二乘证书。

约定:
  直线网格 x_j = -L + j·h（j = 0..N，含两端点），梯形求积
  默认 L = 100√t，N = 4096
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, signal

from special_functions import CrownheatError, QuadratureWindowError

logger = logging.getLogger(__name__)

DEFAULT_INTERVALS = 4096
EDGE_MASS_TOL = 1e-10
EDGE_SIGMAS = 5.0
WINDOW_TOL = 1e-12
PG_ITERATIONS = 10_000
COND_WARN = 1e12


class EdgeMassError(CrownheatError):
    """函数在网格边缘 5√t 内仍有不可忽略的质量"""


def _check_t(t: float):
    if not t > 0:
        raise ValueError(f"t 必须为正: {t}")


def default_line_grid(t: float) -> Tuple[float, float]:
    """(L, h)：L = 100√t，2L/h = 4096"""
    _check_t(t)
    half = 100.0 * math.sqrt(t)
    return half, 2.0 * half / DEFAULT_INTERVALS


@dataclass
class LineFunction:
    """均匀网格 [-L, L]（步长 h）上的采样"""
    samples: np.ndarray
    half_width: float
    step: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.half_width <= 0 or self.step <= 0:
            raise ValueError("L 与 h 必须为正")
        intervals = 2.0 * self.half_width / self.step
        if abs(intervals - round(intervals)) > 1e-9 * intervals:
            raise ValueError(f"2L/h = {intervals} 不是整数")
        if self.samples.shape != (int(round(intervals)) + 1,):
            raise ValueError(f"采样长度 {self.samples.shape} 与网格不符")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("采样含非有限值")

    @classmethod
    def from_callable(cls, func: Callable, half_width: float, step: float) -> "LineFunction":
        count = int(round(2.0 * half_width / step)) + 1
        x = -half_width + step * np.arange(count)
        return cls(func(x), half_width, step)

    @classmethod
    def for_time(cls, func: Callable, t: float) -> "LineFunction":
        """在 t 的默认网格上采样"""
        return cls.from_callable(func, *default_line_grid(t))

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(self.samples.size)

    def _trapezoid(self, values: np.ndarray) -> float:
        return float(self.step * (values.sum() - 0.5 * (values[0] + values[-1])))

    def norm2(self) -> float:
        """梯形法 ‖f‖²"""
        return self._trapezoid(np.abs(self.samples) ** 2)

    def check_edge_mass(self, t: float):
        """
        Raises:
            EdgeMassError: 距边缘 5√t 内的质量占比超过 1e-10
        """
        density = np.abs(self.samples) ** 2
        total = density.sum()
        near_edge = np.abs(self.x) > self.half_width - EDGE_SIGMAS * math.sqrt(t)
        outer = density[near_edge].sum()
        if total > 0 and outer > EDGE_MASS_TOL * total:
            raise EdgeMassError(f"边缘 {EDGE_SIGMAS}√t 内质量占比 {outer / total:.2e}")


@dataclass
class StripFunction:
    """
    矩形网格 (x, y) 上的复值采样，values[i, j] = F(x_j + i·y_i)

    gamma 为带宽；None 表示整个复平面上的网格
    """
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    gamma: Optional[float] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.y.size, self.x.size):
            raise ValueError(f"values 形状 {self.values.shape} 与网格 ({self.y.size}, {self.x.size}) 不符")
        if self.gamma is not None:
            if self.gamma <= 0:
                raise ValueError("γ 必须为正")
            if np.any(np.abs(self.y) >= self.gamma):
                raise ValueError("带状网格的 |y| 必须小于 γ")

    def row(self, y: float) -> np.ndarray:
        hits = np.flatnonzero(self.y == y)
        if hits.size == 0:
            raise ValueError(f"网格不含 y = {y}")
        return self.values[int(hits[0])]


def flat_heat_kernel(t: float, x):
    """k_t(x) = (4πt)^{-1/2}·e^{-x²/4t}"""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    value = np.exp(-x * x / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return float(value) if value.ndim == 0 else value


def flat_heat_kernel_c(t: float, z):
    """整函数延拓 k_t^∼(z) = (4πt)^{-1/2}·e^{-z²/4t}"""
    _check_t(t)
    z = np.asarray(z, dtype=complex)
    value = np.exp(-z * z / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return complex(value) if value.ndim == 0 else value


def flat_transform(f: LineFunction, t: float, ygrid: Sequence[float],
                   gamma: Optional[float] = None) -> StripFunction:
    """
    H_t f(x + iy) = ∫ f(u)·k_t^∼(x + iy - u) du，x 取 f 的网格

    每个 y 行为 f 与延拓核的 FFT 卷积（核长 2N-1，'same' 输出与网格逐点对齐）

    Raises:
        EdgeMassError: f 在边缘附近有质量
    """
    _check_t(t)
    f.check_edge_mass(t)
    n = f.samples.size
    u = f.step * np.arange(-(n - 1), n)
    ygrid = np.atleast_1d(np.asarray(ygrid, dtype=float))
    rows = np.empty((ygrid.size, n), dtype=complex)
    for i, y in enumerate(ygrid):
        kernel = flat_heat_kernel_c(t, u + 1j * y)
        rows[i] = f.step * signal.fftconvolve(f.samples, kernel, mode="same")
    logger.debug(f"[QUAD] 直线热核变换 t={t} 网格 {ygrid.size}×{n}")
    return StripFunction(f.x, ygrid, rows, gamma)


def flat_point_eval(f: LineFunction, t: float, w: complex) -> complex:
    """H_t f(w) = ⟨f, conj(k_t^∼(w - ·))⟩ 的直接求和"""
    values = f.samples * flat_heat_kernel_c(t, complex(w) - f.x)
    return complex(f.step * (values.sum() - 0.5 * (values[0] + values[-1])))


def flat_repro_kernel(t: float, z, w):
    """𝒦^t(z, w) = k_{2t}^∼(z - w̄) = (8πt)^{-1/2}·e^{-(z-w̄)²/8t}"""
    return flat_heat_kernel_c(2.0 * t, np.asarray(z, dtype=complex) - np.conj(np.asarray(w, dtype=complex)))


def bargmann_weight(t: float, y):
    """w_t(y) = (2πt)^{-1/2}·e^{-y²/2t}"""
    _check_t(t)
    y = np.asarray(y, dtype=float)
    value = np.exp(-y * y / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    return float(value) if value.ndim == 0 else value


def bargmann_ygrid(t: float, sigma: float, n_sigma: float = 9.0, step: Optional[float] = None) -> np.ndarray:
    """
    Bargmann 积分的 y 网格

    宽 σ 的 Gauss 型 f 的 y-边缘分布方差为 t(2t+σ²)/σ²，取 ±n_sigma 个标准差、步长 √t/4
    """
    _check_t(t)
    half = n_sigma * math.sqrt(t * (2.0 * t + sigma ** 2)) / sigma
    step = step or math.sqrt(t) / 4.0
    count = int(math.ceil(half / step))
    return step * np.arange(-count, count + 1)


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    step = grid[1] - grid[0]
    weights = np.full(grid.size, step)
    weights[[0, -1]] = step / 2.0
    return weights


def bargmann_inner(F: StripFunction, G: StripFunction, t: float) -> complex:
    """⟨F, G⟩ = ∫∫ F·conj(G)·w_t(y) dx dy（同一网格）"""
    if F.values.shape != G.values.shape or not np.array_equal(F.y, G.y):
        raise ValueError("F 与 G 的网格不一致")
    rows = (F.values * np.conj(G.values)) @ _trapezoid_weights(F.x)
    return complex(np.sum(_trapezoid_weights(F.y) * bargmann_weight(t, F.y) * rows))


def flat_bargmann_norm(F: StripFunction, t: float) -> float:
    """
    ∫_ℂ |F(x+iy)|²·w_t(y) dx dy

    Raises:
        QuadratureWindowError: y 窗口端点处的边缘分布超过总量的 1e-12
    """
    marginal = bargmann_weight(t, F.y) * ((np.abs(F.values) ** 2) @ _trapezoid_weights(F.x))
    total = float(np.sum(_trapezoid_weights(F.y) * marginal))
    if total == 0.0:
        return 0.0
    edge = max(marginal[0], marginal[-1]) * math.sqrt(t)
    if edge > WINDOW_TOL * total:
        raise QuadratureWindowError(f"y 窗口截断处边缘质量 {edge / total:.2e} > {WINDOW_TOL:.0e}")
    return total


def cauchy_riemann_residual(values: np.ndarray, h: float) -> float:
    """
    四阶中心差分下 |∂_x F + i∂_y F| 与 |∂_x F| 的最大值之比

    values[i, j] = F(x_j + i·y_i)，x 与 y 方向步长均为 h
    """
    values = np.asarray(values, dtype=complex)

    def d4(a, axis):
        a = np.moveaxis(a, axis, 0)
        out = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / (12.0 * h)
        return np.moveaxis(out, 0, axis)

    dx = d4(values, 1)[2:-2, :]
    dy = d4(values, 0)[:, 2:-2]
    return float(np.abs(dx + 1j * dy).max() / np.abs(dx).max())


def gauss_hermite_family(t: float, count: int = 10, seed: int = 0) -> List[LineFunction]:
    """
    测试族 He_n((x-c)/σ)·e^{-(x-c)²/2σ²}，n <= 2，σ ∈ [0.8, 1.2]，c ∈ [-2, 2]
    """
    rng = np.random.default_rng(seed)
    family = []
    for k in range(count):
        order = k % 3
        sigma = rng.uniform(0.8, 1.2)
        centre = rng.uniform(-2.0, 2.0)
        coeffs = np.zeros(order + 1)
        coeffs[order] = 1.0

        def func(x, c=coeffs, s=sigma, m=centre):
            u = (x - m) / s
            return hermite_e.hermeval(u, c) * np.exp(-u * u / 2.0)

        family.append(LineFunction.for_time(func, t))
    return family


def strip_kernel_factorization(t: float, x, v) -> Tuple[np.ndarray, np.ndarray]:
    """
    k_{4t}^∼(x - 2iv) 与 k_{4t}(x)·e^{ixv/4t}·e^{v²/4t}（两者应相等）
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    lhs = flat_heat_kernel_c(4.0 * t, x - 2j * v)
    rhs = flat_heat_kernel(4.0 * t, x) * np.exp(1j * x * v / (4.0 * t)) * np.exp(v * v / (4.0 * t))
    return lhs, rhs


def _strip_matrix(t: float, v: np.ndarray, dv: float, y: np.ndarray) -> np.ndarray:
    """实部行 cos(yv)、虚部行 sin(yv)，列带 e^{v²/4t}·dv"""
    scale = np.exp(v * v / (4.0 * t)) * dv
    phase = np.outer(y, v)
    return np.vstack([np.cos(phase) * scale, np.sin(phase) * scale])


def strip_fit_residual(t: float, weights: np.ndarray, v: np.ndarray, ygrid) -> float:
    """‖∫ e^{iyv} e^{v²/4t} w(v) dv - e^{-ty²}‖₂（y 网格上，未归一化）"""
    ygrid = np.asarray(ygrid, dtype=float)
    dv = v[1] - v[0] if v.size > 1 else 1.0
    A = _strip_matrix(t, v, dv, ygrid)
    b = np.concatenate([np.exp(-t * ygrid ** 2), np.zeros(ygrid.size)])
    return float(np.linalg.norm(A @ weights - b))


def projected_gradient_nnls(A: np.ndarray, b: np.ndarray, iterations: int = PG_ITERATIONS) -> np.ndarray:
    """min ‖Ax - b‖ s.t. x >= 0；Nesterov 加速的投影梯度，固定迭代次数"""
    lipschitz = np.linalg.norm(A, 2) ** 2
    if lipschitz == 0.0:
        return np.zeros(A.shape[1])
    x = np.zeros(A.shape[1])
    z = x.copy()
    momentum = 1.0
    for _ in range(iterations):
        x_next = np.maximum(0.0, z - (A.T @ (A @ z - b)) / lipschitz)
        momentum_next = (1.0 + math.sqrt(1.0 + 4.0 * momentum ** 2)) / 2.0
        z = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x)
        x, momentum = x_next, momentum_next
    return x


@dataclass
class StripFitCertificate:
    """
    带状权拟合的失配证书

    mismatch(y) = √(∫_{Y₁}^{y} |R|²)·e^{ty²}，R 为外推带上的残差；严格递增且无界
    holdout_residual = ‖R‖/(‖RHS‖ + ‖e^{-ty²}‖)，取值于 [0, 1]
    """
    t: float
    gamma: float
    fit_residual: float
    holdout_y: np.ndarray
    mismatch: np.ndarray
    log10_mismatch: np.ndarray
    holdout_residual: float
    condition: float
    v: np.ndarray
    weights: np.ndarray
    diagnostics: List[str] = field(default_factory=list)

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.log10_mismatch) > 0))

    @property
    def passed(self) -> bool:
        """外推带残差 >= 0.9，末端失配 >= 10³ × 拟合残差，且严格递增"""
        return (self.holdout_residual >= 0.9 and self.increasing
                and self.log10_mismatch[-1] >= 3.0 + math.log10(max(self.fit_residual, 1e-300)))

    def rows(self) -> List[dict]:
        return [{"y": float(y), "log10_mismatch": float(m)} for y, m in zip(self.holdout_y, self.log10_mismatch)]


def strip_weight_fit(t: float, gamma: float, ygrid: Optional[Sequence[float]] = None,
                     candidate_dim: int = 64, y_fit: float = 5.0, y_holdout: float = 15.0,
                     holdout_points: int = 100, iterations: int = PG_ITERATIONS
                     ) -> Tuple[float, StripFitCertificate]:
    """
    e^{-ty²} ≈ ∫_{-γ}^{γ} e^{iyv}·e^{v²/4t}·w(v) dv（w >= 0，常数并入 w）的非负最小二乘拟合

    w 取 (-γ, γ) 上 candidate_dim 个中点；右端关于 y 是带限函数，无法在外推带 (Y₁, Y₂]
    上复现 Gauss 衰减，失配随 y 无界增长。

    Args:
        t: 时间
        gamma: 带宽 γ
        ygrid: 拟合带采样（默认 [0, Y₁] 上 256 点）
        candidate_dim: v 网格点数
        y_fit: Y₁
        y_holdout: Y₂
        holdout_points: 外推点数
        iterations: 投影梯度迭代次数

    Returns:
        (拟合带归一化残差, 证书)
    """
    _check_t(t)
    if gamma <= 0:
        raise ValueError(f"γ 必须为正: {gamma}")
    if not 0 < y_fit < y_holdout:
        raise ValueError("需要 0 < Y₁ < Y₂")
    ygrid = np.linspace(0.0, y_fit, 256) if ygrid is None else np.asarray(ygrid, dtype=float)
    dv = 2.0 * gamma / candidate_dim
    v = -gamma + dv * (np.arange(candidate_dim) + 0.5)

    A = _strip_matrix(t, v, dv, ygrid)
    b = np.concatenate([np.exp(-t * ygrid ** 2), np.zeros(ygrid.size)])
    condition = float(np.linalg.cond(A))
    diagnostics = []
    if condition > COND_WARN:
        message = f"法方程病态: cond(A) = {condition:.2e}"
        logger.warning(f"[WARNING] {message}")
        diagnostics.append(message)

    weights = projected_gradient_nnls(A, b, iterations)
    fit_residual = float(np.linalg.norm(A @ weights - b) / np.linalg.norm(b))

    # 外推带上的累积残差
    dense = np.linspace(y_fit, y_holdout, 16 * holdout_points + 1)
    P = _strip_matrix(t, v, dv, dense)
    rhs = P @ weights
    target = np.concatenate([np.exp(-t * dense ** 2), np.zeros(dense.size)])
    residual = rhs - target
    power = residual[:dense.size] ** 2 + residual[dense.size:] ** 2
    cumulative = integrate.cumulative_trapezoid(power, dense, initial=0.0)
    picks = np.arange(16, dense.size, 16)
    holdout_y = dense[picks]
    with np.errstate(divide="ignore"):
        log10_mismatch = 0.5 * np.log10(cumulative[picks]) + t * holdout_y ** 2 / math.log(10.0)
    mismatch = 10.0 ** np.minimum(log10_mismatch, 300.0)
    holdout_residual = float(np.linalg.norm(residual) / (np.linalg.norm(rhs) + np.linalg.norm(target)))

    certificate = StripFitCertificate(t, gamma, fit_residual, holdout_y, mismatch, log10_mismatch,
                                      holdout_residual, condition, v, weights, diagnostics)
    tag = "[OK]" if certificate.passed else "[FAIL]"
    logger.info(f"{tag} 带状权拟合 t={t} γ={gamma}: 拟合残差 rel={fit_residual:.2e} "
                f"外推残差 {holdout_residual:.3f} 末端失配 10^{log10_mismatch[-1]:.1f}")
    return fit_residual, certificate
