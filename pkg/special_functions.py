"""
特殊函数模块 - 复Γ函数、digamma、超几何级数与锥Legendre函数
所有运算均为纯函数，支持numpy广播
"""

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)


class CrownheatError(Exception):
    """整个包的异常基类"""


class GammaPoleError(CrownheatError):
    """Γ函数在非正整数处的极点"""


class BranchCutError(CrownheatError):
    """参数落在(或过于接近)割线 (-∞, -1] 上"""


class ConvergenceError(CrownheatError):
    """级数或变换未能在给定项数内收敛"""


class QuadratureWindowError(CrownheatError):
    """高斯尾部截断后遗漏的质量过大"""


# Lanczos 系数 (g=7, n=9)
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61503916999185,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_EULER_GAMMA = 0.57721566490153286061
_CUT_DISTANCE = 1e-6


def _check_gamma_poles(z: np.ndarray):
    near_int = np.isclose(z.real, np.round(z.real), rtol=0.0, atol=1e-14)
    poles = (z.imag == 0) & near_int & (np.round(z.real) <= 0)
    if np.any(poles):
        raise GammaPoleError(f"Γ(z) 在非正整数处无定义: z={z[poles][0]}")


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    """Re z >= 0.5 半平面上的 Lanczos 对数Γ"""
    zm = z - 1.0
    x = np.full(zm.shape, _LANCZOS_COEFFS[0], dtype=complex)
    for i in range(1, len(_LANCZOS_COEFFS)):
        x = x + _LANCZOS_COEFFS[i] / (zm + i)
    tt = zm + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (zm + 0.5) * np.log(tt) - tt + np.log(x)


def loggamma_complex(z) -> np.ndarray:
    """
    复对数Γ函数（exp后等于Γ(z)，虚部不保证落在主值分支）

    Args:
        z: 复数或复数数组

    Returns:
        log Γ(z) 的某一分支
    """
    arr = np.asarray(z, dtype=complex)
    z = arr.ravel()
    _check_gamma_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _loggamma_right(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        # 反射公式 Γ(z)Γ(1-z) = π / sin(πz)
        out[left] = math.log(math.pi) - np.log(np.sin(np.pi * zl)) - _loggamma_right(1.0 - zl)
    return out.reshape(arr.shape)


def gamma_complex(z):
    """
    复Γ函数，|z| <= 50 时相对精度约 1e-12

    Args:
        z: 复数或复数数组

    Returns:
        Γ(z)，标量输入返回标量

    Raises:
        GammaPoleError: z 为非正整数
    """
    arr = np.asarray(z, dtype=complex)
    result = np.exp(loggamma_complex(arr))
    return result[()] if result.ndim == 0 else result


def digamma_complex(z):
    """
    复digamma函数 ψ(z) = Γ'(z)/Γ(z)

    递推到 Re z >= 10 后使用渐近级数，左半平面用反射公式。

    Args:
        z: 复数或复数数组

    Returns:
        ψ(z)
    """
    arr = np.asarray(z, dtype=complex)
    z = arr.ravel()
    _check_gamma_poles(z)
    left = z.real < 0.5
    zz = np.where(left, 1.0 - z, z)

    acc = np.zeros(z.shape, dtype=complex)
    shifts = np.maximum(0, np.ceil(10.0 - zz.real)).astype(int)
    for k in range(int(shifts.max(initial=0))):
        mask = shifts > k
        acc[mask] -= 1.0 / (zz[mask] + k)
    w = zz + shifts
    inv2 = 1.0 / (w * w)
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))))
    out = np.log(w) - 0.5 / w - series + acc

    if np.any(left):
        zl = z[left]
        out[left] = out[left] - np.pi / np.tan(np.pi * zl)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def hyp2f1_series(a, b, c, w, tol: float = 1e-16, max_terms: int = 400) -> np.ndarray:
    """
    高斯超几何级数 ₂F₁(a, b; c; w)，逐元素收敛判定

    Args:
        a, b, c: 参数（可广播）
        w: 自变量，要求 |w| < 1
        tol: 相对截断阈值
        max_terms: 最大项数

    Returns:
        级数和

    Raises:
        ConvergenceError: 在 max_terms 内未收敛
    """
    a, b, c, w = np.broadcast_arrays(
        np.asarray(a, dtype=complex), np.asarray(b, dtype=complex),
        np.asarray(c, dtype=complex), np.asarray(w, dtype=complex),
    )
    term = np.ones(w.shape, dtype=complex)
    total = term.copy()
    for n in range(max_terms):
        term = term * (a + n) * (b + n) / ((c + n) * (n + 1)) * w
        total = total + term
        if np.all(np.abs(term) <= tol * np.abs(total)) and n > 2:
            return total
    raise ConvergenceError(f"₂F₁ 级数在 {max_terms} 项内未收敛 (max|w|={np.abs(w).max():.3f})")


def _conical_log_case(mu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """c = a + b 退化情形：在 1-w = (1+x)/2 处展开的对数级数"""
    a = 0.5 + 1j * mu
    b = 0.5 - 1j * mu
    one_minus_w = (1.0 + x) / 2.0
    log_term = np.log(one_minus_w)
    psi_a = digamma_complex(a)
    psi_b = digamma_complex(b)
    psi_n1 = np.full(x.shape, -_EULER_GAMMA, dtype=complex)
    coeff = np.ones(x.shape, dtype=complex)
    power = np.ones(x.shape, dtype=complex)
    total = np.zeros(x.shape, dtype=complex)
    for n in range(600):
        term = coeff * (2.0 * psi_n1 - psi_a - psi_b - log_term) * power
        total = total + term
        if n > 3 and np.all(np.abs(term) <= 1e-16 * np.abs(total)):
            break
        coeff = coeff * (a + n) * (b + n) / ((n + 1.0) ** 2)
        psi_a = psi_a + 1.0 / (a + n)
        psi_b = psi_b + 1.0 / (b + n)
        psi_n1 = psi_n1 + 1.0 / (n + 1.0)
        power = power * one_minus_w
    else:
        raise ConvergenceError("锥Legendre对数级数未收敛")
    return np.cosh(np.pi * mu) / np.pi * total


def _conical_large_argument(mu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|x| >= 1.25：按 x^{-2} 展开的两项连接公式"""
    mu_eff = np.maximum(mu, 1e-6)
    inv2 = 1.0 / (x * x)
    total = np.zeros(x.shape, dtype=complex)
    for sign in (1.0, -1.0):
        m = sign * mu_eff
        log_coeff = loggamma_complex(1j * m) - loggamma_complex(0.5 + 1j * m)
        coeff = np.exp(log_coeff) / math.sqrt(math.pi)
        series = hyp2f1_series(0.25 - 0.5j * m, 0.75 - 0.5j * m, 1.0 - 1j * m, inv2, max_terms=800)
        total = total + coeff * np.power(2.0 * x, -0.5 + 1j * m) * series
    return total


def _distance_to_cut(x: np.ndarray) -> np.ndarray:
    return np.where(x.real <= -1.0, np.abs(x.imag), np.abs(x + 1.0))


def legendre_conical(mu, x):
    """
    锥Legendre函数 P_{-1/2+iμ}(x)，x ∈ ℂ∖(-∞, -1]

    分支选择（w = (1-x)/2）：
      1. |w| <= 0.7 且 (μ√|w| <= 3 或 |x| < 1.25)：w 级数
      2. |x| >= 1.25：大自变量 x^{-2} 展开
      3. |1-w| <= 0.7：对数情形连接公式
      4. 其余：|w| < 0.9 的加长 w 级数

    Args:
        mu: 实参数 μ >= 0（可为数组）
        x: 复自变量（可为数组）

    Returns:
        P_{-1/2+iμ}(x)，标量输入返回标量

    Raises:
        BranchCutError: x 距割线小于 1e-6
        ConvergenceError: 所有分支都不适用
    """
    mu_arr, x_arr = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(x, dtype=complex))
    mu_flat = np.abs(mu_arr.ravel())
    x_flat = x_arr.ravel()

    if np.any(_distance_to_cut(x_flat) < _CUT_DISTANCE):
        bad = x_flat[_distance_to_cut(x_flat) < _CUT_DISTANCE][0]
        raise BranchCutError(f"x={bad} 位于割线 (-∞,-1] 上或过近")

    out = np.empty(x_flat.shape, dtype=complex)
    done = np.zeros(x_flat.shape, dtype=bool)
    w = (1.0 - x_flat) / 2.0
    abs_w = np.abs(w)
    abs_x = np.abs(x_flat)

    series_mask = (abs_w <= 0.7) & ((mu_flat * np.sqrt(abs_w) <= 3.0) | (abs_x < 1.25))
    if np.any(series_mask):
        m = mu_flat[series_mask]
        out[series_mask] = hyp2f1_series(0.5 + 1j * m, 0.5 - 1j * m, 1.0, w[series_mask], max_terms=400)
        done |= series_mask

    large_mask = ~done & (abs_x >= 1.25)
    if np.any(large_mask):
        out[large_mask] = _conical_large_argument(mu_flat[large_mask], x_flat[large_mask])
        done |= large_mask

    log_mask = ~done & (np.abs(1.0 - w) <= 0.7)
    if np.any(log_mask):
        out[log_mask] = _conical_log_case(mu_flat[log_mask], x_flat[log_mask])
        done |= log_mask

    rest = ~done
    if np.any(rest):
        if np.any(abs_w[rest] >= 0.9):
            raise ConvergenceError(f"x={x_flat[rest][0]} 不在任何连接公式的收敛域内")
        m = mu_flat[rest]
        out[rest] = hyp2f1_series(0.5 + 1j * m, 0.5 - 1j * m, 1.0, w[rest], max_terms=1200)

    out = out.reshape(x_arr.shape)
    return out[()] if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _leggauss_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    [a, b] 上的 n 点 Gauss-Legendre 节点与权重（单位区间结果缓存）

    Args:
        n: 节点数
        a, b: 积分区间

    Returns:
        (nodes, weights)
    """
    nodes, weights = _leggauss_unit(int(n))
    half = 0.5 * (b - a)
    return half * nodes + 0.5 * (a + b), half * weights


def gaussian_psi_moment(t: float, mu: float, rho2: float, n: int = 1,
                        cutoff_sigmas: float = 12.0) -> Tuple[float, float]:
    """
    ∫ ψ_μ(i2y) w_t(y) dy = e^{2t(μ²+ρ²)} 的闭式与数值积分两种计算

    y 为度量坐标，ψ_μ(i2y) = 2cosh(2μy)，w_t 见 heat_transform.weight_w。
    被积函数等于以 2μt 为中心、方差 t 的高斯，因此窗口取 2μt ± cutoff_sigmas·√t。

    Args:
        t: 时间 t > 0
        mu: 谱参数 μ
        rho2: |ρ|²
        n: dim 𝔞，仅支持 1
        cutoff_sigmas: 窗口半宽（以 √t 为单位）

    Returns:
        (closed_form, quadrature)

    Raises:
        QuadratureWindowError: 窗口外遗漏的质量 > 1e-14
    """
    if t <= 0:
        raise ValueError(f"t 必须为正: {t}")
    if n != 1:
        raise ValueError("仅实现秩一情形 n = 1")
    tail = math.erfc(cutoff_sigmas / math.sqrt(2.0))
    if tail > 1e-14:
        raise QuadratureWindowError(f"截断 {cutoff_sigmas}√t 遗漏质量 {tail:.2e} > 1e-14")

    closed = math.exp(2.0 * t * (mu * mu + rho2))
    sqrt_t = math.sqrt(t)
    half_width = 2.0 * abs(mu) * t + cutoff_sigmas * sqrt_t
    h = sqrt_t / 4.0
    count = int(math.ceil(2.0 * half_width / h)) + 1
    y = np.linspace(-half_width, half_width, count)
    step = y[1] - y[0]
    log_w = math.log(0.5) + 2.0 * t * rho2 - 0.5 * math.log(2.0 * math.pi * t) - y * y / (2.0 * t)
    log_psi = np.logaddexp(2.0 * mu * y, -2.0 * mu * y)
    values = np.exp(log_w + log_psi)
    quad = float(step * (values.sum() - 0.5 * (values[0] + values[-1])))
    return closed, quad
