"""
冠的极大性实验（SL(2,ℝ)）

沿 σ 曲线 s ↦ γ(s)·exp(iY)·x_o（Y ∈ 2Ω∖Ω̄）追踪 φ_λ = Φ_λ(σ(s)/2)：
σ(s) 从 2 严格递减到 -2，Φ_λ 为正并在 s ↗ 1 时因 Legendre 函数在 -1 处的
对数奇点而发散，故球函数不能全纯延拓到越过 G·exp(i(2Ω∖Ω̄))·x_o 的区域。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hyperbolic_models import (
    DomainError,
    Model,
    a_element,
    boundary_curve_sigma,
    crown_point,
    in_hat_domain,
    p_function,
    random_group_element,
    sigma_curve_point,
)
from special_functions import CrownheatError, legendre_conical
from spherical_spectral import phi_real

logger = logging.getLogger(__name__)

S_MAX = 1.0 - 1e-4
CUT_PROXIMITY = 1e-6
REAL_TOL = 1e-10
BLOWUP_FACTOR = 1e3
LADDER_K_MAX = 13
ENDPOINT_TOL = 1e-10


class CutProximityError(CrownheatError):
    """σ(s)/2 距 -1 小于 1e-6"""


@dataclass
class CurveScan:
    """
    σ 曲线扫描结果

    sigma 实值（虚部 <= 1e-10）、严格递减且位于 (-2, 2]；values[i] = Φ_λ(sigma[i]/2)
    """
    mu: float
    phi: float
    sgrid: np.ndarray
    sigma: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.sgrid = np.asarray(self.sgrid, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=complex)
        self.values = np.asarray(self.values, dtype=complex)
        if not (self.sgrid.shape == self.sigma.shape == self.values.shape):
            raise ValueError("sgrid、sigma、values 长度不一致")
        if np.any(np.abs(self.sigma.imag) > REAL_TOL):
            raise ValueError("σ 不是实值")
        real = self.sigma.real
        if np.any(np.diff(real) >= 0):
            raise ValueError("σ 不是严格递减")
        if np.any(real <= -2.0) or np.any(real > 2.0 + REAL_TOL):
            raise ValueError("σ 超出 (-2, 2]")

    @property
    def positive(self) -> bool:
        return bool(np.all(self.values.real > 0))

    @property
    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.values.real) > 0))

    @property
    def growth(self) -> float:
        """末值与首值之比"""
        return float(self.values[-1].real / self.values[0].real)

    @property
    def diverging(self) -> bool:
        """单调递增、为正且末值超过首值的 10³ 倍"""
        return self.positive and self.increasing and self.growth > BLOWUP_FACTOR

    def rows(self) -> List[Dict[str, float]]:
        return [{"s": float(s), "sigma": float(sig.real), "phi": float(v.real)}
                for s, sig, v in zip(self.sgrid, self.sigma, self.values)]


def phi_along_curve(mu: float, phi: float, sgrid: Sequence[float]) -> CurveScan:
    """
    Φ_λ(σ(s)/2) = P_{-1/2+iμ}(σ(s)/2) 沿 σ 曲线

    Args:
        mu: 谱参数 μ >= 0
        phi: π/4 < φ < π/2
        sgrid: [0, 1 - 1e-4] 内递增的 s

    Raises:
        DomainError: φ 或 s 越界
        CutProximityError: σ(s)/2 距 -1 小于 1e-6
    """
    sgrid = np.asarray(sgrid, dtype=float)
    if np.any(sgrid < 0.0) or np.any(sgrid > S_MAX):
        raise DomainError(f"s 必须位于 [0, {S_MAX}] 内")
    sigma = np.array([boundary_curve_sigma(phi, float(s)) for s in sgrid], dtype=complex)
    half = sigma.real / 2.0
    close = np.abs(half + 1.0) < CUT_PROXIMITY
    if np.any(close):
        s_bad = float(sgrid[np.flatnonzero(close)[0]])
        raise CutProximityError(f"s={s_bad}: σ/2 + 1 = {half[close][0] + 1.0:.2e}")
    values = np.atleast_1d(legendre_conical(mu, half))
    scan = CurveScan(mu, phi, sgrid, sigma, values)
    if not scan.positive:
        logger.warning(f"[WARNING] μ={mu} φ={phi:.4f}: 曲线上出现非正值")
    return scan


def ladder_scan(mu: float, phi: float, k_max: int = LADDER_K_MAX) -> CurveScan:
    """几何阶梯 s_k = 1 - 2^{-k}，k = 0..k_max"""
    sgrid = 1.0 - 2.0 ** -np.arange(k_max + 1, dtype=float)
    scan = phi_along_curve(mu, phi, sgrid)
    tag = "[OK]" if scan.diverging else "[FAIL]"
    logger.info(f"{tag} 阶梯扫描 μ={mu} φ={phi:.4f}: Φ 增长 {scan.growth:.3e}（阈值 {BLOWUP_FACTOR:.0e}）")
    return scan


def extended_sigma_point(phi: float, s: float) -> complex:
    """s > 1 时沿同一族延伸的 σ(s) < -2"""
    if s <= 1.0:
        raise DomainError(f"延伸段需要 s > 1: {s}")
    return p_function(sigma_curve_point(phi, s, allow_extension=True))


def factorization_check(mu: float, r: float) -> Tuple[float, float]:
    """
    φ_λ(a_r·x_o)（K-积分）与 Φ_λ(P(a_r·x_o)/2)

    Returns:
        (K-积分值, Φ_λ∘P)
    """
    direct = phi_real(Model.SL2R, mu, r, method="k_integral")
    via_p = p_function(crown_point(Model.SL2R, a_element(Model.SL2R, r)))
    return float(direct), float(np.real(legendre_conical(mu, via_p / 2.0)))


@dataclass
class InclusionReport:
    """冠包含扫描报告"""
    samples: int
    inside_omega: float
    inside_2omega: float
    boundary_min_re_p: float
    endpoint_sigma: Dict[float, complex] = field(default_factory=dict)
    endpoint_on_boundary: bool = True
    extension_below: bool = True

    @property
    def passed(self) -> bool:
        return (self.inside_omega == 1.0 and self.inside_2omega == 1.0 and self.boundary_min_re_p > 0
                and self.endpoint_on_boundary and self.extension_below)


def crown_inclusion_scan(nsamples: int, seed: int = 0,
                         phis: Optional[Sequence[float]] = None,
                         boundary_gap: float = 1e-3) -> InclusionReport:
    """
    (i) Y ∈ Ω 的随机样本 g·exp(iY)·x_o 全部落在 X̂_{ℂ,Ω} 与 X̂_{ℂ,2Ω} 内；
    (ii) Y = φ ∈ 2Ω∖Ω̄ 时 σ 曲线在 s = 1 处到达 P = -2（X̂_{ℂ,2Ω} 的边界），延伸段 P < -2；
    (iii) |Y| = π/4 - boundary_gap 时样本上 Re P 的最小值仍为正。

    Args:
        nsamples: 冠样本数
        seed: 随机种子
        phis: (ii) 中的 φ，默认 3π/8 与 (π/4, π/2) 内的若干点
        boundary_gap: (iii) 中到 ∂Ω 的距离
    """
    if nsamples <= 0:
        raise ValueError("nsamples 必须为正")
    rng = np.random.default_rng(seed)
    half = math.pi / 4.0
    inside_omega = inside_2omega = 0
    boundary_min = math.inf
    for _ in range(nsamples):
        g = random_group_element(Model.SL2R, rng)
        z = crown_point(Model.SL2R, g, 1j * rng.uniform(-half, half))
        inside_omega += in_hat_domain(z, "omega")
        inside_2omega += in_hat_domain(z, "2omega")
        edge = crown_point(Model.SL2R, g, 1j * rng.choice([-1.0, 1.0]) * (half - boundary_gap))
        boundary_min = min(boundary_min, p_function(edge).real)

    phis = list(phis) if phis is not None else [3.0 * math.pi / 8.0, 0.3 * math.pi, 0.45 * math.pi]
    endpoint_sigma = {}
    endpoint_on_boundary = extension_below = True
    for phi in phis:
        end = sigma_curve_point(phi, 1.0)
        endpoint_sigma[phi] = p_function(end)
        # σ(1) = -2：端点落在 X̂_{ℂ,2Ω} 的边界 P ∈ (-∞, -2] 上
        endpoint_on_boundary &= abs(endpoint_sigma[phi] + 2.0) <= ENDPOINT_TOL
        extension_below &= extended_sigma_point(phi, 1.05).real < -2.0

    report = InclusionReport(nsamples, inside_omega / nsamples, inside_2omega / nsamples,
                             float(boundary_min), endpoint_sigma, endpoint_on_boundary, extension_below)
    tag = "[OK]" if report.passed else "[FAIL]"
    logger.info(f"{tag} 冠包含扫描: {nsamples} 个样本 Ω 内占比 {report.inside_omega:.4f}，"
                f"2Ω 内占比 {report.inside_2omega:.4f}，边界 min Re P = {boundary_min:.3e}")
    return report
