"""
双曲模型几何 - H² (SL(2,ℝ)) 与 H³ (SL(2,ℂ))
群元素、冠点(crown point)、边界点、horocycle 括号、KAK 哈尔密度、P 函数与 σ 曲线

坐标约定:
  a_r = diag(e^r, e^{-r})，测地距离 d(a_r·x_o, x_o) = 2r
  H₀ = diag(1, -1)，Ω = (-π/4, π/4)
  冠点以 Gram 矩阵 p 存储：H² 为 p = m·mᵀ，H³ 为 p = g·exp(2Z·H₀)·g†
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from special_functions import CrownheatError

logger = logging.getLogger(__name__)

H0 = np.diag([1.0, -1.0]).astype(complex)
DET_TOL = 1e-12
REP_TOL = 1e-10


class DecompositionError(CrownheatError):
    """b·z 落在 N_ℂA_ℂ·x_o 的边界上，Iwasawa 分量不存在"""


class CrownBoundaryError(CrownheatError):
    """|Y| 过于接近 π/4"""


class DomainError(CrownheatError):
    """参数超出定义域"""


class Model(Enum):
    """模型空间"""
    SL2R = "h2"
    SL2C = "h3"

    @property
    def rho2(self) -> float:
        """|ρ|²"""
        return 0.25 if self is Model.SL2R else 1.0

    @property
    def rho(self) -> float:
        return math.sqrt(self.rho2)

    @property
    def dim(self) -> int:
        return 2 if self is Model.SL2R else 3

    @classmethod
    def parse(cls, name) -> "Model":
        if isinstance(name, Model):
            return name
        key = str(name).strip().lower()
        aliases = {"h2": cls.SL2R, "sl2r": cls.SL2R, "h3": cls.SL2C, "sl2c": cls.SL2C}
        if key not in aliases:
            raise ValueError(f"未知模型: {name}")
        return aliases[key]


def _det_ok(m: np.ndarray) -> bool:
    scale = max(1.0, float(np.sum(np.abs(m) ** 2)))
    return abs(np.linalg.det(m) - 1.0) <= DET_TOL * scale


def exp_h0(z: complex) -> np.ndarray:
    """exp(z·H₀) = diag(e^z, e^{-z})"""
    return np.diag([np.exp(z), np.exp(-z)]).astype(complex)


@dataclass
class GroupElement:
    """G 中的元素（2×2 矩阵）"""
    m: np.ndarray
    model: Model

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=complex)
        if self.m.shape != (2, 2):
            raise ValueError(f"群元素必须是 2×2 矩阵: shape={self.m.shape}")
        if not _det_ok(self.m):
            raise ValueError(f"det m = {np.linalg.det(self.m)} ≠ 1")
        if self.model is Model.SL2R and np.max(np.abs(self.m.imag)) > DET_TOL:
            raise ValueError("SL(2,ℝ) 元素必须为实矩阵")

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.m @ other.m, self.model)

    def inverse(self) -> "GroupElement":
        a, b = self.m[0]
        c, d = self.m[1]
        return GroupElement(np.array([[d, -b], [-c, a]]), self.model)


@dataclass
class CrownPoint:
    """
    X_ℂ 中的点

    gram 为必需字段；rep 为陪集代表元；(g, Z) 仅在构造时已知才附带，
    Z = u + iY 表示 g·exp(Z·H₀)·x_o
    """
    model: Model
    gram: np.ndarray
    rep: Optional[np.ndarray] = None
    g: Optional[GroupElement] = None
    Z: Optional[complex] = None

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=complex)
        if not _det_ok(self.gram):
            raise ValueError(f"det p = {np.linalg.det(self.gram)} ≠ 1")
        if self.rep is not None:
            self.rep = np.asarray(self.rep, dtype=complex)
            if not _det_ok(self.rep):
                raise ValueError(f"det rep = {np.linalg.det(self.rep)} ≠ 1")
            if self.g is not None and self.Z is not None:
                expected = self.g.m @ exp_h0(self.Z)
                scale = max(1.0, float(np.max(np.abs(expected))))
                if np.max(np.abs(expected - self.rep)) > REP_TOL * scale:
                    raise ValueError("rep 与坐标 g·exp(Z·H₀) 不一致")

    @property
    def invariant(self) -> complex:
        """冠不变量 w = tr(p)/2；实点上 w = cosh(测地距离)"""
        return complex(np.trace(self.gram)) / 2.0


def identity(model: Model) -> GroupElement:
    return GroupElement(np.eye(2), model)


def a_element(model: Model, r: float) -> GroupElement:
    return GroupElement(exp_h0(r), model)


def k_rotation(theta: float) -> GroupElement:
    """SO(2) 中的旋转 k_θ；在圆盘模型中转过 2θ"""
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(np.array([[c, s], [-s, c]]), Model.SL2R)


def su2_element(quaternion) -> GroupElement:
    """单位四元数 (a, b, c, d) 对应的 SU(2) 元素"""
    a, b, c, d = np.asarray(quaternion, dtype=float) / np.linalg.norm(quaternion)
    m = np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
    return GroupElement(m, Model.SL2C)


def random_k(model: Model, rng: np.random.Generator) -> GroupElement:
    if model is Model.SL2R:
        return k_rotation(rng.uniform(0.0, 2.0 * math.pi))
    return su2_element(rng.standard_normal(4))


def random_group_element(model: Model, rng: np.random.Generator, r_max: float = 1.5) -> GroupElement:
    """KAK 形式的随机元素 k₁·a_r·k₂，r ∈ [0, r_max]"""
    return random_k(model, rng) @ a_element(model, rng.uniform(0.0, r_max)) @ random_k(model, rng)


def crown_omega(model: Model) -> Tuple[float, float]:
    """
    Ω 在 H₀ 坐标下的区间，两个模型相同

    Returns:
        (-π/4, π/4)，开区间
    """
    return (-math.pi / 4.0, math.pi / 4.0)


def omega_contains(model: Model, Y: float, scale: float = 1.0) -> bool:
    """Y ∈ scale·Ω（开区间）"""
    lo, hi = crown_omega(model)
    return scale * lo < Y < scale * hi


def crown_point(model: Model, g: Optional[GroupElement] = None, Z: complex = 0.0) -> CrownPoint:
    """
    由坐标构造冠点 g·exp(Z·H₀)·x_o，Z = u + iY

    Args:
        model: 模型
        g: 群元素，默认单位元
        Z: 复 A 坐标

    Returns:
        CrownPoint（附带坐标）
    """
    g = g if g is not None else identity(model)
    Z = complex(Z)
    rep = g.m @ exp_h0(Z)
    if model is Model.SL2R:
        gram = rep @ rep.T
    else:
        gram = g.m @ exp_h0(2.0 * Z) @ g.m.conj().T
    return CrownPoint(model, gram, rep=rep, g=g, Z=Z)


def complex_point(rep: np.ndarray) -> CrownPoint:
    """SL(2,ℂ) 矩阵代表元 m 定义的 X_ℂ 点（H² 的复化），p = m·mᵀ"""
    rep = np.asarray(rep, dtype=complex)
    return CrownPoint(Model.SL2R, rep @ rep.T, rep=rep)


def origin(model: Model) -> CrownPoint:
    return crown_point(model)


def translate(g: GroupElement, z: CrownPoint) -> CrownPoint:
    """左平移 g·z"""
    if z.model is Model.SL2R:
        gram = g.m @ z.gram @ g.m.T
    else:
        gram = g.m @ z.gram @ g.m.conj().T
    rep = g.m @ z.rep if z.rep is not None else None
    new_g = g @ z.g if z.g is not None else None
    return CrownPoint(z.model, gram, rep=rep, g=new_g, Z=z.Z if new_g is not None else None)


def real_form_conjugate(model: Model, gram: np.ndarray) -> np.ndarray:
    """实形式共轭 σ(p)：H² 为 p̄，H³ 为 p†"""
    gram = np.asarray(gram, dtype=complex)
    return gram.conj() if model is Model.SL2R else gram.conj().T


def pair_invariant(z: CrownPoint, w: CrownPoint) -> complex:
    """
    tr(σ(p_w)⁻¹·p_z)/2，对 z 全纯、对 w 反全纯；z = w 为实点时等于 cosh d
    """
    sigma_w = real_form_conjugate(w.model, w.gram)
    a, b = sigma_w[0]
    c, d = sigma_w[1]
    inv = np.array([[d, -b], [-c, a]])
    return complex(np.trace(inv @ z.gram)) / 2.0


@dataclass
class BoundaryPoint:
    """B = M\\K 中的点：H² 为角 β ∈ [0, 2π)，H³ 为 S² 上单位向量"""
    model: Model
    angle: float = 0.0
    direction: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.model is Model.SL2R:
            self.angle = float(self.angle) % (2.0 * math.pi)
            return
        if self.direction is None:
            self.direction = np.array([0.0, 0.0, 1.0])
        self.direction = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(self.direction) - 1.0) > DET_TOL:
            raise ValueError(f"边界点必须是单位向量: |n|={np.linalg.norm(self.direction)}")

    @classmethod
    def from_angles(cls, polar: float, azimuth: float) -> "BoundaryPoint":
        n = np.array([math.sin(polar) * math.cos(azimuth), math.sin(polar) * math.sin(azimuth), math.cos(polar)])
        return cls(Model.SL2C, direction=n / np.linalg.norm(n))

    def vector(self) -> np.ndarray:
        """horocycle 括号中使用的向量 v"""
        if self.model is Model.SL2R:
            return np.array([math.sin(self.angle / 2.0), math.cos(self.angle / 2.0)], dtype=complex)
        nx, ny, nz = self.direction
        polar = math.acos(max(-1.0, min(1.0, nz)))
        azimuth = math.atan2(ny, nx)
        return np.array([math.sin(polar / 2.0) * np.exp(1j * azimuth), math.cos(polar / 2.0)])


def bracket_q(model: Model, gram: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """
    批量计算 q = vᵀpv (H²) 或 v†pv (H³)

    Args:
        gram: Gram 矩阵 p
        vectors: 形状 (..., 2) 的向量数组

    Returns:
        q 数组，形状 (...)
    """
    v = np.asarray(vectors, dtype=complex)
    left = v if model is Model.SL2R else v.conj()
    return np.einsum("...i,ij,...j->...", left, np.asarray(gram, dtype=complex), v)


def circle_vectors(betas: np.ndarray) -> np.ndarray:
    betas = np.asarray(betas, dtype=float)
    return np.stack([np.sin(betas / 2.0), np.cos(betas / 2.0)], axis=-1).astype(complex)


def sphere_vectors(polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    polar, azimuth = np.broadcast_arrays(np.asarray(polar, dtype=float), np.asarray(azimuth, dtype=float))
    return np.stack([np.sin(polar / 2.0) * np.exp(1j * azimuth), np.cos(polar / 2.0) + 0j], axis=-1)


def log_a_from_q(q) -> np.ndarray:
    """log a = -½·Log q（主值）"""
    q = np.asarray(q, dtype=complex)
    if np.any(np.abs(q) < 1e-14):
        raise DecompositionError("Iwasawa 分解失败: (M·Mᵀ)₂₂ = 0")
    return -0.5 * np.log(q)


def horocycle_a(z: CrownPoint, b: BoundaryPoint):
    """
    log a(b·z)，秩一情形下为复数

    对 M = k_b·rep 作复 Iwasawa 分解 M = n·a·k（n 上三角幺幂），
    则 (M·Mᵀ)₂₂ = a^{-2}，即 q = vᵀpv 且 log a = -½·Log q。
    在冠上 Im log a ∈ (-π/2, π/2)，实点上等于圆盘 Poisson 核 (1-|w|²)/|w-e^{iβ}|² 的一半对数。

    Args:
        z: 冠点
        b: 边界点

    Returns:
        log a(b·z)

    Raises:
        DecompositionError: q = 0
    """
    q = bracket_q(z.model, z.gram, b.vector())
    return complex(log_a_from_q(q))


def haar_kak_density(model: Model, r) -> np.ndarray:
    """
    KAK 坐标下的黎曼体积密度 J(r)（对 r 积分）

    H²: 4π·sinh 2r；H³: 8π·sinh² 2r
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r 必须非负")
    if model is Model.SL2R:
        return 4.0 * math.pi * np.sinh(2.0 * r)
    return 8.0 * math.pi * np.sinh(2.0 * r) ** 2


def p_function(z: CrownPoint) -> complex:
    """P(z) = tr(m·mᵀ)；实轴上 P(a_r·x_o) = 2cosh 2r"""
    return complex(np.trace(z.gram))


def in_hat_domain(z: CrownPoint, which: str = "omega") -> bool:
    """
    X̂_{ℂ,Ω}: Re P > 0；X̂_{ℂ,2Ω}: P ∉ (-∞, -2]

    Args:
        z: X_ℂ 中的点
        which: "omega" 或 "2omega"
    """
    value = p_function(z)
    if which == "omega":
        return value.real > 0.0
    if which == "2omega":
        on_axis = abs(value.imag) <= 1e-12 * max(1.0, abs(value))
        return not (on_axis and value.real <= -2.0)
    raise ValueError(f"未知区域: {which}")


def _check_sigma_phi(phi: float):
    if not (math.pi / 4.0 < abs(phi) < math.pi / 2.0):
        raise DomainError(f"φ={phi} 不在 π/4 < |φ| < π/2 内")


def sigma_curve_point(phi: float, s: float, allow_extension: bool = False) -> CrownPoint:
    """
    σ 曲线上的点

    s ∈ [0, ½]: exp(i·2sφ·H₀)·x_o；
    s ∈ [½, 1]: γ(2s-1)·exp(iφ·H₀)·x_o，γ = [[a, b], [0, 1/a]]，
    a(s') = (√c + s'(1-√c))/√c，b = √(a² - 1/a²)，c = -cos 2φ。
    allow_extension 时 s > 1 沿同一族延伸，P < -2。
    """
    _check_sigma_phi(phi)
    if s < 0.0 or (s > 1.0 and not allow_extension):
        raise DomainError(f"s={s} 不在 [0, 1] 内")
    if s <= 0.5:
        return crown_point(Model.SL2R, Z=1j * 2.0 * s * phi)
    c = -math.cos(2.0 * phi)
    root = math.sqrt(c)
    sp = 2.0 * s - 1.0
    a = (root + sp * (1.0 - root)) / root
    b = math.sqrt(max(0.0, a * a - 1.0 / (a * a)))
    gamma = GroupElement(np.array([[a, b], [0.0, 1.0 / a]]), Model.SL2R)
    return crown_point(Model.SL2R, gamma, 1j * phi)


def boundary_curve_sigma(phi: float, s: float) -> complex:
    """
    σ(s) = P(σ 曲线点)，σ(0) = 2，σ(½) = 2cos 2φ，σ(1) = -2，实值严格递减

    Raises:
        DomainError: φ 或 s 超出范围
    """
    return p_function(sigma_curve_point(phi, s))
