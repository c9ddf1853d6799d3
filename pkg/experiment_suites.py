#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实验套件
每个套件执行一组数值校验，结果汇总为 SuiteResult；ExperimentRunner 负责 c_X 校准与基表缓存
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from bergman_obstruction import (
    fit_weight,
    growth_mismatch_certificate,
    lemma_aa_check,
    log_growth_ratio,
    mu_turn,
    holdout_grid,
    weight_equation_residual,
)
from config import ConfigError, RunConfig
from crown_maximality import (
    BLOWUP_FACTOR,
    ENDPOINT_TOL,
    crown_inclusion_scan,
    factorization_check,
    ladder_scan,
    phi_along_curve,
)
from flat_bargmann import (
    DEFAULT_INTERVALS,
    LineFunction,
    StripFunction,
    bargmann_inner,
    bargmann_ygrid,
    flat_bargmann_norm,
    flat_point_eval,
    flat_repro_kernel,
    flat_transform,
    gauss_hermite_family,
    strip_weight_fit,
)
from helgason_fourier import HelgasonBasis, calibrate_cx, plancherel_check, random_family_member, reference_bump
from heat_transform import (
    GROWTH_DIVERGENT,
    Verdict,
    half_time_kernel,
    heat_kernel,
    heat_kernel_closed,
    heat_transform_apply,
    image_membership,
    norm_identity_check,
    orbital_integral_direct,
    orbital_integral_spectral,
    surjectivity_construct,
)
from hyperbolic_models import Model, boundary_curve_sigma
from result_store import Record, SuiteResult
from special_functions import CrownheatError, gaussian_psi_moment

logger = logging.getLogger(__name__)

# ==================== 容差与网格 ====================

ISOMETRY_TOL = {Model.SL2C: 1e-4, Model.SL2R: 1e-3}
FAMILY_SIZE = 10

GUTZMER_TOL = 1e-3
GUTZMER_SIGMAS = (0.5, 0.6)
# H² 上第三个函数取非径向随机成员
GUTZMER_RANDOM_ORDER = {Model.SL2R: 2, Model.SL2C: 0}
GUTZMER_Y = (0.0, 0.15, 0.3, 0.45, 0.6)

NORM_TIMES = (0.25, 1.0)

IMAGE_TOL = 1e-4
IMAGE_MEMBERS = 2

FLAT_TIMES = (0.1, 0.5, 2.0)
FLAT_TOL = 1e-5
REPRO_T = 0.5
REPRO_POINTS = 20

STRIP_TIMES = (0.5, 1.0)
STRIP_GAMMAS = (0.5, 1.0)
STRIP_REFINEMENT = 4
HOLDOUT_MIN = 0.9
# candidate_dim = 64 下的拟合残差回归值 (t, γ)；γ 以内的正权无法压低它
STRIP_FIT_BASELINE = {(0.5, 0.5): 0.475, (0.5, 1.0): 0.217, (1.0, 0.5): 0.630, (1.0, 1.0): 0.408}
STRIP_FIT_SLACK = 1.05
STRIP_FIT_CEILING = 0.7

IDENTITY_TOL = 1e-3
# (t, r, Y)
IDENTITY_POINTS = ((0.5, 0.7, 0.3), (0.5, 0.3, 0.5), (1.0, 0.7, 0.2), (0.5, 1.2, 0.6))
WEIGHT_FIT_TOL = 1e-2
WEIGHT_HOLDOUT_MIN = 0.99

CURVE_POINTS = 201
CURVE_END = 0.999
FACTORIZATION_RADII = (0.2, 0.7)
FACTORIZATION_TOL = 1e-8

HEAT_TIMES = (0.5, 2.0)
HEAT_TOL = 1e-8
HEAT_RADII = np.linspace(0.0, 2.0, 21)
MOMENT_TOL = 1e-10
# 远端比较只取闭式值不低于峰值 1e-5 的半径
HEAT_FLOOR = 1e-5


@dataclass(frozen=True)
class SuiteSpec:
    """套件描述；model 为 None 时使用配置中的 h2/h3"""
    name: str
    anchor: str
    model: Optional[str] = None


SUITES: Dict[str, SuiteSpec] = {spec.name: spec for spec in (
    SuiteSpec("plancherel", "Plancherel isometry of the Helgason transform"),
    SuiteSpec("gutzmer", "orbital integral of |H_t f|^2: KAK quadrature vs spectral formula"),
    SuiteSpec("norm-identity", "norm identity ||f||^2 = weighted orbital functional of H_t f"),
    SuiteSpec("image-test", "image of H_t: membership, divergence of non-members, preimage construction"),
    SuiteSpec("flat-bargmann", "Bargmann isometry and reproducing kernel on the line", "flat"),
    SuiteSpec("strip-obstruction", "no positive strip weight reproduces the Bargmann norm", "flat"),
    SuiteSpec("complex-obstruction",
              "SL(2,C): identity in (a, Y), weight-equation fit and growth certificate", "h3"),
    SuiteSpec("crown-boundary", "maximality of the crown along the sigma curve", "h2"),
    SuiteSpec("heat-compare", "heat kernel spectral integral vs closed form; Gaussian moment identity", "h3"),
)}


class ExperimentRunner:
    """
    实验运行器

    同一运行内每个模型至多校准一次 c_X，HelgasonBasis 按模型缓存
    """

    def __init__(self, config: RunConfig):
        """
        初始化运行器

        Args:
            config: 运行配置
        """
        self.config = config
        self.grid = config.grid_spec()
        self.calibrated: Dict[Model, float] = {}
        self._c_x: Dict[Model, float] = {}
        self._bases: Dict[Model, HelgasonBasis] = {}
        logger.info(f"[SYSTEM] 实验运行器初始化: model={config.model} t={config.t} seed={config.seed}")

    # ---------- 共享资源 ----------

    def c_x(self, model: Model) -> float:
        """配置给定的 c_X，或 "auto" 时的校准值"""
        if model not in self._c_x:
            value = self.config.c_x_for(model)
            if value is None:
                value, _ = calibrate_cx(model, self.grid, self.config.calibration_tolerance)
                self.calibrated[model] = value
            self._c_x[model] = value
        return self._c_x[model]

    def basis(self, model: Model) -> HelgasonBasis:
        if model not in self._bases:
            self._bases[model] = HelgasonBasis(model, self.grid)
        return self._bases[model]

    def resolved_config(self) -> RunConfig:
        """把本次运行校准得到的 c_X 写回配置"""
        config = self.config
        for model, value in self.calibrated.items():
            config = config.with_c_x(model, value)
        return config

    def _space(self, spec: SuiteSpec) -> Model:
        if spec.model is not None:
            return Model.parse(spec.model)
        if self.config.space is None:
            raise ConfigError(f"套件 {spec.name} 需要 model = h2 或 h3")
        return self.config.space

    def _result(self, spec: SuiteSpec, model_name: str, grids: Dict, c_x: Optional[float]) -> SuiteResult:
        return SuiteResult(spec.name, spec.anchor, model_name, self.config.t, grids=grids, c_x=c_x)

    # ---------- 调度 ----------

    def run(self, name: str) -> SuiteResult:
        """
        执行命名套件

        Raises:
            ConfigError: 未知套件或模型与套件不符
            CrownheatError: 数值前提不满足（截断、分支割线等）
        """
        if name not in SUITES:
            raise ConfigError(f"未知套件: {name}（可选: {', '.join(SUITES)}）")
        spec = SUITES[name]
        logger.info(f"[SUITE] {name}: {spec.anchor}")
        result = getattr(self, "_run_" + name.replace("-", "_"))(spec)
        tag = "[OK]" if result.passed else "[FAIL]"
        failed = sum(not r.passed for r in result.records)
        logger.info(f"{tag} 套件 {name}: {len(result.records)} 项校验，{failed} 项未通过")
        return result

    # ==================== 弯曲空间套件 ====================

    def _run_plancherel(self, spec: SuiteSpec) -> SuiteResult:
        model = self._space(spec)
        c_x = self.c_x(model)
        result = self._result(spec, model.value, self.grid.to_dict(), c_x)
        rng = np.random.default_rng(self.config.seed)
        for k in range(FAMILY_SIZE):
            f = random_family_member(model, self.grid, rng)
            lhs, rhs = plancherel_check(f, c_x, self.basis(model))
            record = result.add(Record.compare(f"plancherel f{k}", lhs, rhs, ISOMETRY_TOL[model]))
            result.details.append({"function": k, "lhs": lhs, "rhs": rhs, "rel_gap": record.rel_gap})
        return result

    def _run_gutzmer(self, spec: SuiteSpec) -> SuiteResult:
        model = self._space(spec)
        c_x = self.c_x(model)
        t = self.config.t
        result = self._result(spec, model.value, self.grid.to_dict(), c_x)
        rng = np.random.default_rng(self.config.seed)
        functions = [(f"bump sigma={sigma}", reference_bump(model, self.grid, sigma)) for sigma in GUTZMER_SIGMAS]
        order = GUTZMER_RANDOM_ORDER[model]
        functions.append((f"random order<={order}",
                          random_family_member(model, self.grid, rng, max_order=order)))
        for label, f in functions:
            F = heat_transform_apply(f, t, c_x, basis=self.basis(model))
            direct_values = []
            for Y in GUTZMER_Y:
                direct = orbital_integral_direct(F, Y)
                spectral = orbital_integral_spectral(F.table, t, 1j * Y, c_x)
                record = result.add(Record.compare(f"orbital integral {label} Y={Y}",
                                                   direct, spectral.real, GUTZMER_TOL))
                direct_values.append(direct)
                result.details.append({"function": label, "Y": Y, "direct": direct,
                                       "spectral": spectral.real, "rel_gap": record.rel_gap})
            result.add(Record.flag(f"orbital integral increasing in Y {label}",
                                   bool(np.all(np.diff(direct_values) > 0))))
        return result

    def _run_norm_identity(self, spec: SuiteSpec) -> SuiteResult:
        model = self._space(spec)
        c_x = self.c_x(model)
        result = self._result(spec, model.value, self.grid.to_dict(), c_x)
        rng = np.random.default_rng(self.config.seed)
        family = [random_family_member(model, self.grid, rng) for _ in range(FAMILY_SIZE)]
        for t in sorted({self.config.t, *NORM_TIMES}):
            for k, f in enumerate(family):
                lhs, rhs = norm_identity_check(f, t, c_x, self.basis(model))
                record = result.add(Record.compare(f"norm identity f{k} t={t}", lhs, rhs, ISOMETRY_TOL[model]))
                result.details.append({"function": k, "t": t, "lhs": lhs, "rhs": rhs,
                                       "rel_gap": record.rel_gap})
        return result

    def _run_image_test(self, spec: SuiteSpec) -> SuiteResult:
        model = self._space(spec)
        c_x = self.c_x(model)
        t = self.config.t
        basis = self.basis(model)
        result = self._result(spec, model.value, self.grid.to_dict(), c_x)
        rng = np.random.default_rng(self.config.seed)

        bump = reference_bump(model, self.grid)
        F = heat_transform_apply(bump, t, c_x, basis=basis)
        report = image_membership(F, t, c_x, basis=basis)
        result.diagnostics.extend(f"reference bump: {line}" for line in report.diagnostics)
        result.add(Record.flag("reference bump is a member", report.verdict is Verdict.MEMBER))
        result.add(Record.compare("reference bump value = ||f||^2", report.value, bump.norm2(), IMAGE_TOL))
        result.details.append({"case": "reference bump", "verdict": report.verdict.value,
                               "value": report.value, "growth": report.growth})

        # 原像构造：F|_X 放大后回到 f
        members = [("reference bump", bump)]
        members += [(f"random f{k}", random_family_member(model, self.grid, rng)) for k in range(IMAGE_MEMBERS)]
        for label, f in members:
            F = heat_transform_apply(f, t, c_x, basis=basis)
            back = surjectivity_construct(F, t, c_x, basis)
            rel = float(np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values))
            result.add(Record.at_most(f"{label} preimage round trip", rel, IMAGE_TOL))

        # k_{t/2}：|F̂|² = e^{-t(μ²+|ρ|²)}，在 im H_{t/2} 中但不在 im H_t 中
        report = image_membership(half_time_kernel(model, self.grid, t, c_x), t, c_x, basis=basis)
        result.diagnostics.extend(f"under-smoothed: {line}" for line in report.diagnostics)
        result.add(Record.flag("under-smoothed density is a non-member", report.verdict is Verdict.NON_MEMBER))
        result.add(Record.at_least("under-smoothed cutoff-doubling growth", report.growth, GROWTH_DIVERGENT))
        result.details.append({"case": "under-smoothed", "verdict": report.verdict.value,
                               "value": report.value, "growth": report.growth})
        return result

    # ==================== 直线套件 ====================

    def _run_flat_bargmann(self, spec: SuiteSpec) -> SuiteResult:
        grids = {"line_intervals": DEFAULT_INTERVALS, "family_count": self.config.flat_family_count}
        result = self._result(spec, "flat", grids, 1.0)
        for t in FLAT_TIMES:
            y = bargmann_ygrid(t, 0.8)
            family = gauss_hermite_family(t, self.config.flat_family_count, seed=self.config.seed)
            for k, f in enumerate(family):
                lhs = f.norm2()
                rhs = flat_bargmann_norm(flat_transform(f, t, y), t)
                record = result.add(Record.compare(f"bargmann isometry f{k} t={t}", lhs, rhs, FLAT_TOL))
                result.details.append({"check": f"isometry f{k}", "t": t, "lhs": lhs, "rhs": rhs,
                                       "rel_gap": record.rel_gap})

        # 再生性质 ⟨H_t f, 𝒦_w⟩ = H_t f(w)
        t = REPRO_T
        f = LineFunction.for_time(lambda x: np.exp(-x ** 2 / 2) * (1 + 0.3 * x), t)
        F = flat_transform(f, t, bargmann_ygrid(t, 0.6))
        Z = F.x[None, :] + 1j * F.y[:, None]
        rng = np.random.default_rng(self.config.seed)
        for k in range(REPRO_POINTS):
            w = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
            value = bargmann_inner(F, StripFunction(F.x, F.y, flat_repro_kernel(t, Z, w)), t)
            expected = flat_point_eval(f, t, w)
            record = result.add(Record.compare_complex(f"reproducing kernel w{k}", value, expected, FLAT_TOL))
            result.details.append({"check": f"reproducing w={w:.4f}", "t": t, "lhs": abs(value),
                                   "rhs": abs(expected), "rel_gap": record.rel_gap})
        return result

    def _run_strip_obstruction(self, spec: SuiteSpec) -> SuiteResult:
        dim = self.config.strip_candidate_dim
        grids = {"candidate_dim": dim, "refined_candidate_dim": STRIP_REFINEMENT * dim}
        result = self._result(spec, "flat", grids, 1.0)
        gammas = sorted({*STRIP_GAMMAS, self.config.strip_gamma})
        for t in STRIP_TIMES:
            for gamma in gammas:
                residual, certificate = strip_weight_fit(t, gamma, candidate_dim=dim)
                _, refined = strip_weight_fit(t, gamma, candidate_dim=STRIP_REFINEMENT * dim)
                refined_residual = refined.fit_residual
                label = f"t={t} gamma={gamma}"
                baseline = STRIP_FIT_BASELINE.get((t, gamma))
                ceiling = STRIP_FIT_CEILING if baseline is None else baseline * STRIP_FIT_SLACK
                result.add(Record.at_most(f"fit residual {label}", residual, ceiling))
                result.add(Record.at_most(f"refined fit residual {label}", refined_residual,
                                          residual * STRIP_FIT_SLACK))
                result.add(Record.at_least(f"holdout residual {label}", certificate.holdout_residual, HOLDOUT_MIN))
                result.add(Record.flag(f"mismatch increasing {label}", certificate.increasing))
                result.add(Record.flag(f"certificate {label}", certificate.passed))
                result.add(Record.at_least(f"refined holdout residual {label}", refined.holdout_residual, HOLDOUT_MIN))
                result.add(Record.flag(f"refined certificate {label}", refined.passed))
                result.diagnostics.append(f"{label}: 拟合残差 {residual:.3e}，cond {certificate.condition:.2e}")
                result.diagnostics.extend(certificate.diagnostics)
                result.details.extend({"t": t, "gamma": gamma, **row} for row in certificate.rows())
        return result

    # ==================== 复群障碍 ====================

    def _run_complex_obstruction(self, spec: SuiteSpec) -> SuiteResult:
        model = Model.SL2C
        c_x = self.c_x(model)
        t = self.config.t
        grids = {"weight_y_points": self.config.weight_y_points, "weight_mu_points": self.config.weight_mu_points}
        result = self._result(spec, model.value, grids, c_x)

        for lt, r, Y in IDENTITY_POINTS:
            lhs, rhs = lemma_aa_check(lt, r, Y, c_x)
            record = result.add(Record.compare(f"identity (a, Y) t={lt} r={r} Y={Y}", lhs, rhs, IDENTITY_TOL))
            result.details.append({"part": "identity", "t": lt, "r": r, "Y": Y, "lhs": lhs, "rhs": rhs,
                                   "residual": record.rel_gap})

        candidate, fit_residual = fit_weight(t, y_points=self.config.weight_y_points,
                                             mu_points=self.config.weight_mu_points)
        holdout = holdout_grid(t)
        result.add(Record.at_most("weight fit residual", fit_residual, WEIGHT_FIT_TOL))
        result.add(Record.at_least("weight holdout residual",
                                   weight_equation_residual(t, candidate, holdout), WEIGHT_HOLDOUT_MIN))
        fit_band = np.linspace(0.0, 4.0, 9)
        for band, grid in (("fit", fit_band), ("holdout", holdout[::16])):
            for mu in grid:
                result.details.append({"part": band, "t": t, "mu": float(mu),
                                       "residual": weight_equation_residual(t, candidate, [mu])})

        mu_star, ratio = growth_mismatch_certificate(t, self.config.ratio_target)
        beyond = np.linspace(mu_star, 3.0 * mu_star, 200)
        result.add(Record.flag("growth certificate mu* finite", math.isfinite(mu_star)))
        result.add(Record.at_least("growth ratio at mu*", ratio, self.config.ratio_target))
        result.add(Record.flag("growth ratio monotone beyond mu*",
                               bool(np.all(np.diff(log_growth_ratio(t, beyond)) > 0))))
        result.diagnostics.append(f"μ*={mu_star:.4f} μ_turn={mu_turn(t):.4f} 比值 {ratio:.3e}")
        return result

    # ==================== 冠边界 ====================

    def _run_crown_boundary(self, spec: SuiteSpec) -> SuiteResult:
        mu, phi = self.config.crown_mu, self.config.crown_phi
        grids = {"curve_points": CURVE_POINTS, "ladder_k_max": self.config.ladder_k_max,
                 "crown_samples": self.config.crown_samples}
        result = self._result(spec, Model.SL2R.value, grids, None)

        result.add(Record.compare("sigma(0) = 2", boundary_curve_sigma(phi, 0.0).real, 2.0, ENDPOINT_TOL))
        result.add(Record.compare("sigma(1) = -2", boundary_curve_sigma(phi, 1.0).real, -2.0, ENDPOINT_TOL))

        try:
            scan = phi_along_curve(mu, phi, np.linspace(0.0, CURVE_END, CURVE_POINTS))
        except (ValueError, CrownheatError) as e:
            result.diagnostics.append(f"σ 曲线校验失败: {e}")
            result.add(Record.flag("sigma real and strictly decreasing", False))
            scan = None
        else:
            result.add(Record.flag("sigma real and strictly decreasing", True))
            result.add(Record.flag("phi positive along the curve", scan.positive))

        ladder = ladder_scan(mu, phi, self.config.ladder_k_max)
        result.add(Record.flag("phi increasing on the ladder", ladder.positive and ladder.increasing))
        result.add(Record.at_least("ladder growth final/initial", ladder.growth, BLOWUP_FACTOR))

        report = crown_inclusion_scan(self.config.crown_samples, seed=self.config.seed)
        result.add(Record.at_least("samples inside the 2Omega domain", report.inside_2omega, 1.0))
        result.add(Record.flag("crown inclusion scan", report.passed))

        for r in FACTORIZATION_RADII:
            direct, via_p = factorization_check(mu, r)
            result.add(Record.compare(f"phi = Phi o P at r={r}", direct, via_p, FACTORIZATION_TOL))

        for curve in (scan, ladder):
            if curve is None:
                continue
            result.details.extend({"mu": mu, "phi": phi, "s": row["s"], "sigma": row["sigma"],
                                   "phi_value": row["phi"]} for row in curve.rows())
        return result

    # ==================== 热核比较 ====================

    def _run_heat_compare(self, spec: SuiteSpec) -> SuiteResult:
        model = Model.SL2C
        c_x = self.c_x(model)
        result = self._result(spec, model.value, self.grid.to_dict(), c_x)
        for t in sorted({self.config.t, *HEAT_TIMES}):
            closed = np.real(heat_kernel_closed(t, HEAT_RADII))
            radii = HEAT_RADII[closed >= HEAT_FLOOR * closed[0]]
            closed = closed[: radii.size]
            spectral = heat_kernel(model, t, radii, c_x)
            gaps = np.abs(spectral - closed) / np.abs(closed)
            result.add(Record.at_most(f"heat kernel spectral vs closed t={t}", float(gaps.max()), HEAT_TOL))
            result.diagnostics.append(f"t={t}: 比较半径 r <= {radii[-1]:.2f}（{radii.size} 点）")
            result.details.extend({"check": "heat kernel", "t": t, "r": float(r), "lhs": float(s),
                                   "rhs": float(c), "rel_gap": float(g)}
                                  for r, s, c, g in zip(radii, spectral, closed, gaps))

        worst = 0.0
        for t in np.linspace(0.05, 2.0, 20):
            for mu in np.linspace(0.0, 5.0, 20):
                closed_value, quad = gaussian_psi_moment(float(t), float(mu), model.rho2)
                gap = abs(quad - closed_value) / closed_value
                worst = max(worst, gap)
                result.details.append({"check": "moment", "t": float(t), "mu": float(mu), "lhs": quad,
                                       "rhs": closed_value, "rel_gap": gap})
        result.add(Record.at_most("Gaussian moment identity on 20x20 (t, mu)", worst, MOMENT_TOL))
        return result


def suite_names() -> List[str]:
    return list(SUITES)
