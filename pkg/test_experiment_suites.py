#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实验套件测试
快速用例覆盖调度与错误路径，完整套件标记为 slow
"""

import logging
import math

import pytest

from config import ConfigError, RunConfig
from experiment_suites import SUITES, ExperimentRunner, suite_names
from hyperbolic_models import Model
from result_store import CSV_COLUMNS, ResultStore

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)

C_X = 1.0 / (2.0 * math.pi ** 2)


def _config(**overrides) -> RunConfig:
    values = {"c_x_h2": C_X, "c_x_h3": C_X, "t": 0.1}
    values.update(overrides)
    return RunConfig(**values)


def _columns(suite: str):
    return [c.strip() for c in CSV_COLUMNS[suite].split(",")]


# ==================== 调度 ====================

def test_registry_covers_all_suites():
    assert suite_names() == [
        "plancherel", "gutzmer", "norm-identity", "image-test", "flat-bargmann",
        "strip-obstruction", "complex-obstruction", "crown-boundary", "heat-compare",
    ]
    assert set(SUITES) == set(CSV_COLUMNS)
    for spec in SUITES.values():
        assert spec.anchor


def test_unknown_suite():
    with pytest.raises(ConfigError):
        ExperimentRunner(_config()).run("no-such-suite")


@pytest.mark.parametrize("suite", ["plancherel", "gutzmer", "norm-identity", "image-test"])
def test_curved_suite_rejects_flat_model(suite):
    with pytest.raises(ConfigError):
        ExperimentRunner(_config(model="flat")).run(suite)


def test_explicit_c_x_is_not_calibrated():
    runner = ExperimentRunner(_config())
    assert runner.c_x(Model.SL2C) == C_X
    assert runner.calibrated == {}
    assert runner.resolved_config() == runner.config


def test_basis_is_cached():
    runner = ExperimentRunner(_config(mu_points=32, angular_points=16, angular_modes=4))
    assert runner.basis(Model.SL2R) is runner.basis(Model.SL2R)


# ==================== 快速套件 ====================

def test_heat_compare_suite(tmp_path):
    print("\n" + "=" * 60)
    print("测试 heat-compare 套件")
    print("=" * 60)
    result = ExperimentRunner(_config()).run("heat-compare")
    assert result.verdict == "pass"
    assert result.model == "h3"
    assert result.c_x == C_X
    heat_rows = [row for row in result.details if row["check"] == "heat kernel"]
    moment_rows = [row for row in result.details if row["check"] == "moment"]
    assert len(moment_rows) == 400
    # 每个 t 至少比较原点；闭式值低于峰值 1e-5 的半径不参与比较
    assert {row["t"] for row in heat_rows} == {0.1, 0.5, 2.0}
    assert len(heat_rows) < 3 * 21
    for row in heat_rows:
        assert row["rel_gap"] <= 1e-8
        assert row["rhs"] > 0

    store = ResultStore(tmp_path)
    store.save(result)
    assert list(store.load_details("heat-compare").columns) == _columns("heat-compare")
    assert store.load_summary("heat-compare")["verdict"] == "pass"


def test_crown_boundary_suite():
    result = ExperimentRunner(_config(crown_samples=200)).run("crown-boundary")
    for record in result.records:
        logger.info(f"{record.operation}: {record.passed}")
    assert result.passed
    assert result.model == "h2"
    assert result.c_x is None
    assert list(result.details_frame().columns) == _columns("crown-boundary")


def test_flat_bargmann_suite():
    result = ExperimentRunner(_config(model="flat", flat_family_count=3)).run("flat-bargmann")
    assert result.passed
    assert result.c_x == 1.0
    # 3 个时间 × 3 个函数 + 20 个再生点
    assert len(result.records) == 3 * 3 + 20
    assert list(result.details_frame().columns) == _columns("flat-bargmann")


def test_suite_output_is_deterministic(tmp_path):
    first = ResultStore(tmp_path / "a")
    second = ResultStore(tmp_path / "b")
    first.save(ExperimentRunner(_config(crown_samples=100)).run("crown-boundary"))
    second.save(ExperimentRunner(_config(crown_samples=100)).run("crown-boundary"))
    assert first.summary_path("crown-boundary").read_bytes() == second.summary_path("crown-boundary").read_bytes()
    assert first.details_path("crown-boundary").read_bytes() == second.details_path("crown-boundary").read_bytes()


# ==================== 完整套件 ====================

@pytest.mark.slow
def test_calibration_fills_resolved_config():
    runner = ExperimentRunner(RunConfig(c_x_h2="auto", c_x_h3="auto"))
    value = runner.c_x(Model.SL2C)
    assert abs(value - C_X) <= 1e-10 * C_X
    assert runner.c_x(Model.SL2C) == value
    resolved = runner.resolved_config()
    assert resolved.c_x_h3 == value
    assert resolved.c_x_h2 == "auto"


@pytest.mark.slow
@pytest.mark.parametrize("model", ["h2", "h3"])
@pytest.mark.parametrize("suite", ["plancherel", "gutzmer", "norm-identity", "image-test"])
def test_curved_suites(suite, model):
    print("\n" + "=" * 60)
    print(f"测试 {suite} 套件 ({model})")
    print("=" * 60)
    result = ExperimentRunner(_config(model=model)).run(suite)
    failed = [r.operation for r in result.records if not r.passed]
    assert not failed, failed
    assert result.model == model
    assert list(result.details_frame().columns) == _columns(suite)


@pytest.mark.slow
def test_strip_obstruction_suite():
    result = ExperimentRunner(_config(model="flat")).run("strip-obstruction")
    failed = [r.operation for r in result.records if not r.passed]
    assert not failed, failed
    assert result.grids == {"candidate_dim": 64, "refined_candidate_dim": 256}
    assert list(result.details_frame().columns) == _columns("strip-obstruction")


@pytest.mark.slow
def test_complex_obstruction_suite():
    result = ExperimentRunner(_config()).run("complex-obstruction")
    failed = [r.operation for r in result.records if not r.passed]
    assert not failed, failed
    assert any(line.startswith("μ*=") for line in result.diagnostics)
    assert list(result.details_frame().columns) == _columns("complex-obstruction")


@pytest.mark.slow
def test_strip_obstruction_fit_residual_records():
    """拟合残差按回归值约束，且 4 倍细化不使其增大"""
    result = ExperimentRunner(_config(model="flat")).run("strip-obstruction")
    records = {r.operation: r for r in result.records}
    for t in (0.5, 1.0):
        for gamma in (0.5, 1.0):
            label = f"t={t} gamma={gamma}"
            assert records[f"fit residual {label}"].passed
            assert records[f"refined fit residual {label}"].passed
            assert 0.1 < records[f"fit residual {label}"].lhs < 0.7


@pytest.mark.slow
def test_gutzmer_suite_covers_non_radial_function():
    result = ExperimentRunner(_config(model="h2")).run("gutzmer")
    functions = {row["function"] for row in result.details}
    assert functions == {"bump sigma=0.5", "bump sigma=0.6", "random order<=2"}
    assert len(result.details) == 3 * 5
    failed = [r.operation for r in result.records if not r.passed]
    assert not failed, failed


@pytest.mark.slow
def test_suites_at_reference_grid():
    """R = 12，径向 2¹⁰，μ 2⁹，冠扫描 10⁴ 个样本"""
    print("\n" + "=" * 60)
    print("测试参考网格上的套件")
    print("=" * 60)
    config = _config(model="h3", radial_cutoff=12.0, radial_points=1024, mu_points=512, crown_samples=10000)
    runner = ExperimentRunner(config)
    for suite in ("plancherel", "norm-identity", "crown-boundary"):
        result = runner.run(suite)
        failed = [r.operation for r in result.records if not r.passed]
        assert not failed, (suite, failed)
    assert runner.grid.radial_points == 1024



if __name__ == "__main__":
    pytest.main([__file__, "-v"])
