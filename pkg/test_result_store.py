#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果存储测试：校验记录、JSON v1 摘要、CSV 明细与 FourierTable 文件
"""

import json
import logging
import math

import numpy as np
import pytest

from helgason_fourier import FourierTable, GridSpec
from hyperbolic_models import Model
from result_store import (
    FOURIER_TABLE_FORMAT,
    Record,
    ResultStore,
    SuiteResult,
    load_fourier_table,
    relative_gap,
    save_fourier_table,
)

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)


def _result() -> SuiteResult:
    result = SuiteResult("heat-compare", "heat kernel: spectral integral vs closed form", "h3", 0.5,
                         grids={"mu_points": 128}, c_x=1 / (2 * math.pi ** 2))
    result.add(Record.compare("heat_kernel t=0.5 r=0.3", 1.0 + 1e-10, 1.0, 1e-8))
    result.add(Record.at_least("holdout residual", 0.995, 0.9))
    result.details = [{"t": 0.5, "r": 0.3, "spectral": 0.1 + 0.2, "closed": 0.3, "rel_gap": 1e-16}]
    return result


# ==================== 校验记录 ====================

def test_record_compare():
    ok = Record.compare("a", 1.00001, 1.0, 1e-4)
    assert ok.passed
    assert abs(ok.rel_gap - 1e-5) < 1e-12
    bad = Record.compare("b", 1.1, 1.0, 1e-4)
    assert not bad.passed
    assert relative_gap(1e-3, 0.0) == 1e-3


def test_record_bounds_and_flags():
    assert Record.at_least("holdout", 0.95, 0.9).passed
    assert not Record.at_least("holdout", 0.5, 0.9).passed
    assert Record.at_most("fit", 1e-4, 1e-3).passed
    assert not Record.at_most("fit", 1e-2, 1e-3).passed
    assert Record.flag("monotone", True).passed
    assert not Record.flag("monotone", False).passed


def test_verdict():
    result = _result()
    assert result.verdict == "pass"
    result.add(Record.compare("c", 2.0, 1.0, 1e-3))
    assert result.verdict == "fail"
    assert SuiteResult("gutzmer", "anchor", "h2", 0.5).verdict == "fail"


# ==================== 摘要与明细 ====================

def test_summary_schema(tmp_path):
    store = ResultStore(tmp_path / "out")
    paths = store.save(_result())
    summary = json.loads(paths["summary"].read_text(encoding="utf-8"))
    assert summary["schema"] == "v1"
    assert summary["suite"] == "heat-compare"
    assert summary["verdict"] == "pass"
    assert set(summary["records"][0]) == {"operation", "lhs", "rhs", "rel_gap", "tolerance", "passed"}
    assert not any("time" in key for key in summary)
    assert store.load_summary("heat-compare") == summary


def test_summary_is_byte_identical(tmp_path):
    first = ResultStore(tmp_path / "a").save(_result())
    second = ResultStore(tmp_path / "b").save(_result())
    assert first["summary"].read_bytes() == second["summary"].read_bytes()
    assert first["details"].read_bytes() == second["details"].read_bytes()


def test_non_finite_values_are_written_as_strings(tmp_path):
    result = _result()
    result.add(Record.compare("overflow", math.inf, 1.0, 1e-3))
    summary = json.loads(ResultStore(tmp_path).save(result)["summary"].read_text(encoding="utf-8"))
    assert summary["records"][-1]["lhs"] == "inf"
    assert summary["verdict"] == "fail"


def test_details_csv(tmp_path):
    store = ResultStore(tmp_path)
    store.save(_result())
    frame = store.load_details("heat-compare")
    assert list(frame.columns) == ["t", "r", "spectral", "closed", "rel_gap"]
    assert frame["spectral"].iloc[0] == 0.1 + 0.2


# ==================== FourierTable 文件 ====================

def test_fourier_table_file(tmp_path):
    grid = GridSpec(angular_points=8, mu_points=16, angular_modes=2)
    rng = np.random.default_rng(4)
    values = rng.normal(size=(8, 16)) + 1j * rng.normal(size=(8, 16))
    table = FourierTable(Model.SL2C, grid, values, meta={"function": "bump"})
    path = save_fourier_table(table, tmp_path / "tables" / "bump.csv")

    header = json.loads(path.read_text(encoding="utf-8").splitlines()[0][2:])
    assert header["format"] == FOURIER_TABLE_FORMAT
    assert path.read_text(encoding="utf-8").splitlines()[1] == "j,k,re,im"

    loaded = load_fourier_table(path)
    assert loaded.model is Model.SL2C
    assert loaded.grid == grid
    assert loaded.meta == {"function": "bump"}
    assert np.array_equal(loaded.values, table.values)


def test_fourier_table_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text('# {"format": "fourier-table/0"}\nj,k,re,im\n', encoding="utf-8")
    with pytest.raises(ValueError):
        load_fourier_table(path)
    path.write_text("j,k,re,im\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_fourier_table(path)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
