#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果存储
负责实验套件结果的持久化：JSON v1 摘要、CSV 明细与 FourierTable 文件
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from helgason_fourier import FourierTable, GridSpec
from hyperbolic_models import Model

logger = logging.getLogger(__name__)

SUMMARY_SCHEMA = "v1"
FOURIER_TABLE_FORMAT = "fourier-table/1"
CSV_FLOAT_FORMAT = "%.17g"

# CSV 明细列说明（供 --help 使用）
CSV_COLUMNS = {
    "plancherel": "function, lhs, rhs, rel_gap",
    "gutzmer": "function, Y, direct, spectral, rel_gap",
    "norm-identity": "function, t, lhs, rhs, rel_gap",
    "image-test": "case, verdict, value, growth",
    "flat-bargmann": "check, t, lhs, rhs, rel_gap",
    "strip-obstruction": "t, gamma, y, log10_mismatch",
    "complex-obstruction": "part, t, r, Y, lhs, rhs, residual, mu",
    "crown-boundary": "mu, phi, s, sigma, phi_value",
    "heat-compare": "check, t, r, lhs, rhs, rel_gap, mu",
}


def relative_gap(lhs, rhs) -> float:
    """|lhs - rhs| / |rhs|；rhs = 0 时退化为绝对差"""
    scale = abs(rhs)
    return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)


@dataclass
class Record:
    """单项校验：lhs 与 rhs 的相对差不超过 tolerance 即通过"""
    operation: str
    lhs: float
    rhs: float
    rel_gap: float
    tolerance: float
    passed: bool

    @classmethod
    def compare(cls, operation: str, lhs: float, rhs: float, tolerance: float) -> "Record":
        gap = relative_gap(float(lhs), float(rhs))
        return cls(operation, float(lhs), float(rhs), gap, float(tolerance), bool(gap <= tolerance))

    @classmethod
    def compare_complex(cls, operation: str, lhs: complex, rhs: complex, tolerance: float) -> "Record":
        """复数比较：lhs/rhs 记录模长，rel_gap 为 |lhs - rhs|/|rhs|"""
        lhs, rhs = complex(lhs), complex(rhs)
        gap = relative_gap(lhs, rhs)
        return cls(operation, abs(lhs), abs(rhs), gap, float(tolerance), bool(gap <= tolerance))

    @classmethod
    def at_least(cls, operation: str, value: float, threshold: float) -> "Record":
        """下界型校验（例如外推残差 >= 0.9）：rel_gap 记录实测值本身"""
        value = float(value)
        return cls(operation, value, float(threshold), value, float(threshold), bool(value >= threshold))

    @classmethod
    def at_most(cls, operation: str, value: float, threshold: float) -> "Record":
        value = float(value)
        return cls(operation, value, float(threshold), value, float(threshold), bool(value <= threshold))

    @classmethod
    def flag(cls, operation: str, ok: bool) -> "Record":
        """布尔型校验（单调性、符号等）"""
        value = 1.0 if ok else 0.0
        return cls(operation, value, 1.0, 1.0 - value, 0.0, bool(ok))

    def log(self):
        tag = "[OK]" if self.passed else "[FAIL]"
        logger.info(f"{tag} {self.operation}: lhs={self.lhs:.10g} rhs={self.rhs:.10g} "
                    f"rel={self.rel_gap:.2e} tol={self.tolerance:.0e}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "operation": self.operation,
            "lhs": _json_float(self.lhs),
            "rhs": _json_float(self.rhs),
            "rel_gap": _json_float(self.rel_gap),
            "tolerance": _json_float(self.tolerance),
            "passed": self.passed,
        }


@dataclass
class SuiteResult:
    """一个套件的全部结果"""
    suite: str
    anchor: str
    model: str
    t: Optional[float]
    grids: Dict[str, Any] = field(default_factory=dict)
    c_x: Optional[float] = None
    records: List[Record] = field(default_factory=list)
    details: List[Dict[str, Any]] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    def add(self, record: Record) -> Record:
        record.log()
        self.records.append(record)
        return record

    @property
    def passed(self) -> bool:
        """空结果不算通过"""
        return bool(self.records) and all(r.passed for r in self.records)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def summary(self) -> Dict[str, Any]:
        return {
            "schema": SUMMARY_SCHEMA,
            "suite": self.suite,
            "anchor": self.anchor,
            "model": self.model,
            "t": _json_float(self.t),
            "grids": self.grids,
            "records": [r.to_dict() for r in self.records],
            "verdict": self.verdict,
            "c_x": _json_float(self.c_x),
            "diagnostics": list(self.diagnostics),
        }

    def details_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.details)


def _json_float(value):
    """JSON 中非有限浮点写成字符串"""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else repr(value)


class ResultStore:
    """结果目录管理器"""

    def __init__(self, output_dir: Union[str, Path] = "results"):
        """
        初始化结果目录

        Args:
            output_dir: 输出目录（不存在时创建）
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def summary_path(self, suite: str) -> Path:
        return self.output_dir / f"{suite}.json"

    def details_path(self, suite: str) -> Path:
        return self.output_dir / f"{suite}.csv"

    def save(self, result: SuiteResult) -> Dict[str, Path]:
        """写出 JSON 摘要与 CSV 明细（同一配置下字节一致）"""
        summary = self.summary_path(result.suite)
        with open(summary, 'w', encoding='utf-8') as f:
            json.dump(result.summary(), f, indent=2, ensure_ascii=False, sort_keys=True)
            f.write("\n")

        details = self.details_path(result.suite)
        result.details_frame().to_csv(details, index=False, float_format=CSV_FLOAT_FORMAT)

        logger.info(f"[SAVE] {result.suite}: 摘要 {summary}，明细 {details}（{len(result.details)} 行）")
        return {"summary": summary, "details": details}

    def load_summary(self, suite: str) -> Dict[str, Any]:
        path = self.summary_path(suite)
        with open(path, 'r', encoding='utf-8') as f:
            summary = json.load(f)
        if summary.get("schema") != SUMMARY_SCHEMA:
            raise ValueError(f"{path}: 不支持的摘要版本 {summary.get('schema')}")
        logger.info(f"[LOAD] {suite}: verdict={summary['verdict']}")
        return summary

    def load_details(self, suite: str) -> pd.DataFrame:
        return pd.read_csv(self.details_path(suite), float_precision="round_trip")


# ==================== FourierTable 文件 ====================

def save_fourier_table(table: FourierTable, path: Union[str, Path]) -> Path:
    """
    第一行为 `# ` 加 JSON 头（格式、模型、网格与 meta），其后为 CSV 列 j, k, re, im

    Args:
        table: 谱数据
        path: 输出文件
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": FOURIER_TABLE_FORMAT,
        "model": table.model.value,
        "grid": table.grid.to_dict(),
        "meta": table.meta,
    }
    J, K = np.indices(table.values.shape)
    frame = pd.DataFrame({
        "j": J.ravel(),
        "k": K.ravel(),
        "re": table.values.real.ravel(),
        "im": table.values.imag.ravel(),
    })
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write("# " + json.dumps(header, sort_keys=True) + "\n")
        frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info(f"[SAVE] FourierTable {table.model.value} {table.values.shape} -> {path}")
    return path


def load_fourier_table(path: Union[str, Path]) -> FourierTable:
    """
    读取 save_fourier_table 写出的文件

    Raises:
        ValueError: 头部缺失、格式版本不符或索引不完整
    """
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        first = f.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: 缺少 JSON 头")
        header = json.loads(first[2:])
        if header.get("format") != FOURIER_TABLE_FORMAT:
            raise ValueError(f"{path}: 不支持的格式 {header.get('format')}")
        frame = pd.read_csv(f, float_precision="round_trip")

    model = Model.parse(header["model"])
    grid = GridSpec(**header["grid"])
    values = np.zeros((grid.angular_points, grid.mu_points), dtype=complex)
    if len(frame) != values.size:
        raise ValueError(f"{path}: 期望 {values.size} 行，实际 {len(frame)} 行")
    values[frame["j"].to_numpy(), frame["k"].to_numpy()] = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    logger.info(f"[LOAD] FourierTable {model.value} {values.shape} <- {path}")
    return FourierTable(model, grid, values, meta=header.get("meta", {}))
