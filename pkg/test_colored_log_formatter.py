#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
彩色日志格式化器测试
"""

import logging

import pytest

from colored_log_formatter import ColoredFormatter, setup_colored_logging

C = ColoredFormatter.COLORS


def _format(message: str, level: int = logging.INFO, **extra) -> str:
    formatter = ColoredFormatter(fmt='%(levelname)s - %(message)s')
    record = logging.LogRecord("crownheat", level, __file__, 1, message, None, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return formatter.format(record)


def test_tags_are_colored():
    out = _format("[SUITE] gutzmer [QUAD] 64 点")
    assert f"{C['BRIGHT_BLUE']}[SUITE]{C['RESET']}" in out
    assert f"{C['BRIGHT_BLACK']}[QUAD]{C['RESET']}" in out


def test_rel_within_tolerance_is_green():
    out = _format("[OK] plancherel_check rel=2.5e-05 tol=1e-04")
    assert f"rel={ColoredFormatter.WITHIN_TOL_COLOR}2.5e-05{C['RESET']}" in out


def test_rel_beyond_tolerance_is_red():
    out = _format("[FAIL] plancherel_check rel=3.0e-02 tol=1e-03")
    assert f"rel={ColoredFormatter.BEYOND_TOL_COLOR}3.0e-02{C['RESET']}" in out


def test_rel_without_tolerance_is_neutral():
    out = _format("[CALIBRATE] 加密变化 rel=4.2e-09")
    assert f"rel={ColoredFormatter.NO_TOL_COLOR}4.2e-09{C['RESET']}" in out


def test_model_names_are_highlighted():
    out = _format("[CONFIG] model=h3")
    assert f"{ColoredFormatter.MODEL_COLOR}h3{C['RESET']}" in out
    # 模块名中的 flat 不着色
    assert ColoredFormatter.MODEL_COLOR not in _format("flat_bargmann 已载入")


def test_no_color_flag():
    out = _format("[OK] rel=1e-9 tol=1e-6", no_color=True)
    assert out == "INFO - [OK] rel=1e-9 tol=1e-6"


def test_setup_colored_logging_installs_one_handler():
    logger = logging.getLogger("crownheat.test.setup")
    setup_colored_logging(logger, "debug")
    setup_colored_logging(logger, "WARNING")
    assert len(logger.handlers) == 1
    assert logger.level == logging.WARNING
    assert isinstance(logger.handlers[0].formatter, ColoredFormatter)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
