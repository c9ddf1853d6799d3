#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
crownheat 命令行入口

    crownheat print-config [--config PATH]
    crownheat calibrate    [--config PATH] [--out DIR]
    crownheat run SUITE    [--config PATH] [--out DIR]

退出码：0 全部通过；1 容差未满足或数值前提失败；2 配置错误
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from colored_log_formatter import setup_colored_logging
from config import CONFIG_FILE_NAME, LOG_LEVEL, LOG_LEVELS, ConfigError, RunConfig, load_config
from experiment_suites import SUITES, ExperimentRunner, suite_names
from helgason_fourier import calibrate_cx
from result_store import CSV_COLUMNS, ResultStore
from special_functions import CrownheatError

logger = logging.getLogger("crownheat")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


# ==================== 命令 ====================

def cmd_print_config(config: RunConfig) -> int:
    """打印完整配置（含全部默认值），可直接另存为 --config 文件"""
    print(config.to_text(), end="")
    return EXIT_OK


def cmd_calibrate(config: RunConfig) -> float:
    """
    Plancherel 校准 c_X，并把结果写入输出目录下的配置文件

    flat 模型无需校准，c_X = 1

    Raises:
        CalibrationError: 网格加密后 c_X 变化超过 calibration_tolerance
    """
    space = config.space
    if space is None:
        logger.info("[CALIBRATE] flat: c_X = 1（无需校准）")
        return 1.0

    c_x, change = calibrate_cx(space, config.grid_spec(), config.calibration_tolerance)
    config.with_c_x(space, c_x).save(Path(config.output_dir) / CONFIG_FILE_NAME)
    logger.info(f"[OK] {space.value} c_X={c_x!r} 加密变化 rel={change:.2e} tol={config.calibration_tolerance:.0e}")
    return c_x


def cmd_run(suite: str, config: RunConfig) -> int:
    """
    执行套件，写出 <suite>.json 与 <suite>.csv，以及本次实际使用的配置

    Returns:
        0 全部校验通过，否则 1
    """
    runner = ExperimentRunner(config)
    result = runner.run(suite)
    store = ResultStore(config.output_dir)
    store.save(result)
    runner.resolved_config().save(Path(config.output_dir) / CONFIG_FILE_NAME)
    for message in result.diagnostics:
        logger.debug(f"[SUITE] {suite}: {message}")
    return EXIT_OK if result.passed else EXIT_FAILED


# ==================== 参数解析 ====================

def _csv_epilog() -> str:
    lines = ["CSV detail columns (<out>/<suite>.csv):"]
    width = max(len(name) for name in CSV_COLUMNS)
    lines += [f"  {name:<{width}}  {columns}" for name, columns in CSV_COLUMNS.items()]
    lines.append("")
    lines.append("exit codes: 0 all tolerances met, 1 tolerance failure or numerical error, 2 configuration error")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="key = value configuration file (defaults when omitted)")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (overrides output_dir)")
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper, default=None,
                        help="overrides log_level")

    parser = argparse.ArgumentParser(
        prog="crownheat",
        description="Heat kernel transform experiments on the line, H^2 and H^3",
        epilog=_csv_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("print-config", parents=[common], help="print the full configuration")
    commands.add_parser("calibrate", parents=[common], help="calibrate c_X for the configured model")
    run = commands.add_parser(
        "run", parents=[common], help="run one experiment suite",
        epilog="\n".join(f"  {name}: {spec.anchor}" for name, spec in SUITES.items()),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("suite", choices=suite_names())
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    if args.log_level is not None:
        overrides["log_level"] = args.log_level
    return replace(config, **overrides) if overrides else config


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    root = logging.getLogger()
    setup_colored_logging(root, args.log_level or LOG_LEVEL)

    try:
        config = _resolve_config(args)
        setup_colored_logging(root, config.log_level)
        logger.info(f"[SYSTEM] crownheat {args.command}: model={config.model} out={config.output_dir}")

        if args.command == "print-config":
            return cmd_print_config(config)
        if args.command == "calibrate":
            cmd_calibrate(config)
            return EXIT_OK
        code = cmd_run(args.suite, config)
        tag = "[OK]" if code == EXIT_OK else "[FAIL]"
        logger.info(f"{tag} {args.suite}: verdict={'pass' if code == EXIT_OK else 'fail'}")
        return code
    except ConfigError as e:
        logger.error(f"[ERROR] 配置错误: {e}")
        return EXIT_CONFIG
    except CrownheatError as e:
        logger.error(f"[ERROR] {type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
