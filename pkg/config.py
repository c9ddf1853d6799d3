"""
crownheat 配置文件
集中管理所有可调参数：环境变量给出默认值，RunConfig 承载单次运行的完整配置
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import load_dotenv

from helgason_fourier import GridSpec
from hyperbolic_models import Model
from special_functions import CrownheatError

load_dotenv()

logger = logging.getLogger(__name__)


class ConfigError(CrownheatError, ValueError):
    """配置文件无法解析或违反约束"""


# ==================== 模型配置 ====================

MODEL = os.getenv('CROWNHEAT_MODEL', 'h3')  # flat / h2 / h3

# ==================== 时间参数 ====================

HEAT_TIME = float(os.getenv('CROWNHEAT_T', '0.1'))

# ==================== 网格配置 ====================

RADIAL_CUTOFF = float(os.getenv('CROWNHEAT_RADIAL_CUTOFF', '4.0'))
RADIAL_POINTS = int(os.getenv('CROWNHEAT_RADIAL_POINTS', '128'))
ANGULAR_POINTS = int(os.getenv('CROWNHEAT_ANGULAR_POINTS', '64'))
ANGULAR_MODES = int(os.getenv('CROWNHEAT_ANGULAR_MODES', '16'))
MU_CUTOFF = float(os.getenv('CROWNHEAT_MU_CUTOFF', '24.0'))
MU_POINTS = int(os.getenv('CROWNHEAT_MU_POINTS', '128'))
AZIMUTH_POINTS = int(os.getenv('CROWNHEAT_AZIMUTH_POINTS', '8'))

# ==================== 校准配置 ====================

# "auto" 表示每次运行先做 Plancherel 校准
C_X_H2 = os.getenv('CROWNHEAT_C_X_H2', 'auto')
C_X_H3 = os.getenv('CROWNHEAT_C_X_H3', 'auto')
CALIBRATION_TOLERANCE = float(os.getenv('CROWNHEAT_CALIBRATION_TOLERANCE', '1e-6'))
SEED = int(os.getenv('CROWNHEAT_SEED', '0'))

# ==================== 直线网格配置 ====================

FLAT_FAMILY_COUNT = int(os.getenv('CROWNHEAT_FLAT_FAMILY_COUNT', '10'))
STRIP_GAMMA = float(os.getenv('CROWNHEAT_STRIP_GAMMA', '1.0'))
STRIP_CANDIDATE_DIM = int(os.getenv('CROWNHEAT_STRIP_CANDIDATE_DIM', '64'))

# ==================== 障碍实验配置 ====================

WEIGHT_Y_POINTS = int(os.getenv('CROWNHEAT_WEIGHT_Y_POINTS', '64'))
WEIGHT_MU_POINTS = int(os.getenv('CROWNHEAT_WEIGHT_MU_POINTS', '64'))
RATIO_TARGET = float(os.getenv('CROWNHEAT_RATIO_TARGET', '1e6'))

# ==================== 冠边界配置 ====================

CROWN_MU = float(os.getenv('CROWNHEAT_CROWN_MU', '3.0'))
CROWN_PHI = float(os.getenv('CROWNHEAT_CROWN_PHI', repr(3.0 * math.pi / 8.0)))
CROWN_SAMPLES = int(os.getenv('CROWNHEAT_CROWN_SAMPLES', '10000'))
LADDER_K_MAX = int(os.getenv('CROWNHEAT_LADDER_K_MAX', '13'))

# ==================== 输出配置 ====================

OUTPUT_DIR = os.getenv('CROWNHEAT_OUTPUT_DIR', 'results')
CONFIG_FILE_NAME = 'run_config.txt'

# ==================== 日志配置 ====================

LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()


# ==================== RunConfig ====================

AUTO = 'auto'
MODELS = ('flat', 'h2', 'h3')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

# 必须为 2 的幂的网格点数
POWER_OF_TWO_FIELDS = (
    'radial_points', 'angular_points', 'mu_points', 'azimuth_points',
    'strip_candidate_dim', 'weight_y_points', 'weight_mu_points',
)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


CxValue = Union[float, str]


@dataclass
class RunConfig:
    """
    单次运行配置

    文本格式为每行一个 `key = value`，`#` 开头为注释；
    to_text() 与 from_text() 互逆且浮点数逐位一致（浮点按 repr 写出）
    """
    model: str = MODEL
    t: float = HEAT_TIME
    radial_cutoff: float = RADIAL_CUTOFF
    radial_points: int = RADIAL_POINTS
    angular_points: int = ANGULAR_POINTS
    angular_modes: int = ANGULAR_MODES
    mu_cutoff: float = MU_CUTOFF
    mu_points: int = MU_POINTS
    azimuth_points: int = AZIMUTH_POINTS
    c_x_h2: CxValue = C_X_H2
    c_x_h3: CxValue = C_X_H3
    calibration_tolerance: float = CALIBRATION_TOLERANCE
    seed: int = SEED
    flat_family_count: int = FLAT_FAMILY_COUNT
    strip_gamma: float = STRIP_GAMMA
    strip_candidate_dim: int = STRIP_CANDIDATE_DIM
    weight_y_points: int = WEIGHT_Y_POINTS
    weight_mu_points: int = WEIGHT_MU_POINTS
    ratio_target: float = RATIO_TARGET
    crown_mu: float = CROWN_MU
    crown_phi: float = CROWN_PHI
    crown_samples: int = CROWN_SAMPLES
    ladder_k_max: int = LADDER_K_MAX
    output_dir: str = OUTPUT_DIR
    log_level: str = LOG_LEVEL

    def __post_init__(self):
        self.model = str(self.model).strip().lower()
        self.log_level = str(self.log_level).strip().upper()
        self.c_x_h2 = _parse_cx('c_x_h2', self.c_x_h2)
        self.c_x_h3 = _parse_cx('c_x_h3', self.c_x_h3)

        if self.model not in MODELS:
            raise ConfigError(f"model 必须是 {MODELS} 之一: {self.model}")
        if not self.t > 0 or not math.isfinite(self.t):
            raise ConfigError(f"t 必须为正: {self.t}")
        for name in POWER_OF_TWO_FIELDS:
            value = getattr(self, name)
            if not _is_power_of_two(value):
                raise ConfigError(f"{name} 必须是 2 的幂: {value}")
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"log_level 必须是 {LOG_LEVELS} 之一: {self.log_level}")
        for name in ('flat_family_count', 'crown_samples', 'ladder_k_max'):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} 必须为正")
        if self.strip_gamma <= 0 or self.ratio_target <= 1 or self.calibration_tolerance <= 0:
            raise ConfigError("strip_gamma、calibration_tolerance 必须为正且 ratio_target > 1")
        if not math.pi / 4 < abs(self.crown_phi) < math.pi / 2:
            raise ConfigError(f"crown_phi 必须满足 π/4 < |φ| < π/2: {self.crown_phi}")
        try:
            self.grid_spec()
        except ValueError as e:
            raise ConfigError(f"网格配置无效: {e}") from e

    # ---------- 派生量 ----------

    @property
    def space(self) -> Optional[Model]:
        """flat 时为 None"""
        return None if self.model == 'flat' else Model.parse(self.model)

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            radial_cutoff=self.radial_cutoff,
            radial_points=self.radial_points,
            angular_points=self.angular_points,
            angular_modes=self.angular_modes,
            mu_cutoff=self.mu_cutoff,
            mu_points=self.mu_points,
            azimuth_points=self.azimuth_points,
        )

    def c_x_for(self, model: Model) -> Optional[float]:
        """已确定的 c_X；"auto" 时返回 None"""
        value = self.c_x_h2 if model is Model.SL2R else self.c_x_h3
        return None if value == AUTO else float(value)

    def with_c_x(self, model: Model, value: float) -> "RunConfig":
        key = 'c_x_h2' if model is Model.SL2R else 'c_x_h3'
        return replace(self, **{key: float(value)})

    def to_dict(self) -> Dict:
        return asdict(self)

    # ---------- 文本序列化 ----------

    def to_text(self) -> str:
        lines = ["# crownheat run configuration"]
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {repr(value) if isinstance(value, float) else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """
        解析 `key = value` 文本

        Raises:
            ConfigError: 未知键、重复键、无法解析的值或违反约束
        """
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ConfigError(f"第 {lineno} 行缺少 '=': {raw!r}")
            key, value = (part.strip() for part in line.split('=', 1))
            if key not in kinds:
                raise ConfigError(f"第 {lineno} 行未知配置项: {key}")
            if key in values:
                raise ConfigError(f"第 {lineno} 行重复配置项: {key}")
            values[key] = _parse_value(key, kinds[key], value)
        return cls(**values)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as e:
            raise ConfigError(f"无法读取配置文件 {path}: {e}") from e
        config = cls.from_text(text)
        logger.info(f"[CONFIG] 已加载配置 {path}（model={config.model}, t={config.t}）")
        return config

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding='utf-8')
        logger.info(f"[SAVE] 配置已写入 {path}")
        return path


def _parse_cx(name: str, value) -> CxValue:
    if isinstance(value, str):
        if value.strip().lower() == AUTO:
            return AUTO
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{name} 必须是正数或 'auto': {value!r}") from None
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ConfigError(f"{name} 必须为正: {value}")
    return value


def _parse_value(key: str, kind, text: str):
    # dataclass 字段类型在 from __future__ 缺省时为类型对象本身
    try:
        if kind in (int, 'int'):
            return int(text)
        if kind in (float, 'float'):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key} 的值无法解析: {text!r}") from None
    return text


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """path 为空时返回全部默认值"""
    return RunConfig() if path is None else RunConfig.load(path)
