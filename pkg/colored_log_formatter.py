"""
crownheat 终端日志着色
标签、日志级别、模型名按固定配色；rel= 数值与同一行 tol= 比较后着色
"""

import logging
import re


class ColoredFormatter(logging.Formatter):
    """
    彩色日志格式化器
    根据日志级别、标签与 rel=/tol= 数值自动添加颜色
    """

    # ANSI 转义序列（仅保留用到的颜色）
    COLORS = {
        'RESET': '\033[0m',
        'BOLD': '\033[1m',
        'DIM': '\033[2m',

        'GREEN': '\033[32m',
        'BLUE': '\033[34m',
        'CYAN': '\033[36m',
        'WHITE': '\033[37m',

        'BRIGHT_BLACK': '\033[90m',
        'BRIGHT_RED': '\033[91m',
        'BRIGHT_GREEN': '\033[92m',
        'BRIGHT_YELLOW': '\033[93m',
        'BRIGHT_BLUE': '\033[94m',
        'BRIGHT_MAGENTA': '\033[95m',
        'BRIGHT_CYAN': '\033[96m',
        'BRIGHT_WHITE': '\033[97m',
    }

    # 级别
    LEVEL_COLORS = {
        'DEBUG': COLORS['DIM'] + COLORS['CYAN'],
        'INFO': COLORS['BRIGHT_WHITE'],
        'WARNING': COLORS['BRIGHT_YELLOW'],
        'ERROR': COLORS['BRIGHT_RED'],
        'CRITICAL': COLORS['BOLD'] + COLORS['BRIGHT_RED'],
    }

    # 标签
    TAG_COLORS = {
        # 运行流程
        '[SYSTEM]': COLORS['BRIGHT_CYAN'],
        '[CONFIG]': COLORS['CYAN'],
        '[CALIBRATE]': COLORS['BRIGHT_MAGENTA'],
        '[SUITE]': COLORS['BRIGHT_BLUE'],
        '[QUAD]': COLORS['BRIGHT_BLACK'],

        # 结果状态
        '[OK]': COLORS['BRIGHT_GREEN'],
        '[FAIL]': COLORS['BOLD'] + COLORS['BRIGHT_RED'],
        '[WARNING]': COLORS['BRIGHT_YELLOW'],
        '[ERROR]': COLORS['BRIGHT_RED'],

        # 文件
        '[SAVE]': COLORS['GREEN'],
        '[LOAD]': COLORS['BLUE'],
    }

    # 模型名颜色
    MODEL_COLOR = COLORS['BOLD'] + COLORS['BRIGHT_WHITE']

    # 相对误差颜色（对照同一行的 tol=）
    WITHIN_TOL_COLOR = COLORS['BRIGHT_GREEN']
    BEYOND_TOL_COLOR = COLORS['BRIGHT_RED']
    NO_TOL_COLOR = COLORS['CYAN']

    _NUMBER = r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?'
    REL_PATTERN = re.compile(r'rel=(' + _NUMBER + r')')
    TOL_PATTERN = re.compile(r'tol=(' + _NUMBER + r')')
    MODEL_PATTERN = re.compile(r'\b(h2|h3|flat)\b')

    def format(self, record):
        """record.no_color 为真时输出纯文本"""
        message = super().format(record)
        if not getattr(record, 'no_color', False):
            message = self._colorize_message(message, record.levelname)

        return message

    def _colorize_message(self, message: str, level: str) -> str:
        """依次处理级别、标签、模型名与 rel="""
        reset = self.COLORS['RESET']

        # 级别
        level_color = self.LEVEL_COLORS.get(level, self.COLORS['WHITE'])
        message = message.replace(f' - {level} - ', f' - {level_color}{level}{reset} - ')

        for tag, color in self.TAG_COLORS.items():
            message = message.replace(tag, f'{color}{tag}{reset}')

        message = self.MODEL_PATTERN.sub(lambda m: f'{self.MODEL_COLOR}{m.group(1)}{reset}', message)

        # rel <= tol 绿色，否则红色；行内无 tol= 时中性色
        tol_match = self.TOL_PATTERN.search(message)
        tolerance = float(tol_match.group(1)) if tol_match else None

        def colorize_rel(match):
            rel = float(match.group(1))
            if tolerance is None:
                color = self.NO_TOL_COLOR
            else:
                color = self.WITHIN_TOL_COLOR if abs(rel) <= tolerance else self.BEYOND_TOL_COLOR
            return f'rel={color}{match.group(1)}{reset}'

        return self.REL_PATTERN.sub(colorize_rel, message)


def setup_colored_logging(logger, level=logging.INFO):
    """
    给 logger 装上唯一的彩色控制台 handler（重复调用只替换，不叠加）

    Args:
        logger: 目标 logger，CLI 传入根 logger
        level: 日志级别（数值或 'INFO' 等名称）
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())

    logger.handlers = []

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(ColoredFormatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))

    logger.addHandler(console_handler)
    logger.setLevel(level)


if __name__ == "__main__":
    demo_logger = logging.getLogger("demo")
    setup_colored_logging(demo_logger)

    demo_logger.info("[SYSTEM] crownheat 启动")
    demo_logger.info("[CONFIG] model=h3 t=0.5")
    demo_logger.info("[CALIBRATE] h3: c_X=0.0506605918 加密变化 rel=3.1e-09 tol=1e-06")
    demo_logger.info("[SUITE] norm-identity")
    demo_logger.info("[OK] norm_identity_check rel=2.4e-06 tol=1e-04")
    demo_logger.info("[FAIL] plancherel_check rel=3.0e-02 tol=1e-03")
    demo_logger.warning("[WARNING] 加权泛函在截断翻倍后继续增长")
    demo_logger.error("[ERROR] 配置文件无法解析")
