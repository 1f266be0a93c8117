"""
日志工具
统一的日志格式与调试日志缓冲（CLI 的 --log-file 使用）
"""

import logging
import os
from collections import deque
from datetime import datetime
from typing import Deque, Optional

from .constants import ENV_LOG_LEVEL

LOG_FORMAT = "[%(asctime)s.%(msecs)03d] %(levelname)s %(name)s: %(message)s"
DATE_FORMAT = "%H:%M:%S"


class DebugLog(logging.Handler):
    """保留最近的日志行，便于导出"""

    def __init__(self, capacity: int = 10000):
        super().__init__()
        self._lines: Deque[str] = deque(maxlen=capacity)
        self.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))

    def emit(self, record: logging.LogRecord) -> None:
        self._lines.append(self.format(record))

    def get_debug_log(self) -> str:
        """获取调试日志"""
        return "\n".join(self._lines)

    def clear(self) -> None:
        self._lines.clear()

    def export(self, filepath: str) -> bool:
        """导出调试日志到文件"""
        try:
            with open(filepath, "w", encoding="utf-8") as f:
                f.write("=" * 60 + "\n")
                f.write("NLItp Debug Log\n")
                f.write(f"Exported: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
                f.write("=" * 60 + "\n\n")
                f.write(self.get_debug_log())
            return True
        except OSError:
            return False


def setup_logging(level: Optional[str] = None, keep: bool = False) -> Optional[DebugLog]:
    """
    配置根日志

    Args:
        level: 日志级别名，缺省时读取 NLITP_LOG_LEVEL，再缺省为 WARNING
        keep: 是否额外挂载 DebugLog 缓冲

    Returns:
        挂载的 DebugLog（keep 为 False 时为 None）
    """
    name = (level or os.environ.get(ENV_LOG_LEVEL) or "WARNING").upper()
    root = logging.getLogger("src")
    root.setLevel(getattr(logging, name, logging.WARNING))

    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, DebugLog)
               for h in root.handlers):
        stream = logging.StreamHandler()
        stream.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
        root.addHandler(stream)

    if not keep:
        return None
    buffer = DebugLog()
    root.addHandler(buffer)
    return buffer
