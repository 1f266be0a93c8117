#!/usr/bin/env python3
"""
NLItp - 非线性实数算术的 MCSAT 求解、模型插值与模型检查

使用方法:
    python main.py solve samples/disk_guard.nlsmt
    python main.py mc samples/cauchy_strong.nlts --engine kind --max-k 2

依赖:
    仅标准库；测试需要 pip install -r requirements-dev.txt
"""

import sys
import os

# 确保可以导入 src 模块
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli.app import main


if __name__ == "__main__":
    sys.exit(main())
