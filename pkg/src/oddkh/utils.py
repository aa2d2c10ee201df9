"""共享工具函数、配置与错误类型"""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import yaml

log = logging.getLogger(__name__)

# 双分次坐标 (i, j)
Bidegree = tuple[int, int]

DEFAULT_CONFIG_PATH = "config/oddkh.yaml"


class OddkhError(Exception):
    """所有引擎错误的基类"""


class DiagramError(OddkhError, ValueError):
    """输入错误：PD 码格式、边编号、定向或生成器参数不合法"""


class ResourceLimitError(OddkhError, RuntimeError):
    """超出交叉点上限、时间或内存预算"""


class ConsistencyError(OddkhError, RuntimeError):
    """内部一致性失败（d∘d ≠ 0、符号方程无解、分裂反卷积下溢等）"""


_DEFAULTS: dict[str, int | float] = {
    "max_crossings": 15,
    "cube_limit": 20,
    "workers": 1,
    "memory_mb": 0,
    "time_limit": 0.0,
}

_ENV_NAMES = {
    "max_crossings": "ODDKH_MAX_CROSSINGS",
    "cube_limit": "ODDKH_CUBE_LIMIT",
    "workers": "ODDKH_WORKERS",
    "memory_mb": "ODDKH_MEMORY_MB",
    "time_limit": "ODDKH_TIME_LIMIT",
}


@dataclass
class EngineConfig:
    """引擎配置，统一封装 compute / invariant / selftest 共用的参数。

    优先级: CLI 参数 > 环境变量 > 配置文件 > 默认值。
    None 表示"未指定"，交给下一层决定。
    """

    max_crossings: int | None = None
    cube_limit: int | None = None
    workers: int | None = None
    memory_mb: int | None = None
    time_limit: float | None = None
    config_path: str = ""

    def __post_init__(self) -> None:
        file_values = _load_engine_section(self.config_path)
        for f in fields(self):
            if f.name == "config_path" or getattr(self, f.name) is not None:
                continue
            default = _DEFAULTS[f.name]
            raw = os.environ.get(_ENV_NAMES[f.name], "").strip()
            if raw:
                try:
                    value = type(default)(raw)
                except ValueError:
                    log.warning("环境变量 %s=%r 无法解析，忽略", _ENV_NAMES[f.name], raw)
                    value = file_values.get(f.name, default)
            else:
                value = file_values.get(f.name, default)
            setattr(self, f.name, type(default)(value))

    def validate(self) -> None:
        """校验取值范围"""
        if self.max_crossings < 0 or self.cube_limit < 0:
            raise SystemExit("错误: 交叉点上限不能为负数。")
        if self.workers < 1:
            raise SystemExit(
                "错误: 工作进程数至少为 1。"
                "请检查 --workers 参数或 ODDKH_WORKERS 环境变量。"
            )
        if self.memory_mb < 0 or self.time_limit < 0:
            raise SystemExit("错误: 内存/时间预算不能为负数（0 表示不限制）。")

    def budget(self) -> Budget:
        return Budget(time_limit=self.time_limit, memory_mb=self.memory_mb)


def _load_engine_section(config_path: str) -> dict[str, Any]:
    """读取配置文件的 engine 段，文件缺失或损坏时返回空字典"""
    path = Path(config_path or DEFAULT_CONFIG_PATH)
    if not path.exists():
        return {}
    try:
        data = load_yaml(path) or {}
    except (OSError, yaml.YAMLError) as e:
        log.warning("配置文件 %s 读取失败: %s", path, e)
        return {}
    section = data.get("engine") or {}
    return {k: v for k, v in section.items() if k in _DEFAULTS and v is not None}


class Budget:
    """计算预算：墙钟时间截止与按状态数、最大条生成元数的内存估算"""

    # 每个状态：分解结果、基描述与出边
    BYTES_PER_STATE = 4096
    # 同一条内每个生成元：行索引、稀疏列与 SNF 工作区（实测约 3.2 KB）
    BYTES_PER_GENERATOR = 3300

    def __init__(self, time_limit: float = 0.0, memory_mb: int = 0) -> None:
        self.time_limit = time_limit
        self.memory_mb = memory_mb
        self._deadline = time.monotonic() + time_limit if time_limit > 0 else None

    def check(self, stage: str) -> None:
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise ResourceLimitError(
                f"超出时间预算 {self.time_limit:g}s（阶段: {stage}）"
            )

    def charge(self, *, states: int = 0, generators: int = 0) -> None:
        if self.memory_mb <= 0:
            return
        estimate = (
            states * self.BYTES_PER_STATE + generators * self.BYTES_PER_GENERATOR
        ) / (1024 * 1024)
        if estimate > self.memory_mb:
            raise ResourceLimitError(
                f"预计需要约 {estimate:.0f} MB（{states} 个状态, 最大条 {generators} 个生成元），"
                f"超出内存上限 {self.memory_mb} MB"
            )


class ProgressBar:
    """终端进度条，支持实时刷新耗时和附加信息"""

    def __init__(self, total: int, desc: str = "", width: int = 30) -> None:
        self.total = max(total, 1)
        self.desc = desc
        self.width = width
        self.current = 0
        self.extra = ""
        self._start = time.time()

    def update(self, n: int = 1, extra: str = "") -> None:
        self.current += n
        if extra:
            self.extra = extra
        self._render()

    def _render(self) -> None:
        pct = self.current / self.total
        filled = int(self.width * pct)
        bar = "█" * filled + "░" * (self.width - filled)
        elapsed = time.time() - self._start
        m, s = divmod(int(elapsed), 60)
        ts = f"{m}m{s:02d}s" if m else f"{s}s"
        parts = [f"\r{self.desc}: {bar} {self.current}/{self.total}"]
        if self.extra:
            parts.append(f"| {self.extra}")
        parts.append(f"| {ts}")
        sys.stderr.write(" ".join(parts) + "\033[K")
        sys.stderr.flush()

    def finish(self) -> None:
        self._render()
        sys.stderr.write("\n")
        sys.stderr.flush()


def setup_logging(verbose: bool = False) -> None:
    """统一日志配置"""
    import io

    # Windows 控制台默认 cp1252，无法输出中文日志
    if sys.stdout.encoding and sys.stdout.encoding.lower() != "utf-8":
        sys.stdout = io.TextIOWrapper(
            sys.stdout.buffer, encoding="utf-8", errors="replace",
        )
        sys.stderr = io.TextIOWrapper(
            sys.stderr.buffer, encoding="utf-8", errors="replace",
        )

    level = logging.DEBUG if verbose else logging.INFO

    class _ClearLineFormatter(logging.Formatter):
        """输出日志前先清除进度条所在行，避免混行"""

        def format(self, record: logging.LogRecord) -> str:
            return f"\r\033[K{super().format(record)}"

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_ClearLineFormatter(
        fmt="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%H:%M:%S",
    ))
    logging.basicConfig(level=level, handlers=[handler], force=True)


def save_json(data: Any, path: str | Path) -> None:
    """写入 JSON 文件（UTF-8，4 空格缩进）"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=4)
        f.write("\n")


def load_yaml(path: str | Path) -> Any:
    """读取 YAML 文件"""
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)
