"""统一 CLI 入口"""

from __future__ import annotations

import argparse
import sys

# 异常类型 -> 退出码
EXIT_DIAGRAM = 2
EXIT_RESOURCE = 3
EXIT_CONSISTENCY = 4


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    """三选一的输入方式（--pd / --name / --gen）及语料、镜像选项"""
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--pd", default="", help='PD 码，如 "PD[X[1,4,2,5],...]"')
    group.add_argument("--name", default="", help="语料中的纽结名，如 9_46")
    group.add_argument(
        "--gen", default="",
        help='生成器描述，如 "pretzel 3 3 -3"、"torus 4 -5"、"braid 3 1 2 -1"',
    )
    parser.add_argument(
        "--corpus", action="append", default=[],
        help="额外的语料文件（可重复；也可用 ODDKH_CORPUS 环境变量）",
    )
    parser.add_argument("--mirror", action="store_true", help="取输入图的镜像")
    parser.add_argument(
        "--seed", type=int, default=None, help="箭头随机化种子（不影响同调结果）",
    )


def _add_theory_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--theory", choices=["odd", "even"], default="odd", help="理论（默认 odd）",
    )
    parser.add_argument("--reduced", action="store_true", help="约化同调")
    parser.add_argument(
        "--ring", choices=["Z", "Q", "Z2"], default="Z", help="系数环（默认 Z）",
    )
    parser.add_argument(
        "--basepoint", type=int, default=None,
        help="约化偶同调的基点边编号（默认取最小边）",
    )


def _add_engine_args(parser: argparse.ArgumentParser) -> None:
    """引擎参数；未指定时依次回退到环境变量、配置文件与默认值"""
    parser.add_argument("--config", default="", help="配置文件路径（默认 config/oddkh.yaml）")
    parser.add_argument(
        "--max-crossings", type=int, default=None, help="交叉点上限（默认 15）",
    )
    parser.add_argument(
        "--cube-limit", type=int, default=None, help="分解立方体维数上限（默认 20）",
    )
    parser.add_argument(
        "--workers", type=int, default=None, help="同调并行进程数（默认 1）",
    )
    parser.add_argument(
        "--memory-mb", type=int, default=None, help="内存上限 MB（0 表示不限制）",
    )
    parser.add_argument(
        "--time-limit", type=float, default=None, help="时间上限秒数（0 表示不限制）",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddkh",
        description="纽结与链环的奇/偶 Khovanov 同调计算引擎",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="显示调试日志"
    )
    sub = parser.add_subparsers(dest="command", help="可用子命令")

    # --- compute ---
    p_comp = sub.add_parser("compute", help="计算同调表")
    _add_input_args(p_comp)
    _add_theory_args(p_comp)
    p_comp.add_argument(
        "--format", default="table",
        help="输出格式，逗号分隔: table,json,latex（默认 table）",
    )
    p_comp.add_argument("--output", default="", help="同时把 JSON 结果写入该文件")
    p_comp.add_argument("--dump-cube", default="", help="写出分解立方体 JSON")
    p_comp.add_argument("--dump-complex", default="", help="写出链复形 JSON")
    p_comp.add_argument("--verify", action="store_true", help="检查 d∘d = 0")
    p_comp.add_argument("--progress", action="store_true", help="显示进度条")
    _add_engine_args(p_comp)

    # --- invariant ---
    p_inv = sub.add_parser("invariant", help="计算由同调导出的不变量")
    p_inv.add_argument(
        "kind",
        choices=["jones", "width", "tb", "qa", "zero-omitting", "torsion-profile"],
        help="不变量类型",
    )
    _add_input_args(p_inv)
    _add_theory_args(p_inv)
    p_inv.add_argument(
        "--flavors", default="even-z,even-q,reduced-even,reduced-odd",
        help="tb 计算的类型，逗号分隔（默认全部四种）",
    )
    p_inv.add_argument("--json", action="store_true", help="以 JSON 输出报告")
    _add_engine_args(p_inv)

    # --- corpus ---
    p_cor = sub.add_parser("corpus", help="列出语料")
    p_cor.add_argument(
        "--corpus", action="append", default=[], help="额外的语料文件（可重复）",
    )

    # --- selftest ---
    p_self = sub.add_parser("selftest", help="运行验收自检")
    p_self.add_argument(
        "--stretch", action="store_true", help="包括 (4,-5) 环面结等耗时条目",
    )
    p_self.add_argument(
        "--inject-fault", action="store_true",
        help="故障注入：翻转一个边符号，应检测到 d∘d ≠ 0 并以退出码 4 结束",
    )
    p_self.add_argument(
        "--random", type=int, default=200, help="随机图个数（默认 200）",
    )
    p_self.add_argument(
        "--corpus", action="append", default=[], help="额外的语料文件（可重复）",
    )
    _add_engine_args(p_self)

    return parser


def main(argv: list[str] | None = None) -> None:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(0)

    import logging

    from .utils import (
        ConsistencyError,
        DiagramError,
        ResourceLimitError,
        setup_logging,
    )

    setup_logging(args.verbose)
    log = logging.getLogger(__name__)

    try:
        if args.command == "compute":
            from .jobs import run

            run(args)
        elif args.command == "invariant":
            from .invariants import run

            run(args)
        elif args.command == "corpus":
            from .corpus import run

            run(args)
        elif args.command == "selftest":
            from .selftest import run

            run(args)
    except DiagramError as e:
        log.error("输入错误: %s", e)
        sys.exit(EXIT_DIAGRAM)
    except ResourceLimitError as e:
        log.error("超出资源限制: %s", e)
        sys.exit(EXIT_RESOURCE)
    except ConsistencyError as e:
        log.error("内部一致性检查失败: %s", e)
        sys.exit(EXIT_CONSISTENCY)
