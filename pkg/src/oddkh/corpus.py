"""纽结语料：语料文件读取、内置语料与生成器描述解析"""

from __future__ import annotations

import argparse
import logging
import os
from importlib import resources
from pathlib import Path

from .diagram import (
    PlanarDiagram,
    crossing_signs,
    gen_braid_closure,
    gen_pretzel,
    gen_torus,
    mirror,
    parse_pd,
)
from .utils import DiagramError

log = logging.getLogger(__name__)

CORPUS_ENV = "ODDKH_CORPUS"
GEN_PREFIX = "gen:"

# 语料记录：{名称: PD 码或 gen:生成器描述}
Corpus = dict[str, str]


def parse_corpus(text: str, origin: str = "<text>") -> Corpus:
    """解析语料文本：每行 name<TAB>PD，# 开头为注释"""
    records: Corpus = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = raw.strip("\r\n").partition("\t")
        if not sep or not name.strip() or not value.strip():
            raise DiagramError(f"{origin}:{lineno}: 语料行需要 name<TAB>PD 格式")
        if name.strip() in records:
            log.warning("%s:%d: 重复的语料名 %s，后者覆盖前者", origin, lineno, name)
        records[name.strip()] = value.strip()
    return records


def load_corpus(path: str | Path) -> Corpus:
    p = Path(path)
    if not p.exists():
        raise DiagramError(f"语料文件不存在: {p}")
    return parse_corpus(p.read_text(encoding="utf-8"), origin=str(p))


def bundled_corpus() -> Corpus:
    text = resources.files("oddkh").joinpath("data/knots.tsv").read_text(
        encoding="utf-8",
    )
    return parse_corpus(text, origin="knots.tsv")


def full_corpus(extra_paths: list[str] | None = None) -> Corpus:
    """内置语料 + ODDKH_CORPUS 环境变量 + --corpus 指定文件（后者覆盖前者）"""
    records = bundled_corpus()
    paths = []
    if os.environ.get(CORPUS_ENV):
        paths.append(os.environ[CORPUS_ENV])
    paths.extend(extra_paths or [])
    for path in paths:
        loaded = load_corpus(path)
        log.debug("从 %s 读取 %d 条语料", path, len(loaded))
        records.update(loaded)
    return records


def parse_generator(spec: str, name: str = "") -> PlanarDiagram:
    """解析生成器描述: `pretzel 3 3 -3` | `torus 4 -5` | `braid 3 1 2 -1`"""
    parts = spec.replace(",", " ").split()
    if not parts:
        raise DiagramError("生成器描述为空")
    kind, args = parts[0].lower(), parts[1:]
    try:
        numbers = [int(a) for a in args]
    except ValueError as e:
        raise DiagramError(f"生成器参数必须是整数: {spec!r}") from e

    if kind == "pretzel":
        d = gen_pretzel(numbers)
    elif kind == "torus":
        if len(numbers) != 2:
            raise DiagramError("torus 需要两个参数: torus p q")
        d = gen_torus(*numbers)
    elif kind == "braid":
        if not numbers:
            raise DiagramError("braid 需要股数: braid n g1 g2 ...")
        d = gen_braid_closure(numbers[1:], numbers[0])
    else:
        raise DiagramError(f"未知生成器: {kind}（可选 pretzel / torus / braid）")
    if name:
        d = PlanarDiagram(d.crossings, unknots=d.unknots, name=name)
    return d


def diagram_from_record(name: str, value: str) -> PlanarDiagram:
    if value.startswith(GEN_PREFIX):
        return parse_generator(value[len(GEN_PREFIX):], name=name)
    return parse_pd(value, name=name)


def load_diagram(
    *,
    pd: str = "",
    name: str = "",
    gen: str = "",
    corpus_paths: list[str] | None = None,
    use_mirror: bool = False,
) -> PlanarDiagram:
    """按 PD 码 / 语料名 / 生成器描述三选一构造平面图"""
    given = [bool(pd), bool(name), bool(gen)]
    if sum(given) != 1:
        raise DiagramError("必须且只能指定 --pd、--name、--gen 其中之一")
    if pd:
        d = parse_pd(pd, name="input")
    elif gen:
        d = parse_generator(gen, name=gen)
    else:
        records = full_corpus(corpus_paths)
        if name not in records:
            raise DiagramError(f"语料中没有 {name!r}（可用 `oddkh corpus` 查看）")
        d = diagram_from_record(name, records[name])
    return mirror(d) if use_mirror else d


def run(args: argparse.Namespace) -> None:
    """CLI 入口：列出语料"""
    records = full_corpus(args.corpus)
    print(f"{'name':<18} {'crossings':>9} {'components':>10} {'writhe':>6}")
    for name, value in records.items():
        try:
            d = diagram_from_record(name, value)
        except DiagramError as e:
            log.warning("语料 %s 无法解析: %s", name, e)
            continue
        w = sum(crossing_signs(d))
        print(f"{name:<18} {d.crossing_count:>9} {d.component_count:>10} {w:>6}")
