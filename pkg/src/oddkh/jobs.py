"""计算任务：JobSpec 与 compute 命令"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .chain import ChainComplex, Flavor, build_complex
from .corpus import load_diagram
from .diagram import PlanarDiagram
from .homology import HomologyTable, Ring, homology, reduce_by_splitting
from .render import FORMATS, render, table_to_json
from .utils import Budget, DiagramError, EngineConfig, ResourceLimitError, save_json

log = logging.getLogger(__name__)


def engine_config(args: argparse.Namespace) -> EngineConfig:
    cfg = EngineConfig(
        max_crossings=getattr(args, "max_crossings", None),
        cube_limit=getattr(args, "cube_limit", None),
        workers=getattr(args, "workers", None),
        memory_mb=getattr(args, "memory_mb", None),
        time_limit=getattr(args, "time_limit", None),
        config_path=getattr(args, "config", "") or "",
    )
    cfg.validate()
    return cfg


@dataclass
class JobSpec:
    """一次计算的完整描述；相同的 JobSpec（含 seed）输出逐字节相同"""

    pd: str = ""
    name: str = ""
    gen: str = ""
    corpus: list[str] = field(default_factory=list)
    mirror: bool = False
    theory: str = "odd"
    reduced: bool = False
    ring: Ring = Ring.Z
    formats: list[str] = field(default_factory=lambda: ["table"])
    basepoint: int | None = None
    seed: int | None = None
    output: str = ""
    dump_cube: str = ""
    dump_complex: str = ""
    verify: bool = False
    progress: bool = False
    config: EngineConfig = field(default_factory=EngineConfig)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> JobSpec:
        formats = [
            f.strip() for f in (getattr(args, "format", "") or "table").split(",")
            if f.strip()
        ]
        for f in formats:
            if f not in FORMATS:
                raise DiagramError(f"未知输出格式 {f!r}，可选 {', '.join(FORMATS)}")
        return cls(
            pd=args.pd or "",
            name=args.name or "",
            gen=args.gen or "",
            corpus=list(args.corpus or []),
            mirror=args.mirror,
            theory=getattr(args, "theory", "odd"),
            reduced=getattr(args, "reduced", False),
            ring=Ring(getattr(args, "ring", "Z")),
            formats=formats,
            basepoint=getattr(args, "basepoint", None),
            seed=args.seed,
            output=getattr(args, "output", "") or "",
            dump_cube=getattr(args, "dump_cube", "") or "",
            dump_complex=getattr(args, "dump_complex", "") or "",
            verify=getattr(args, "verify", False),
            progress=getattr(args, "progress", False),
            config=engine_config(args),
        )

    @property
    def flavor(self) -> Flavor:
        if self.theory == "odd":
            return Flavor.REDUCED_ODD if self.reduced else Flavor.ODD
        return Flavor.REDUCED_EVEN if self.reduced else Flavor.EVEN

    def load_diagram(self) -> PlanarDiagram:
        d = load_diagram(
            pd=self.pd, name=self.name, gen=self.gen,
            corpus_paths=self.corpus, use_mirror=self.mirror,
        )
        cap = self.config.max_crossings
        if cap and d.crossing_count > cap:
            raise ResourceLimitError(
                f"{d.name or '输入'} 有 {d.crossing_count} 个交叉点，"
                f"超出上限 {cap}（可用 --max-crossings 调整）"
            )
        if self.flavor is Flavor.REDUCED_ODD and self.basepoint is not None:
            log.info("约化奇同调与基点无关，忽略 --basepoint")
        return d

    def compute(
        self,
        d: PlanarDiagram,
        budget: Budget | None = None,
        *,
        ring: Ring | None = None,
    ) -> HomologyTable:
        """构造链复形并求同调；按需写出立方体 / 链复形转储"""
        budget = budget or self.config.budget()
        flavor = self.flavor
        c = build_complex(
            d,
            Flavor.ODD if flavor is Flavor.REDUCED_ODD else flavor,
            self.basepoint if flavor is Flavor.REDUCED_EVEN else None,
            seed=self.seed,
            verify=self.verify,
            cube_limit=self.config.cube_limit,
            budget=budget,
            keep_cube=bool(self.dump_cube),
        )
        if self.dump_cube and c.cube is not None:
            save_json(c.cube.to_json(), self.dump_cube)
            log.info("立方体已写入 %s", self.dump_cube)
            c = replace(c, cube=None)
        if self.dump_complex:
            save_json(c.to_json(), self.dump_complex)
            log.info("链复形已写入 %s", self.dump_complex)

        table = self._homology(c, ring or self.ring, budget)
        return reduce_by_splitting(table) if flavor is Flavor.REDUCED_ODD else table

    def _homology(self, c: ChainComplex, ring: Ring, budget: Budget) -> HomologyTable:
        return homology(
            c, ring, workers=self.config.workers, budget=budget,
            progress=self.progress,
        )


def run(args: argparse.Namespace) -> None:
    """CLI 入口：compute"""
    spec = JobSpec.from_args(args)
    d = spec.load_diagram()
    table = spec.compute(d)

    for fmt in spec.formats:
        sys.stdout.write(render(table, fmt))
    if spec.output:
        save_json(table_to_json(table), spec.output)
        log.info("结果已写入 %s", Path(spec.output))
