"""验收自检：结构正确性、Jones 校验、图表复现与理论间关系"""

from __future__ import annotations

import argparse
import logging
import random
import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from functools import cache
from importlib import resources
from typing import Any

import yaml

from .chain import Flavor, build_complex, euler_characteristic, verify_differential
from .corpus import diagram_from_record, full_corpus, parse_generator
from .diagram import PlanarDiagram, gen_braid_closure, gen_pretzel, mirror
from .homology import (
    HomologyTable,
    Ring,
    compute_homology,
    reduce_by_splitting,
    table_from_entries,
)
from .invariants import (
    is_zero_omitting,
    jones_from_table,
    jones_skein_oracle,
    qa_obstruction,
    tb_bound,
    torsion_profile,
)
from .utils import EngineConfig

log = logging.getLogger(__name__)

RANDOM_DIAGRAMS = 200
RANDOM_MAX_CROSSINGS = 8
ARROW_SEEDS = 10
BASEPOINT_SAMPLES = 6

# 同一个三叶结的三种辫子闭包（逐次 Markov 稳定化）
TREFOIL_BRAIDS = (([1, 1, 1], 2), ([1, 1, 1, 2], 3), ([1, 1, 1, 2, 3], 4))


class CheckFailed(AssertionError):
    """单项验收不通过"""


def check(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)


@cache
def expected() -> dict[str, Any]:
    text = resources.files("oddkh").joinpath("data/expected.yaml").read_text(
        encoding="utf-8",
    )
    return yaml.safe_load(text)


def expected_table(key: str) -> HomologyTable:
    spec = expected()["tables"][key]
    records = [
        {"i": e[0], "j": e[1], "rank": e[2], "torsion": e[3] if len(e) > 3 else []}
        for e in spec["entries"]
    ]
    return table_from_entries(
        records, Flavor(spec["flavor"]), Ring(spec["ring"]), spec["diagram"],
    )


def random_diagrams(
    count: int = RANDOM_DIAGRAMS,
    max_crossings: int = RANDOM_MAX_CROSSINGS,
    seed: int = 0,
) -> Iterator[PlanarDiagram]:
    """随机辫子闭包（2～4 股，1～max_crossings 个生成元）"""
    rng = random.Random(seed)
    for k in range(count):
        strands = rng.randint(2, 4)
        length = rng.randint(1, max_crossings)
        word = [
            rng.choice((1, -1)) * rng.randint(1, strands - 1) for _ in range(length)
        ]
        yield gen_braid_closure(word, strands, name=f"random-{k}")


def trefoil_diagrams() -> list[PlanarDiagram]:
    return [
        gen_braid_closure(word, strands, name=f"trefoil-b{strands}")
        for word, strands in TREFOIL_BRAIDS
    ]


def sample_basepoints(d: PlanarDiagram, count: int = BASEPOINT_SAMPLES) -> list[int]:
    """在边编号中等距取至多 count 个基点"""
    labels = d.strand_labels
    if len(labels) <= count:
        return list(labels)
    return [labels[k * len(labels) // count] for k in range(count)]


def corpus_diagrams(corpus_paths: list[str] | None = None) -> list[PlanarDiagram]:
    return [
        diagram_from_record(name, value)
        for name, value in full_corpus(corpus_paths).items()
    ]


@dataclass
class Criterion:
    number: int
    title: str
    run: Callable[[SelfTest], None]
    stretch: bool = False


class SelfTest:
    """按编号依次执行验收条目，汇总 PASS / FAIL / SKIP"""

    def __init__(
        self,
        config: EngineConfig,
        corpus_paths: list[str] | None = None,
        random_count: int = RANDOM_DIAGRAMS,
    ) -> None:
        self.config = config
        self.corpus_paths = corpus_paths or []
        self.random_count = random_count
        self.budget = config.budget()
        self._corpus: dict[str, PlanarDiagram] | None = None

    @property
    def corpus(self) -> dict[str, PlanarDiagram]:
        if self._corpus is None:
            self._corpus = {d.name: d for d in corpus_diagrams(self.corpus_paths)}
        return self._corpus

    def homology(self, d: PlanarDiagram, theory: str, **kwargs: Any) -> HomologyTable:
        return compute_homology(
            d, theory, config=self.config, budget=self.budget, verify=True, **kwargs,
        )

    def compare(self, got: HomologyTable, key: str) -> None:
        want = expected_table(key)
        check(
            dict(got.entries) == dict(want.entries),
            f"{key}: 期望 {_describe(want)}，实际 {_describe(got)}",
        )

    def run(self, stretch: bool = False) -> dict[int, str]:
        results: dict[int, str] = {}
        for criterion in CRITERIA:
            if criterion.stretch and not stretch:
                results[criterion.number] = "SKIP"
                log.info("[%2d] SKIP  %s（需要 --stretch）", criterion.number, criterion.title)
                continue
            t0 = time.time()
            try:
                criterion.run(self)
            except CheckFailed as e:
                results[criterion.number] = "FAIL"
                log.error("[%2d] FAIL  %s: %s", criterion.number, criterion.title, e)
                continue
            except _Skipped as e:
                results[criterion.number] = "SKIP"
                log.info("[%2d] SKIP  %s（%s）", criterion.number, criterion.title, e)
                continue
            results[criterion.number] = "PASS"
            log.info(
                "[%2d] PASS  %s（%.1fs）",
                criterion.number, criterion.title, time.time() - t0,
            )
        return results


class _Skipped(Exception):
    pass


def _describe(t: HomologyTable) -> str:
    return "{" + ", ".join(f"({i},{j}): {g}" for (i, j), g in sorted(t.entries.items())) + "}"


# --- 验收条目 ---


def _structural(st: SelfTest) -> None:
    diagrams = list(st.corpus.values()) + list(random_diagrams(st.random_count))
    for d in diagrams:
        for flavor in (Flavor.ODD, Flavor.EVEN, Flavor.REDUCED_EVEN):
            c = build_complex(
                d, flavor, cube_limit=st.config.cube_limit, budget=st.budget,
            )
            verify_differential(c)
    log.debug("d∘d = 0: %d 个图", len(diagrams))


def _euler_jones(st: SelfTest) -> None:
    for name, d in st.corpus.items():
        oracle = jones_skein_oracle(d)
        for flavor in (Flavor.ODD, Flavor.EVEN):
            chi = euler_characteristic(build_complex(d, flavor, budget=st.budget))
            check(chi == oracle, f"{name} {flavor.value}: χ_q = {chi}，括号展开 = {oracle}")
        table_chi = jones_from_table(st.homology(d, "odd"))
        check(table_chi == oracle, f"{name}: 同调表 Euler 特征 {table_chi} ≠ {oracle}")
        want = expected()["jones"].get(name)
        if want is not None:
            check(str(oracle) == want, f"{name}: Jones = {oracle}，期望 {want}")


def _ground_truth(st: SelfTest) -> None:
    st.compare(st.homology(st.corpus["unknot"], "odd"), "unknot_odd")
    hopf = st.corpus["hopf"]
    st.compare(st.homology(hopf, "odd"), "hopf_odd")
    dims = build_complex(hopf, Flavor.ODD).dims()
    want = {
        (0, 0): 1, (0, 2): 2, (0, 4): 1,
        (1, 2): 2, (1, 4): 2,
        (2, 2): 1, (2, 4): 2, (2, 6): 1,
    }
    check(dims == want, f"Hopf 奇链复形分块维数 {dims}")


def _fig_9_46(st: SelfTest) -> None:
    d = gen_pretzel([3, 3, -3], name="9_46")
    st.compare(st.homology(d, "odd", reduced=True), "pretzel_3_3_m3_reduced_odd")
    st.compare(st.homology(d, "even", reduced=True), "pretzel_3_3_m3_reduced_even")


def _fig_10_140(st: SelfTest) -> None:
    d = gen_pretzel([3, 4, -3], name="10_140")
    st.compare(st.homology(d, "odd", reduced=True), "pretzel_3_4_m3_reduced_odd")


def _qa_detection(st: SelfTest) -> None:
    for spec in ([3, 3, -3], [3, 4, -3]):
        d = gen_pretzel(spec)
        report = qa_obstruction(d, config=st.config, budget=st.budget)
        check(
            report.verdict == "not quasi-alternating (odd-thick)",
            f"pretzel {spec}: {report.verdict}",
        )
    trefoil = qa_obstruction(st.corpus["trefoil_right"], config=st.config)
    check(trefoil.verdict == "no obstruction", f"trefoil: {trefoil.verdict}")


def _fig_12n_475(st: SelfTest) -> None:
    d = st.corpus.get("12n_475")
    if d is None:
        raise _Skipped("语料中没有 12n_475，可通过 ODDKH_CORPUS 或 --corpus 提供")
    reduced_odd = st.homology(d, "odd", reduced=True)
    st.compare(reduced_odd, "12n_475_reduced_odd")
    tb = tb_bound(even_z=st.homology(d, "even"), reduced_odd=reduced_odd)
    want = expected()["tb_bounds"]["12n_475"]
    check(tb.even_z == want["even-z"], f"12n_475 even-z TB = {tb.even_z}")
    check(tb.reduced_odd == want["reduced-odd"], f"12n_475 reduced-odd TB = {tb.reduced_odd}")
    check(is_zero_omitting(reduced_odd), "12n_475 应为零缺省")


def _fig_torus(st: SelfTest) -> None:
    d = parse_generator("torus 4 -5")
    even = st.homology(d, "even")
    tb = tb_bound(even_z=even, even_q=even.over_rationals())
    want = expected()["tb_bounds"]["torus 4 -5"]
    check(tb.even_q == want["even-q"], f"T(4,-5) even-q TB = {tb.even_q}")
    check(tb.even_z == want["even-z"], f"T(4,-5) even-z TB = {tb.even_z}")


def _pretzel_torsion(n_values: tuple[int, ...]) -> Callable[[SelfTest], None]:
    def run(st: SelfTest) -> None:
        for n in n_values:
            for spec in ([n, n, -n], [n, n + 1, -n]):
                t = st.homology(gen_pretzel(spec), "odd")
                off = torsion_profile(t).off_diagonal
                orders = {o for v in off.values() for o in v}
                check(
                    any(o % n == 0 for o in orders),
                    f"pretzel {spec}: 对角线外挠元 {off} 中没有 {n} 阶",
                )

    return run


def _theory_relations(st: SelfTest) -> None:
    for name, d in st.corpus.items():
        odd_z = st.homology(d, "odd")
        odd_2 = st.homology(d, "odd", ring=Ring.Z2)
        even_2 = st.homology(d, "even", ring=Ring.Z2)
        even_z = st.homology(d, "even")
        reduced_even_2 = st.homology(d, "even", reduced=True, ring=Ring.Z2)

        check(
            _dims(odd_2) == _dims(even_2),
            f"{name}: 奇 / 偶 ℤ₂ 维数不一致",
        )
        reduce_by_splitting(odd_z)
        for bp in sample_basepoints(d):
            moved = st.homology(d, "even", reduced=True, ring=Ring.Z2, basepoint=bp)
            check(
                moved.entries == reduced_even_2.entries,
                f"{name}: 基点 {bp} 改变了约化偶 ℤ₂ 同调",
            )
        keys = set(even_2.entries) | {
            (i, j + s) for (i, j) in reduced_even_2.entries for s in (1, -1)
        }
        for i, j in keys:
            dim = even_2.get(i, j).rank
            split = reduced_even_2.get(i, j - 1).rank + reduced_even_2.get(i, j + 1).rank
            check(dim == split, f"{name}: ℤ₂ 约化关系在 ({i},{j}) 处不成立")
        for table_z, table_2 in ((odd_z, odd_2), (even_z, even_2)):
            keys = set(table_2.entries) | set(table_z.entries) | {
                (i - 1, j) for (i, j) in table_z.entries
            }
            for i, j in keys:
                dim = table_2.get(i, j).rank
                uct = (
                    table_z.get(i, j).rank
                    + table_z.get(i, j).two_torsion
                    + table_z.get(i + 1, j).two_torsion
                )
                check(dim == uct, f"{name}: 万有系数恒等式在 ({i},{j}) 处不成立")


def _invariance(st: SelfTest) -> None:
    diagrams = trefoil_diagrams()
    for theory in ("odd", "even"):
        base = st.homology(diagrams[0], theory)
        for d in diagrams[1:]:
            t = st.homology(d, theory)
            check(
                t.entries == base.entries,
                f"{d.name} {theory}: 同调表与 {diagrams[0].name} 不同",
            )
    for name, d in st.corpus.items():
        base = st.homology(d, "odd")
        for seed in range(ARROW_SEEDS):
            t = st.homology(d, "odd", seed=seed)
            check(t.entries == base.entries, f"{name}: seed={seed} 改变了奇同调表")
    d = st.corpus["trefoil_right"]
    q = st.homology(d, "even").over_rationals()
    q_mirror = st.homology(mirror(d), "even").over_rationals()
    check(
        set(q_mirror.entries) == q.negated_support(),
        "trefoil: 镜像的 ℚ 支撑集不是原支撑集的取负",
    )


def _dims(t: HomologyTable) -> dict[tuple[int, int], int]:
    return {k: g.rank for k, g in t.entries.items()}


CRITERIA: list[Criterion] = [
    Criterion(1, "结构正确性 d∘d = 0", _structural),
    Criterion(2, "χ_q 与括号展开 Jones 一致", _euler_jones),
    Criterion(3, "平凡结 / Hopf 链环", _ground_truth),
    Criterion(4, "(3,3,-3) 椒盐卷饼结约化同调", _fig_9_46),
    Criterion(5, "(3,4,-3) 椒盐卷饼结约化奇同调", _fig_10_140),
    Criterion(6, "拟交错障碍", _qa_detection),
    Criterion(7, "12n_475 约化奇同调与 TB 上界", _fig_12n_475),
    Criterion(8, "(4,-5) 环面结 TB 上界", _fig_torus, stretch=True),
    Criterion(9, "椒盐卷饼结 n 阶挠元（n = 3, 4, 5）", _pretzel_torsion((3, 4, 5))),
    Criterion(10, "理论间关系", _theory_relations),
    Criterion(11, "箭头选择与镜像不变性", _invariance),
]


def inject_fault(config: EngineConfig) -> None:
    """翻转一个受约束边的符号后构造链复形，d∘d ≠ 0 会抛出 ConsistencyError"""
    d = diagram_from_record("trefoil_right", full_corpus()["trefoil_right"])
    build_complex(d, Flavor.ODD, fault_injection=True, cube_limit=config.cube_limit)


def run(args: argparse.Namespace) -> None:
    """CLI 入口：selftest"""
    from .jobs import engine_config

    config = engine_config(args)
    if args.inject_fault:
        inject_fault(config)
        return

    suite = SelfTest(config, list(args.corpus or []), random_count=args.random)
    results = suite.run(stretch=args.stretch)
    counts = {k: list(results.values()).count(k) for k in ("PASS", "FAIL", "SKIP")}
    log.info(
        "自检完成: %d 通过, %d 失败, %d 跳过",
        counts["PASS"], counts["FAIL"], counts["SKIP"],
    )
    if counts["FAIL"]:
        failed = ", ".join(str(k) for k, v in results.items() if v == "FAIL")
        raise SystemExit(f"自检失败: 条目 {failed}")
