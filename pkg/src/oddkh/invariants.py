"""由同调表导出的不变量：Jones 多项式、同调宽度、拟交错障碍、TB 上界、零缺省与挠元分布"""

from __future__ import annotations

import argparse
import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

from .chain import Flavor
from .diagram import PlanarDiagram, crossing_signs
from .homology import HomologyTable, Ring, compute_homology, reduce_by_splitting
from .polynomial import LaurentPolynomial
from .utils import Budget, DiagramError, EngineConfig, ResourceLimitError

log = logging.getLogger(__name__)

# 与 CLI 的 `invariant <kind>` 对应
KINDS = ("jones", "width", "tb", "qa", "zero-omitting", "torsion-profile")
TB_FLAVORS = ("even-z", "even-q", "reduced-even", "reduced-odd")


# --- Jones 多项式 ---


def jones_from_table(t: HomologyTable) -> LaurentPolynomial:
    """J(q) = Σ (-1)^i q^j rank H^{i,j}"""
    out: dict[int, int] = {}
    for (i, j), g in t.entries.items():
        out[j] = out.get(j, 0) + (-1) ** (i % 2) * g.rank
    return LaurentPolynomial(out)


def jones_skein_oracle(d: PlanarDiagram, limit: int = 0) -> LaurentPolynomial:
    """Kauffman 括号逐交叉点展开，按未闭合弧的配对方式合并相同中间状态。

    ⟨D⟩ = Σ_s (-q)^{负标记数} (q + q⁻¹)^{圈数}，
    J = (-1)^{n₋} q^{n₊ - 2n₋} ⟨D⟩；只作为独立校验路径使用。
    """
    n = d.crossing_count
    if limit and n > limit:
        raise ResourceLimitError(f"{n} 个交叉点超出括号展开上限 {limit}")
    loop = LaurentPolynomial.unknot()
    minus_q = LaurentPolynomial.monomial(1, -1)

    # 中间状态：未闭合弧两端的配对 -> 权重多项式
    frontier: dict[tuple[tuple[int, int], ...], LaurentPolynomial] = {
        (): LaurentPolynomial({0: 1}),
    }
    for a, b, c, e in d.crossings:
        nxt: dict[tuple[tuple[int, int], ...], LaurentPolynomial] = {}
        for key, weight in frontier.items():
            for pairs, factor in (
                (((a, e), (b, c)), None),
                (((a, b), (c, e)), minus_q),
            ):
                ends = dict(key)
                loops = 0
                for x, y in pairs:
                    loops += _connect(ends, x, y)
                w = weight * loop**loops
                if factor is not None:
                    w = w * factor
                k = tuple(sorted(ends.items()))
                nxt[k] = nxt[k] + w if k in nxt else w
        frontier = nxt
        log.debug("括号展开: %d 个中间状态", len(frontier))

    (bracket,) = frontier.values()
    bracket = bracket * loop**d.unknots
    signs = crossing_signs(d)
    n_plus = signs.count(1)
    n_minus = signs.count(-1)
    return bracket.shift(n_plus - 2 * n_minus) * (-1) ** n_minus


def _connect(ends: dict[int, int], x: int, y: int) -> int:
    """在边 x、y 的半边之间接一段弧；闭合成圈时返回 1"""
    end_x = x
    if x in ends:
        end_x = ends.pop(x)
        ends.pop(end_x)
    end_y = y
    if y in ends:
        end_y = ends.pop(y)
        ends.pop(end_y)
    if end_x == end_y:
        return 1
    ends[end_x] = end_y
    ends[end_y] = end_x
    return 0


# --- 同调宽度 ---


@dataclass(frozen=True)
class WidthReport:
    flavor: Flavor
    ring: Ring
    width: int
    diagonals: tuple[int, ...]  # 非零项所在的 j - 2i，升序
    torsion_included: bool = True

    @property
    def thin(self) -> bool:
        """非约化宽度 ≤ 2、约化宽度 ≤ 1 即为薄"""
        return self.width <= (1 if self.flavor.is_reduced else 2)

    def to_json(self) -> dict[str, Any]:
        return {
            "flavor": self.flavor.value,
            "ring": self.ring.value,
            "width": self.width,
            "diagonals": list(self.diagonals),
            "torsion_included": self.torsion_included,
            "thin": self.thin,
        }


def homological_width(t: HomologyTable, include_torsion: bool = True) -> WidthReport:
    diagonals = sorted({
        j - 2 * i
        for (i, j), g in t.entries.items()
        if g.rank or (include_torsion and g.torsion)
    })
    if not diagonals:
        raise ValueError(f"同调表为空，无法计算宽度（{t.name or '-'}）")
    width = (diagonals[-1] - diagonals[0]) // 2 + 1
    return WidthReport(t.flavor, t.ring, width, tuple(diagonals), include_torsion)


# --- 拟交错障碍 ---


@dataclass(frozen=True)
class QAReport:
    name: str
    widths: Mapping[str, WidthReport]
    determinant: int
    verdict: str

    @property
    def obstructed(self) -> bool:
        return self.verdict != "no obstruction"

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": 1,
            "name": self.name,
            "widths": {k: v.to_json() for k, v in self.widths.items()},
            "determinant": self.determinant,
            "verdict": self.verdict,
        }


def qa_obstruction(
    d: PlanarDiagram,
    *,
    config: EngineConfig | None = None,
    seed: int | None = None,
    budget: Budget | None = None,
) -> QAReport:
    """偶、奇两种理论中任一为厚即不是拟交错链环；薄不构成正面结论"""
    config = config or EngineConfig()
    budget = budget or config.budget()
    common: dict[str, Any] = {"config": config, "budget": budget, "seed": seed}
    even = compute_homology(d, "even", **common)
    reduced_even = compute_homology(d, "even", reduced=True, **common)
    odd = compute_homology(d, "odd", **common)
    reduced_odd = reduce_by_splitting(odd)
    widths = {
        "even": homological_width(even),
        "reduced-even": homological_width(reduced_even),
        "odd": homological_width(odd),
        "reduced-odd": homological_width(reduced_odd),
    }

    thick = []
    if not widths["reduced-even"].thin:
        thick.append("even-thick")
    if not widths["reduced-odd"].thin:
        thick.append("odd-thick")
    verdict = (
        f"not quasi-alternating ({', '.join(thick)})" if thick else "no obstruction"
    )

    jones = jones_from_table(even)
    det = jones.exact_divide(LaurentPolynomial.unknot()).modulus_at_i()
    log.info("拟交错检查 [%s]: %s（det = %d）", d.name or "-", verdict, det)
    return QAReport(d.name, widths, det, verdict)


# --- Thurston–Bennequin 上界 ---


def j_minus_i(t: HomologyTable) -> list[int]:
    """非零项（含挠元）的 j - i 值，升序"""
    values = sorted({j - i for (i, j) in t.entries})
    if not values:
        raise ValueError(f"同调表为空（{t.name or '-'}）")
    return values


@dataclass(frozen=True)
class TBReport:
    even_z: int | None = None
    even_q: int | None = None
    reduced_even: int | None = None
    reduced_odd: int | None = None

    def items(self) -> list[tuple[str, int]]:
        values = (self.even_z, self.even_q, self.reduced_even, self.reduced_odd)
        return [(k, v) for k, v in zip(TB_FLAVORS, values) if v is not None]

    def to_json(self) -> dict[str, Any]:
        return {"schema": 1, **dict(self.items())}


def tb_bound(
    *,
    even_z: HomologyTable | None = None,
    even_q: HomologyTable | None = None,
    reduced_even: HomologyTable | None = None,
    reduced_odd: HomologyTable | None = None,
) -> TBReport:
    """非约化表取 min(j - i)；约化表再减 1"""

    def bound(t: HomologyTable | None, offset: int) -> int | None:
        return None if t is None else j_minus_i(t)[0] + offset

    return TBReport(
        even_z=bound(even_z, 0),
        even_q=bound(even_q, 0),
        reduced_even=bound(reduced_even, -1),
        reduced_odd=bound(reduced_odd, -1),
    )


# --- 零缺省与挠元分布 ---


def is_zero_omitting(t: HomologyTable) -> bool:
    """奇同调在 i = 0 处没有自由部分"""
    if not t.flavor.is_odd:
        raise ValueError(f"零缺省只对奇同调定义，得到 {t.flavor.value}")
    return all(g.rank == 0 for (i, _), g in t.entries.items() if i == 0)


@dataclass(frozen=True)
class TorsionProfile:
    by_diagonal: Mapping[int, tuple[int, ...]]  # j - 2i -> 挠元阶（含重复，升序）
    free_diagonals: tuple[int, ...] = field(default=())

    @property
    def off_diagonal(self) -> dict[int, tuple[int, ...]]:
        """不含自由部分的对角线上的挠元"""
        return {
            k: v for k, v in self.by_diagonal.items() if k not in self.free_diagonals
        }

    def orders(self) -> set[int]:
        return {o for v in self.by_diagonal.values() for o in v}

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": 1,
            "free_diagonals": list(self.free_diagonals),
            "torsion": {str(k): list(v) for k, v in sorted(self.by_diagonal.items())},
            "off_diagonal": {
                str(k): list(v) for k, v in sorted(self.off_diagonal.items())
            },
        }


def torsion_profile(t: HomologyTable) -> TorsionProfile:
    if t.ring is not Ring.Z:
        raise ValueError("挠元分布需要 ℤ 系数同调表")
    by_diagonal: dict[int, list[int]] = {}
    free: set[int] = set()
    for (i, j), g in t.entries.items():
        if g.rank:
            free.add(j - 2 * i)
        if g.torsion:
            by_diagonal.setdefault(j - 2 * i, []).extend(g.torsion)
    return TorsionProfile(
        {k: tuple(sorted(v)) for k, v in sorted(by_diagonal.items())},
        tuple(sorted(free)),
    )


# --- CLI ---


def run(args: argparse.Namespace) -> None:
    """CLI 入口：invariant <kind>"""
    from .jobs import JobSpec

    spec = JobSpec.from_args(args)
    d = spec.load_diagram()
    budget = spec.config.budget()
    common: dict[str, Any] = {
        "config": spec.config, "budget": budget, "seed": spec.seed,
    }
    kind = args.kind
    report: dict[str, Any]
    text: str

    if kind == "jones":
        poly = jones_skein_oracle(d, spec.config.max_crossings)
        report = {"schema": 1, "name": d.name, "jones": poly.to_json()}
        text = str(poly)
    elif kind == "width":
        t = spec.compute(d, budget)
        w = homological_width(t)
        report = {"schema": 1, "name": d.name, **w.to_json()}
        text = (
            f"{w.flavor.value} {w.ring.value}: width {w.width} "
            f"({'thin' if w.thin else 'thick'}), diagonals {list(w.diagonals)}"
        )
    elif kind == "tb":
        tables = _tb_tables(d, args.flavors, common)
        tb = tb_bound(**tables)
        report = tb.to_json()
        text = "\n".join(f"{k}: {v}" for k, v in tb.items())
    elif kind == "qa":
        qa = qa_obstruction(d, **common)
        report = qa.to_json()
        lines = [
            f"{k}: width {w.width} ({'thin' if w.thin else 'thick'})"
            for k, w in qa.widths.items()
        ]
        lines.append(f"det: {qa.determinant}")
        lines.append(qa.verdict)
        text = "\n".join(lines)
    elif kind == "zero-omitting":
        t = compute_homology(d, "odd", **common)
        flag = is_zero_omitting(t)
        report = {"schema": 1, "name": d.name, "zero_omitting": flag}
        text = "true" if flag else "false"
    else:
        t = spec.compute(d, budget, ring=Ring.Z)
        profile = torsion_profile(t)
        report = profile.to_json()
        text = "\n".join(
            f"j-2i={k}: {', '.join(f'Z{o}' for o in v)}"
            + ("" if k in profile.free_diagonals else "  (off-diagonal)")
            for k, v in profile.by_diagonal.items()
        ) or "no torsion"

    if args.json:
        print(json.dumps(report, ensure_ascii=False, indent=2))
    else:
        print(text)


def _tb_tables(
    d: PlanarDiagram, flavors: str, common: Mapping[str, Any],
) -> dict[str, HomologyTable]:
    wanted = [f.strip() for f in flavors.split(",") if f.strip()]
    unknown = set(wanted) - set(TB_FLAVORS)
    if unknown:
        raise DiagramError(f"未知的 TB 类型 {sorted(unknown)}，可选 {TB_FLAVORS}")
    tables: dict[str, HomologyTable] = {}
    if "even-z" in wanted or "even-q" in wanted:
        even = compute_homology(d, "even", **common)
        if "even-z" in wanted:
            tables["even_z"] = even
        if "even-q" in wanted:
            tables["even_q"] = even.over_rationals()
    if "reduced-even" in wanted:
        tables["reduced_even"] = compute_homology(d, "even", reduced=True, **common)
    if "reduced-odd" in wanted:
        tables["reduced_odd"] = compute_homology(d, "odd", reduced=True, **common)
    return tables
