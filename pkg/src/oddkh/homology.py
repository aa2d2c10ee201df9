"""双分次同调：稀疏 Smith 标准形、ℤ / ℚ / ℤ₂ 同调与约化奇同调的分裂反卷积"""

from __future__ import annotations

import enum
import logging
import time
from collections import Counter
from collections.abc import Iterable, Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from sympy import factorint
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from .chain import ChainComplex, Flavor, build_complex
from .diagram import PlanarDiagram
from .sparse import SparseMatrix, rank_mod2
from .utils import Bidegree, Budget, ConsistencyError, EngineConfig, ProgressBar

log = logging.getLogger(__name__)


class Ring(str, enum.Enum):
    Z = "Z"
    Q = "Q"
    Z2 = "Z2"


@dataclass(frozen=True)
class SmithForm:
    factors: tuple[int, ...]  # 非零不变因子 d1 | d2 | …
    rank: int


@dataclass(frozen=True)
class BigradedGroup:
    """ℤ^rank ⊕ ⊕ ℤ_t（t 取 torsion 中的不变因子，升序）"""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def two_torsion(self) -> int:
        """偶数阶不变因子个数（⊗ℤ₂ 后的额外维数）"""
        return sum(1 for t in self.torsion if t % 2 == 0)

    def primary(self) -> Counter[int]:
        """初等因子（素数幂）多重集"""
        out: Counter[int] = Counter()
        for t in self.torsion:
            for p, e in factorint(t).items():
                out[p**e] += 1
        return out

    @classmethod
    def from_primary(cls, rank: int, primary: Counter[int]) -> BigradedGroup:
        by_prime: dict[int, list[int]] = {}
        for power, count in primary.items():
            if count <= 0:
                continue
            (p,) = factorint(power)
            by_prime.setdefault(p, []).extend([power] * count)
        length = max((len(v) for v in by_prime.values()), default=0)
        factors = [1] * length
        for powers in by_prime.values():
            powers.sort(reverse=True)
            for k, power in enumerate(powers):
                factors[k] *= power
        return cls(rank, tuple(sorted(factors)))

    def __add__(self, other: BigradedGroup) -> BigradedGroup:
        return BigradedGroup.from_primary(
            self.rank + other.rank, self.primary() + other.primary(),
        )

    def __sub__(self, other: BigradedGroup) -> BigradedGroup:
        """直和因子相减；不够减时抛出 ConsistencyError"""
        rank = self.rank - other.rank
        mine, theirs = self.primary(), other.primary()
        if rank < 0 or any(mine[k] < v for k, v in theirs.items()):
            raise ConsistencyError(f"群相减下溢: {self} ⊖ {other}")
        mine.subtract(theirs)
        return BigradedGroup.from_primary(rank, mine)

    def cell(self) -> str:
        """表格单元 "a,b_c"：ℤ^a ⊕ ℤ_c^b"""
        parts = [str(self.rank)] if self.rank else []
        for order, count in sorted(Counter(self.torsion).items()):
            parts.append(f"{count}_{order}")
        return ",".join(parts)

    def __str__(self) -> str:
        return self.cell() or "0"


ZERO_GROUP = BigradedGroup()


@dataclass(frozen=True)
class HomologyTable:
    """只保存非零项；错误奇偶性的 j 上查询返回零群"""

    entries: Mapping[Bidegree, BigradedGroup]
    flavor: Flavor
    ring: Ring
    name: str = field(default="", compare=False)

    @property
    def j_parity(self) -> int | None:
        if not self.entries:
            return None
        return next(iter(self.entries))[1] % 2

    def get(self, i: int, j: int) -> BigradedGroup:
        return self.entries.get((i, j), ZERO_GROUP)

    def support(self) -> list[Bidegree]:
        return sorted(self.entries)

    def i_range(self) -> range:
        if not self.entries:
            return range(0)
        iv = [i for i, _ in self.entries]
        return range(min(iv), max(iv) + 1)

    def j_values(self) -> list[int]:
        """同奇偶性的 j 值，从大到小"""
        if not self.entries:
            return []
        jv = [j for _, j in self.entries]
        return list(range(max(jv), min(jv) - 1, -2))

    def over_rationals(self) -> HomologyTable:
        """ℤ 表去掉挠部分即得 ℚ 表"""
        if self.ring is Ring.Q:
            return self
        if self.ring is not Ring.Z:
            raise ValueError("只能从 ℤ 表导出 ℚ 表")
        entries = {
            k: BigradedGroup(g.rank) for k, g in self.entries.items() if g.rank
        }
        return HomologyTable(entries, self.flavor, Ring.Q, self.name)

    def negated_support(self) -> set[Bidegree]:
        return {(-i, -j) for i, j in self.entries}


def _make_table(
    entries: Mapping[Bidegree, BigradedGroup], flavor: Flavor, ring: Ring, name: str,
) -> HomologyTable:
    clean = {k: entries[k] for k in sorted(entries) if not entries[k].is_zero}
    j_par = {j % 2 for _, j in clean}
    if len(j_par) > 1:
        raise ConsistencyError(f"同调表的 j 奇偶性不一致: {sorted(clean)}")
    return HomologyTable(clean, flavor, ring, name)


# --- Smith 标准形 ---


def smith_normal_form(m: SparseMatrix) -> SmithForm:
    """先用 ±1 主元（Markowitz 最小填充）稀疏消元，剩余部分交给 sympy 稠密 SNF"""
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for r, c, v in m.triplets():
        rows.setdefault(r, {})[c] = v
        cols.setdefault(c, set()).add(r)

    units = 0
    progressed = True
    while progressed:
        progressed = False
        for c in sorted(cols, key=lambda c: len(cols[c])):
            col = cols.get(c)
            if not col:
                continue
            best: tuple[int, int] | None = None
            for r in col:
                if rows[r][c] in (1, -1):
                    cost = (len(rows[r]) - 1) * (len(col) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, r)
                        if cost == 0:
                            break
            if best is None:
                continue
            _eliminate(rows, cols, best[1], c)
            units += 1
            progressed = True

    residual = _dense_factors(rows, cols)
    factors = (1,) * units + residual
    return SmithForm(factors=factors, rank=len(factors))


def _eliminate(
    rows: dict[int, dict[int, int]], cols: dict[int, set[int]], r: int, c: int,
) -> None:
    """以 (r, c) 处的单位元为主元清除其所在行列"""
    pivot_row = rows.pop(r)
    u = pivot_row[c]
    for r2 in list(cols[c]):
        if r2 == r:
            continue
        row2 = rows[r2]
        f = row2[c] * u
        for c2, v in pivot_row.items():
            nv = row2.get(c2, 0) - f * v
            if nv:
                if c2 not in row2:
                    cols[c2].add(r2)
                row2[c2] = nv
            elif c2 in row2:
                del row2[c2]
                cols[c2].discard(r2)
        if not row2:
            del rows[r2]
    for c2 in pivot_row:
        members = cols[c2]
        members.discard(r)
        if not members:
            del cols[c2]


def _dense_factors(
    rows: dict[int, dict[int, int]], cols: dict[int, set[int]],
) -> tuple[int, ...]:
    live_rows = sorted(r for r, row in rows.items() if row)
    live_cols = sorted(c for c, members in cols.items() if members)
    if not live_rows or not live_cols:
        return ()
    col_pos = {c: k for k, c in enumerate(live_cols)}
    dense = [[ZZ(0)] * len(live_cols) for _ in live_rows]
    for k, r in enumerate(live_rows):
        for c, v in rows[r].items():
            dense[k][col_pos[c]] = ZZ(v)
    log.debug("稠密 SNF 残块: %dx%d", len(live_rows), len(live_cols))
    dm = DomainMatrix(dense, (len(live_rows), len(live_cols)), ZZ)
    factors = [abs(int(f)) for f in invariant_factors(dm)]
    return tuple(sorted(f for f in factors if f))


# --- 同调 ---


def _strand_homology(
    j: int,
    dims: Mapping[int, int],
    matrices: Mapping[int, SparseMatrix],
    ring: Ring,
) -> dict[Bidegree, BigradedGroup]:
    """固定 j 的一条链复形 C^{*,j} 的同调"""
    ranks: dict[int, int] = {}
    torsion: dict[int, tuple[int, ...]] = {}
    for i, m in matrices.items():
        if ring is Ring.Z2:
            ranks[i] = rank_mod2(m)
        else:
            snf = smith_normal_form(m)
            ranks[i] = snf.rank
            torsion[i] = tuple(f for f in snf.factors if f > 1)
    out: dict[Bidegree, BigradedGroup] = {}
    for i, dim in dims.items():
        free = dim - ranks.get(i, 0) - ranks.get(i - 1, 0)
        tors = torsion.get(i - 1, ()) if ring is Ring.Z else ()
        if free < 0:
            raise ConsistencyError(f"({i},{j}) 处自由秩为负（{free}）")
        out[(i, j)] = BigradedGroup(free, tors)
    return out


# 工作进程中的链复形，由进程池初始化函数写入
_WORKER_COMPLEX: ChainComplex | None = None


def _init_worker(c: ChainComplex) -> None:
    global _WORKER_COMPLEX
    _WORKER_COMPLEX = c


def _strand_task(j: int, ring: Ring) -> dict[Bidegree, BigradedGroup]:
    assert _WORKER_COMPLEX is not None
    s = _WORKER_COMPLEX.strand(j)
    return _strand_homology(j, s.dims(), s.differentials, ring)


def homology(
    c: ChainComplex,
    ring: Ring = Ring.Z,
    *,
    workers: int = 1,
    budget: Budget | None = None,
    progress: bool = False,
) -> HomologyTable:
    """按 j 分条计算，每条用完即弃；workers > 1 时用进程池并行，结果按 j 确定性合并"""
    ring = Ring(ring)
    t0 = time.time()
    sizes = c.strand_sizes()
    js = sorted(sizes)
    parallel = workers > 1 and len(js) > 1
    if budget:
        peak = max(sizes.values(), default=0)
        budget.charge(
            states=len(c.states) * (workers if parallel else 1),
            generators=peak * (workers if parallel else 1),
        )

    bar = ProgressBar(len(js), desc="同调") if progress else None
    entries: dict[Bidegree, BigradedGroup] = {}
    if parallel:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(c,),
        ) as pool:
            futures = [pool.submit(_strand_task, j, ring) for j in js]
            for fut in futures:
                entries.update(fut.result())
                if bar:
                    bar.update()
                if budget:
                    budget.check("同调")
    else:
        for j in js:
            s = c.strand(j)
            entries.update(_strand_homology(j, s.dims(), s.differentials, ring))
            if bar:
                bar.update(extra=f"j={j}")
            if budget:
                budget.check("同调")
    if bar:
        bar.finish()

    table = _make_table(entries, c.flavor, ring, c.diagram.name)
    log.info(
        "%s 同调 (%s): %d 个非零项, 耗时 %.1fs",
        c.flavor.value, ring.value, len(table.entries), time.time() - t0,
    )
    return table


def reduce_by_splitting(t: HomologyTable) -> HomologyTable:
    """由 H^{i,j} = H̃^{i,j-1} ⊕ H̃^{i,j+1} 逐列自上而下反卷积出约化奇同调"""
    if t.flavor is not Flavor.ODD:
        raise ValueError(f"反卷积需要非约化奇同调表，得到 {t.flavor.value}")
    reduced: dict[Bidegree, BigradedGroup] = {}
    for i in t.i_range():
        js = [j for ii, j in t.entries if ii == i]
        if not js:
            continue
        above = ZERO_GROUP  # H̃^{i,j+1}
        for j in range(max(js), min(js) - 1, -2):
            below = t.get(i, j) - above  # H̃^{i,j-1}
            if not below.is_zero:
                reduced[(i, j - 1)] = below
            above = below
        if not above.is_zero:
            raise ConsistencyError(
                f"第 {i} 列反卷积后残留 {above}（位于 j={min(js) - 1}）"
            )
    return _make_table(reduced, Flavor.REDUCED_ODD, t.ring, t.name)


def compute_homology(
    d: PlanarDiagram,
    theory: str = "odd",
    *,
    reduced: bool = False,
    ring: Ring = Ring.Z,
    basepoint: int | None = None,
    seed: int | None = None,
    config: EngineConfig | None = None,
    budget: Budget | None = None,
    verify: bool = False,
    progress: bool = False,
) -> HomologyTable:
    """按理论 / 约化 / 系数环一站式计算同调表"""
    config = config or EngineConfig()
    budget = budget or config.budget()
    if theory == "odd":
        flavor = Flavor.ODD
    elif theory == "even":
        flavor = Flavor.REDUCED_EVEN if reduced else Flavor.EVEN
    else:
        raise ValueError(f"未知理论: {theory}")
    c = build_complex(
        d, flavor, basepoint if flavor is Flavor.REDUCED_EVEN else None,
        seed=seed, verify=verify, cube_limit=config.cube_limit, budget=budget,
    )
    table = homology(
        c, ring, workers=config.workers, budget=budget, progress=progress,
    )
    if theory == "odd" and reduced:
        return reduce_by_splitting(table)
    return table


def table_from_entries(
    entries: Iterable[Mapping[str, Any]], flavor: Flavor, ring: Ring, name: str = "",
) -> HomologyTable:
    """由 {i, j, rank, torsion} 记录构造同调表（JSON / YAML 夹具共用）"""
    groups = {
        (int(e["i"]), int(e["j"])): BigradedGroup(
            int(e.get("rank", 0)), tuple(sorted(int(t) for t in e.get("torsion", []))),
        )
        for e in entries
    }
    return _make_table(groups, flavor, ring, name)
