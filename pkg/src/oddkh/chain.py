"""双分次链复形：奇理论（外代数 m_odd / Δ_odd）与偶理论（截断多项式 Frobenius 映射）。

生成元 = (状态, 圈标签子集)。奇理论中子集表示楔积 X_{a1}∧…∧X_{ak}（标签升序），
偶理论中表示在这些圈上取 X、其余圈取 1 的张量积。两种理论共用同一组基。
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .cube import (
    DEFAULT_CUBE_LIMIT,
    CubeEdge,
    Face,
    FaceType,
    ResolutionCube,
    build_cube,
    even_edge_signs,
    solve_edge_assignment,
)
from .diagram import PlanarDiagram, writhe
from .polynomial import LaurentPolynomial
from .sparse import SparseMatrix
from .utils import Bidegree, Budget, ConsistencyError, DiagramError

log = logging.getLogger(__name__)

Monomial = tuple[int, ...]
# 边映射在某个基元上的像：[(系数, 目标基元), ...]
Terms = list[tuple[int, Monomial]]


class Flavor(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"
    REDUCED_EVEN = "reduced-even"
    REDUCED_ODD = "reduced-odd"  # 只由分裂定理导出，不构造链复形

    @property
    def is_odd(self) -> bool:
        return self in (Flavor.ODD, Flavor.REDUCED_ODD)

    @property
    def is_reduced(self) -> bool:
        return self in (Flavor.REDUCED_EVEN, Flavor.REDUCED_ODD)


@dataclass(frozen=True, slots=True)
class ExteriorMonomial:
    """带系数的楔积单项式，circles 为升序标签"""

    circles: Monomial
    coefficient: int = 1

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    def degree(self, circle_count: int) -> int:
        return circle_count - 2 * len(self.circles)


ZERO = ExteriorMonomial((), 0)


def canonical_wedge(labels: Sequence[int]) -> tuple[int, Monomial]:
    """把楔积因子排成升序，返回 (置换符号, 升序标签)；有重复因子时为 (0, ())"""
    if len(set(labels)) != len(labels):
        return 0, ()
    inversions = sum(
        1 for a, b in itertools.combinations(labels, 2) if a > b
    )
    return (-1 if inversions % 2 else 1), tuple(sorted(labels))


def m_odd(edge: CubeEdge, x: ExteriorMonomial) -> ExteriorMonomial:
    """合并：两个合并圈都替换为新圈标签；同时含两者时为 0"""
    merged = edge.after[0]
    labels = [merged if c in edge.before else c for c in x.circles]
    sign, mono = canonical_wedge(labels)
    if not sign:
        return ZERO
    return ExteriorMonomial(mono, sign * x.coefficient)


def delta_odd(edge: CubeEdge, x: ExteriorMonomial) -> list[ExteriorMonomial]:
    """分裂：经 η（分裂圈 ↦ X1）改写后左楔 (X1 − X2)"""
    (split,) = edge.before
    first, second = edge.after
    base = [first if c == split else c for c in x.circles]
    out: list[ExteriorMonomial] = []
    for lead, coeff in ((first, 1), (second, -1)):
        sign, mono = canonical_wedge([lead, *base])
        if sign:
            out.append(ExteriorMonomial(mono, coeff * sign * x.coefficient))
    return out


def even_merge(edge: CubeEdge, x: ExteriorMonomial) -> ExteriorMonomial:
    """m(1⊗1)=1, m(1⊗X)=m(X⊗1)=X, m(X⊗X)=0"""
    hits = [c for c in x.circles if c in edge.before]
    if len(hits) == 2:
        return ZERO
    merged = edge.after[0]
    mono = tuple(sorted(merged if c in edge.before else c for c in x.circles))
    return ExteriorMonomial(mono, x.coefficient)


def even_split(edge: CubeEdge, x: ExteriorMonomial) -> list[ExteriorMonomial]:
    """Δ(1)=1⊗X+X⊗1, Δ(X)=X⊗X"""
    (split,) = edge.before
    first, second = edge.after
    rest = [c for c in x.circles if c != split]
    if len(rest) < len(x.circles):
        return [ExteriorMonomial(tuple(sorted([*rest, first, second])), x.coefficient)]
    return [
        ExteriorMonomial(tuple(sorted([*rest, first])), x.coefficient),
        ExteriorMonomial(tuple(sorted([*rest, second])), x.coefficient),
    ]


def edge_map(edge: CubeEdge, mono: Monomial, odd: bool) -> Terms:
    x = ExteriorMonomial(mono)
    if edge.kind == "merge":
        image = m_odd(edge, x) if odd else even_merge(edge, x)
        return [] if image.is_zero else [(image.coefficient, image.circles)]
    images = delta_odd(edge, x) if odd else even_split(edge, x)
    return [(y.coefficient, y.circles) for y in images if not y.is_zero]


@dataclass(frozen=True, slots=True)
class Generator:
    state: int  # 状态掩码
    monomial: Monomial


@dataclass(frozen=True, slots=True)
class StateBasis:
    """一个状态上的基：圈标签子集，q 次数 top - 2·|子集|"""

    mask: int
    i: int
    top: int  # 空子集的 j
    labels: tuple[int, ...]
    marked: int | None = None  # 约化时必须出现的圈

    def _size(self, j: int) -> int | None:
        diff = self.top - j
        if diff < 0 or diff % 2:
            return None
        k = diff // 2
        return k if k <= len(self.labels) else None

    def count(self, j: int) -> int:
        k = self._size(j)
        if k is None:
            return 0
        if self.marked is None:
            return math.comb(len(self.labels), k)
        return math.comb(len(self.labels) - 1, k - 1) if k else 0

    def monomials(self, j: int) -> list[Monomial]:
        k = self._size(j)
        if k is None:
            return []
        if self.marked is None:
            return list(itertools.combinations(self.labels, k))
        if not k:
            return []
        others = [c for c in self.labels if c != self.marked]
        return sorted(
            tuple(sorted((self.marked, *combo)))
            for combo in itertools.combinations(others, k - 1)
        )

    def j_values(self) -> range:
        low = self.top - 2 * len(self.labels)
        high = self.top - (2 if self.marked is not None else 0)
        return range(low, high + 1, 2)


@dataclass(frozen=True)
class Strand:
    """固定 j 的一条链复形：blocks[i] 为有序基，differentials[i]: C^i → C^{i+1}"""

    j: int
    blocks: dict[int, tuple[Generator, ...]]
    differentials: dict[int, SparseMatrix]

    def dims(self) -> dict[int, int]:
        return {i: len(g) for i, g in self.blocks.items()}


@dataclass(frozen=True)
class ChainComplex:
    """按 j 分条惰性生成的链复形；只保存每个状态的基描述、边与边符号"""

    flavor: Flavor
    diagram: PlanarDiagram
    writhe: int
    signs: tuple[int, ...]
    states: tuple[StateBasis, ...] = field(compare=False, repr=False)
    edges: tuple[CubeEdge, ...] = field(compare=False, repr=False)
    shifts: tuple[int, int] = (0, 0)
    basepoint: int | None = None
    cube: ResolutionCube | None = field(default=None, compare=False, repr=False)

    @cached_property
    def _out_edges(self) -> dict[int, list[tuple[CubeEdge, int]]]:
        out: dict[int, list[tuple[CubeEdge, int]]] = {}
        for edge, sign in zip(self.edges, self.signs):
            out.setdefault(edge.source, []).append((edge, sign))
        return out

    def dims(self) -> dict[Bidegree, int]:
        dh, dq = self.shifts
        out: dict[Bidegree, int] = {}
        for st in self.states:
            for j in st.j_values():
                size = st.count(j)
                if size:
                    key = (st.i + dh, j + dq)
                    out[key] = out.get(key, 0) + size
        return dict(sorted(out.items()))

    def strand_sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (_, j), size in self.dims().items():
            out[j] = out.get(j, 0) + size
        return out

    def j_values(self) -> list[int]:
        return sorted(self.strand_sizes())

    def strand(self, j: int) -> Strand:
        dh, dq = self.shifts
        j0 = j - dq
        odd = self.flavor.is_odd
        blocks: dict[int, list[Generator]] = {}
        row_of: dict[int, dict[Monomial, int]] = {}
        for st in self.states:
            monos = st.monomials(j0)
            if not monos:
                continue
            gens = blocks.setdefault(st.i + dh, [])
            row_of[st.mask] = {m: len(gens) + pos for pos, m in enumerate(monos)}
            gens.extend(Generator(st.mask, m) for m in monos)

        differentials: dict[int, SparseMatrix] = {}
        for i, gens in blocks.items():
            cols: list[dict[int, int]] = []
            for g in gens:
                column: dict[int, int] = {}
                for edge, sign in self._out_edges.get(g.state, ()):
                    terms = edge_map(edge, g.monomial, odd)
                    if not terms:
                        continue
                    rows = row_of.get(edge.target, {})
                    for coef, target in terms:
                        row = rows.get(target)
                        if row is None:
                            raise ConsistencyError(
                                f"边 {edge.crossing} 的像 {target} 不在目标状态的基中"
                            )
                        value = column.get(row, 0) + sign * coef
                        if value:
                            column[row] = value
                        else:
                            column.pop(row, None)
                cols.append(column)
            target_block = blocks.get(i + 1)
            if target_block is None:
                if any(cols):
                    raise ConsistencyError(f"块 ({i},{j}) 的微分没有目标块")
                continue
            differentials[i] = SparseMatrix(len(target_block), len(cols), tuple(cols))
        return Strand(
            j,
            {i: tuple(g) for i, g in sorted(blocks.items())},
            dict(sorted(differentials.items())),
        )

    def strands(self) -> Iterator[Strand]:
        for j in self.j_values():
            yield self.strand(j)

    @cached_property
    def _assembled(self) -> tuple[dict[Bidegree, tuple[Generator, ...]], dict[Bidegree, SparseMatrix]]:
        blocks: dict[Bidegree, tuple[Generator, ...]] = {}
        differentials: dict[Bidegree, SparseMatrix] = {}
        for s in self.strands():
            blocks.update({(i, s.j): g for i, g in s.blocks.items()})
            differentials.update({(i, s.j): m for i, m in s.differentials.items()})
        return dict(sorted(blocks.items())), dict(sorted(differentials.items()))

    @property
    def blocks(self) -> dict[Bidegree, tuple[Generator, ...]]:
        """全部分块；会一次性生成所有条，只用于小图与转储"""
        return self._assembled[0]

    @property
    def differentials(self) -> dict[Bidegree, SparseMatrix]:
        return self._assembled[1]

    def differential(self, i: int, j: int) -> SparseMatrix:
        """缺失时返回相应尺寸的零矩阵"""
        s = self.strand(j)
        if i in s.differentials:
            return s.differentials[i]
        return SparseMatrix.zeros(len(s.blocks.get(i + 1, ())), len(s.blocks.get(i, ())))

    def to_json(self) -> dict[str, Any]:
        blocks: list[dict[str, int]] = []
        differentials: list[dict[str, Any]] = []
        for s in self.strands():
            blocks.extend({"i": i, "j": s.j, "dim": len(g)} for i, g in s.blocks.items())
            differentials.extend(
                {"i": i, "j": s.j, **m.to_json()} for i, m in s.differentials.items()
            )
        return {
            "schema": 1,
            "flavor": self.flavor.value,
            "diagram": self.diagram.name,
            "writhe": self.writhe,
            "shifts": list(self.shifts),
            "basepoint": self.basepoint,
            "blocks": sorted(blocks, key=lambda b: (b["i"], b["j"])),
            "differentials": sorted(differentials, key=lambda m: (m["i"], m["j"])),
        }


def _compose(
    terms: Terms, edge: CubeEdge, odd: bool,
) -> dict[Monomial, int]:
    acc: dict[Monomial, int] = {}
    for coef, mono in terms:
        for c2, m2 in edge_map(edge, mono, odd):
            acc[m2] = acc.get(m2, 0) + coef * c2
    return {m: v for m, v in acc.items() if v}


def face_types(
    cube: ResolutionCube, odd: bool = True,
) -> Iterator[tuple[Face, FaceType]]:
    """逐面比较两条无符号复合路径，取第一个使任一路径非零的基元判定面类型"""
    edges = cube.edges
    for face in cube.faces():
        e1, e2, e3, e4 = (edges[e] for e in face)
        kind = FaceType.FREE
        for mono in _basis(cube.resolutions[e1.source].labels):
            a = _compose(edge_map(e1, mono, odd), e2, odd)
            b = _compose(edge_map(e3, mono, odd), e4, odd)
            if not a and not b:
                continue
            if a == b:
                kind = FaceType.COMMUTE
            elif a == {m: -v for m, v in b.items()}:
                kind = FaceType.ANTICOMMUTE
            else:
                raise ConsistencyError(
                    f"面 {face}（交叉点 {e1.crossing}）既不交换也不反交换"
                )
            break
        yield face, kind


def _basis(labels: Sequence[int]) -> Iterator[Monomial]:
    for k in range(len(labels) + 1):
        yield from itertools.combinations(labels, k)


def _layout(
    cube: ResolutionCube, reduced: bool, basepoint: int | None,
) -> tuple[StateBasis, ...]:
    out: list[StateBasis] = []
    for st in cube.states:
        res = cube.resolutions[st.mask]
        g = cube.grading(st.mask)
        out.append(StateBasis(
            mask=st.mask,
            i=g.i,
            top=g.j + res.circle_count + (1 if reduced else 0),
            labels=res.labels,
            marked=res.circle_of[basepoint] if basepoint is not None else None,
        ))
    return tuple(out)


def build_complex(
    d: PlanarDiagram,
    flavor: Flavor = Flavor.ODD,
    basepoint: int | None = None,
    *,
    arrow_flips: Sequence[int] | None = None,
    seed: int | None = None,
    verify: bool = False,
    cube_limit: int = DEFAULT_CUBE_LIMIT,
    budget: Budget | None = None,
    fault_injection: bool = False,
    keep_cube: bool = False,
) -> ChainComplex:
    """构造奇 / 偶 / 约化偶链复形；矩阵在取条时才生成，keep_cube 保留立方体供转储"""
    if flavor is Flavor.REDUCED_ODD:
        raise ValueError("约化奇同调由 reduce_by_splitting 从非约化表导出")
    odd = flavor is Flavor.ODD
    reduced = flavor is Flavor.REDUCED_EVEN

    bp: int | None = None
    if reduced:
        bp = basepoint if basepoint is not None else d.strand_labels[0]
        if bp not in d.strand_labels:
            raise DiagramError(f"基点 {bp} 不是该图的边编号")

    cube = build_cube(d, arrow_flips, seed=seed, limit=cube_limit, budget=budget)
    states = _layout(cube, reduced, bp)

    if odd:
        signs = solve_edge_assignment(cube, face_types(cube), budget=budget)
        if fault_injection:
            _inject_fault(signs, face_types(cube))
    else:
        signs = even_edge_signs(cube)
        if fault_injection:
            log.warning("故障注入只作用于奇理论，已忽略")
    cube.signs = signs

    c = ChainComplex(
        flavor=flavor,
        diagram=d,
        writhe=writhe(d),
        signs=tuple(signs),
        states=states,
        edges=tuple(cube.edges),
        basepoint=bp,
        cube=cube if keep_cube else None,
    )
    sizes = c.strand_sizes()
    peak = max(sizes.values(), default=0)
    if budget:
        budget.charge(states=len(states), generators=peak)
    log.info(
        "%s 链复形 [%s]: %d 个交叉点, %d 个生成元, %d 条 (最大 %d)",
        flavor.value, d.name or "-", d.crossing_count, sum(sizes.values()),
        len(sizes), peak,
    )
    if verify or fault_injection:
        verify_differential(c)
    return c


def _inject_fault(signs: list[int], faces: Iterable[tuple[Face, FaceType]]) -> None:
    for face, kind in faces:
        if kind is not FaceType.FREE:
            signs[face[0]] = -signs[face[0]]
            log.warning("故障注入: 翻转边 %d 的符号", face[0])
            return
    log.warning("故障注入: 没有受约束的面，未注入")


def verify_differential(c: ChainComplex) -> None:
    """逐条检查 d∘d = 0，失败时抛出 ConsistencyError"""
    for s in c.strands():
        for i, first in s.differentials.items():
            second = s.differentials.get(i + 1)
            if second is None:
                continue
            product = second @ first
            if not product.is_zero():
                raise ConsistencyError(
                    f"d∘d ≠ 0: 块 ({i},{s.j}) → ({i + 2},{s.j}) 有 {product.nnz} 个非零元"
                    f"（{c.flavor.value}, {c.diagram.name or '-'}）"
                )


def d_squared_is_zero(c: ChainComplex) -> bool:
    try:
        verify_differential(c)
    except ConsistencyError:
        return False
    return True


def shift(c: ChainComplex, dh: int, dq: int) -> ChainComplex:
    """分次平移 (i,j) → (i+dh, j+dq)"""
    return dataclasses.replace(c, shifts=(c.shifts[0] + dh, c.shifts[1] + dq))


def euler_characteristic(c: ChainComplex) -> LaurentPolynomial:
    """χ_q = Σ (-1)^i q^j dim C^{i,j}"""
    out: dict[int, int] = {}
    for (i, j), size in c.dims().items():
        out[j] = out.get(j, 0) + (-1) ** (i % 2) * size
    return LaurentPolynomial(out)
