"""分解立方体：Kauffman 状态、分次、相邻边与边符号求解"""

from __future__ import annotations

import enum
import itertools
import logging
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .diagram import PlanarDiagram, Resolution, arrow_choices, resolve, writhe
from .utils import Budget, ConsistencyError, ResourceLimitError

log = logging.getLogger(__name__)

DEFAULT_CUBE_LIMIT = 20

# 立方体的 2-面：四条边的下标 (e1, e2, e3, e4)，e2∘e1 与 e4∘e3 为两条路径
Face = tuple[int, int, int, int]


@dataclass(frozen=True)
class State:
    """Kauffman 状态：markers[k] = 1 为正标记，0 为负标记"""

    markers: tuple[int, ...]

    @property
    def sigma(self) -> int:
        pos = sum(self.markers)
        return pos - (len(self.markers) - pos)

    @property
    def mask(self) -> int:
        return sum(bit << k for k, bit in enumerate(self.markers))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> State:
        return cls(tuple((mask >> k) & 1 for k in range(n)))

    def __str__(self) -> str:
        return "".join("+" if b else "-" for b in self.markers) or "∅"


@dataclass(frozen=True)
class Grading:
    i: int
    j: int


class FaceType(enum.Enum):
    COMMUTE = "commute"
    ANTICOMMUTE = "anticommute"
    FREE = "free"  # 两条路径均为零映射


@dataclass(frozen=True)
class CubeEdge:
    """相邻状态对 s₊ → s₋（在 crossing 处由正标记改为负标记）"""

    source: int  # 状态掩码
    target: int
    crossing: int
    kind: str  # "merge" | "split"
    before: tuple[int, ...]  # 源状态中经过该交叉点的圈（合并时 2 个，分裂时 1 个）
    after: tuple[int, ...]  # 目标状态中的对应圈（合并时 1 个；分裂时按箭头 (X1, X2)）

    def to_json(self, n: int, sign: int = 1) -> dict[str, Any]:
        return {
            "source": str(State.from_mask(self.source, n)),
            "target": str(State.from_mask(self.target, n)),
            "crossing": self.crossing,
            "kind": self.kind,
            "before": list(self.before),
            "after": list(self.after),
            "sign": sign,
        }


@dataclass
class ResolutionCube:
    """2ⁿ 个顶点的分解立方体；signs 默认全为 +1，由 chain 模块求解后写入"""

    diagram: PlanarDiagram
    arrow_flips: tuple[int, ...]
    states: list[State]
    resolutions: dict[int, Resolution]
    edges: list[CubeEdge]
    edge_index: dict[tuple[int, int], int]
    signs: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.signs:
            self.signs = [1] * len(self.edges)

    @property
    def n(self) -> int:
        return self.diagram.crossing_count

    def grading(self, mask: int) -> Grading:
        return gradings(self.diagram, State.from_mask(mask, self.n))

    def faces(self) -> Iterator[Face]:
        """遍历所有 2-面，按 (底状态字典序, k1, k2) 排列"""
        idx = self.edge_index
        for state in self.states:
            s = state.mask
            ones = [k for k in range(self.n) if (s >> k) & 1]
            for k1, k2 in itertools.combinations(ones, 2):
                yield (
                    idx[(s, k1)],
                    idx[(s ^ (1 << k1), k2)],
                    idx[(s, k2)],
                    idx[(s ^ (1 << k2), k1)],
                )

    def is_tree_edge(self, e: int) -> bool:
        """规范生成树：s 在 k 之后的交叉点上全为正标记"""
        edge = self.edges[e]
        full = (1 << self.n) - 1
        return edge.source | ((1 << (edge.crossing + 1)) - 1) == full

    def to_json(self) -> dict[str, Any]:
        n = self.n
        return {
            "schema": 1,
            "diagram": self.diagram.to_json(),
            "arrow_flips": list(self.arrow_flips),
            "vertices": [
                {
                    "state": str(st),
                    "i": self.grading(st.mask).i,
                    "j": self.grading(st.mask).j,
                    "circles": [list(c) for c in self.resolutions[st.mask].circles],
                }
                for st in self.states
            ],
            "edges": [e.to_json(n, s) for e, s in zip(self.edges, self.signs)],
        }


def enumerate_states(
    d: PlanarDiagram, limit: int = DEFAULT_CUBE_LIMIT,
) -> list[State]:
    """按字典序列出全部 2ⁿ 个状态"""
    n = d.crossing_count
    if limit and n > limit:
        raise ResourceLimitError(f"{n} 个交叉点超出立方体上限 {limit}")
    return [State(m) for m in itertools.product((0, 1), repeat=n)]


def gradings(d: PlanarDiagram, s: State) -> Grading:
    w = writhe(d)
    sigma = s.sigma
    return Grading(i=(w - sigma) // 2, j=(3 * w - sigma) // 2)


def _edges_from(
    d: PlanarDiagram,
    resolutions: Mapping[int, Resolution],
    states: Sequence[State],
) -> list[CubeEdge]:
    edges: list[CubeEdge] = []
    for state in states:
        s = state.mask
        src = resolutions[s]
        for k in range(d.crossing_count):
            if not (s >> k) & 1:
                continue
            t = s ^ (1 << k)
            dst = resolutions[t]
            a, b, c, e = d.crossings[k]
            delta = dst.circle_count - src.circle_count
            if delta == -1:
                before = tuple(sorted({src.circle_of[a], src.circle_of[b]}))
                edges.append(CubeEdge(s, t, k, "merge", before, (dst.circle_of[a],)))
            elif delta == 1:
                arrow = dst.arrows[k]
                edges.append(CubeEdge(
                    s, t, k, "split", (src.circle_of[a],), (arrow.source, arrow.target),
                ))
            else:
                raise ConsistencyError(
                    f"状态 {state} 在交叉点 {k} 处圈数变化 {delta}（应为 ±1）"
                )
    return edges


def build_cube(
    d: PlanarDiagram,
    arrow_flips: Sequence[int] | None = None,
    *,
    seed: int | None = None,
    limit: int = DEFAULT_CUBE_LIMIT,
    budget: Budget | None = None,
) -> ResolutionCube:
    flips = tuple(arrow_flips) if arrow_flips is not None else arrow_choices(d, seed)
    states = enumerate_states(d, limit)
    if budget:
        budget.charge(states=len(states))
    resolutions: dict[int, Resolution] = {}
    for count, state in enumerate(states):
        resolutions[state.mask] = resolve(d, state, flips)
        if budget and count % 1024 == 0:
            budget.check("状态分解")
    edges = _edges_from(d, resolutions, states)
    log.debug("立方体: %d 个状态, %d 条边", len(states), len(edges))
    return ResolutionCube(
        diagram=d,
        arrow_flips=flips,
        states=states,
        resolutions=resolutions,
        edges=edges,
        edge_index={(e.source, e.crossing): idx for idx, e in enumerate(edges)},
    )


def adjacent_pairs(
    d: PlanarDiagram, arrow_flips: Sequence[int] | None = None,
) -> list[CubeEdge]:
    return build_cube(d, arrow_flips, limit=0).edges


def solve_edge_assignment(
    cube: ResolutionCube,
    face_parity: Mapping[Face, FaceType] | Iterable[tuple[Face, FaceType]],
    *,
    budget: Budget | None = None,
) -> list[int]:
    """在 GF(2) 上求边符号，使每个 2-面的带符号路径相互抵消。

    变量为非树边（树边固定为 +1）；交换面方程 x1+x2+x3+x4 = 1，
    反交换面方程 = 0，零面不约束。自由变量取 0。
    face_parity 可以是逐面产出的迭代器，不必整体驻留内存。
    """
    if isinstance(face_parity, Mapping):
        face_parity = face_parity.items()
    var_of: dict[int, int] = {}
    for e in range(len(cube.edges)):
        if not cube.is_tree_edge(e):
            var_of[e] = len(var_of)

    # 主元表：{最高位: (行掩码, 右端)}
    pivots: dict[int, tuple[int, int]] = {}
    constrained = 0
    for count, (face, kind) in enumerate(face_parity):
        if budget and count % 4096 == 0:
            budget.check("边符号")
        if kind is FaceType.FREE:
            continue
        constrained += 1
        row = 0
        rhs = 1 if kind is FaceType.COMMUTE else 0
        for e in face:
            if e in var_of:
                row ^= 1 << var_of[e]
        while row:
            top = row.bit_length() - 1
            pivot = pivots.get(top)
            if pivot is None:
                pivots[top] = (row, rhs)
                break
            row ^= pivot[0]
            rhs ^= pivot[1]
        else:
            if rhs:
                raise ConsistencyError(f"边符号方程组无解（面 {face} 处矛盾）")

    values = 0
    for top in sorted(pivots):
        row, rhs = pivots[top]
        rest = row & ~(1 << top)
        if rhs ^ ((rest & values).bit_count() & 1):
            values |= 1 << top

    signs = [1] * len(cube.edges)
    for e, v in var_of.items():
        if (values >> v) & 1:
            signs[e] = -1
    log.debug(
        "边符号: %d 个约束面, %d 个非树变量, 秩 %d, %d 条边取 -1",
        constrained, len(var_of), len(pivots), signs.count(-1),
    )
    return signs


def even_edge_signs(cube: ResolutionCube) -> list[int]:
    """偶理论标准符号 (-1)^{交叉点编号小于 k 的负标记个数}"""
    signs: list[int] = []
    for e in cube.edges:
        low = ~e.source & ((1 << e.crossing) - 1)
        signs.append(-1 if low.bit_count() % 2 else 1)
    return signs
