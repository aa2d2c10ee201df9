"""链环平面图：PD 码解析、生成器、交叉点符号与状态分解。

约定（全部模块共享）:
- PD 元组 X[a,b,c,d] 从进入的下穿边开始逆时针列出，下穿方向 a → c；
- 上穿方向 b → d 为正交叉（+1），d → b 为负交叉（-1）；
- 正标记（A 光滑化）连接 (a,d) 与 (b,c)，负标记连接 (a,b) 与 (c,d)；
- 圈的标签取其经过的最小边编号；不经过交叉点的平凡圈标签排在最大边编号之后。
"""

from __future__ import annotations

import logging
import random
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .utils import ConsistencyError, DiagramError

log = logging.getLogger(__name__)

PDTuple = tuple[int, int, int, int]
# (交叉点序号, 槽位 0..3)
Slot = tuple[int, int]

_X_RE = re.compile(
    r"X\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]"
)
_PD_RE = re.compile(r"PD\s*\[(.*)\]", re.DOTALL)


@dataclass(frozen=True)
class PlanarDiagram:
    """有向链环图（PD 码 + 平凡圈个数），构造时完成校验与定向"""

    crossings: tuple[PDTuple, ...]
    unknots: int = 0  # 不经过任何交叉点的分支数
    name: str = field(default="", compare=False)
    components: tuple[tuple[int, ...], ...] = field(
        init=False, compare=False, repr=False,
    )
    over_forward: tuple[bool, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        crossings = tuple(tuple(int(e) for e in x) for x in self.crossings)
        object.__setattr__(self, "crossings", crossings)
        if self.unknots < 0:
            raise DiagramError("平凡圈个数不能为负数")
        if not crossings and self.unknots == 0:
            raise DiagramError("空图：至少需要一个交叉点或一个平凡圈")
        components, over_forward = _orient(crossings)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "over_forward", over_forward)

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def edge_count(self) -> int:
        return 2 * len(self.crossings)

    @property
    def max_label(self) -> int:
        return max((e for x in self.crossings for e in x), default=0)

    @property
    def component_count(self) -> int:
        return len(self.components) + self.unknots

    @property
    def loop_labels(self) -> tuple[int, ...]:
        """平凡圈的合成标签"""
        top = self.max_label
        return tuple(range(top + 1, top + 1 + self.unknots))

    @property
    def strand_labels(self) -> tuple[int, ...]:
        """所有可作为基点的标签：边编号 + 平凡圈标签"""
        edges = sorted({e for x in self.crossings for e in x})
        return tuple(edges) + self.loop_labels

    def to_pd(self) -> str:
        if not self.crossings:
            return "PD[]"
        body = ",".join("X[{},{},{},{}]".format(*x) for x in self.crossings)
        return f"PD[{body}]"

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "pd": self.to_pd(),
            "unknots": self.unknots,
            "signs": crossing_signs(self),
            "writhe": writhe(self),
            "components": [list(c) for c in self.components],
        }


def _orient(
    crossings: tuple[PDTuple, ...],
) -> tuple[tuple[tuple[int, ...], ...], tuple[bool, ...]]:
    """沿股走一遍：求分支、校验编号连续性并确定每个交叉点上穿方向"""
    positions: dict[int, list[Slot]] = {}
    for x, tup in enumerate(crossings):
        if len(tup) != 4:
            raise DiagramError(f"第 {x + 1} 个交叉点需要 4 条边，实际为 {len(tup)} 条")
        for slot, e in enumerate(tup):
            positions.setdefault(e, []).append((x, slot))
    for e in sorted(positions):
        if len(positions[e]) != 2:
            raise DiagramError(
                f"边 {e} 出现 {len(positions[e])} 次（每条边必须恰好出现 2 次）"
            )

    over_forward: list[bool | None] = [None] * len(crossings)
    components: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for start in sorted(positions):
        if start in seen:
            continue
        cycle, entries = _walk(crossings, positions, start)
        seen.update(cycle)

        unders = {slot for _, slot in entries if slot % 2 == 0}
        if unders == {0, 2}:
            raise DiagramError(f"包含边 {start} 的分支定向不一致：下穿方向互相矛盾")
        reverse = unders == {2}
        if not unders:
            # 分支只从上方经过，由编号决定方向
            reverse = not _is_consecutive(cycle)
        if reverse:
            cycle = [cycle[0], *reversed(cycle[1:])]
            entries = [(x, (slot + 2) % 4) for x, slot in entries]
        if not _is_consecutive(cycle):
            raise DiagramError(
                f"包含边 {start} 的分支编号沿定向不连续: {cycle}（定向环不一致）"
            )
        for x, slot in entries:
            if slot % 2 == 1:
                over_forward[x] = slot == 1
        components.append(tuple(cycle))

    components.sort(key=min)
    return tuple(components), tuple(bool(f) for f in over_forward)


def _walk(
    crossings: tuple[PDTuple, ...],
    positions: dict[int, list[Slot]],
    start: int,
) -> tuple[list[int], list[Slot]]:
    """从边 start 出发沿股行走一圈，返回边序列与进入交叉点的槽位"""
    cycle = [start]
    entries: list[Slot] = []
    head = positions[start][0]
    while True:
        x, slot = head
        entries.append(head)
        out = (x, (slot + 2) % 4)
        nxt = crossings[x][out[1]]
        a, b = positions[nxt]
        head = b if a == out else a
        if nxt == start and head == positions[start][0]:
            return cycle, entries
        cycle.append(nxt)


def _is_consecutive(cycle: Sequence[int]) -> bool:
    lo = min(cycle)
    k = cycle.index(lo)
    rotated = list(cycle[k:]) + list(cycle[:k])
    return rotated == list(range(lo, lo + len(cycle)))


def _check_gap(gap: str, allowed: tuple[str, ...]) -> None:
    """两个交叉点之间只能有一个 , 或 ;"""
    piece = gap.strip()
    if piece in allowed:
        return
    if not piece:
        raise DiagramError("交叉点之间缺少分隔符 , 或 ;")
    raise DiagramError(f"无法解析的 PD 片段: {piece[:40]!r}")


def parse_pd(text: str, name: str = "") -> PlanarDiagram:
    """解析 `PD[X[a,b,c,d],...]` 或 `X[a,b,c,d];...`，`PD[]` 为零交叉平凡结"""
    text = text.strip()
    if not text:
        raise DiagramError("PD 码为空")
    m = _PD_RE.fullmatch(text)
    body = m.group(1) if m else text
    crossings: list[tuple[int, ...]] = []
    pos = 0
    for mm in _X_RE.finditer(body):
        _check_gap(body[pos:mm.start()], allowed=("",) if not crossings else (",", ";"))
        crossings.append(tuple(int(g) for g in mm.groups()))
        pos = mm.end()
    _check_gap(body[pos:], allowed=("", ",", ";") if crossings else ("",))
    if not crossings:
        if m:
            return PlanarDiagram((), unknots=1, name=name or "unknot")
        raise DiagramError(f"PD 码中没有交叉点: {text[:40]!r}")
    return PlanarDiagram(tuple(crossings), name=name)


def crossing_signs(d: PlanarDiagram) -> list[int]:
    return [1 if f else -1 for f in d.over_forward]


def writhe(d: PlanarDiagram) -> int:
    return sum(crossing_signs(d))


def mirror(d: PlanarDiagram) -> PlanarDiagram:
    """交换所有交叉点的上下穿，旋转元组使其仍从进入的下穿边开始"""
    flipped: list[PDTuple] = []
    for (a, b, c, e), forward in zip(d.crossings, d.over_forward):
        # 原上穿 b→d 变为下穿，从 b 开始；原上穿 d→b 则从 d 开始
        flipped.append((b, c, e, a) if forward else (e, a, b, c))
    return PlanarDiagram(tuple(flipped), unknots=d.unknots, name=mirror_name(d.name))


def mirror_name(name: str) -> str:
    if name.startswith("mirror(") and name.endswith(")"):
        return name[len("mirror("):-1]
    return f"mirror({name})" if name else ""


# --- 生成器 ---

_NE, _NW, _SW, _SE = 0, 1, 2, 3
Port = tuple[int, int]


class _Sketch:
    """平面草图：交叉点端口按逆时针 (NE, NW, SW, SE) 编号，端口两两连线"""

    def __init__(self) -> None:
        self.over_axis: list[int] = []  # 0: NE–SW 在上，1: NW–SE 在上
        self.links: dict[Port, Port] = {}

    def add_crossing(self, over_axis: int) -> int:
        self.over_axis.append(over_axis)
        return len(self.over_axis) - 1

    def link(self, p: Port, q: Port) -> None:
        self.links[p] = q
        self.links[q] = p

    def to_diagram(
        self, starts: Sequence[Port], unknots: int = 0, name: str = "",
    ) -> PlanarDiagram:
        n = len(self.over_axis)
        if len(self.links) != 4 * n:
            raise ConsistencyError("生成器草图存在未连接的端口")
        # 兜底：所有端口都可作为起点，保证每条股都被走到
        candidates = list(starts) + [(x, arm) for x in range(n) for arm in range(4)]
        edge_at: dict[Port, int] = {}
        entered: set[Port] = set()
        label = 1
        for start in candidates:
            x0, arm0 = start
            if start in entered or (x0, (arm0 + 2) % 4) in entered:
                continue
            arrive = start
            while True:
                entered.add(arrive)
                x, arm = arrive
                out = (x, (arm + 2) % 4)
                nxt = self.links[out]
                edge_at[out] = edge_at[nxt] = label
                label += 1
                arrive = nxt
                if arrive == start:
                    break

        crossings: list[PDTuple] = []
        for x in range(n):
            a0, a1 = (_NE, _SW) if self.over_axis[x] == 1 else (_NW, _SE)
            u_in = a0 if (x, a0) in entered else a1
            crossings.append(tuple(edge_at[(x, (u_in + k) % 4)] for k in range(4)))
        return PlanarDiagram(tuple(crossings), unknots=unknots, name=name)


def gen_pretzel(p: Sequence[int], name: str = "") -> PlanarDiagram:
    """(p_1,...,p_n) 椒盐卷饼链环：从左到右 n 列扭转，p_i > 0 时 NW–SE 股在上"""
    p = [int(v) for v in p]
    if len(p) < 2:
        raise DiagramError("椒盐卷饼链环至少需要 2 列扭转")
    if any(v == 0 for v in p):
        raise DiagramError(f"椒盐卷饼参数不能为 0: {p}")

    sk = _Sketch()
    columns = [[sk.add_crossing(1 if v > 0 else 0) for _ in range(abs(v))] for v in p]
    for col in columns:
        for upper, lower in zip(col, col[1:]):
            sk.link((upper, _SW), (lower, _NW))
            sk.link((upper, _SE), (lower, _NE))

    top_left = [(c[0], _NW) for c in columns]
    top_right = [(c[0], _NE) for c in columns]
    bottom_left = [(c[-1], _SW) for c in columns]
    bottom_right = [(c[-1], _SE) for c in columns]
    for k in range(len(columns) - 1):
        sk.link(top_right[k], top_left[k + 1])
        sk.link(bottom_right[k], bottom_left[k + 1])
    sk.link(top_left[0], top_right[-1])
    sk.link(bottom_left[0], bottom_right[-1])

    starts = [(x, arm) for col in columns for x in col for arm in (_NW, _NE)]
    label = name or "pretzel(" + ",".join(str(v) for v in p) + ")"
    return sk.to_diagram(starts, name=label)


def gen_braid_closure(
    word: Sequence[int], strands: int, name: str = "",
) -> PlanarDiagram:
    """辫子闭包：生成元 ±k 作用于第 k、k+1 股（自下而上），σ_k 为正交叉"""
    word = [int(g) for g in word]
    if strands < 1:
        raise DiagramError("辫子至少需要 1 股")
    for g in word:
        if g == 0 or abs(g) >= strands:
            raise DiagramError(f"辫子生成元 {g} 超出范围 [1, {strands - 1}]")

    sk = _Sketch()
    first: list[Port | None] = [None] * strands
    current: list[Port | None] = [None] * strands
    for g in word:
        k = abs(g) - 1
        x = sk.add_crossing(1 if g > 0 else 0)
        for pos, port in ((k, (x, _SW)), (k + 1, (x, _SE))):
            if current[pos] is None:
                first[pos] = port
            else:
                sk.link(current[pos], port)
        current[k] = (x, _NW)
        current[k + 1] = (x, _NE)

    free = 0
    for pos in range(strands):
        if current[pos] is None:
            free += 1
        else:
            sk.link(current[pos], first[pos])
    if not word and strands > 1:
        log.warning("空辫子词：闭包为 %d 分支平凡链环", strands)

    starts = [(x, arm) for x in range(len(word)) for arm in (_SW, _SE)]
    label = name or f"braid{strands}(" + ",".join(str(g) for g in word) + ")"
    return sk.to_diagram(starts, unknots=free, name=label)


def torus_word(p: int, q: int) -> list[int]:
    """(σ_1 ⋯ σ_{p-1})^q"""
    if p < 2 or q == 0:
        raise DiagramError(f"环面纽结参数不合法: ({p}, {q})")
    sign = 1 if q > 0 else -1
    return [sign * k for _ in range(abs(q)) for k in range(1, p)]


def gen_torus(p: int, q: int) -> PlanarDiagram:
    return gen_braid_closure(torus_word(p, q), p, name=f"T({p},{q})")


# --- 状态分解 ---


class _UnionFind:
    """并查集，根总是集合中的最小元素"""

    def __init__(self, items: Sequence[int]) -> None:
        self.parent = {v: v for v in items}

    def find(self, v: int) -> int:
        parent = self.parent
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra


@dataclass(frozen=True)
class Arrow:
    """交叉点处连接两段弧的箭头：source 圈 → target 圈"""

    crossing: int
    source: int
    target: int
    tail_slots: tuple[int, int]
    head_slots: tuple[int, int]


@dataclass(frozen=True)
class Resolution:
    """某个状态下的圈族 D_s"""

    circles: tuple[tuple[int, ...], ...]  # 每个圈经过的边（升序），按标签排序
    circle_of: Mapping[int, int]  # 边 / 平凡圈标签 -> 圈标签
    arrows: tuple[Arrow, ...]

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.circles)

    @property
    def circle_count(self) -> int:
        return len(self.circles)


def arrow_choices(d: PlanarDiagram, seed: int | None = None) -> tuple[int, ...]:
    """每个交叉点的箭头翻转位；seed 为 None 时全部取默认方向"""
    if seed is None:
        return (0,) * d.crossing_count
    rng = random.Random(seed)
    return tuple(rng.randrange(2) for _ in range(d.crossing_count))


def resolve(
    d: PlanarDiagram,
    s: Any,
    arrow_flips: Sequence[int] | None = None,
) -> Resolution:
    """按状态 s（State 或标记序列，1 = 正标记）光滑化所有交叉点"""
    markers = getattr(s, "markers", s)
    if len(markers) != d.crossing_count:
        raise DiagramError(
            f"状态长度 {len(markers)} 与交叉点数 {d.crossing_count} 不符"
        )
    flips = arrow_flips or (0,) * d.crossing_count

    uf = _UnionFind(d.strand_labels)
    for (a, b, c, e), mark in zip(d.crossings, markers):
        if mark:
            uf.union(a, e)
            uf.union(b, c)
        else:
            uf.union(a, b)
            uf.union(c, e)

    members: dict[int, list[int]] = {}
    circle_of: dict[int, int] = {}
    for v in d.strand_labels:
        root = uf.find(v)
        circle_of[v] = root
        members.setdefault(root, []).append(v)
    circles = tuple(tuple(members[r]) for r in sorted(members))

    arrows: list[Arrow] = []
    for x, ((a, b, c, e), mark) in enumerate(zip(d.crossings, markers)):
        if mark:
            # 正光滑化：默认从 (b,c) 弧指向 (a,d) 弧
            tail, head = (1, 2), (0, 3)
        else:
            # 负光滑化：默认从出下穿一侧 (c,d) 指向入下穿一侧 (a,b)
            tail, head = (2, 3), (0, 1)
        if flips[x]:
            tail, head = head, tail
        tup = (a, b, c, e)
        arrows.append(Arrow(
            crossing=x,
            source=circle_of[tup[tail[0]]],
            target=circle_of[tup[head[0]]],
            tail_slots=tail,
            head_slots=head,
        ))
    return Resolution(circles=circles, circle_of=circle_of, arrows=tuple(arrows))
