"""同调表的文本 / JSON / LaTeX 渲染与 JSON 解析"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from .chain import Flavor
from .homology import HomologyTable, Ring, table_from_entries

SCHEMA_VERSION = 1
FORMATS = ("table", "json", "latex")

_TITLES = {
    Flavor.ODD: "odd Khovanov homology",
    Flavor.EVEN: "Khovanov homology",
    Flavor.REDUCED_EVEN: "reduced Khovanov homology",
    Flavor.REDUCED_ODD: "odd reduced Khovanov homology",
}


def title(t: HomologyTable) -> str:
    return f"{_TITLES[t.flavor]} over {t.ring.value}: {t.name or '-'}"


def _grid(t: HomologyTable) -> tuple[list[int], list[int]]:
    """列为 i（向右递增），行为 j（向下递减）"""
    return list(t.i_range()), t.j_values()


def render_table(t: HomologyTable) -> str:
    if not t.entries:
        return f"{title(t)}\n(zero)\n"
    i_values, j_values = _grid(t)
    cells = {k: g.cell() for k, g in t.entries.items()}
    corner = "j\\i"
    width = max(
        [len(str(i)) for i in i_values] + [len(c) for c in cells.values()],
    )
    label_width = max([len(corner)] + [len(str(j)) for j in j_values])

    lines = [title(t)]
    header = " ".join(f"{i:>{width}}" for i in i_values)
    lines.append(f"{corner:>{label_width}} | {header}")
    lines.append("-" * (label_width + 1) + "+" + "-" * (len(header) + 1))
    for j in j_values:
        row = " ".join(f"{cells.get((i, j), ''):>{width}}" for i in i_values)
        lines.append(f"{j:>{label_width}} | {row}".rstrip())
    return "\n".join(lines) + "\n"


def table_to_json(t: HomologyTable) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "name": t.name,
        "flavor": t.flavor.value,
        "ring": t.ring.value,
        "entries": [
            {"i": i, "j": j, "rank": g.rank, "torsion": list(g.torsion)}
            for (i, j), g in sorted(t.entries.items())
        ],
    }


def table_from_json(data: Mapping[str, Any]) -> HomologyTable:
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ValueError(f"不支持的 schema 版本: {schema!r}")
    return table_from_entries(
        data["entries"], Flavor(data["flavor"]), Ring(data["ring"]),
        data.get("name", ""),
    )


def _latex_cell(cell: str) -> str:
    if not cell:
        return ""
    parts = []
    for part in cell.split(","):
        count, _, order = part.partition("_")
        parts.append(f"{count}_{{{order}}}" if order else count)
    return "$" + ",".join(parts) + "$"


def render_latex(t: HomologyTable) -> str:
    """独立的 tabular 块，布局与文本表格一致"""
    i_values, j_values = _grid(t)
    lines = [
        f"% {title(t)}",
        "\\begin{tabular}{r|" + "c" * len(i_values) + "}",
        "$j \\backslash i$ & " + " & ".join(f"${i}$" for i in i_values) + " \\\\",
        "\\hline",
    ]
    for j in j_values:
        cells = [_latex_cell(t.get(i, j).cell()) for i in i_values]
        lines.append(f"${j}$ & " + " & ".join(cells) + " \\\\")
    lines.append("\\end{tabular}")
    return "\n".join(lines) + "\n"


def render(t: HomologyTable, fmt: str) -> str:
    import json

    if fmt == "table":
        return render_table(t)
    if fmt == "json":
        return json.dumps(table_to_json(t), ensure_ascii=False, indent=2) + "\n"
    if fmt == "latex":
        return render_latex(t)
    raise ValueError(f"未知输出格式: {fmt}（可选 {', '.join(FORMATS)}）")
