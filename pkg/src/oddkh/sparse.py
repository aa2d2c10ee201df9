"""按列存储的稀疏整数矩阵与 GF(2) 秩"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class SparseMatrix:
    """columns[c] = {行号: 非零值}；元素为任意精度整数"""

    nrows: int
    ncols: int
    columns: tuple[Mapping[int, int], ...]

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> SparseMatrix:
        return cls(nrows, ncols, tuple({} for _ in range(ncols)))

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]]) -> SparseMatrix:
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols: list[dict[int, int]] = [{} for _ in range(ncols)]
        for r, row in enumerate(rows):
            for c, v in enumerate(row):
                if v:
                    cols[c][r] = int(v)
        return cls(nrows, ncols, tuple(cols))

    def to_dense(self) -> list[list[int]]:
        dense = [[0] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.triplets():
            dense[r][c] = v
        return dense

    def triplets(self) -> Iterator[tuple[int, int, int]]:
        for c, col in enumerate(self.columns):
            for r in sorted(col):
                yield r, c, col[r]

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self.columns)

    def is_zero(self) -> bool:
        return not any(self.columns)

    def reduced_mod(self, p: int) -> SparseMatrix:
        cols = tuple(
            {r: v % p for r, v in col.items() if v % p} for col in self.columns
        )
        return SparseMatrix(self.nrows, self.ncols, cols)

    def __matmul__(self, other: SparseMatrix) -> SparseMatrix:
        if self.ncols != other.nrows:
            raise ValueError(
                f"维数不匹配: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}"
            )
        out: list[dict[int, int]] = []
        for col in other.columns:
            acc: dict[int, int] = {}
            for k, v in col.items():
                for r, w in self.columns[k].items():
                    acc[r] = acc.get(r, 0) + v * w
            out.append({r: v for r, v in acc.items() if v})
        return SparseMatrix(self.nrows, other.ncols, tuple(out))

    def to_json(self) -> dict[str, Any]:
        return {
            "rows": self.nrows,
            "cols": self.ncols,
            "entries": [list(t) for t in self.triplets()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> SparseMatrix:
        cols: list[dict[int, int]] = [{} for _ in range(data["cols"])]
        for r, c, v in data["entries"]:
            cols[c][r] = v
        return cls(data["rows"], data["cols"], tuple(cols))


def rank_mod2(m: SparseMatrix) -> int:
    """GF(2) 秩：每列压成位掩码，按最高位消元"""
    basis: dict[int, int] = {}
    for col in m.columns:
        vec = 0
        for r, v in col.items():
            if v & 1:
                vec |= 1 << r
        while vec:
            top = vec.bit_length() - 1
            pivot = basis.get(top)
            if pivot is None:
                basis[top] = vec
                break
            vec ^= pivot
    return len(basis)
