"""q 的整系数 Laurent 多项式（sympy.Poly 加指数偏移）"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

import sympy
from sympy.polys.domains import ZZ

Q = sympy.Symbol("q")


def _from_terms(terms: Mapping[int, int]) -> tuple[sympy.Poly, int]:
    terms = {e: c for e, c in terms.items() if c}
    if not terms:
        return sympy.Poly(0, Q, domain=ZZ), 0
    low = min(terms)
    poly = sympy.Poly.from_dict({(e - low,): c for e, c in terms.items()}, Q, domain=ZZ)
    return poly, low


def _q_power(k: int) -> sympy.Poly:
    return sympy.Poly.from_dict({(k,): 1}, Q, domain=ZZ)


class LaurentPolynomial:
    """值为 q^low · poly(q)；poly 的常数项非零（零多项式时 low = 0）"""

    __slots__ = ("_poly", "_low")

    def __init__(self, coefficients: Mapping[int, int] | None = None) -> None:
        self._poly, self._low = _from_terms(
            {int(e): int(c) for e, c in (coefficients or {}).items()}
        )

    @classmethod
    def _wrap(cls, poly: sympy.Poly, low: int) -> LaurentPolynomial:
        obj = cls.__new__(cls)
        if poly.is_zero:
            obj._poly, obj._low = poly, 0
            return obj
        k = poly.monoms()[-1][0]
        if k:
            poly = sympy.Poly.from_dict(
                {(m[0] - k,): c for m, c in poly.terms()}, Q, domain=ZZ,
            )
        obj._poly, obj._low = poly, low + k
        return obj

    @classmethod
    def monomial(cls, exponent: int, coefficient: int = 1) -> LaurentPolynomial:
        return cls({exponent: coefficient})

    @classmethod
    def unknot(cls) -> LaurentPolynomial:
        """q + q⁻¹"""
        return cls({1: 1, -1: 1})

    @property
    def coefficients(self) -> dict[int, int]:
        if self._poly.is_zero:
            return {}
        return {m[0] + self._low: int(c) for m, c in self._poly.terms()}

    def is_zero(self) -> bool:
        return bool(self._poly.is_zero)

    def min_degree(self) -> int:
        return self._low

    def max_degree(self) -> int:
        return self._low + self._poly.degree()

    def shift(self, k: int) -> LaurentPolynomial:
        """乘以 q^k"""
        return self._wrap(self._poly, self._low + k)

    def _raised(self, k: int) -> sympy.Poly:
        return self._poly if k == 0 else self._poly * _q_power(k)

    def __add__(self, other: LaurentPolynomial | int) -> LaurentPolynomial:
        other = _coerce(other)
        low = min(self._low, other._low)
        return self._wrap(
            self._raised(self._low - low) + other._raised(other._low - low), low,
        )

    __radd__ = __add__

    def __neg__(self) -> LaurentPolynomial:
        return self._wrap(-self._poly, self._low)

    def __sub__(self, other: LaurentPolynomial | int) -> LaurentPolynomial:
        return self + (-_coerce(other))

    def __rsub__(self, other: int) -> LaurentPolynomial:
        return _coerce(other) - self

    def __mul__(self, other: LaurentPolynomial | int) -> LaurentPolynomial:
        other = _coerce(other)
        return self._wrap(self._poly * other._poly, self._low + other._low)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> LaurentPolynomial:
        if k < 0:
            raise ValueError("只支持非负整数次幂")
        return self._wrap(self._poly**k, self._low * k)

    def exact_divide(self, divisor: LaurentPolynomial) -> LaurentPolynomial:
        """整除，余数非零时抛出 ValueError"""
        if divisor.is_zero():
            raise ZeroDivisionError("除数为零多项式")
        if self.is_zero():
            return LaurentPolynomial()
        # 两者常数项均非零，Laurent 整除等价于多项式整除
        quotient, remainder = sympy.div(self._poly, divisor._poly, domain=ZZ, polys=True)
        if not remainder.is_zero:
            raise ValueError(f"{self} 不能被 {divisor} 整除")
        return self._wrap(quotient, self._low - divisor._low)

    def _at_i(self) -> sympy.Expr:
        return sympy.expand(self.to_sympy().subs(Q, sympy.I))

    def evaluate_at_i(self) -> complex:
        """在 q = i 处取值（高斯整数）"""
        return complex(self._at_i())

    def modulus_at_i(self) -> int:
        modulus = sympy.Abs(self._at_i())
        if modulus.is_integer:
            return int(modulus)
        return int(sympy.floor(modulus + sympy.Rational(1, 2)))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPolynomial({0: other})
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self._low == other._low and self._poly == other._poly

    def __hash__(self) -> int:
        return hash((self._low, tuple(self._poly.all_coeffs())))

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self})"

    def __str__(self) -> str:
        coeffs = self.coefficients
        if not coeffs:
            return "0"
        out = ""
        for e in sorted(coeffs, reverse=True):
            c = coeffs[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "q" if e == 1 else f"q^{e}"
                body = var if mag == 1 else f"{mag}{var}"
            if not out:
                out = f"-{body}" if c < 0 else body
            else:
                out += f" - {body}" if c < 0 else f" + {body}"
        return out

    def to_json(self) -> dict[str, int]:
        coeffs = self.coefficients
        return {str(e): coeffs[e] for e in sorted(coeffs)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> LaurentPolynomial:
        return cls({int(e): int(c) for e, c in data.items()})

    def to_sympy(self, symbol: sympy.Symbol = Q) -> sympy.Expr:
        return sympy.expand(self._poly.as_expr().subs(Q, symbol) * symbol**self._low)

    @classmethod
    def from_sympy(cls, expr: Any, symbol: sympy.Symbol = Q) -> LaurentPolynomial:
        """从 sympy 表达式构造，例如 q + q**3 - q**-2"""
        expanded = sympy.expand(sympy.sympify(expr))
        out: dict[int, int] = {}
        for term in sympy.Add.make_args(expanded):
            coeff, power = term.as_coeff_exponent(symbol)
            if coeff.free_symbols or not power.is_integer or not coeff.is_integer:
                raise ValueError(f"不是 {symbol} 的整系数 Laurent 多项式: {expr}")
            out[int(power)] = out.get(int(power), 0) + int(coeff)
        return cls(out)

    def latex(self) -> str:
        return sympy.latex(self.to_sympy())


def _coerce(value: LaurentPolynomial | int) -> LaurentPolynomial:
    if isinstance(value, LaurentPolynomial):
        return value
    return LaurentPolynomial({0: int(value)})
