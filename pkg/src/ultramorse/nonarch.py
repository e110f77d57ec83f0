"""Truncated Levi-Civita series: a computable non-Archimedean ordered field.

A value is a finite sum ``sum a_q * e^q`` over rational exponents ``q`` where
``e`` is a fixed positive infinitesimal.  Terms with exponent above the
truncation order ``K`` are dropped after every operation, so products are
exact only up to that order.

>>> eps = LeviCivitaNumber.epsilon()
>>> (1 + eps) * (1 - eps)
LeviCivitaNumber('1 - e^2')
>>> classify(1 / eps)
<Classification.INFINITE: 'Infinite'>
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Classification",
    "ConfigurationError",
    "DomainError",
    "LeviCivitaNumber",
    "classify",
    "extend_function",
    "infinitely_close",
    "lc_add",
    "lc_cmp",
    "lc_inv",
    "lc_mul",
    "parse_series",
    "same_galaxy",
    "shadow",
]

DEFAULT_ORDER = Fraction(10)
#: every exponent must have a denominator dividing this
EXPONENT_DENOMINATOR = 12

Real = Union[int, float]
Operand = Union["LeviCivitaNumber", int, float]


class ConfigurationError(ValueError):
    """Operands built with different truncation orders."""


class DomainError(ValueError):
    """Operation undefined for the given argument."""


class Classification(enum.Enum):
    INFINITESIMAL = "Infinitesimal"
    FINITE = "FiniteNonInfinitesimal"
    INFINITE = "Infinite"


def _as_exponent(q) -> Fraction:
    q = Fraction(q)
    if EXPONENT_DENOMINATOR % q.denominator:
        raise ValueError(
            f"exponent {q} has denominator not dividing {EXPONENT_DENOMINATOR}")
    return q


class LeviCivitaNumber:
    """Immutable truncated series with float coefficients.

    ``terms`` maps exponent -> coefficient; zero coefficients are removed and
    exponents above ``order`` are discarded on construction.
    """

    __slots__ = ("_terms", "_order")

    def __init__(self, terms: Mapping | Iterable = (), order=DEFAULT_ORDER):
        order = Fraction(order)
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Fraction, float] = {}
        for q, a in items:
            q = _as_exponent(q)
            if q > order:
                continue
            merged[q] = merged.get(q, 0.0) + float(a)
        terms_ = tuple(sorted((q, a) for q, a in merged.items() if a != 0.0))
        object.__setattr__(self, "_terms", terms_)
        object.__setattr__(self, "_order", order)
        for _, a in terms_:
            if not math.isfinite(a):
                raise ValueError("coefficients must be finite")

    def __setattr__(self, name, value):
        raise AttributeError("LeviCivitaNumber is immutable")

    # construction helpers

    @classmethod
    def real(cls, value: Real, order=DEFAULT_ORDER) -> LeviCivitaNumber:
        return cls({0: value}, order)

    @classmethod
    def epsilon(cls, power=1, order=DEFAULT_ORDER) -> LeviCivitaNumber:
        """The monomial ``e^power``."""
        return cls({power: 1.0}, order)

    @property
    def terms(self) -> tuple[tuple[Fraction, float], ...]:
        return self._terms

    @property
    def order(self) -> Fraction:
        return self._order

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def leading_exponent(self) -> Fraction | None:
        return self._terms[0][0] if self._terms else None

    @property
    def leading_coefficient(self) -> float:
        return self._terms[0][1] if self._terms else 0.0

    def coefficient(self, q) -> float:
        q = Fraction(q)
        for e, a in self._terms:
            if e == q:
                return a
        return 0.0

    def truncated(self, order) -> LeviCivitaNumber:
        """Copy keeping only exponents <= ``order`` (the declared order is kept)."""
        order = Fraction(order)
        return LeviCivitaNumber(
            [(q, a) for q, a in self._terms if q <= order], self._order)

    def _coerce(self, other: Operand) -> LeviCivitaNumber:
        if isinstance(other, LeviCivitaNumber):
            if other._order != self._order:
                raise ConfigurationError(
                    f"truncation orders differ: {self._order} vs {other._order}")
            return other
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            return LeviCivitaNumber.real(float(other), self._order)
        return NotImplemented

    # arithmetic

    def __add__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_add(self, other)

    __radd__ = __add__

    def __neg__(self) -> LeviCivitaNumber:
        return LeviCivitaNumber([(q, -a) for q, a in self._terms], self._order)

    def __pos__(self) -> LeviCivitaNumber:
        return self

    def __sub__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_add(self, -other)

    def __rsub__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_add(other, -self)

    def __mul__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_mul(self, lc_inv(other))

    def __rtruediv__(self, other: Operand) -> LeviCivitaNumber:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lc_mul(other, lc_inv(self))

    def __pow__(self, n: int) -> LeviCivitaNumber:
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return lc_inv(self) ** (-n)
        result = LeviCivitaNumber.real(1.0, self._order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # order

    def __eq__(self, other) -> bool:
        if isinstance(other, (LeviCivitaNumber, int, float)) and not isinstance(other, bool):
            other = self._coerce(other)
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._terms, self._order))

    def __lt__(self, other: Operand) -> bool:
        return lc_cmp(self, self._coerce(other)) < 0

    def __le__(self, other: Operand) -> bool:
        return lc_cmp(self, self._coerce(other)) <= 0

    def __gt__(self, other: Operand) -> bool:
        return lc_cmp(self, self._coerce(other)) > 0

    def __ge__(self, other: Operand) -> bool:
        return lc_cmp(self, self._coerce(other)) >= 0

    def __abs__(self) -> LeviCivitaNumber:
        return -self if self.leading_coefficient < 0 else self

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __str__(self) -> str:
        return format_series(self)

    def __repr__(self) -> str:
        return f"LeviCivitaNumber({format_series(self)!r})"


def _check_orders(x: LeviCivitaNumber, y: LeviCivitaNumber) -> None:
    if x.order != y.order:
        raise ConfigurationError(
            f"truncation orders differ: {x.order} vs {y.order}")


def lc_add(x: LeviCivitaNumber, y: LeviCivitaNumber) -> LeviCivitaNumber:
    _check_orders(x, y)
    return LeviCivitaNumber(list(x.terms) + list(y.terms), x.order)


def _raw_mul(xt, yt, order: Fraction) -> dict[Fraction, float]:
    out: dict[Fraction, float] = {}
    for p, a in xt:
        for q, b in yt:
            e = p + q
            if e <= order:
                out[e] = out.get(e, 0.0) + a * b
    return out


def lc_mul(x: LeviCivitaNumber, y: LeviCivitaNumber) -> LeviCivitaNumber:
    """Cauchy product truncated at the shared order."""
    _check_orders(x, y)
    return LeviCivitaNumber(_raw_mul(x.terms, y.terms, x.order), x.order)


def lc_inv(x: LeviCivitaNumber) -> LeviCivitaNumber:
    """Multiplicative inverse via ``x = a e^q (1 + r)`` and a geometric series in ``r``."""
    if x.is_zero():
        raise ZeroDivisionError("inverse of zero Levi-Civita number")
    q0, a0 = x.terms[0]
    rest = [(q - q0, a / a0) for q, a in x.terms[1:]]
    # 1/(1+r) is needed up to exponent K + q0 so the final shift lands on K
    need = x.order + q0
    series: dict[Fraction, float] = {Fraction(0): 1.0} if need >= 0 else {}
    if rest and need > 0:
        neg_r = [(q, -a) for q, a in rest]
        power = [(Fraction(0), 1.0)]
        min_step = rest[0][0]
        k = 0
        while (k + 1) * min_step <= need:
            power = list(_raw_mul(power, neg_r, need).items())
            if not power:
                break
            for q, a in power:
                series[q] = series.get(q, 0.0) + a
            k += 1
    return LeviCivitaNumber(
        [(q - q0, a / a0) for q, a in series.items()], x.order)


def lc_cmp(x: Operand, y: Operand) -> int:
    """Return -1, 0 or 1 as ``x`` is less than, equal to or greater than ``y``."""
    if not isinstance(x, LeviCivitaNumber):
        x = y._coerce(x)
    d = x - y
    if d.is_zero():
        return 0
    return 1 if d.leading_coefficient > 0 else -1


def classify(x: LeviCivitaNumber) -> Classification:
    q = x.leading_exponent
    if q is None or q > 0:
        return Classification.INFINITESIMAL
    if q < 0:
        return Classification.INFINITE
    return Classification.FINITE


def shadow(x: LeviCivitaNumber) -> float:
    """Standard part; ``+inf``/``-inf`` for positive/negative infinite numbers."""
    if classify(x) is Classification.INFINITE:
        return math.inf if x.leading_coefficient > 0 else -math.inf
    return x.coefficient(0)


def infinitely_close(x: Operand, y: Operand) -> bool:
    if not isinstance(x, LeviCivitaNumber):
        x = y._coerce(x)
    return classify(x - y) is Classification.INFINITESIMAL


def same_galaxy(x: Operand, y: Operand) -> bool:
    if not isinstance(x, LeviCivitaNumber):
        x = y._coerce(x)
    return classify(x - y) is not Classification.INFINITE


def extend_function(
    f: Callable[[float], float],
    derivatives: Sequence[Callable[[float], float]],
    x: LeviCivitaNumber,
    degree: int | None = None,
) -> LeviCivitaNumber:
    """Taylor lift of a smooth real function to a finite Levi-Civita argument.

    ``derivatives[k-1]`` evaluates the k-th derivative.  The lift is
    ``sum_{k<=d} f^(k)(r) h^k / k!`` with ``r = shadow(x)`` and ``h = x - r``;
    ``d`` defaults to ``len(derivatives)``.
    """
    if classify(x) is Classification.INFINITE:
        raise DomainError("Taylor lift is undefined at an infinite argument")
    d = len(derivatives) if degree is None else degree
    if d > len(derivatives):
        raise ValueError(f"degree {d} needs {d} derivative evaluators")
    r = shadow(x)
    h = x - r
    result = LeviCivitaNumber.real(f(r), x.order)
    h_pow = LeviCivitaNumber.real(1.0, x.order)
    for k in range(1, d + 1):
        h_pow = h_pow * h
        if h_pow.is_zero():
            break
        result = result + h_pow * (derivatives[k - 1](r) / math.factorial(k))
    return result


# text form


def _format_coefficient(a: float) -> str:
    if a == int(a) and abs(a) < 2**53:
        return str(int(a))
    # positional only: scientific notation would collide with the symbol e
    return np.format_float_positional(a, unique=True, trim="-")


def _format_exponent(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def format_series(x: LeviCivitaNumber) -> str:
    """Render as ``a0*e^q0 + a1*e^q1 + ...``; parseable by :func:`parse_series`."""
    if x.is_zero():
        return "0"
    parts = []
    for i, (q, a) in enumerate(x.terms):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        if q == 0:
            body = _format_coefficient(mag)
        else:
            mono = "e" if q == 1 else f"e^{_format_exponent(q)}"
            body = mono if mag == 1 else f"{_format_coefficient(mag)}*{mono}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|(.))")


class _SeriesParser:
    """Recursive descent over ``+ - * / ^ ( )``, numbers and the symbol ``e``."""

    def __init__(self, text: str, order: Fraction):
        self.order = order
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            num, sym = m.groups()
            col = m.start(1) if num else m.start(2)
            if num:
                self.tokens.append(("num", num, col))
            elif sym in "+-*/^()e":
                self.tokens.append(("op", sym, col))
            else:
                raise ValueError(f"unexpected character {sym!r} at column {col + 1}")
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", -1)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] == "end" or (value is not None and tok[1] != value):
            where = "end of input" if tok[0] == "end" else f"column {tok[2] + 1}"
            raise ValueError(f"expected {value or 'token'!r} at {where}")
        self.i += 1
        return tok

    def parse(self) -> LeviCivitaNumber:
        if not self.tokens:
            raise ValueError("empty expression")
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ValueError(f"unexpected {tok[1]!r} at column {tok[2] + 1}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        kind, tok, _ = self.peek()
        is_e = kind == "op" and tok == "e"
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take("^")
        q = self.exponent()
        if is_e:
            return LeviCivitaNumber.epsilon(q, self.order)
        if q.denominator != 1:
            raise ValueError("fractional powers are only defined for e")
        return base ** int(q)

    def exponent(self) -> Fraction:
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        if self.peek()[1] == "(":
            self.take("(")
            s2 = 1
            if self.peek()[1] == "-":
                self.take()
                s2 = -1
            num = self.take()
            if num[0] != "num":
                raise ValueError(f"expected exponent at column {num[2] + 1}")
            q = Fraction(num[1])
            if self.peek()[1] == "/":
                self.take("/")
                den = self.take()
                q /= Fraction(den[1])
            self.take(")")
            return sign * s2 * q
        num = self.take()
        if num[0] != "num":
            raise ValueError(f"expected exponent at column {num[2] + 1}")
        return sign * Fraction(num[1])

    def atom(self):
        kind, tok, col = self.take()
        if kind == "num":
            return LeviCivitaNumber.real(float(tok), self.order)
        if tok == "e":
            return LeviCivitaNumber.epsilon(1, self.order)
        if tok == "(":
            value = self.expr()
            self.take(")")
            return value
        raise ValueError(f"unexpected {tok!r} at column {col + 1}")


def parse_series(text: str, order=DEFAULT_ORDER) -> LeviCivitaNumber:
    """Evaluate an arithmetic expression in ``e`` (the infinitesimal).

    Raises ``ValueError`` on syntax errors and ``ZeroDivisionError`` on
    division by zero.
    """
    return _SeriesParser(text, Fraction(order)).parse()
