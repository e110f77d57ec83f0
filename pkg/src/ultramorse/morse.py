"""Morse and Betti polynomials with natural-number coefficients.

The Morse relation ``M(t) = P(t) + (1 + t) Q(t)`` is checked by exact integer
division of ``M - P`` by ``1 + t``; a quotient with a negative coefficient or
a nonzero remainder is reported as a violation, never raised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "DegeneracyError",
    "MissingInputError",
    "MorseRelationReport",
    "NatPoly",
    "default_betti",
    "morse_polynomial",
    "verify_morse_relation",
]


class DegeneracyError(ValueError):
    """A degenerate critical point was offered to the Morse polynomial."""

    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(
            f"{len(self.offenders)} degenerate critical point(s): "
            + ", ".join(repr(o) for o in self.offenders))


class MissingInputError(ValueError):
    pass


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _eval(coeffs: Sequence[int], t: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def format_poly(coeffs: Sequence[int]) -> str:
    """``c0 + c1 t + c2 t^2`` with unit coefficients elided; works for signed input."""
    coeffs = _trim(coeffs)
    if not coeffs:
        return "0"
    parts = []
    for d, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if d == 0:
            body = str(mag)
        else:
            mono = "t" if d == 1 else f"t^{d}"
            body = mono if mag == 1 else f"{mag}{mono}"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f"{'-' if c < 0 else '+'} {body}")
    return " ".join(parts)


_TERM = re.compile(r"^(\d+)?\s*\*?\s*(t(?:\s*\^\s*(\d+))?)?$")


@dataclass(frozen=True)
class NatPoly:
    """Polynomial in ``t`` with coefficients in the natural numbers."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        coeffs = _trim(int(c) for c in self.coeffs)
        if any(c < 0 for c in coeffs):
            raise ValueError(f"negative coefficient in {list(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def parse(cls, text: str) -> NatPoly:
        """Parse ``c0 + c1 t + c2 t^2 + ...`` (``*`` optional, terms in any order)."""
        text = text.strip()
        if not text:
            raise ValueError("empty polynomial")
        out: dict[int, int] = {}
        for raw in text.split("+"):
            term = raw.strip()
            m = _TERM.match(term)
            if not term or not m or (m.group(1) is None and m.group(2) is None):
                raise ValueError(f"cannot parse polynomial term {raw.strip()!r} in {text!r}")
            c = int(m.group(1)) if m.group(1) is not None else 1
            if m.group(2) is None:
                d = 0
            else:
                d = int(m.group(3)) if m.group(3) is not None else 1
            out[d] = out.get(d, 0) + c
        deg = max(out)
        return cls(tuple(out.get(d, 0) for d in range(deg + 1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t: int) -> int:
        return _eval(self.coeffs, t)

    def __getitem__(self, d: int) -> int:
        return self.coeffs[d] if 0 <= d < len(self.coeffs) else 0

    def __add__(self, other: NatPoly) -> NatPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        return NatPoly(tuple(self[d] + other[d] for d in range(n)))

    def __mul__(self, other: NatPoly) -> NatPoly:
        if not self.coeffs or not other.coeffs:
            return NatPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return NatPoly(tuple(out))

    def dominates(self, other: NatPoly) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self[d] >= other[d] for d in range(n))

    def __str__(self) -> str:
        return format_poly(self.coeffs)


ONE_PLUS_T = NatPoly((1, 1))


@dataclass(frozen=True)
class RelationViolation:
    quotient: tuple[int, ...]
    remainder: int
    reason: str

    def __str__(self) -> str:
        q = format_poly(self.quotient)
        return f"{self.reason}: (M - P)/(1 + t) = {q}, remainder {self.remainder}"


@dataclass(frozen=True)
class MorseRelationReport:
    M: NatPoly
    P: NatPoly
    Q: NatPoly | None
    violation: RelationViolation | None
    euler_ok: bool
    count_M1: int

    @property
    def ok(self) -> bool:
        return self.Q is not None

    def to_dict(self) -> dict:
        return {
            "M": str(self.M),
            "P": str(self.P),
            "Q": None if self.Q is None else str(self.Q),
            "violation": None if self.violation is None else str(self.violation),
            "euler_ok": self.euler_ok,
            "count_M1": self.count_M1,
        }


def morse_polynomial(points: Iterable) -> NatPoly:
    """Sum of ``t**index`` over nondegenerate critical points."""
    points = list(points)
    bad = [p for p in points if not p.nondegenerate]
    if bad:
        raise DegeneracyError(bad)
    counts: dict[int, int] = {}
    for p in points:
        counts[p.morse_index] = counts.get(p.morse_index, 0) + 1
    if not counts:
        return NatPoly()
    return NatPoly(tuple(counts.get(d, 0) for d in range(max(counts) + 1)))


def _divide_by_one_plus_t(diff: Sequence[int]) -> tuple[list[int], int]:
    """Synthetic division by ``1 + t`` (root ``t = -1``), highest degree first."""
    diff = list(_trim(diff))
    if not diff:
        return [], 0
    n = len(diff) - 1
    q = [0] * n
    carry = 0
    for d in range(n, 0, -1):
        carry = diff[d] - carry if d < n else diff[d]
        q[d - 1] = carry
    remainder = diff[0] - (q[0] if q else 0)
    return q, remainder


def verify_morse_relation(M: NatPoly, P: NatPoly) -> MorseRelationReport:
    n = max(len(M.coeffs), len(P.coeffs))
    diff = [M[d] - P[d] for d in range(n)]
    q, remainder = _divide_by_one_plus_t(diff)
    violation = None
    Q = None
    if remainder != 0:
        violation = RelationViolation(tuple(q), remainder, "nonzero remainder")
    elif any(c < 0 for c in q):
        violation = RelationViolation(tuple(q), 0, "negative quotient coefficient")
    else:
        Q = NatPoly(tuple(q))
    return MorseRelationReport(
        M=M, P=P, Q=Q, violation=violation,
        euler_ok=M(-1) == P(-1), count_M1=M(1))


def default_betti(window_kind: str = "full_coercive", supplied: NatPoly | None = None) -> NatPoly:
    """Betti polynomial of the sublevel pair.

    A coercive window above every critical value retracts to a point, so its
    Betti polynomial is 1. Any other window needs a caller-supplied polynomial.
    """
    if window_kind == "full_coercive":
        return NatPoly((1,)) if supplied is None else supplied
    if window_kind == "custom":
        if supplied is None:
            raise MissingInputError("custom window requires a supplied Betti polynomial")
        return supplied
    raise ValueError(f"unknown window kind {window_kind!r}")
