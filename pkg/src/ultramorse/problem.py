"""Variational functionals ``J(u) = int F(x, u, u') dx`` on an interval.

Boundary data is homogeneous Dirichlet.  ``F`` and its first and second
partials in ``(u, p)`` (``p`` stands for ``u'``) are supplied as vectorised
callables; :func:`validate_spec` checks them against finite differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .kvtext import ConfigParseError, read_sections

__all__ = [
    "FunctionalSpec",
    "ModelProblem",
    "UnsupportedParameterError",
    "ValidationReport",
    "chafee_infante",
    "dirichlet_energy",
    "from_expression",
    "load_problem_file",
    "preset",
    "validate_spec",
]

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

PARTIALS = ("F_u", "F_p", "F_uu", "F_up", "F_pp")


class UnsupportedParameterError(ValueError):
    pass


def _broadcast(fn: Evaluator) -> Evaluator:
    def wrapped(x, u, p):
        if (type(x) is np.ndarray and type(u) is np.ndarray and type(p) is np.ndarray
                and x.shape == u.shape == p.shape):
            out = fn(x, u, p)
            if type(out) is np.ndarray and out.shape == x.shape:
                return out.astype(float, copy=False)
            return np.full(x.shape, out, dtype=float)
        x, u, p = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(u, dtype=float), np.asarray(p, dtype=float))
        out = np.asarray(fn(x, u, p), dtype=float)
        return np.broadcast_to(out, x.shape).copy() if out.shape != x.shape else out
    wrapped.__wrapped__ = fn
    return wrapped


@dataclass(frozen=True)
class FunctionalSpec:
    domain: tuple[float, float]
    F: Evaluator
    F_u: Evaluator
    F_p: Evaluator
    F_uu: Evaluator
    F_up: Evaluator
    F_pp: Evaluator
    label: str = "functional"

    def __post_init__(self):
        x0, x1 = (float(v) for v in self.domain)
        if not x0 < x1:
            raise ValueError(f"domain must satisfy x0 < x1, got {self.domain}")
        object.__setattr__(self, "domain", (x0, x1))
        for name in ("F",) + PARTIALS:
            object.__setattr__(self, name, _broadcast(getattr(self, name)))

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


@dataclass(frozen=True)
class ModelProblem:
    spec: FunctionalSpec
    mu: float | None = None
    known_facts: dict = field(default_factory=dict)


@dataclass
class ValidationReport:
    passed: bool
    deviations: dict[str, float]
    abs_deviations: dict[str, float]
    worst_sample: dict[str, tuple[float, float, float]]
    failure: str | None = None

    def __str__(self) -> str:
        lines = [f"{'PASS' if self.passed else 'FAIL'}"]
        if self.failure:
            lines.append(self.failure)
        for name, dev in self.deviations.items():
            lines.append(f"  {name}: max rel deviation {dev:.3e}")
        return "\n".join(lines)


def _central(fn, x, u, p, wrt: str, h: float) -> np.ndarray:
    if wrt == "u":
        return (fn(x, u + h, p) - fn(x, u - h, p)) / (2 * h)
    return (fn(x, u, p + h) - fn(x, u, p - h)) / (2 * h)


def validate_spec(
    spec: FunctionalSpec,
    n_samples: int = 50,
    tol: float = 1e-5,
    box: float = 2.0,
    seed: int = 0,
) -> ValidationReport:
    """Compare analytic partials with central differences at quasi-random points.

    First partials are differenced from ``F``; second partials from the
    analytic first partials.  Relative deviation is
    ``|analytic - fd| / max(1, |fd|)``.
    """
    x0, x1 = spec.domain
    pts = qmc.Halton(d=3, scramble=True, seed=seed).random(n_samples)
    x = x0 + (x1 - x0) * pts[:, 0]
    u = box * (2 * pts[:, 1] - 1)
    p = box * (2 * pts[:, 2] - 1)
    h1, h2 = 1e-5, 1e-5

    checks = {
        "F_u": (spec.F_u, spec.F, "u", h1),
        "F_p": (spec.F_p, spec.F, "p", h1),
        "F_uu": (spec.F_uu, spec.F_u, "u", h2),
        "F_up": (spec.F_up, spec.F_u, "p", h2),
        "F_pp": (spec.F_pp, spec.F_p, "p", h2),
    }
    deviations, abs_devs, worst = {}, {}, {}
    for name, (analytic, base, wrt, h) in checks.items():
        with np.errstate(all="ignore"):
            a = analytic(x, u, p)
            fd = _central(base, x, u, p, wrt, h)
        bad = ~(np.isfinite(a) & np.isfinite(fd))
        if bad.any():
            i = int(np.argmax(bad))
            sample = (float(x[i]), float(u[i]), float(p[i]))
            return ValidationReport(
                False, deviations, abs_devs, {name: sample},
                failure=f"{name} produced a non-finite value at (x, u, p) = {sample}")
        err = np.abs(a - fd)
        rel = err / np.maximum(1.0, np.abs(fd))
        i = int(np.argmax(rel))
        deviations[name] = float(rel[i])
        abs_devs[name] = float(err.max())
        worst[name] = (float(x[i]), float(u[i]), float(p[i]))
    passed = all(d <= tol for d in deviations.values())
    return ValidationReport(passed, deviations, abs_devs, worst)


# presets


def _facts_chafee_infante(mu: float) -> dict:
    # nontrivial branches bifurcate from zero at mu = k^2; u_k has index k-1
    if any(abs(mu - k * k) < 1e-12 for k in range(1, 4)):
        return {}
    branches = sum(1 for k in range(1, 4) if k * k < mu)
    if branches > 2:
        return {}
    indices = sorted([branches] + [k for k in range(branches) for _ in (0, 1)])
    return {
        "count": 2 * branches + 1,
        "indices": indices,
        "M": {0: "1", 1: "2 + t", 2: "2 + 2t + t^2"}[branches],
        "Q": {0: "0", 1: "1", 2: "1 + t"}[branches],
        "zero_index": branches,
    }


def chafee_infante(mu: float, domain: tuple[float, float] = (0.0, math.pi)) -> ModelProblem:
    """``F = p^2/2 - mu u^2/2 + u^4/4``; critical points solve ``-u'' = mu u - u^3``."""
    mu = float(mu)
    if not mu > 0:
        raise UnsupportedParameterError(f"chafee_infante needs mu > 0, got {mu}")
    spec = FunctionalSpec(
        domain=domain,
        F=lambda x, u, p: 0.5 * p**2 - 0.5 * mu * u**2 + 0.25 * u**4,
        F_u=lambda x, u, p: -mu * u + u**3,
        F_p=lambda x, u, p: p,
        F_uu=lambda x, u, p: -mu + 3 * u**2,
        F_up=lambda x, u, p: 0.0,
        F_pp=lambda x, u, p: 1.0,
        label=f"chafee_infante(mu={mu:g})",
    )
    default_domain = tuple(domain) == (0.0, math.pi)
    return ModelProblem(spec, mu, _facts_chafee_infante(mu) if default_domain else {})


def dirichlet_energy(domain: tuple[float, float] = (0.0, math.pi)) -> ModelProblem:
    spec = FunctionalSpec(
        domain=domain,
        F=lambda x, u, p: 0.5 * p**2,
        F_u=lambda x, u, p: 0.0,
        F_p=lambda x, u, p: p,
        F_uu=lambda x, u, p: 0.0,
        F_up=lambda x, u, p: 0.0,
        F_pp=lambda x, u, p: 1.0,
        label="dirichlet_energy",
    )
    return ModelProblem(spec, None, {"count": 1, "indices": [0], "M": "1", "Q": "0"})


PRESETS = {
    "chafee_infante": chafee_infante,
    "dirichlet_energy": dirichlet_energy,
}


def preset(name: str, mu: float | None = None,
           domain: tuple[float, float] = (0.0, math.pi)) -> ModelProblem:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if name == "chafee_infante":
        if mu is None:
            raise UnsupportedParameterError("chafee_infante requires mu")
        return chafee_infante(mu, domain)
    return PRESETS[name](domain)


# expressions

_ALLOWED_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*|\.\d+)|(sin|cos|exp|x|u|p)\b|([-+*/^()]))")


def _check_grammar(text: str) -> None:
    pos = 0
    text = text.rstrip()
    if not text:
        raise ValueError("empty expression")
    while pos < len(text):
        m = _ALLOWED_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected input at column {pos + 1}: {text[pos:pos + 10]!r}")
        pos = m.end()


def from_expression(expr: str, domain: tuple[float, float] = (0.0, math.pi),
                    label: str | None = None) -> ModelProblem:
    """Build a spec from an expression in ``x, u, p`` with ``+ - * / ^`` and
    ``sin, cos, exp``; partials come from symbolic differentiation."""
    import sympy as sp

    _check_grammar(expr)
    x, u, p = sp.symbols("x u p", real=True)
    names = {"x": x, "u": u, "p": p, "sin": sp.sin, "cos": sp.cos, "exp": sp.exp}
    try:
        F = sp.parse_expr(expr.replace("^", "**"), local_dict=names,
                          global_dict={"Integer": sp.Integer, "Float": sp.Float,
                                       "Symbol": sp.Symbol, "Rational": sp.Rational})
    except (SyntaxError, TypeError, sp.SympifyError) as exc:
        raise ValueError(f"cannot parse expression {expr!r}: {exc}") from exc
    exprs = {
        "F": F,
        "F_u": sp.diff(F, u),
        "F_p": sp.diff(F, p),
        "F_uu": sp.diff(F, u, 2),
        "F_up": sp.diff(F, u, p),
        "F_pp": sp.diff(F, p, 2),
    }
    fns = {k: sp.lambdify((x, u, p), e, "numpy") for k, e in exprs.items()}
    spec = FunctionalSpec(domain=domain, label=label or f"F = {expr}", **fns)
    return ModelProblem(spec, None, {})


def _float(entry, source):
    try:
        return float(entry.value)
    except ValueError:
        raise entry.error(f"expected a number, got {entry.value!r}", source) from None


def problem_from_section(section: dict, source: str = "<config>") -> ModelProblem:
    """Build a problem from a parsed ``[problem]`` section."""
    known = {"preset", "expression", "mu", "x0", "x1", "label", "file"}
    for key, entry in section.items():
        if key not in known:
            raise entry.key_error(f"unknown problem key {key!r}", source)
    sources = [k for k in ("preset", "expression", "file") if k in section]
    if len(sources) != 1:
        line = min((e.line for e in section.values()), default=1)
        raise ConfigParseError(
            "exactly one of 'preset', 'expression' or 'file' is required, found "
            + (", ".join(sources) or "none"), line, 1, source)
    if "file" in section:
        return load_problem_file(Path(section["file"].value))
    x0 = _float(section["x0"], source) if "x0" in section else 0.0
    x1 = _float(section["x1"], source) if "x1" in section else math.pi
    if not x0 < x1:
        anchor = section.get("x1") or section.get("x0")
        raise anchor.error(f"domain needs x0 < x1, got ({x0}, {x1})", source)
    if "preset" in section:
        entry = section["preset"]
        mu = _float(section["mu"], source) if "mu" in section else None
        try:
            return preset(entry.value, mu, (x0, x1))
        except (KeyError, UnsupportedParameterError) as exc:
            anchor = section.get("mu", entry) if isinstance(exc, UnsupportedParameterError) else entry
            raise anchor.error(str(exc).strip("'\""), source) from None
    entry = section["expression"]
    label = section["label"].value if "label" in section else None
    try:
        return from_expression(entry.value, (x0, x1), label)
    except ValueError as exc:
        raise entry.error(str(exc), source) from None


def load_problem_file(path: Path | str) -> ModelProblem:
    path = Path(path)
    sections = read_sections(path.read_text(), str(path))
    if "problem" not in sections:
        raise ConfigParseError("missing [problem] section", 1, 1, str(path))
    return problem_from_section(sections["problem"], str(path))
