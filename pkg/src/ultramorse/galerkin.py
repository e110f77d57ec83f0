"""Spectral sine levels and the restricted functional on coefficient vectors.

Level ``n`` is spanned by the orthonormal Dirichlet modes

    phi_k(x) = sqrt(2/L) sin(k pi (x - x0) / L),   k = 1..n,

so level ``n`` is literally the first ``n`` coordinates of any finer level.
Integrals use composite Gauss-Legendre quadrature (``m`` panels of ``p``
nodes); all basis values are tabulated once per level.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .problem import FunctionalSpec, ModelProblem

__all__ = [
    "CoefficientVector",
    "DomainError",
    "EvaluationError",
    "LevelSpace",
    "QuadratureResolutionError",
    "build_level",
    "embed",
    "energy",
    "eval_du",
    "eval_u",
    "gradient",
    "hessian",
    "l2_inner",
    "w_norm",
]

log = logging.getLogger(__name__)

GRAM_TOL = 1e-10


class QuadratureResolutionError(ValueError):
    pass


class EvaluationError(FloatingPointError):
    pass


class DomainError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def composite_gauss_legendre(x0: float, x1: float, panels: int, points: int):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on ``[x0, x1]``."""
    ref_x, ref_w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(x0, x1, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True, eq=False)
class LevelSpace:
    problem: FunctionalSpec
    n: int
    quad: tuple[int, int]
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)   # (nodes, n)
    dphi: np.ndarray = field(repr=False)  # (nodes, n)
    gram_residual: float = 0.0

    @property
    def x0(self) -> float:
        return self.problem.domain[0]

    @property
    def length(self) -> float:
        return self.problem.length

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * np.pi / self.length

    @property
    def w_weights(self) -> np.ndarray:
        """Diagonal of the H^1_0 Gram matrix in this basis."""
        return self.wavenumbers**2

    def basis(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        k = self.wavenumbers
        arg = np.multiply.outer(x - self.x0, k)
        scale = np.sqrt(2.0 / self.length)
        return scale * np.sin(arg), scale * k * np.cos(arg)

    def vector(self, coeffs) -> CoefficientVector:
        return CoefficientVector(np.asarray(coeffs, dtype=float), self)

    def zero(self) -> CoefficientVector:
        return self.vector(np.zeros(self.n))

    def _fields(self, c: np.ndarray):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.n,):
            raise DimensionError(f"expected {self.n} coefficients, got shape {c.shape}")
        return self.phi @ c, self.dphi @ c

    def _checked(self, name: str, values: np.ndarray) -> np.ndarray:
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            raise EvaluationError(f"{name} is not finite at x = {self.nodes[i]!r}")
        return values

    def energy(self, c) -> float:
        u, du = self._fields(c)
        F = self._checked("F", self.problem.F(self.nodes, u, du))
        return float(self.weights @ F)

    def gradient(self, c) -> np.ndarray:
        u, du = self._fields(c)
        Fu = self._checked("F_u", self.problem.F_u(self.nodes, u, du))
        Fp = self._checked("F_p", self.problem.F_p(self.nodes, u, du))
        w = self.weights
        return self.dphi.T @ (w * Fp) + self.phi.T @ (w * Fu)

    def hessian(self, c) -> np.ndarray:
        u, du = self._fields(c)
        x = self.nodes
        w = self.weights
        Fpp = self._checked("F_pp", self.problem.F_pp(x, u, du))
        Fup = self._checked("F_up", self.problem.F_up(x, u, du))
        Fuu = self._checked("F_uu", self.problem.F_uu(x, u, du))
        P, D = self.phi, self.dphi
        H = D.T @ ((w * Fpp)[:, None] * D) + P.T @ ((w * Fuu)[:, None] * P)
        if np.any(Fup):
            cross = P.T @ ((w * Fup)[:, None] * D)
            H += cross + cross.T
        return 0.5 * (H + H.T)

    def w_norm(self, c) -> float:
        c = np.asarray(c, dtype=float)
        return float(np.sqrt(np.sum(self.w_weights * c * c)))


def build_level(problem: FunctionalSpec | ModelProblem, n: int,
                quad: tuple[int, int] | None = None) -> LevelSpace:
    """Tabulate the first ``n`` sine modes on a composite Gauss-Legendre rule.

    ``quad = (panels, points)`` defaults to ``(2n, 10)`` and must satisfy
    ``panels * points >= 2n``.
    """
    if isinstance(problem, ModelProblem):
        problem = problem.spec
    n = int(n)
    if n < 1:
        raise ValueError(f"level dimension must be >= 1, got {n}")
    m, p = quad if quad is not None else (2 * n, 10)
    if m < 1 or p < 1 or m * p < 2 * n:
        raise QuadratureResolutionError(
            f"quadrature ({m} panels x {p} points) below resolution rule m*p >= 2n = {2 * n}")
    x0, x1 = problem.domain
    nodes, weights = composite_gauss_legendre(x0, x1, m, p)
    level = LevelSpace(problem, n, (m, p), nodes, weights,
                       np.empty((0, n)), np.empty((0, n)))
    phi, dphi = level.basis(nodes)
    gram = phi.T @ (weights[:, None] * phi)
    dev = np.abs(gram - np.eye(n))
    j, k = np.unravel_index(np.argmax(dev), dev.shape)
    if dev[j, k] > GRAM_TOL:
        raise QuadratureResolutionError(
            f"Gram matrix deviates from identity by {dev[j, k]:.3e} at entry "
            f"({j + 1}, {k + 1}) with quadrature ({m}, {p})")
    log.debug("level n=%d: Gram residual %.3e", n, dev[j, k])
    return LevelSpace(problem, n, (m, p), nodes, weights, phi, dphi, float(dev[j, k]))


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    coeffs: np.ndarray
    level: LevelSpace

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.level.n,):
            raise DimensionError(
                f"coefficient vector of shape {c.shape} on level n={self.level.n}")
        object.__setattr__(self, "coeffs", c)

    def __len__(self) -> int:
        return self.level.n

    def __add__(self, other: CoefficientVector) -> CoefficientVector:
        return CoefficientVector(self.coeffs + _aligned(self, other), self.level)

    def __sub__(self, other: CoefficientVector) -> CoefficientVector:
        return CoefficientVector(self.coeffs - _aligned(self, other), self.level)

    def __neg__(self) -> CoefficientVector:
        return CoefficientVector(-self.coeffs, self.level)


def _aligned(v: CoefficientVector, w: CoefficientVector) -> np.ndarray:
    if w.level.n != v.level.n:
        raise DimensionError(f"levels differ: n={v.level.n} vs n={w.level.n}")
    return w.coeffs


def _check_x(level: LevelSpace, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x0, x1 = level.problem.domain
    if np.any((x < x0) | (x > x1)) or not np.all(np.isfinite(x)):
        raise DomainError(f"x outside domain [{x0}, {x1}]")
    return x


def eval_u(v: CoefficientVector, x):
    phi, _ = v.level.basis(_check_x(v.level, x))
    out = phi @ v.coeffs
    return float(out) if np.ndim(out) == 0 else out


def eval_du(v: CoefficientVector, x):
    _, dphi = v.level.basis(_check_x(v.level, x))
    out = dphi @ v.coeffs
    return float(out) if np.ndim(out) == 0 else out


def energy(v: CoefficientVector) -> float:
    return v.level.energy(v.coeffs)


def gradient(v: CoefficientVector) -> np.ndarray:
    return v.level.gradient(v.coeffs)


def hessian(v: CoefficientVector) -> np.ndarray:
    return v.level.hessian(v.coeffs)


def embed(v: CoefficientVector, target: LevelSpace) -> CoefficientVector:
    """Zero-pad into a finer (or equal) level; exact because levels are nested."""
    if target.n < v.level.n:
        raise DimensionError(f"cannot embed level n={v.level.n} into n={target.n}")
    c = np.zeros(target.n)
    c[: v.level.n] = v.coeffs
    return CoefficientVector(c, target)


def truncate(v: CoefficientVector, target: LevelSpace) -> CoefficientVector:
    if target.n > v.level.n:
        raise DimensionError(f"cannot truncate level n={v.level.n} to n={target.n}")
    return CoefficientVector(v.coeffs[: target.n].copy(), target)


def l2_inner(v: CoefficientVector, w: CoefficientVector) -> float:
    n = min(v.level.n, w.level.n)
    return float(v.coeffs[:n] @ w.coeffs[:n])


def w_norm(v: CoefficientVector) -> float:
    """H^1_0 norm ``(sum (k pi / L)^2 c_k^2)^(1/2)``."""
    return v.level.w_norm(v.coeffs)
