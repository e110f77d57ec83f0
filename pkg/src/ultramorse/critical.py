"""Critical points of the restricted functional by deflated Newton multistart.

Newton solves ``H(v) d = -g(v)``.  Deflation multiplies the residual by

    M(v) = prod_i (||v - v_i||_W^(-power) + shift)

which turns each known root into a pole.  The deflated Newton step is the
undeflated one rescaled by ``1 / (1 - grad(log M) . d)``, so no extra linear
solve is needed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .galerkin import CoefficientVector, LevelSpace

__all__ = [
    "CriticalPoint",
    "SolverConfig",
    "WindowError",
    "deflated_search",
    "filter_window",
    "morse_data",
    "newton_solve",
]

log = logging.getLogger(__name__)

TIKHONOV = 1e-8
MAX_RETRIES = 3
#: iterates beyond this W-norm are treated as diverged
DIVERGENCE_NORM = 1e8


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol_grad: float = 1e-10
    max_newton_iter: int = 100
    n_starts: int = 50
    seed: int = 0
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    distinct_tol: float = 1e-6
    eig_tol: float = 1e-8

    def __post_init__(self):
        for name in ("tol_grad", "deflation_power", "deflation_shift", "distinct_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be >= 1, got {self.n_starts}")
        if self.max_newton_iter < 1:
            raise ValueError(f"max_newton_iter must be >= 1, got {self.max_newton_iter}")


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    v: CoefficientVector
    value: float
    grad_norm: float
    spectrum: np.ndarray = field(repr=False)
    morse_index: int
    nondegenerate: bool
    min_abs_eig: float
    iterations: int = 0

    @property
    def coeffs(self) -> np.ndarray:
        return self.v.coeffs

    @property
    def level(self) -> LevelSpace:
        return self.v.level

    def __repr__(self) -> str:
        return (f"CriticalPoint(n={self.level.n}, value={self.value:.10g}, "
                f"index={self.morse_index}, nondegenerate={self.nondegenerate})")


def morse_data(level: LevelSpace, coeffs, eig_tol: float = 1e-8):
    """Morse index, nondegeneracy flag and sorted Hessian spectrum at ``coeffs``."""
    if isinstance(coeffs, CoefficientVector):
        coeffs = coeffs.coeffs
    H = level.hessian(coeffs)
    spectrum = np.linalg.eigvalsh(H)
    index = int(np.count_nonzero(spectrum < -eig_tol))
    min_abs = float(np.min(np.abs(spectrum)))
    return index, min_abs > eig_tol, spectrum


def _make_point(level: LevelSpace, c: np.ndarray, cfg: SolverConfig, iterations: int) -> CriticalPoint:
    index, nondeg, spectrum = morse_data(level, c, cfg.eig_tol)
    return CriticalPoint(
        v=level.vector(c),
        value=level.energy(c),
        grad_norm=float(np.linalg.norm(level.gradient(c))),
        spectrum=spectrum,
        morse_index=index,
        nondegenerate=nondeg,
        min_abs_eig=float(np.min(np.abs(spectrum))),
        iterations=iterations,
    )


def _w_distance(level: LevelSpace, a: np.ndarray, b: np.ndarray) -> float:
    return level.w_norm(a - b)


def _solve_newton(H: np.ndarray, g: np.ndarray) -> np.ndarray | None:
    n = len(g)
    for attempt in range(MAX_RETRIES + 1):
        A = H if attempt == 0 else H + TIKHONOV * 10 ** (attempt - 1) * np.eye(n)
        try:
            d = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(d)):
            return d
    return None


def newton_solve(
    level: LevelSpace,
    start,
    cfg: SolverConfig = SolverConfig(),
    deflated_against=(),
) -> CriticalPoint | None:
    """Newton iteration for ``gradient = 0`` from ``start``; ``None`` on failure.

    Failure covers iteration exhaustion, divergence, an unsolvable Newton
    system after Tikhonov retries, and convergence onto a deflated point.
    ``iterations`` counts gradient evaluations, so an exact start reports 1.
    """
    c = np.array(start.coeffs if isinstance(start, CoefficientVector) else start, dtype=float)
    if c.shape != (level.n,):
        raise ValueError(f"start has shape {c.shape}, level has n={level.n}")
    known = [np.asarray(p.coeffs if isinstance(p, CriticalPoint) else p, dtype=float)
             for p in deflated_against]
    Wdiag = level.w_weights
    power, shift = cfg.deflation_power, cfg.deflation_shift

    for it in range(1, cfg.max_newton_iter + 1):
        g = level.gradient(c)
        if not np.all(np.isfinite(g)):
            return None
        if np.linalg.norm(g) < cfg.tol_grad:
            if any(_w_distance(level, c, k) <= cfg.distinct_tol for k in known):
                return None
            return _make_point(level, c, cfg, it)
        d = _solve_newton(level.hessian(c), g)
        if d is None:
            log.debug("Newton system unsolvable after %d retries", MAX_RETRIES)
            return None
        if known:
            # grad(log M) . d, with M the product of (dist^-power + shift)
            slope = 0.0
            for k in known:
                diff = c - k
                dist = np.sqrt(np.sum(Wdiag * diff * diff))
                if dist == 0.0:
                    return None
                m_i = dist ** (-power) + shift
                ddist = (Wdiag * diff) @ d / dist
                slope += -power * dist ** (-power - 1) * ddist / m_i
            denom = 1.0 - slope
            if denom == 0.0 or not np.isfinite(denom):
                return None
            d = d / denom
        c = c + d
        if not np.all(np.isfinite(c)) or level.w_norm(c) > DIVERGENCE_NORM:
            return None
    return None


def _starts(level: LevelSpace, cfg: SolverConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    decay = 1.0 / np.arange(1, level.n + 1)
    starts = [np.zeros(level.n)]
    starts += [rng.standard_normal(level.n) * decay for _ in range(cfg.n_starts)]
    return starts


def deflated_search(level: LevelSpace, cfg: SolverConfig = SolverConfig()) -> list[CriticalPoint]:
    """Enumerate critical points from the zero start plus ``n_starts`` random starts.

    Starts are Gaussian with mode weights ``1/k``; each success is added to
    the deflation set.  Returned points are sorted by value, ties broken by
    coefficients.
    """
    found: list[CriticalPoint] = []
    for start in _starts(level, cfg):
        pt = newton_solve(level, start, cfg, found)
        if pt is None:
            continue
        # first-found wins; a later point within distinct_tol is a duplicate
        if any(_w_distance(level, pt.coeffs, q.coeffs) <= cfg.distinct_tol for q in found):
            continue
        found.append(pt)
    return sorted(found, key=lambda p: (p.value, tuple(p.coeffs)))


def filter_window(points, a: float, b: float) -> list[CriticalPoint]:
    """Points with ``a < value <= b``, order preserved."""
    if not a < b:
        raise WindowError(f"window needs a < b, got a={a}, b={b}")
    return [p for p in points if a < p.value <= b]
