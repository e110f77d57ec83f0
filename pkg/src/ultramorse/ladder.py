"""Run the critical-point pipeline over an increasing chain of levels.

A trace records, per level, the critical points in the value window, the
Morse polynomial and the Morse-relation report.  Points are chained across
levels into families by nearest-neighbour matching in the W-norm, and a
family's W-norm increments feed the Palais-Smale (PSU) convergence check.
A limit value is claimed only when counts, index multisets and Morse
polynomials are literally constant over the tail of the ladder.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .critical import CriticalPoint, SolverConfig, deflated_search, filter_window
from .galerkin import LevelSpace, build_level
from .morse import (DegeneracyError, MorseRelationReport, NatPoly, default_betti,
                    morse_polynomial, verify_morse_relation)
from .problem import FunctionalSpec, ModelProblem

__all__ = [
    "LadderConfig",
    "LevelRecord",
    "MatchedFamily",
    "Pairing",
    "PSUResult",
    "StabilizationTrace",
    "match_points",
    "psu_diagnostic",
    "run_ladder",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PSU_LAST_INCREMENT = 1e-4
MATCH_TOL_FLOOR = 1e-4
MATCH_TOL_FACTOR = 0.25


@dataclass(frozen=True)
class LadderConfig:
    levels: tuple[int, ...] = (4, 8, 16, 32)
    window: tuple[float, float] | str = "full_coercive"
    solver: SolverConfig = SolverConfig()
    betti: NatPoly | None = None
    match_tol: float | None = None
    quad_points: int = 10

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        if len(levels) < 2:
            raise ValueError("a ladder needs at least 2 levels")
        if any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
            raise ValueError(f"levels must be positive and strictly increasing, got {levels}")
        object.__setattr__(self, "levels", levels)
        if self.window != "full_coercive":
            a, b = self.window
            if not a < b:
                from .critical import WindowError
                raise WindowError(f"window needs a < b, got a={a}, b={b}")
            object.__setattr__(self, "window", (float(a), float(b)))
        if self.match_tol is not None and not self.match_tol > 0:
            raise ValueError("match_tol must be positive")

    @property
    def window_kind(self) -> str:
        return "full_coercive" if self.window == "full_coercive" else "custom"


@dataclass
class LevelRecord:
    level: int
    points: list[CriticalPoint]
    M: NatPoly | None
    report: MorseRelationReport | None
    degenerate: bool = False
    all_points: int = 0

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(p.morse_index for p in self.points))


@dataclass(frozen=True)
class PSUResult:
    converged: bool
    rate: float | None
    status: str = "ok"


@dataclass
class MatchedFamily:
    members: dict[int, CriticalPoint] = field(default_factory=dict)
    w_increments: list[float] = field(default_factory=list)
    terminated: bool = False
    converged: bool = False
    rate: float | None = None
    psu_status: str = "insufficient_data"

    @property
    def index_history(self) -> list[int]:
        return [p.morse_index for _, p in sorted(self.members.items())]

    @property
    def levels(self) -> list[int]:
        return sorted(self.members)

    @property
    def finest(self) -> CriticalPoint:
        return self.members[max(self.members)]


@dataclass(frozen=True)
class Pairing:
    """Result of matching a coarse list against a fine list.

    ``pairs`` maps fine index -> coarse index; ``distances`` is keyed the same.
    """

    pairs: dict[int, int]
    distances: dict[int, float]
    new_fine: list[int]
    terminated_coarse: list[int]


@dataclass
class StabilizationTrace:
    problem: str
    config: LadderConfig
    per_level: list[LevelRecord]
    families: list[MatchedFamily]
    stable_from: int | None
    M_limit: NatPoly | None

    @property
    def violations(self) -> list[int]:
        return [r.level for r in self.per_level if r.report is not None and not r.report.ok]

    @property
    def degenerate_levels(self) -> list[int]:
        return [r.level for r in self.per_level if r.degenerate]

    def point_ids(self) -> dict[int, str]:
        """Stable identifiers ``L<level>P<k>`` keyed by ``id(point)``."""
        ids = {}
        for rec in self.per_level:
            for k, p in enumerate(rec.points):
                ids[id(p)] = f"L{rec.level}P{k}"
        return ids

    def to_dict(self) -> dict:
        ids = self.point_ids()
        cfg = self.config
        return {
            "schema": SCHEMA_VERSION,
            "problem": self.problem,
            "levels": list(cfg.levels),
            "window": cfg.window if isinstance(cfg.window, str) else list(cfg.window),
            "seed": cfg.solver.seed,
            "per_level": [
                {
                    "level": r.level,
                    "degenerate": r.degenerate,
                    "found": r.all_points,
                    "count": len(r.points),
                    "indices": list(r.indices),
                    "M": None if r.M is None else str(r.M),
                    "relation": None if r.report is None else r.report.to_dict(),
                    "points": [
                        {
                            "id": ids[id(p)],
                            "value": p.value,
                            "morse_index": p.morse_index,
                            "nondegenerate": p.nondegenerate,
                            "grad_norm": p.grad_norm,
                            "min_abs_eig": p.min_abs_eig,
                            "w_norm": p.level.w_norm(p.coeffs),
                            "spectrum": [float(s) for s in p.spectrum],
                            "coeffs": [float(c) for c in p.coeffs],
                        }
                        for p in r.points
                    ],
                }
                for r in self.per_level
            ],
            "families": [
                {
                    "members": [ids[id(fam.members[n])] for n in fam.levels],
                    "levels": fam.levels,
                    "index_history": fam.index_history,
                    "w_increments": list(fam.w_increments),
                    "terminated": fam.terminated,
                    "converged": fam.converged,
                    "rate": fam.rate,
                    "psu_status": fam.psu_status,
                }
                for fam in self.families
            ],
            "stable_from": self.stable_from,
            "M_limit": None if self.M_limit is None else str(self.M_limit),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        ids = self.point_ids()
        increment = {}
        for fam in self.families:
            for n, inc in zip(fam.levels[1:], fam.w_increments):
                increment[id(fam.members[n])] = inc
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "point_id", "value", "index", "grad_norm", "increment"])
        for rec in self.per_level:
            for p in rec.points:
                inc = increment.get(id(p))
                writer.writerow([rec.level, ids[id(p)], repr(p.value), p.morse_index,
                                 repr(p.grad_norm), "" if inc is None else repr(inc)])
        return buf.getvalue()


def _embedded_distance(coarse: CriticalPoint, fine: CriticalPoint) -> float:
    n = coarse.level.n
    diff = fine.coeffs.copy()
    diff[:n] -= coarse.coeffs
    return fine.level.w_norm(diff)


def match_points(coarse: list[CriticalPoint], fine: list[CriticalPoint], tol: float) -> Pairing:
    """Greedy nearest-neighbour pairing in the W-norm after embedding.

    Pairs are taken in order of increasing distance while both ends are free
    and the distance is within ``tol``.  Unpaired coarse points are returned
    as terminated (and logged as suspicious).
    """
    cand = []
    for i, c in enumerate(coarse):
        for j, f in enumerate(fine):
            d = _embedded_distance(c, f)
            if d <= tol:
                cand.append((d, i, j))
    cand.sort()
    pairs: dict[int, int] = {}
    dist: dict[int, float] = {}
    used = set()
    for d, i, j in cand:
        if i in used or j in pairs:
            continue
        pairs[j] = i
        dist[j] = d
        used.add(i)
    terminated = [i for i in range(len(coarse)) if i not in used]
    for i in terminated:
        log.warning("coarse point %r has no partner within %.3g on the finer level",
                    coarse[i], tol)
    new_fine = [j for j in range(len(fine)) if j not in pairs]
    return Pairing(pairs, dist, new_fine, terminated)


def psu_diagnostic(family: MatchedFamily | list[float],
                   levels: list[int] | None = None) -> PSUResult:
    """Cauchy-decay check on a family's W-norm increments.

    Converged means each increment is below its predecessor (runs of exact
    zeros are allowed) and the last one is below ``1e-4``.  ``rate`` is the
    least-squares slope of log(increment) against log(level), reported only
    when every increment is positive.
    """
    if isinstance(family, MatchedFamily):
        incs = list(family.w_increments)
        levels = family.levels
    else:
        incs = list(family)
        levels = list(levels) if levels is not None else list(range(1, len(incs) + 2))
    if len(incs) < 2:
        return PSUResult(False, None, "insufficient_data")
    decreasing = all(b < a or (a == 0.0 and b == 0.0) for a, b in zip(incs, incs[1:]))
    converged = decreasing and incs[-1] < PSU_LAST_INCREMENT
    rate = None
    if converged and all(v > 0 for v in incs):
        x = np.log(np.asarray(levels[1:len(incs) + 1], dtype=float))
        y = np.log(np.asarray(incs))
        rate = float(np.polyfit(x, y, 1)[0])
    return PSUResult(converged, rate, "ok" if converged else "not_cauchy")


def _default_match_tol(points: list[CriticalPoint]) -> float:
    gaps = [p.level.w_norm(p.coeffs - q.coeffs)
            for i, p in enumerate(points) for q in points[i + 1:]]
    if not gaps:
        return MATCH_TOL_FLOOR
    return max(MATCH_TOL_FACTOR * min(gaps), MATCH_TOL_FLOOR)


def _level_record(level: LevelSpace, cfg: LadderConfig, betti: NatPoly) -> LevelRecord:
    found = deflated_search(level, cfg.solver)
    if cfg.window == "full_coercive":
        pts = list(found)
    else:
        pts = filter_window(found, *cfg.window)
    try:
        M = morse_polynomial(pts)
    except DegeneracyError as exc:
        log.warning("level n=%d: %s; excluded from the Morse relation", level.n, exc)
        return LevelRecord(level.n, pts, None, None, degenerate=True, all_points=len(found))
    return LevelRecord(level.n, pts, M, verify_morse_relation(M, betti), all_points=len(found))


def _stable_from(records: list[LevelRecord]) -> int | None:
    # smallest level from which count, index multiset and M agree, over >= 2 levels
    last = records[-1]
    if last.degenerate:
        return None
    start = len(records) - 1
    while start > 0:
        prev = records[start - 1]
        if prev.degenerate or prev.indices != last.indices or prev.M != last.M:
            break
        start -= 1
    if start == len(records) - 1:
        return None
    return records[start].level


def run_ladder(problem: ModelProblem | FunctionalSpec,
               cfg: LadderConfig = LadderConfig()) -> StabilizationTrace:
    spec = problem.spec if isinstance(problem, ModelProblem) else problem
    betti = default_betti(cfg.window_kind, cfg.betti)
    levels = [build_level(spec, n, (2 * n, cfg.quad_points)) for n in cfg.levels]
    records = [_level_record(lv, cfg, betti) for lv in levels]

    families: list[MatchedFamily] = []
    tails: dict[int, MatchedFamily] = {}
    for k, p in enumerate(records[0].points):
        fam = MatchedFamily({records[0].level: p})
        families.append(fam)
        tails[k] = fam
    for prev, rec in zip(records, records[1:]):
        tol = cfg.match_tol if cfg.match_tol is not None else _default_match_tol(rec.points)
        pairing = match_points(prev.points, rec.points, tol)
        new_tails: dict[int, MatchedFamily] = {}
        for j, p in enumerate(rec.points):
            if j in pairing.pairs:
                fam = tails[pairing.pairs[j]]
                fam.members[rec.level] = p
                fam.w_increments.append(pairing.distances[j])
            else:
                fam = MatchedFamily({rec.level: p})
                families.append(fam)
            new_tails[j] = fam
        for i in pairing.terminated_coarse:
            tails[i].terminated = True
        tails = new_tails

    for fam in families:
        res = psu_diagnostic(fam)
        fam.converged, fam.rate, fam.psu_status = res.converged, res.rate, res.status

    stable = _stable_from(records)
    M_limit = None
    if stable is not None:
        M_limit = records[-1].M
    label = spec.label
    return StabilizationTrace(label, cfg, records, families, stable, M_limit)


def with_seed(cfg: LadderConfig, seed: int) -> LadderConfig:
    return replace(cfg, solver=replace(cfg.solver, seed=seed))
