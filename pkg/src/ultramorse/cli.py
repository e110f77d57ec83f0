"""Command line front end.

    ultramorse run <cfg> [--seed N] [--out-dir DIR] [--levels 4,8,16]
    ultramorse sweep <cfg> --mu 0.5,2.5,5.0
    ultramorse check "2 + t" "1"
    ultramorse hyper "(1+e)*(1-e)"

Exit codes: 0 success; 1 bad input (parse, config, window, I/O);
2 Morse-relation violation (``run``, ``check``) or division by zero
(``hyper``); 3 degenerate level in ``run``; 4 some parameter value failed in
``sweep``.  Environment variables ``ULTRAMORSE_SEED``,
``ULTRAMORSE_OUT_DIR`` and ``ULTRAMORSE_LEVELS`` sit between the config
file and the command-line flags in precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .critical import SolverConfig, WindowError
from .kvtext import ConfigParseError, Entry, read_sections
from .ladder import LadderConfig, StabilizationTrace, run_ladder, with_seed
from .morse import NatPoly, verify_morse_relation
from .nonarch import classify, parse_series, shadow
from .problem import ModelProblem, UnsupportedParameterError, preset, problem_from_section

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_DEGENERATE, EXIT_SWEEP_FAILED = 0, 1, 2, 3, 4
ENV_PREFIX = "ULTRAMORSE_"

log = logging.getLogger("ultramorse")


@dataclass
class RunConfig:
    problem: ModelProblem
    problem_section: dict
    ladder: LadderConfig
    out_dir: Path
    json_name: str = "trace.json"
    csv_name: str = "trace.csv"
    source: str = "<config>"

    @property
    def seed(self) -> int:
        return self.ladder.solver.seed

    @property
    def json_path(self) -> Path:
        return self.out_dir / self.json_name

    @property
    def csv_path(self) -> Path:
        return self.out_dir / self.csv_name


def _parse_levels(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


_SOLVER_KEYS = {
    "tol_grad": float, "max_newton_iter": int, "n_starts": int, "seed": int,
    "deflation_power": float, "deflation_shift": float, "distinct_tol": float,
    "eig_tol": float,
}


def _convert(entry: Entry, kind, source: str):
    try:
        return kind(entry.value)
    except ValueError:
        raise entry.error(f"invalid {kind.__name__} value {entry.value!r}", source) from None


def load_run_config(path: Path | str, seed: int | None = None, out_dir: str | None = None,
                    levels: str | None = None) -> RunConfig:
    """Parse a run configuration; keyword overrides win over environment, then file."""
    path = Path(path)
    source = str(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc.strerror}", 0, 0, source) from None
    sections = read_sections(text, source)
    for name, sec in sections.items():
        if name not in {"problem", "ladder", "solver", "output"}:
            first = min((e.line for e in sec.values()), default=1)
            raise ConfigParseError(f"unknown section [{name}]", first, 1, source)
    if "problem" not in sections:
        raise ConfigParseError("missing [problem] section", 1, 1, source)
    prob_sec = dict(sections["problem"])
    if "file" in prob_sec:
        e = prob_sec["file"]
        p = Path(e.value)
        if not p.is_absolute():
            p = path.parent / p
        prob_sec["file"] = Entry(str(p), e.line, e.column, e.key_column)
    problem = problem_from_section(prob_sec, source)

    solver_sec = sections.get("solver", {})
    solver_kw = {}
    for key, entry in solver_sec.items():
        if key not in _SOLVER_KEYS:
            raise entry.key_error(f"unknown solver key {key!r}", source)
        solver_kw[key] = _convert(entry, _SOLVER_KEYS[key], source)
    env_seed = os.environ.get(ENV_PREFIX + "SEED")
    if env_seed is not None:
        solver_kw["seed"] = int(env_seed)
    if seed is not None:
        solver_kw["seed"] = seed
    try:
        solver = SolverConfig(**solver_kw)
    except ValueError as exc:
        anchor = next(iter(solver_sec.values()), Entry("", 1, 1))
        raise anchor.error(str(exc), source) from None

    lad_sec = sections.get("ladder", {})
    lad_kw: dict = {"solver": solver}
    for key, entry in lad_sec.items():
        if key == "levels":
            try:
                lad_kw["levels"] = _parse_levels(entry.value)
            except ValueError:
                raise entry.error(f"invalid level list {entry.value!r}", source) from None
        elif key == "window":
            if entry.value.strip().lower() == "full_coercive":
                lad_kw["window"] = "full_coercive"
            else:
                try:
                    a, b = (float(t) for t in entry.value.replace(",", " ").split())
                except ValueError:
                    raise entry.error(
                        f"window must be 'full_coercive' or 'a, b', got {entry.value!r}",
                        source) from None
                if not a < b:
                    raise entry.error(f"window error: need a < b, got a={a}, b={b}", source)
                lad_kw["window"] = (a, b)
        elif key == "betti":
            try:
                lad_kw["betti"] = NatPoly.parse(entry.value)
            except ValueError as exc:
                raise entry.error(str(exc), source) from None
        elif key == "match_tol":
            lad_kw["match_tol"] = _convert(entry, float, source)
        elif key == "quad_points":
            lad_kw["quad_points"] = _convert(entry, int, source)
        else:
            raise entry.key_error(f"unknown ladder key {key!r}", source)
    env_levels = os.environ.get(ENV_PREFIX + "LEVELS")
    for override in (env_levels, levels):
        if override is not None:
            try:
                lad_kw["levels"] = _parse_levels(override)
            except ValueError:
                raise ConfigParseError(f"invalid level list {override!r}", 0, 0, "--levels") from None
    if lad_kw.get("window", "full_coercive") != "full_coercive" and "betti" not in lad_kw:
        anchor = lad_sec["window"]
        raise anchor.error("a custom window requires 'betti' in [ladder]", source)
    try:
        ladder = LadderConfig(**lad_kw)
    except ValueError as exc:
        anchor = lad_sec.get("levels", Entry("", 1, 1))
        raise anchor.error(str(exc), source) from None

    out_sec = sections.get("output", {})
    for key, entry in out_sec.items():
        if key not in {"dir", "json", "csv"}:
            raise entry.key_error(f"unknown output key {key!r}", source)
    directory = out_sec["dir"].value if "dir" in out_sec else "ultramorse-out"
    directory = os.environ.get(ENV_PREFIX + "OUT_DIR", directory)
    if out_dir is not None:
        directory = out_dir
    return RunConfig(
        problem=problem,
        problem_section=prob_sec,
        ladder=ladder,
        out_dir=Path(directory),
        json_name=out_sec["json"].value if "json" in out_sec else "trace.json",
        csv_name=out_sec["csv"].value if "csv" in out_sec else "trace.csv",
        source=source,
    )


def _ensure_writable(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"output directory {directory} is not writable")


def format_summary(trace: StabilizationTrace) -> str:
    lines = [f"problem: {trace.problem}",
             f"{'level':>6} {'count':>5}  {'indices':<16} {'M_t':<18} {'Q':<12} status"]
    for r in trace.per_level:
        if r.degenerate:
            status, M, Q = "DEGENERATE", "-", "-"
        else:
            M = str(r.M)
            Q = str(r.report.Q) if r.report.ok else "-"
            status = "ok" if r.report.ok else "VIOLATION"
            if not r.report.euler_ok:
                status += " (euler)"
        idx = " ".join(str(i) for i in r.indices) or "-"
        lines.append(f"{r.level:>6} {len(r.points):>5}  {idx:<16} {M:<18} {Q:<12} {status}")
    lines.append("families:")
    for k, fam in enumerate(trace.families):
        incs = ", ".join(f"{v:.2e}" for v in fam.w_increments) or "-"
        flag = "PSU converged" if fam.converged else f"PSU {fam.psu_status}"
        if fam.terminated:
            flag += ", terminated"
        lines.append(f"  F{k}: levels {fam.levels} index {fam.index_history} "
                     f"increments [{incs}] {flag}")
    lines.append(f"stable_from: {trace.stable_from if trace.stable_from is not None else 'none'}"
                 f"   M_limit: {trace.M_limit if trace.M_limit is not None else 'none'}")
    return "\n".join(lines)


def _exit_code(trace: StabilizationTrace) -> int:
    if trace.degenerate_levels:
        return EXIT_DEGENERATE
    if trace.violations:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out_dir, args.levels)
    _ensure_writable(cfg.out_dir)
    trace = run_ladder(cfg.problem, cfg.ladder)
    cfg.json_path.write_text(trace.to_json())
    cfg.csv_path.write_text(trace.to_csv())
    print(format_summary(trace))
    print(f"wrote {cfg.json_path} and {cfg.csv_path}")
    return _exit_code(trace)


def _parse_mu_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.replace(",", " ").split()]
    seen, out = set(), []
    for v in values:
        if v in seen:
            log.warning("duplicate mu value %g ignored", v)
            continue
        seen.add(v)
        out.append(v)
    return out


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out_dir, args.levels)
    try:
        mus = _parse_mu_list(args.mu)
    except ValueError:
        print(f"error: cannot parse mu list {args.mu!r}", file=sys.stderr)
        return EXIT_INPUT
    if not mus:
        print("error: empty mu list", file=sys.stderr)
        return EXIT_INPUT
    sec = cfg.problem_section
    if "preset" not in sec:
        print("error: sweep needs a preset problem with a mu parameter", file=sys.stderr)
        return EXIT_INPUT
    name = sec["preset"].value
    x0 = float(sec["x0"].value) if "x0" in sec else 0.0
    x1 = float(sec["x1"].value) if "x1" in sec else math.pi
    _ensure_writable(cfg.out_dir)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mu", "seed", "count", "M_t", "Q", "stable_from", "status"])
    failed = 0
    print(f"{'mu':>8} {'count':>5}  {'M_t':<18} {'Q':<12} status")
    for i, mu in enumerate(mus):
        seed = cfg.seed + i
        try:
            problem = preset(name, mu, (x0, x1))
            trace = run_ladder(problem, with_seed(cfg.ladder, seed))
        except (UnsupportedParameterError, ValueError, ArithmeticError) as exc:
            failed += 1
            writer.writerow([repr(mu), seed, "", "", "", "", f"error: {exc}"])
            print(f"{mu:>8g} {'-':>5}  {'-':<18} {'-':<12} error: {exc}")
            continue
        finest = trace.per_level[-1]
        code = _exit_code(trace)
        status = {EXIT_OK: "ok", EXIT_VIOLATION: "violation", EXIT_DEGENERATE: "degenerate"}[code]
        if code != EXIT_OK:
            failed += 1
        M = "" if finest.M is None else str(finest.M)
        Q = "" if finest.report is None or finest.report.Q is None else str(finest.report.Q)
        stable = "" if trace.stable_from is None else trace.stable_from
        writer.writerow([repr(mu), seed, len(finest.points), M, Q, stable, status])
        print(f"{mu:>8g} {len(finest.points):>5}  {M or '-':<18} {Q or '-':<12} {status}")
    path = cfg.out_dir / "sweep.csv"
    path.write_text(buf.getvalue())
    print(f"wrote {path}")
    return EXIT_SWEEP_FAILED if failed else EXIT_OK


def cmd_check(args) -> int:
    try:
        M = NatPoly.parse(args.M)
        P = NatPoly.parse(args.P)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = verify_morse_relation(M, P)
    print(f"M = {M}")
    print(f"P = {P}")
    if report.ok:
        print(f"Q = {report.Q}")
    else:
        print(f"violation: {report.violation}")
    print(f"euler_ok = {report.euler_ok}   M(1) = {report.count_M1}")
    return EXIT_OK if report.ok else EXIT_VIOLATION


def _format_shadow(value: float) -> str:
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    return f"{value:g}" if value == int(value) else repr(value)


def cmd_hyper(args) -> int:
    try:
        x = parse_series(args.expression)
    except ZeroDivisionError as exc:
        print(f"error: division by zero ({exc})", file=sys.stderr)
        return EXIT_VIOLATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(x)
    print(f"classification: {classify(x).value}")
    print(f"shadow: {_format_shadow(shadow(x))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ultramorse",
        description="Critical points, Morse polynomials and level-ladder stabilization.")
    sub = parser.add_subparsers(dest="command", required=True)

    def ladder_flags(p):
        p.add_argument("config", help="run configuration file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--levels", default=None, help="comma separated level dimensions")

    p = sub.add_parser("run", help="run a level ladder and write JSON/CSV traces")
    ladder_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="independent ladders over a list of mu values")
    ladder_flags(p)
    p.add_argument("--mu", required=True, help="comma separated mu values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="verify M = P + (1+t) Q with Q in N[t]")
    p.add_argument("M")
    p.add_argument("P")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("hyper", help="evaluate a Levi-Civita series expression in e")
    p.add_argument("expression")
    p.set_defaults(func=cmd_hyper)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (WindowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
