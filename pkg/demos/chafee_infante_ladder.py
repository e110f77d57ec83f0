"""
Critical points of a double-well energy on nested sine levels
=============================================================

We look at ``J(u) = int_0^pi u'^2/2 - mu u^2/2 + u^4/4 dx`` with zero boundary
values.  For ``1 < mu < 4`` it has three critical points: the trivial one and a
pair ``+-u`` of one-sign profiles.  Each is found on every level of the ladder,
its Morse index computed, and the counts checked against the Morse relation.
"""

import numpy as np

from ultramorse import LadderConfig, chafee_infante, run_ladder
from ultramorse.galerkin import eval_u

problem = chafee_infante(2.5)
trace = run_ladder(problem, LadderConfig(levels=(4, 8, 16, 32)))

# What every level sees.
for rec in trace.per_level:
    values = ", ".join(f"{p.value:+.6f}" for p in rec.points)
    print(f"n={rec.level:>2}  indices {rec.indices}  J = [{values}]"
          f"  M = {rec.report.M}  Q = {rec.report.Q}")

print("stable from level", trace.stable_from)

# Matched families, and how fast each one settles down.
for fam in trace.families:
    incs = " ".join(f"{d:.1e}" for d in fam.w_increments)
    rate = "n/a" if fam.rate is None else f"{fam.rate:.1f}"
    print(f"index {fam.index_history}  increments {incs}  rate {rate}")

# The positive branch, sampled on a coarse grid.
u = max(trace.per_level[-1].points, key=lambda p: eval_u(p.v, np.pi / 2))
x = np.linspace(0, np.pi, 9)
print("u(x) on", np.round(x, 3))
print("      ", np.round(eval_u(u.v, x), 6))
