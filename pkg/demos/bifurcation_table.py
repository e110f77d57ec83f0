"""
Counting branches as mu crosses 1 and 4
=======================================

New pairs of critical points appear when ``mu`` passes ``k^2``: the trivial
solution picks up one more negative direction and hands its old index to the
new pair.  The Morse polynomial tracks this while ``M(-1)`` stays at 1.
"""

from ultramorse import LadderConfig, chafee_infante, run_ladder

cfg = LadderConfig(levels=(4, 8, 16))

print(f"{'mu':>5} {'count':>5}  {'indices':<18} {'M_t':<14} {'Q':<8} M(-1)")
for mu in (0.5, 2.5, 5.0, 8.0):
    rec = run_ladder(chafee_infante(mu), cfg).per_level[-1]
    M, Q = rec.report.M, rec.report.Q
    print(f"{mu:>5} {len(rec.points):>5}  {str(rec.indices):<18} {str(M):<14} {str(Q):<8} {M(-1)}")
