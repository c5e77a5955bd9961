"""A dumbbell in space pinches at its neck.

Two balls joined by a thin cylinder form a connected domain in R^3.  Under
the level-set flow the thin neck collapses first and the domain splits in
two.  The graph over the dumbbell splits as well: the sublevel set
{u < L - 5} goes from one to two components at nearly the same time.

    python demos/neck_pinch.py          (a few minutes)
"""

from graphmcf import compare as C
from graphmcf import load_config, run_scenario

cfg = load_config("neckpinch")
res = run_scenario(cfg, checks="neck_split")
graph, vt = res.trajectories["graph"], res.trajectories["vtilde"]
a = cfg.L - 5

print("   t    components of {vtilde < 0}   of {u < L - 5}")
for (t, nv), (_, ng) in zip(C.component_history(vt, lambda s: s.values < 0),
                            C.component_history(graph, lambda s: s.values < a)):
    print(f"{t:.3f}   {nv:>10d}   {ng:>22d}")
(check,) = res.checks
print(f"\n{'PASS' if check.passed else 'FAIL'}  split times {check.detail}")
