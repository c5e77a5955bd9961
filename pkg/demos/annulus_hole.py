"""An annulus whose hole closes.

The level-set flow of the boundary of the annulus 0.3 < r < 1 moves the
inner circle outward and the outer circle inward.  The inner circle shrinks
to a point first.  Over the hole the graph was capped at L; once the hole
closes, the graph comes down there and u(0, t) becomes an ordinary finite
value below L - 1.

    python demos/annulus_hole.py        (about a minute)
"""

from graphmcf import compare as C
from graphmcf import load_config, run_scenario

cfg = load_config("annulus", h=0.01, eps=0.02)
res = run_scenario(cfg, checks="hole_closing,origin_drop")
graph, vt = res.trajectories["graph"], res.trajectories["vtilde"]

print("   t      u(0, t)   vtilde(0, t)")
for g, v in zip(graph, vt):
    print(f"{g.time:.4f}  {g.values[0]:9.3f}   {v.values[0]:+.4f}")

print(f"\nhole closes at {C.hole_closing_time(vt)}; u(0) drops below L - 1 at "
      f"{C.origin_drop_time(graph)[0]}")
for c in res.checks:
    print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
