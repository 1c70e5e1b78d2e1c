"""
CP-divisibility of the three mixing experiments
================================================

For each experiment the intermediate map from a reference time s to later
times t is built from transfer matrices. A negative Choi eigenvalue marks
a step that is not completely positive.
"""
import numpy as np

from channel_mixer import ExperimentConfig, run_experiment

for name in ("mm", "nm-replica", "nm-depol"):
    cfg = ExperimentConfig.default_for(name)
    records = run_experiment(cfg)
    print(f"\n== {name}  (s = {cfg.s}) ==")
    for rec in records:
        lo = min(r.mean for r in rec.mineig)
        kind = "markovian" if rec.markovian else "non-markovian"
        print(f"{rec.label} {rec.family:18s} lowest min-eig {lo: .5f}  -> {kind}")

    # a coarse look at the curves
    times = [r.t for r in records[0].mineig][::6]
    print("   t  " + "".join(f"{rec.label:>11s}" for rec in records))
    for t in times:
        vals = [next(r.mean for r in rec.mineig if r.t == t) for rec in records]
        print(f"{t:5.1f} " + "".join(f"{v:11.5f}" for v in vals))

# The designed channels: the total stays just above zero after s = 3
depol = run_experiment(ExperimentConfig.default_for("nm-depol"))[2]
print("\nLT min-eig just after s:", np.round([r.mean for r in depol.mineig[:5]], 5))
