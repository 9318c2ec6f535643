#!/usr/bin/env python3
"""Generate the default picocell layout, validate it, and plot it.

The macro grid is only a placement frame: 7 sites x 3 sectors, 4 picocells
dropped per sector, 10 UEs per picocell within 40 m.
"""

import numpy as np

from dyntdd import GeometryConfig, generate_deployment, validate_deployment
from dyntdd.topology import export_positions_csv, wraparound_distance

cfg = GeometryConfig()
dep = generate_deployment(cfg, seed=1)

print(f"sites: {len(dep.sites)}, sectors: {len(dep.macrocell_sectors)}, "
      f"picocells: {dep.n_picos}, UEs: {dep.n_ues}")

violations = validate_deployment(dep)
print("layout violations:", violations if violations else "none")

serving = np.array([
    wraparound_distance(dep.ue_pos[u], dep.pico_pos[dep.ue_cell[u]], cfg)
    for u in range(dep.n_ues)
])
print(f"UE-to-pico distance: min {serving.min():.1f} m, "
      f"median {np.median(serving):.1f} m, max {serving.max():.1f} m")

export_positions_csv(dep, "layout.csv")
print("wrote layout.csv")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 7))
    ax.scatter(*dep.sites.T, marker="^", s=120, c="black", label="macro site")
    ax.scatter(*dep.pico_pos.T, marker="s", s=25, c="tab:red", label="picocell")
    ax.scatter(*dep.ue_pos.T, s=4, c="tab:blue", alpha=0.5, label="UE")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend()
    fig.savefig("layout.png", dpi=120)
    print("wrote layout.png")
except ImportError:
    print("matplotlib not installed; skipping layout.png")
