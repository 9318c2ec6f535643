#!/usr/bin/env python3
"""Run a reduced scheme-comparison campaign and write the results CSV.

This is the same machinery the `dyntdd` command drives, scaled down to a
single site so it finishes in about a minute.  Feed the CSV to the plot
tool afterwards:

    cd frontend && npm run plot -- --input ../mini_results.csv --out figs/
"""

from dyntdd import CampaignConfig, GeometryConfig, execute_campaign
from dyntdd.traffic import DL, UL

cfg = CampaignConfig(
    schemes=("s1", "s3", "s4"),
    lambdas=(0.5, 2.5),
    seeds=(1, 2),
    duration_ms=6000,
    warmup_ms=1000,
    output_path="mini_results.csv",
    geometry=GeometryConfig(n_sites=1, sectors_per_site=3, picos_per_macrocell=2,
                            ues_per_pico=4),
)

reports = execute_campaign(cfg, verbose=True)

print("\nseed-averaged mean packet throughput (Mbps):")
for lam in cfg.lambdas:
    for direction in (DL, UL):
        cells = []
        for scheme in cfg.schemes:
            vals = [reports[(scheme, lam, seed)].directions[direction].mean_bps
                    for seed in cfg.seeds]
            cells.append(f"{scheme}={sum(vals) / len(vals) / 1e6:6.2f}")
        print(f"  lambda {lam:>4} {direction}: " + "  ".join(cells))
print(f"\nwrote {cfg.output_path}")
