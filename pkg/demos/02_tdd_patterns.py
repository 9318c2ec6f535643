#!/usr/bin/env python3
"""Walk through the TDD pattern tables and the buffer-driven selector."""

from dyntdd import dl_share, hypothetical_configs, select_config, standard_configs

rel11 = standard_configs()
rel13 = hypothetical_configs()

print("standard patterns (S carries downlink data):")
for p in rel11.patterns:
    print(f"  config {p.id}: {''.join(p.slots)}  DL:UL = {p.dl_count}:{p.ul_count}")

print("\nhypothetical UL-heavy additions:")
for p in rel13.patterns[7:]:
    print(f"  config {p.id}: {''.join(p.slots)}  DL:UL = {p.dl_count}:{p.ul_count}")

print("\nselector on example buffer states (current = config 1):")
cur = rel11.by_id(1)
for dl_mb, ul_mb in ((0, 0), (4, 0), (0, 4), (8, 4), (4, 8), (1, 9)):
    chosen11 = select_config(rel11, dl_mb * 1e6, ul_mb * 1e6, cur)
    chosen13 = select_config(rel13, dl_mb * 1e6, ul_mb * 1e6, cur)
    print(f"  DL {dl_mb:>2} MB / UL {ul_mb:>2} MB buffered -> "
          f"standard set: config {chosen11.id} (share {dl_share(chosen11):.1f}), "
          f"flexible set: config {chosen13.id} (share {dl_share(chosen13):.1f})")
