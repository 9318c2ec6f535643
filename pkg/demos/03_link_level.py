#!/usr/bin/env python3
"""Link-level building blocks: pathloss curves, MMSE SINR, the AMC table."""

import numpy as np

from dyntdd import ChannelConfig, default_mcs_table, mmse_sinr, select_mcs
from dyntdd.channel import large_scale_gain
from dyntdd.phy import dft_codebook_4tx, effective_sinr_db

cfg = ChannelConfig()

print("large-scale loss in dB (pathloss + MCL floor, no shadowing):")
print(f"  {'d (m)':>6} {'BS-UE':>8} {'BS-BS':>8} {'UE-UE':>8}")
for d in (10, 40, 100, 300, 700):
    row = [f"{-10 * np.log10(large_scale_gain(c, d, 0.0, cfg)):8.1f}"
           for c in ("bs_ue", "bs_bs", "ue_ue")]
    print(f"  {d:>6} " + " ".join(row))

rng = np.random.default_rng(1)
h = (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))) / np.sqrt(2)
cb = dft_codebook_4tx()
noise = 1e-3

print("\npost-MMSE per-stream SINR, rank-2 transmission at unit power:")
clean = mmse_sinr(h, 1.0, cb.entry(2, 0), [], noise)
print(f"  no interference:  {10 * np.log10(clean).round(1)} dB per stream")
bully = {"matrix": (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))) / np.sqrt(2),
         "tx_power": 1.0, "precoder": cb.entry(1, 3)}
dirty = mmse_sinr(h, 1.0, cb.entry(2, 0), [bully], noise)
print(f"  one equal-power interferer: {10 * np.log10(np.maximum(dirty, 1e-12)).round(1)} dB")

table = default_mcs_table()
print("\nAMC grid (threshold -> spectral efficiency):")
for e in table.entries:
    print(f"  mcs {e.index:>2} {e.modulation:>6}  >= {e.min_sinr_db:6.2f} dB  "
          f"{e.spectral_efficiency:.2f} b/RE")

eff = effective_sinr_db(dirty)
chosen = select_mcs(eff, table)
print(f"\neffective SINR under interference: {eff:.1f} dB -> mcs {chosen.index} "
      f"({chosen.modulation}, {chosen.spectral_efficiency} b/RE)")
