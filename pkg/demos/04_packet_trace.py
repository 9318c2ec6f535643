#!/usr/bin/env python3
"""Trace one downlink packet through the subframe loop.

A single isolated cell serves one 0.5 Mbyte packet under the static
baseline pattern; the trace shows how the FIFO head drains only in DL
subframes and how link adaptation kicks in once the first report arrives.
"""

from dyntdd import GeometryConfig, SimulationRun, TrafficConfig, get_scheme
from dyntdd.engine import EngineOptions, Simulation
from dyntdd.traffic import DL, Packet

geo = GeometryConfig(n_sites=1, sectors_per_site=1, picos_per_macrocell=1,
                     ues_per_pico=1)
sim = SimulationRun(scheme=get_scheme("s1"), traffic=TrafficConfig(lambda_dl=0.0),
                    geometry=geo, duration_ms=400, warmup_ms=0)
packet = Packet(id=1, direction=DL, ue=1, cell=0, arrival_time=0.0,
                size_bits=4_000_000, remaining_bits=4_000_000)

s = Simulation(sim, arrivals={0: [packet]}, options=EngineOptions(collect_subframe_log=True))
last = packet.remaining_bits
for t in range(sim.duration_ms):
    s.step_subframe(t)
    if t % 10 == 9:
        served = last - packet.remaining_bits
        bar = "#" * int(40 * (1 - packet.remaining_bits / packet.size_bits))
        print(f"frame {t // 10:>2}: served {served / 1000:7.1f} kb this frame  "
              f"[{bar:<40}]")
        last = packet.remaining_bits
    if packet.completion_time is not None:
        break

tput = packet.size_bits / (packet.completion_time - packet.arrival_time) * 1000
print(f"\ncompleted at t = {packet.completion_time:.0f} ms "
      f"-> packet throughput {tput / 1e6:.1f} Mbps")
