"""dyntdd: system-level simulator for traffic-adaptive TDD picocell networks."""

from .campaign import CampaignConfig, CampaignError, execute_campaign, parse_campaign
from .channel import (ChannelConfig, FadingState, LinkGainTable, PathlossModel,
                      build_gain_table, channel_matrix, draw_shadowing,
                      large_scale_gain, noise_power_w)
from .engine import (EngineOptions, MetricsReport, Simulation, SimulationRun,
                     ThroughputRecord, aggregate, compare, run)
from .phy import (CsiReport, CsiState, McsEntry, McsTable, PhyConfig, PowerConfig,
                  block_outcome, default_mcs_table, effective_sinr_db, mmse_sinr,
                  select_mcs, transport_bits, ul_tx_power)
from .scheduler import (SCHEME_IDS, CellSchedulerState, SchemeSpec, apply_outcome,
                        get_scheme, maybe_reconfigure, pick_transmission,
                        subframe_direction)
from .tddconf import (TddConfigSet, TddPattern, dl_share, hypothetical_configs,
                      select_config, standard_configs)
from .topology import (Deployment, GenerationError, GeometryConfig,
                       generate_deployment, validate_deployment,
                       wraparound_distance)
from .traffic import CellBuffers, Packet, TrafficConfig, generate_arrivals

__version__ = "0.1.0"
