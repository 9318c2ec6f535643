import numpy as np
import pytest

from dyntdd.traffic import (DL, UL, CellBuffers, Packet, TrafficConfig,
                            generate_arrivals)

UES = [100, 101, 102]


def make_packet(pid, direction=DL, arrival=0.0, remaining=None, size=4_000_000):
    return Packet(id=pid, direction=direction, ue=100, cell=0,
                  arrival_time=arrival, size_bits=size,
                  remaining_bits=size if remaining is None else remaining)


def test_zero_rate_gives_no_packets():
    cfg = TrafficConfig(lambda_dl=0.0, duration_ms=10_000)
    assert generate_arrivals(cfg, 0, UES, seed=1) == []


def test_packet_size_default():
    cfg = TrafficConfig(lambda_dl=2.5, duration_ms=20_000)
    pkts = generate_arrivals(cfg, 0, UES, seed=1)
    assert pkts and all(p.size_bits == 4_000_000 for p in pkts)
    assert all(p.remaining_bits == p.size_bits for p in pkts)


def test_poisson_counts_and_ratio():
    # mean DL count 1000, UL 500 over a 100 s window; 3-sigma band on the
    # across-seed averages
    cfg = TrafficConfig(lambda_dl=10.0, duration_ms=100_000)
    n_seeds = 20
    dl_counts, ul_counts = [], []
    for seed in range(n_seeds):
        pkts = generate_arrivals(cfg, 0, UES, seed=seed)
        dl_counts.append(sum(p.direction == DL for p in pkts))
        ul_counts.append(sum(p.direction == UL for p in pkts))
    dl_mean, ul_mean = np.mean(dl_counts), np.mean(ul_counts)
    assert abs(dl_mean - 1000) < 3 * np.sqrt(1000 / n_seeds)
    assert abs(ul_mean - 500) < 3 * np.sqrt(500 / n_seeds)
    ratio = dl_mean / ul_mean
    # delta-method sigma for the ratio of the two averaged counts
    sigma = ratio * np.sqrt(1 / (1000 * n_seeds) + 1 / (500 * n_seeds))
    assert abs(ratio - 2.0) < 3 * sigma


def test_interarrival_times_are_exponential():
    cfg = TrafficConfig(lambda_dl=50.0, duration_ms=200_000)
    pkts = [p for p in generate_arrivals(cfg, 0, UES, seed=4) if p.direction == DL]
    gaps = np.diff([p.arrival_time for p in pkts]) / 1000.0
    assert gaps.mean() == pytest.approx(1 / 50.0, rel=0.05)
    assert gaps.std() == pytest.approx(1 / 50.0, rel=0.1)  # exponential: mean == std


def test_ue_assignment_uniform():
    cfg = TrafficConfig(lambda_dl=100.0, duration_ms=60_000)
    pkts = generate_arrivals(cfg, 0, UES, seed=2)
    counts = {ue: sum(p.ue == ue for p in pkts) for ue in UES}
    expected = len(pkts) / len(UES)
    for ue, n in counts.items():
        assert abs(n - expected) < 4 * np.sqrt(expected)


def test_generation_deterministic():
    cfg = TrafficConfig(lambda_dl=5.0, duration_ms=30_000)
    a = generate_arrivals(cfg, 3, UES, seed=42)
    b = generate_arrivals(cfg, 3, UES, seed=42)
    assert [(p.id, p.direction, p.ue, p.arrival_time) for p in a] \
        == [(p.id, p.direction, p.ue, p.arrival_time) for p in b]


def test_empty_ue_list_with_rate_rejected():
    cfg = TrafficConfig(lambda_dl=1.0)
    with pytest.raises(ValueError):
        generate_arrivals(cfg, 0, [], seed=1)


def test_arrivals_are_time_ordered_with_unique_ids():
    cfg = TrafficConfig(lambda_dl=20.0, duration_ms=20_000)
    pkts = generate_arrivals(cfg, 7, UES, seed=3)
    times = [p.arrival_time for p in pkts]
    assert times == sorted(times)
    assert len({p.id for p in pkts}) == len(pkts)


def test_enqueue_and_accounting():
    buf = CellBuffers(cell=0)
    p = make_packet(1)
    buf.enqueue(p)
    assert len(buf.queue(DL)) == 1 and len(buf.queue(UL)) == 0
    assert buf.buffered_bits(DL) == p.remaining_bits
    assert buf.buffer_ratio() == (4_000_000, 0)


def test_enqueue_tie_and_order_rules():
    buf = CellBuffers(cell=0)
    buf.enqueue(make_packet(1, arrival=5.0))
    buf.enqueue(make_packet(2, arrival=5.0))  # same instant: id breaks the tie
    assert [p.id for p in buf.queue(DL)] == [1, 2]
    with pytest.raises(ValueError):
        buf.enqueue(make_packet(0, arrival=1.0))


def test_buffer_ratio_tracks_service():
    buf = CellBuffers(cell=0)
    buf.enqueue(make_packet(1, direction=DL))
    buf.enqueue(make_packet(2, direction=UL, remaining=2_000_000))
    assert buf.buffer_ratio() == (4_000_000, 2_000_000)
    # serve the UL packet to completion
    p = buf.head(UL)
    p.served(2_000_000, t_end_ms=10.0)
    buf.note_served(UL, 2_000_000)
    buf.pop_completed(UL)
    assert buf.buffer_ratio() == (4_000_000, 0)
    assert buf.recompute_bits() == buf.buffer_ratio()


def test_packet_completion_semantics():
    p = make_packet(1, arrival=3.0)
    p.served(4_000_000 + 999, t_end_ms=8.0)  # overshoot clamps at zero
    assert p.remaining_bits == 0
    assert p.completion_time == 8.0
    assert p.completion_time >= p.arrival_time


def test_config_validation():
    with pytest.raises(ValueError):
        TrafficConfig(lambda_dl=-1.0)
    with pytest.raises(ValueError):
        TrafficConfig(lambda_dl=1.0, dl_ul_arrival_ratio=0.0)
    assert TrafficConfig(lambda_dl=3.0).lambda_ul == pytest.approx(1.5)
