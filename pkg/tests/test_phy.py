import math

import numpy as np
import pytest

from dyntdd.phy import (CsiState, McsEntry, McsTable, block_outcome, codebook_2tx,
                        default_mcs_table, dft_codebook_4tx, effective_sinr_db,
                        measure_link, mmse_sinr, PowerConfig, select_mcs,
                        stream_sinrs_batched, transport_bits, ul_tx_power)

TABLE = default_mcs_table()


def rnd_channel(rng, n_rx, n_tx):
    return (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))) \
        / np.sqrt(2)


def oracle_mmse(desired, tx_power, precoder, interferers, noise_power):
    """Direct per-stream filter construction, entirely separate from the
    matrix-inversion-lemma route used by the implementation."""
    q = np.atleast_2d(precoder)
    if q.shape[0] == 1:
        q = q.T
    g = np.sqrt(tx_power / q.shape[1]) * desired @ q
    n_rx, r = g.shape
    r_other = noise_power * np.eye(n_rx, dtype=complex)
    for it in interferers:
        qi = np.atleast_2d(it["precoder"])
        if qi.shape[0] == 1:
            qi = qi.T
        gi = np.sqrt(it["tx_power"] / qi.shape[1]) * it["matrix"] @ qi
        r_other += gi @ gi.conj().T
    total = r_other + g @ g.conj().T
    sinrs = []
    for k in range(r):
        gk = g[:, k]
        w = np.linalg.solve(total, gk)
        signal = abs(w.conj() @ gk) ** 2
        denom = total - np.outer(gk, gk.conj())
        sinrs.append(signal / np.real(w.conj() @ denom @ w))
    return np.array(sinrs)


def test_mmse_matched_filter_reduction():
    # scalar channel, no interference: SINR = p|h|^2 / noise
    h = np.array([[0.3 - 0.4j]])
    got = mmse_sinr(h, tx_power=2.0, precoder=np.array([[1.0]]),
                    interferers=[], noise_power=0.5)
    assert got[0] == pytest.approx(2.0 * 0.25 / 0.5, rel=1e-12)


def test_interferer_never_helps():
    rng = np.random.default_rng(5)
    cb = dft_codebook_4tx()
    for _ in range(50):
        h = rnd_channel(rng, 2, 4)
        q = cb.entry(2, rng.integers(8))
        clean = mmse_sinr(h, 1.0, q, [], 1e-3)
        bully = {"matrix": rnd_channel(rng, 2, 4), "tx_power": rng.uniform(0.1, 10),
                 "precoder": cb.entry(1, rng.integers(16))}
        dirty = mmse_sinr(h, 1.0, q, [bully], 1e-3)
        assert np.all(dirty <= clean + 1e-9)


@pytest.mark.parametrize("n_rx,n_tx,rank", [(2, 4, 1), (2, 4, 2), (4, 2, 1), (4, 2, 2)])
def test_mmse_against_direct_oracle(n_rx, n_tx, rank):
    rng = np.random.default_rng(17)
    for _ in range(50):
        h = rnd_channel(rng, n_rx, n_tx)
        q = np.linalg.qr(rnd_channel(rng, n_tx, rank))[0][:, :rank]
        interferers = [
            {"matrix": rnd_channel(rng, n_rx, rng.choice([2, 4])),
             "tx_power": rng.uniform(0.01, 5.0), "precoder": None}
            for _ in range(rng.integers(0, 4))
        ]
        for it in interferers:
            n_it = it["matrix"].shape[1]
            it["precoder"] = np.linalg.qr(rnd_channel(rng, n_it, n_it))[0][:, :rng.integers(1, n_it + 1)]
        got = mmse_sinr(h, 1.7, q, interferers, 2e-4)
        want = oracle_mmse(h, 1.7, q, interferers, 2e-4)
        assert got == pytest.approx(want, rel=1e-6)


def test_batched_matches_single():
    rng = np.random.default_rng(23)
    for n_rx, rank in ((2, 1), (2, 2), (4, 1), (4, 2)):
        geff = (rng.standard_normal((6, n_rx, rank))
                + 1j * rng.standard_normal((6, n_rx, rank)))
        a = rng.standard_normal((6, n_rx, n_rx)) + 1j * rng.standard_normal((6, n_rx, n_rx))
        cov = a @ np.conj(np.swapaxes(a, 1, 2)) + np.eye(n_rx) * 0.1
        batch = stream_sinrs_batched(geff, cov)
        for i in range(6):
            m = geff[i].conj().T @ np.linalg.solve(cov[i], geff[i])
            w = np.linalg.inv(np.eye(rank) + m)
            single = 1.0 / np.real(np.diag(w)) - 1.0
            assert batch[i] == pytest.approx(single, rel=1e-9)


def test_noise_must_be_positive():
    with pytest.raises(ValueError):
        mmse_sinr(np.eye(2), 1.0, np.eye(2), [], 0.0)


def test_ul_power_rules():
    cfg = PowerConfig()
    assert ul_tx_power(500.0, cfg) == 23.0                      # cap
    assert ul_tx_power(100.0, cfg) == pytest.approx(-76 + 0.8 * 100)  # = 4 dBm
    flat = PowerConfig(ul_pc_alpha=0.0)
    assert ul_tx_power(60.0, flat) == flat.ul_pc_p0_dbm
    full = PowerConfig(ul_power_mode="full")
    assert ul_tx_power(60.0, full) == 23.0
    with pytest.raises(ValueError):
        ul_tx_power(-1.0, cfg)


def test_mcs_table_shape():
    assert len(TABLE) == 15
    mods = [e.modulation for e in TABLE.entries]
    assert set(mods) == {"QPSK", "16QAM", "64QAM"}
    assert TABLE.entries[0].spectral_efficiency == 0.25
    assert TABLE.max_se == 5.55
    # thresholds are the capacity inverses of the SE grid
    for e in TABLE.entries:
        assert e.min_sinr_db == pytest.approx(
            10 * math.log10(2 ** e.spectral_efficiency - 1))


def test_select_mcs_rules():
    assert select_mcs(-50.0, TABLE) == TABLE.entries[0]         # floor
    assert select_mcs(60.0, TABLE) == TABLE.entries[-1]         # top 64QAM
    mid = TABLE.entries[7]
    assert select_mcs(mid.min_sinr_db, TABLE) == mid            # closed bound
    prev = select_mcs(-60.0, TABLE)
    for snr in np.linspace(-10, 25, 150):                       # monotone
        cur = select_mcs(float(snr), TABLE)
        assert cur.index >= prev.index
        prev = cur


def test_transport_bits():
    assert transport_bits(TABLE.entries[0], 1, 6600) == 1650
    top = TABLE.entries[-1]
    assert transport_bits(top, 2, 6600) == 2 * transport_bits(top, 1, 6600)
    assert 50 * 12 * 11 == 6600  # 3 of 14 symbols are overhead
    with pytest.raises(ValueError):
        transport_bits(top, 1, 0)


def test_block_outcome_below_threshold_always_fails():
    rng = np.random.default_rng(1)
    entry = TABLE.entries[8]
    weak = 10 ** ((entry.min_sinr_db - 3.0) / 10.0)
    assert not any(block_outcome(entry, [weak], rng) for _ in range(200))


def test_block_outcome_failure_rate_at_threshold():
    rng = np.random.default_rng(2)
    entry = TABLE.entries[4]
    strong = 10 ** ((entry.min_sinr_db + 5.0) / 10.0)
    n = 100_000
    fails = sum(not block_outcome(entry, [strong], rng) for _ in range(n))
    assert abs(fails / n - 0.1) < 0.005


def test_block_outcome_deterministic_in_seed():
    entry = TABLE.entries[4]
    strong = 10 ** ((entry.min_sinr_db + 5.0) / 10.0)
    rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
    a = [block_outcome(entry, [strong], rng1) for _ in range(50)]
    b = [block_outcome(entry, [strong], rng2) for _ in range(50)]
    assert a == b


def test_effective_sinr_monotone():
    base = effective_sinr_db([1.0, 4.0])
    assert effective_sinr_db([2.0, 4.0]) > base
    assert effective_sinr_db([1.0, 8.0]) > base
    # single stream maps to itself
    assert effective_sinr_db([3.0]) == pytest.approx(10 * math.log10(3.0))


def test_codebooks():
    dl = dft_codebook_4tx()
    assert dl.by_rank[1].shape == (16, 4, 1)
    assert dl.by_rank[2].shape == (8, 4, 2)
    for rank, entries in dl.by_rank.items():
        for q in entries:
            assert q.conj().T @ q == pytest.approx(np.eye(rank), abs=1e-12)
    ul = codebook_2tx()
    assert ul.by_rank[1].shape == (4, 2, 1)
    assert ul.by_rank[2].shape == (1, 2, 2)


def test_csi_grid_arithmetic():
    rng = np.random.default_rng(3)
    state = CsiState(feedback_period_ms=50, feedback_delay_ms=10)
    h = rnd_channel(rng, 2, 4)
    for t in (0, 50):
        state.measure("link", h, 1.0, [], 1e-6, dft_codebook_4tx(), TABLE, t)
    # at t=73 the measurement from t=50 is the latest deliverable one
    assert state.usable("link", 73).time_ms == 50
    assert state.usable("link", 59).time_ms == 0
    assert state.usable("link", 9) is None  # nothing deliverable yet: cold start
    with pytest.raises(ValueError):
        state.measure("link", h, 1.0, [], 1e-6, dft_codebook_4tx(), TABLE, 73)


def test_csi_converges_on_static_channel():
    # fixed channel and interference: after the first delivered report the
    # selected format stops changing
    rng = np.random.default_rng(8)
    h = rnd_channel(rng, 2, 4)
    reports = [measure_link(h, 1.0, [], 1e-6, dft_codebook_4tx(), TABLE, t)
               for t in (0, 50, 100)]
    picks = {(r.preferred_rank, r.rank_pmi[r.preferred_rank],
              select_mcs(r.rank_sinr_db[r.preferred_rank], TABLE).index)
             for r in reports}
    assert len(picks) == 1


def test_measure_link_prefers_throughput_maximizing_rank():
    rng = np.random.default_rng(4)
    # strong orthogonal 2x4 channel favors rank 2; a nearly rank-1 channel
    # must fall back to a single stream
    strong = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]], dtype=complex) * 10
    rep = measure_link(strong, 1.0, [], 1e-4, dft_codebook_4tx(), TABLE, 0)
    assert rep.preferred_rank == 2
    thin = np.outer(np.array([1.0, 0.5j]), rnd_channel(rng, 1, 4)[0]) * 10
    rep = measure_link(thin, 1.0, [], 1e-4, dft_codebook_4tx(), TABLE, 0)
    assert rep.preferred_rank == 1


def test_mcs_table_rejects_disorder():
    with pytest.raises(ValueError):
        McsTable((McsEntry(0, "QPSK", 0.0, 1.0), McsEntry(1, "QPSK", -1.0, 2.0)))
