import numpy as np
import pytest

from dyntdd.campaign import (CSV_COLUMNS, CampaignConfig, CampaignError,
                             execute_campaign, parse_campaign)
from dyntdd.cli import main
from dyntdd.scheduler import SCHEME_IDS

TINY_GEO = {"n_sites": 1, "sectors_per_site": 2, "picos_per_macrocell": 1,
            "ues_per_pico": 2}


def tiny_cfg(tmp_path, **over):
    base = dict(
        schemes=("s1", "s3"), lambdas=(2.0,), seeds=(1, 2),
        duration_ms=3000, warmup_ms=300,
        output_path=str(tmp_path / "out.csv"),
        geometry=parse_campaign().geometry.__class__(**TINY_GEO),
    )
    base.update(over)
    return CampaignConfig(**base)


def read_rows(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# dyntdd-results")
    assert lines[1] == ",".join(CSV_COLUMNS)
    return [l.split(",") for l in lines[2:] if l and not l.startswith("#")]


def test_defaults_match_experiment_grid():
    cfg = parse_campaign()
    assert cfg.schemes == SCHEME_IDS
    assert cfg.lambdas == (0.5, 1.5, 2.5, 3.5, 10.0)
    assert len(cfg.seeds) >= 4
    assert cfg.geometry.n_picos == 84
    assert cfg.channel.carrier_bandwidth_hz == 10e6
    assert cfg.phy.power.bs_tx_power_dbm == 24.0
    assert cfg.phy.power.ue_max_power_dbm == 23.0
    assert cfg.phy.csi_period_ms == 50 and cfg.phy.csi_delay_ms == 10
    assert cfg.packet_size_bits == 4_000_000 and cfg.traffic_ratio == 2.0


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    assert parse_campaign(str(p)) == parse_campaign()


def test_overrides(tmp_path):
    cfg = parse_campaign(None, {"lambdas": (0.5,), "seeds": (9,)})
    assert cfg.lambdas == (0.5,) and cfg.seeds == (9,)


def test_config_file_sections(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(
        "schemes: [s1, s4]\n"
        "traffic: {lambdas: [1.5], dl_ul_arrival_ratio: 2.0}\n"
        "geometry: {picos_per_macrocell: 2}\n"
        "channel: {noise_figure_ue_db: 7.0, pathloss: {bs_bs: {intercept_db: 150.0, slope_db_per_decade: 40.0}}}\n"
        "phy: {ul_pc_p0_dbm: -70.0, target_bler: 0.05}\n")
    cfg = parse_campaign(str(p))
    assert cfg.schemes == ("s1", "s4")
    assert cfg.lambdas == (1.5,)
    assert cfg.geometry.picos_per_macrocell == 2
    assert cfg.channel.noise_figure_ue_db == 7.0
    assert cfg.channel.pathloss["bs_bs"].intercept_db == 150.0
    assert cfg.channel.pathloss["bs_ue"].intercept_db == 140.7  # untouched default
    assert cfg.phy.power.ul_pc_p0_dbm == -70.0
    assert cfg.phy.target_bler == 0.05


@pytest.mark.parametrize("text,needle", [
    ("schemes: []\n", "schemes"),
    ("schemes: [s1, s9]\n", "s9"),
    ("bogus_key: 1\n", "bogus_key"),
    ("geometry: {n_sotes: 7}\n", "n_sotes"),
    ("channel: {pathloss: {bs_xx: {intercept_db: 1, slope_db_per_decade: 1}}}\n", "bs_xx"),
    ("schemes: [s2]\n", "s1"),   # baseline required while gains are on
    ("duration_ms: 100\nwarmup_ms: 200\n", "duration"),
])
def test_rejected_configs(tmp_path, text, needle):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    with pytest.raises(CampaignError, match=needle):
        parse_campaign(str(p))


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(CampaignError, match="not found"):
        parse_campaign(str(tmp_path / "nope.yaml"))
    p = tmp_path / "broken.yaml"
    p.write_text("schemes: [s1\n")
    with pytest.raises(CampaignError, match="malformed"):
        parse_campaign(str(p))


def test_execute_campaign_rows_and_gains(tmp_path):
    cfg = tiny_cfg(tmp_path)
    reports = execute_campaign(cfg, jobs=1)
    rows = read_rows(cfg.output_path)
    # one row per (scheme, lambda, seed, direction)
    assert len(rows) == len(cfg.schemes) * len(cfg.lambdas) * len(cfg.seeds) * 2
    assert len(reports) == len(cfg.schemes) * len(cfg.lambdas) * len(cfg.seeds)
    by_key = {(r[0], r[1], r[2], r[3]): r for r in rows}
    for (sch, lam, seed, d), r in by_key.items():
        if sch == "s1":
            assert float(r[10]) == 0.0
        else:
            base = by_key[("s1", lam, seed, d)]
            want = (float(r[4]) / float(base[4]) - 1) * 100
            assert float(r[10]) == pytest.approx(want, abs=1e-4)


def test_campaign_csv_deterministic(tmp_path):
    cfg = tiny_cfg(tmp_path)
    execute_campaign(cfg, jobs=1)
    first = open(cfg.output_path, "rb").read()
    execute_campaign(cfg, jobs=1)
    assert open(cfg.output_path, "rb").read() == first
    # parallel execution produces the same bytes too
    execute_campaign(cfg, jobs=2)
    assert open(cfg.output_path, "rb").read() == first


def test_cli_exit_codes(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["--schemes", "bogus", "--out", str(out)]) == 1
    assert main(["--lambdas", "-3", "--out", str(out)]) == 1
    # a real (tiny) run through the CLI succeeds and writes the CSV
    cfgfile = tmp_path / "c.yaml"
    cfgfile.write_text(
        "geometry: {n_sites: 1, sectors_per_site: 1, picos_per_macrocell: 1, ues_per_pico: 1}\n"
        "schemes: [s1]\nseeds: [1]\nduration_ms: 600\nwarmup_ms: 100\n"
        "traffic: {lambdas: [1.0]}\n")
    rc = main(["--config", str(cfgfile), "--out", str(out), "--jobs", "1"])
    assert rc == 0
    assert read_rows(out)
