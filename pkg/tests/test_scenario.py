import math

import numpy as np
import pytest
import yaml

from optspoof import (
    PositionSpec,
    Scenario,
    ScenarioError,
    delays_from_positions,
    dump_scenario,
    load_scenario,
    snr_db_to_variance,
)
from optspoof._validation import ValidationError, normalize_delays
from optspoof.scenario import SPEED_OF_LIGHT, geodetic_to_ecef, variance_to_snr_db

BASE = dict(m=2, n=4, mx=1.0, sigma_b2=1.0, sigma_bt2=0.2, sigma_e2=0.5,
            tau_bob=[3, 1], tau_eve=[0, 2], tau_forged=[1, 1], signaling="gaussian",
            seed=3, trials=100)


def write(tmp_path, cfg, name="s.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def test_delays_normalized(tmp_path):
    s = load_scenario(write(tmp_path, BASE))
    assert s.tau_bob == (2, 0)
    assert s.delta_b == 2
    assert s.tau_forged == (0, 0)


def test_m_zero_rejected(tmp_path):
    cfg = dict(BASE, m=0, tau_bob=[], tau_eve=[], tau_forged=[])
    with pytest.raises(ValidationError, match="m must be ≥ 1") as exc:
        load_scenario(write(tmp_path, cfg))
    assert exc.value.field == "m"


@pytest.mark.parametrize("key,value,field", [
    ("sigma_b2", -1.0, "sigma_b2"),
    ("n", 0, "n"),
    ("trials", 0, "trials"),
    ("tau_eve", [0, -1], "tau_eve"),
    ("tau_eve", [0, 1.5], "tau_eve"),
    ("tau_eve", [0], "tau_eve"),
    ("signaling", "qpsk", "signaling"),
    ("seed", -4, "seed"),
])
def test_invalid_fields_named(tmp_path, key, value, field):
    with pytest.raises(ValidationError) as exc:
        load_scenario(write(tmp_path, dict(BASE, **{key: value})))
    assert exc.value.field == field


def test_unknown_and_missing_keys(tmp_path):
    with pytest.raises(ScenarioError, match="unknown"):
        load_scenario(write(tmp_path, dict(BASE, sigma_x=1)))
    cfg = dict(BASE)
    del cfg["tau_eve"]
    with pytest.raises(ScenarioError, match="tau_eve"):
        load_scenario(write(tmp_path, cfg))
    with pytest.raises(ScenarioError, match="exactly one"):
        load_scenario(write(tmp_path, dict(BASE, snr_sb_db=-20)))


def test_unparseable_file(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("m: [1,\n")
    with pytest.raises(ScenarioError):
        load_scenario(p)


def test_full_config_echoes_fields(tmp_path):
    cfg = dict(m=5, n=500, mx=1.0, snr_sb_db=-25.0, snr_se_db=-10.0, sigma_bt2=15.0,
               tau_bob=[0, 3, 9, 17, 22], tau_eve=[0, 6, 12, 21, 26],
               tau_forged=[0, 7, 12, 20, 26], signaling="bpsk", seed=9, trials=500)
    s = load_scenario(write(tmp_path, cfg))
    # Lambda = mx / (2 sigma^2)
    assert s.sigma_b2 == pytest.approx(1.0 / (2 * 10 ** -2.5))
    assert s.sigma_e2 == pytest.approx(5.0)
    assert s.snr_sb_db == pytest.approx(-25.0)
    assert (s.m, s.n, s.signaling.value, s.trials) == (5, 500, "bpsk", 500)
    assert s.tau_eve == (0, 6, 12, 21, 26)
    assert s.padded_length == 526


def test_round_trip(tmp_path):
    s = load_scenario(write(tmp_path, BASE))
    again = Scenario.from_dict(yaml.safe_load(dump_scenario(s)))
    assert again == s
    dump_scenario(s, tmp_path / "out.yaml")
    assert load_scenario(tmp_path / "out.yaml") == s


def test_normalization_idempotent(rng):
    for _ in range(20):
        d = rng.integers(0, 50, size=int(rng.integers(1, 8)))
        once = normalize_delays(d)
        assert normalize_delays(once) == once
        assert min(once) == 0


def test_snr_conversion_inverse():
    for db in (-25.0, -10.0, 0.0, 7.5):
        assert variance_to_snr_db(snr_db_to_variance(db, 2.0), 2.0) == pytest.approx(db)


def test_replace_accepts_snr():
    s = Scenario.from_dict(dict(BASE))
    t = s.replace(snr_se_db=-15.0)
    assert t.sigma_e2 == pytest.approx(0.5 * 10**1.5)
    assert t.sigma_b2 == s.sigma_b2


# --- positions -------------------------------------------------------------

def test_equidistant_svs_zero_delay():
    rx = np.zeros(3)
    r = 2.0e7
    svs = [(r, 0, 0), (0, r, 0), (0, 0, r), (-r, 0, 0)]
    spec = PositionSpec(receiver_ecef=tuple(rx), attacker_ecef=(0.0, 0.0, 0.0), sv_ecef=svs,
                        sample_rate=4e6)
    tb, te = delays_from_positions(spec)
    assert tb == (0, 0, 0, 0) and te == (0, 0, 0, 0)


def test_one_sample_range_difference():
    fs = 1e6
    step = SPEED_OF_LIGHT / fs
    svs = [(2.0e7, 0.0, 0.0), (2.0e7 + step, 0.0, 0.0)]
    spec = PositionSpec(receiver_ecef=(0.0, 0.0, 0.0), attacker_ecef=(0.0, 0.0, 0.0),
                        sv_ecef=svs, sample_rate=fs)
    assert delays_from_positions(spec)[0] == (0, 1)


def _law_of_cosines_range(lat1, lon1, h1, sv):
    # independent route: spherical Earth of matching geocentric radius, then
    # |SV - P|^2 = |SV|^2 + |P|^2 - 2 |SV||P| cos(angle)
    p = np.array(geodetic_to_ecef(lat1, lon1, h1))
    sv = np.asarray(sv)
    rp, rs = np.linalg.norm(p), np.linalg.norm(sv)
    cos_angle = p @ sv / (rp * rs)
    return math.sqrt(rs**2 + rp**2 - 2 * rs * rp * cos_angle)


def test_padua_like_geometry_against_range_oracle():
    # four sites around a mid-size city, five SVs at GPS altitude
    sites = [(45.4064, 11.8768, 12.0), (45.4090, 11.8940, 15.0),
             (45.3950, 11.8700, 20.0), (45.4150, 11.9000, 18.0)]
    r_gps = 26_560_000.0
    svs = []
    for lat, lon in [(60.0, 20.0), (30.0, -10.0), (10.0, 40.0), (50.0, 70.0), (20.0, 5.0)]:
        la, lo = math.radians(lat), math.radians(lon)
        svs.append((r_gps * math.cos(la) * math.cos(lo), r_gps * math.cos(la) * math.sin(lo),
                    r_gps * math.sin(la)))
    fs = 2.0e6
    for (a, b) in [(0, 1), (2, 3)]:
        spec = PositionSpec(receiver_ecef=geodetic_to_ecef(*sites[a]),
                            attacker_ecef=geodetic_to_ecef(*sites[b]), sv_ecef=svs, sample_rate=fs)
        tb, te = delays_from_positions(spec)
        for site, got in ((sites[a], tb), (sites[b], te)):
            ranges = [_law_of_cosines_range(*site, sv) for sv in svs]
            raw = np.rint(np.array(ranges) / SPEED_OF_LIGHT * fs).astype(int)
            assert got == tuple(raw - raw.min())


def test_positions_block_in_config(tmp_path):
    cfg = dict(BASE)
    del cfg["tau_bob"], cfg["tau_eve"], cfg["tau_forged"]
    fs = 1e6
    step = SPEED_OF_LIGHT / fs
    cfg["positions"] = {
        "receiver": [0, 0, 0], "attacker": [-3 * step, 0, 0], "forged": [0, 0, 0],
        "svs": [[2.0e7, 0, 0], [0, 2.0e7, 0]], "sample_rate": fs,
    }
    s = load_scenario(write(tmp_path, cfg))
    assert s.tau_bob == (0, 0)
    assert s.tau_forged == (0, 0)
    # moving 3 samples of range away from SV1 only delays SV1
    assert s.tau_eve == (3, 0)
    cfg["positions"]["attacker"] = [0, -3 * step, 0]
    s = load_scenario(write(tmp_path, cfg))
    assert s.tau_eve == (0, 3)


def test_positions_validation():
    with pytest.raises(ScenarioError):
        PositionSpec(receiver_ecef=(0, 0, 0), attacker_ecef=(0, 0, 0),
                     sv_ecef=[(1, 2, 3), (1, 2, 3)], sample_rate=1e6)
    with pytest.raises(ValidationError):
        PositionSpec(receiver_ecef=(0, 0, 0), attacker_ecef=(0, 0, 0),
                     sv_ecef=[(1, 2, 3)], sample_rate=0.0)
