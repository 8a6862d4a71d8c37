import math

import numpy as np
import pytest

from star_isac.errors import ConfigError, InvalidInput
from star_isac.scenario import (SystemConfig, config_from_mapping, generate_channels, load_config,
                                make_rng, rician_weights, save_config, scenario, steering_vector)

from conftest import TABLE1_CONFIG


def test_steering_origin_element_is_one():
    for az, el in ((0.3, 0.1), (2.0, 1.2), (math.pi, 0.0)):
        assert steering_vector(az, el, 3, 4)[0] == 1


def test_steering_scalar_evaluation():
    np.testing.assert_allclose(steering_vector(0.0, 0.0, 2, 1), [1, -1], atol=1e-15)


def test_steering_broadside_elevation():
    np.testing.assert_allclose(steering_vector(0.7, math.pi / 2, 2, 1), [1, 1], atol=1e-15)


def test_steering_layout_matches_grid_formula():
    az, el, nx, nz = 0.4, 0.9, 3, 2
    a = steering_vector(az, el, nx, nz)
    for s in range(nz):
        for p in range(nx):
            ref = np.exp(-1j * np.pi * (p * math.cos(az) * math.cos(el) + s * math.sin(el)))
            assert abs(a[s * nx + p] - ref) < 1e-14


def test_pure_los_limit():
    cfg = SystemConfig(rician_kappa=1e12)
    ch, _ = scenario(cfg, 3)
    err = np.linalg.norm(ch.g - ch.g_los) / np.linalg.norm(ch.g)
    assert err <= 1e-5


def test_unit_distance_mean_entry_power():
    # DFBS at 1 m, unit exponent, L0 = 30 dB: E|G_ij|^2 = 1e-3
    cfg = SystemConfig(bs_position=(0.6, 0.8, 0.0), pathloss_exp_br=1.0, pathloss_l0_db=30.0, rician_kappa=1.0)
    rng = make_rng(7)
    powers = [np.mean(np.abs(generate_channels(cfg, rng).g) ** 2) for _ in range(400)]  # 400 * 240 entries
    assert abs(np.mean(powers) - 1e-3) <= 0.05e-3


def test_same_seed_bit_identical(desk_cfg):
    a, _ = scenario(desk_cfg, 11)
    b, _ = scenario(desk_cfg, 11)
    assert np.array_equal(a.g, b.g)
    assert all(np.array_equal(x, y) for x, y in zip(a.h_users, b.h_users))
    assert all(np.array_equal(x, y) for x, y in zip(a.a_targets, b.a_targets))


def test_channel_dimensions_and_unit_modulus(desk_cfg):
    ch, _ = scenario(desk_cfg, 0)
    assert ch.g.shape == (8, 4)
    assert len(ch.h_users) == 2 and all(h.shape == (8,) for h in ch.h_users)
    assert len(ch.a_targets) == 2
    for a in ch.a_targets:
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)


def test_users_in_transmission_half_space(desk_cfg):
    ch, _ = scenario(desk_cfg, 5)
    d = np.linalg.norm(ch.user_positions, axis=1)
    assert np.all(ch.user_positions[:, 1] <= 0)
    assert np.all((d >= 30 - 1e-9) & (d <= 50 + 1e-9))


def test_coincident_positions_rejected():
    cfg = SystemConfig(bs_position=(0.0, 0.0, 0.0))
    with pytest.raises(InvalidInput):
        generate_channels(cfg, make_rng(0))


def test_required_only_file_gives_table_defaults(tmp_path):
    path = tmp_path / "min.yaml"
    path.write_text("{}\n")
    cfg = load_config(str(path))
    assert (cfg.m_antennas, cfg.n_elements, cfg.k_users, cfg.q_targets) == (6, 40, 2, 3)
    assert cfg.p_max_dbm == 10 and cfg.gamma_db == 6 and cfg.eta == 1e-3 and cfg.noise_dbm == -110
    assert cfg.p_max == pytest.approx(10.0)
    assert cfg.noise_power == pytest.approx(1e-11)


def test_table1_file_matches_defaults():
    assert load_config(TABLE1_CONFIG) == SystemConfig()


def test_codebook_too_short_rejected():
    with pytest.raises(ConfigError) as exc:
        config_from_mapping({"l_pulses": 2})
    assert exc.value.field == "l_pulses"


def test_azimuth_out_of_range_rejected():
    with pytest.raises(ConfigError) as exc:
        config_from_mapping({"q_targets": 1, "target_doas": [[190, 10]]})
    assert exc.value.field == "target_doas"


@pytest.mark.parametrize("data, name", [
    ({"m_antennas": "six"}, "m_antennas"),
    ({"m_antennas": 2.5}, "m_antennas"),
    ({"eta": -1.0}, "eta"),
    ({"nonsense": 1}, "nonsense"),
    ({"bs_position": [1, 2]}, "bs_position"),
    ({"k_users": 0}, "k_users"),
    ({"rician_kappa": -0.1}, "rician_kappa"),
])
def test_bad_fields_name_the_field(data, name):
    with pytest.raises(ConfigError) as exc:
        config_from_mapping(data)
    assert exc.value.field == name


def test_unparseable_and_missing_files(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("m_antennas: [1,\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.yaml"))


def test_save_load_round_trip(tmp_path, desk_cfg):
    path = tmp_path / "cfg.yaml"
    save_config(desk_cfg, str(path))
    assert load_config(str(path)) == desk_cfg


def test_rician_weight_monotone():
    ks = [0.0, 0.1, 1.0, 10.0, 1e6, math.inf]
    los = [rician_weights(k)[0] for k in ks]
    assert all(b >= a for a, b in zip(los, los[1:]))
    assert los[0] == 0.0 and los[-1] == 1.0
