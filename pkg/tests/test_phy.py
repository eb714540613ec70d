"""Physical layer tests: grid mapping, detection, coded uplink."""

import numpy as np
import pytest

from tonedisc import codec, phy


def unit_link(antennas=2, delta=0):
    return phy.LinkRealization(gains=np.ones(antennas, dtype=complex),
                               delta_subcarriers=delta, path_gain=1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        phy.PhyConfig(stride=3)  # top channel lands past the grid
    with pytest.raises(ValueError):
        phy.PhyConfig(rx_antennas=0)
    with pytest.raises(ValueError):
        phy.PhyConfig(detection_gamma=0.0)
    with pytest.raises(ValueError):
        phy.PhyConfig(fading="fast")


def test_channel_map_round_trip():
    cfg = phy.PhyConfig()
    subs = phy.mapped_subcarriers(cfg)
    assert subs.tolist() == list(range(0, 398, 2))
    for ch in range(cfg.num_channels):
        s = phy.map_channel(ch, cfg)
        assert phy.unmap_subcarrier(s, cfg) == ch
    assert phy.unmap_subcarrier(1, cfg) is None
    assert phy.unmap_subcarrier(398, cfg) is None
    with pytest.raises(ValueError):
        phy.map_channel(199, cfg)
    with pytest.raises(ValueError):
        phy.unmap_subcarrier(512, cfg)


def test_noise_var_matches_psd():
    cfg = phy.PhyConfig()
    assert cfg.noise_var_mw == pytest.approx(10 ** (-174 / 10) * 15e3)


def test_ar1_rho_frozen():
    assert phy.ar1_rho(phy.PhyConfig()) == pytest.approx(0.9703665473617539, abs=1e-12)


def test_rayleigh_gains_power():
    rng = np.random.default_rng(1)
    h = phy.rayleigh_gains(rng, 200000, path_gain=2.0)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(2.0, rel=0.02)


def test_advance_link_block_redraws_ar1_correlates():
    cfg_block = phy.PhyConfig(fading="block")
    cfg_ar1 = phy.PhyConfig(fading="ar1")
    link = unit_link()
    nxt = phy.advance_link(link, cfg_block, np.random.default_rng(3))
    ref = phy.rayleigh_gains(np.random.default_rng(3), 2, 1.0)
    assert np.allclose(nxt.gains, ref)
    rho = phy.ar1_rho(cfg_ar1)
    nxt = phy.advance_link(link, cfg_ar1, np.random.default_rng(3))
    assert np.allclose(nxt.gains, rho * link.gains + np.sqrt(1 - rho * rho) * ref)


def test_ar1_preserves_average_power():
    cfg = phy.PhyConfig(fading="ar1")
    rng = np.random.default_rng(5)
    link = phy.draw_link(rng, cfg, path_gain=1.0)
    powers = []
    for _ in range(4000):
        link = phy.advance_link(link, cfg, rng)
        powers.append(np.abs(link.gains) ** 2)
    assert np.mean(powers) == pytest.approx(1.0, rel=0.1)


def test_transmit_noise_power_and_linearity():
    cfg = phy.PhyConfig()
    links = {(0, 9): unit_link(), (1, 9): unit_link()}
    noise = phy.transmit({}, links, cfg, seed=7, n_symbols=4)[9]
    assert noise.shape == (4, 512, 2)
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(cfg.noise_var_mw, rel=0.05)
    # noise is drawn first, so single-device grids superpose exactly
    both = phy.transmit({0: [5] * 4, 1: [5] * 4}, links, cfg, seed=7)[9]
    a = phy.transmit({0: [5] * 4}, links, cfg, seed=7)[9]
    b = phy.transmit({1: [5] * 4}, links, cfg, seed=7)[9]
    assert np.allclose(both, a + b - noise)
    sc = phy.map_channel(5, cfg)
    tone = (both - noise)[:, sc, :]
    assert np.allclose(tone, 2.0)  # two unit-gain devices at unit power


def test_transmit_skips_self_link_and_clips_offsets():
    cfg = phy.PhyConfig()
    links = {(0, 0): unit_link(), (0, 9): unit_link(delta=-500)}
    grids = phy.transmit({0: [5] * 2}, links, cfg, seed=3)
    noise0 = phy.transmit({}, links, cfg, seed=3, n_symbols=2)
    assert np.array_equal(grids[0], noise0[0])  # own tone not received
    assert np.array_equal(grids[9], noise0[9])  # shifted off the grid


def test_transmit_rejects_mixed_lengths():
    cfg = phy.PhyConfig()
    links = {(0, 9): unit_link(), (1, 9): unit_link()}
    with pytest.raises(ValueError):
        phy.transmit({0: [1] * 3, 1: [1] * 4}, links, cfg, seed=1)
    with pytest.raises(ValueError):
        phy.transmit({}, links, cfg, seed=1)


def test_threshold_mask():
    e = np.array([[1.0, 1.0, 1.0, 1.0, 9.0]])
    assert phy.threshold_mask(e, 8.0).tolist() == [[False, False, False, False, True]]
    assert phy.threshold_mask(e, 9.5).tolist() == [[False] * 5]


def test_detect_tones_finds_strong_tone():
    cfg = phy.PhyConfig()
    rng = np.random.default_rng(11)
    sigma = np.sqrt(cfg.noise_var_mw / 2.0)
    grid = sigma * (rng.standard_normal((3, 512, 2)) + 1j * rng.standard_normal((3, 512, 2)))
    amp = np.sqrt(cfg.noise_var_mw) * 10 ** (30 / 20)
    grid[0, phy.map_channel(5, cfg), :] += amp
    grid[1, phy.map_channel(7, cfg), :] += amp
    grid[2, 399, :] += amp  # unmapped subcarrier must stay invisible
    sets = phy.detect_tones(grid, cfg)
    assert 5 in sets[0] and 7 in sets[1]
    assert sets[2] == set() or all(phy.map_channel(c, cfg) != 399 for c in sets[2])


def test_detect_tones_false_alarm_rate_matches_threshold():
    # one antenna, exponential energies: P(E > gamma * median) = 2^-gamma
    cfg = phy.PhyConfig(rx_antennas=1)
    rng = np.random.default_rng(13)
    sigma = np.sqrt(cfg.noise_var_mw / 2.0)
    grid = sigma * (rng.standard_normal((600, 512, 1)) + 1j * rng.standard_normal((600, 512, 1)))
    hits = sum(len(s) for s in phy.detect_tones(grid, cfg))
    rate = hits / (600 * cfg.num_channels)
    assert 2.0 ** -9 < rate < 2.0 ** -7


def test_detection_feeds_codec_with_frequency_offset():
    # stride-1 map: a one-subcarrier misalignment is a +1 channel shift
    cfg = phy.PhyConfig(stride=1, offset=0, num_channels=199, rx_antennas=2)
    params = codec.make_params(p=199, n=11, k=1)
    cw = codec.encode(1, params)
    links = {(0, 9): unit_link(delta=1)}
    grid = phy.transmit({0: cw}, links, cfg, seed=17,
                        tx_power_mw=cfg.noise_var_mw * 1e3)[9]
    energy = (np.abs(grid) ** 2).sum(axis=2)[:, phy.mapped_subcarriers(cfg)]
    tones = tuple(int(np.argmax(row)) for row in energy)
    c = codec.classify(tones, params)
    assert isinstance(c, codec.Shifted)
    assert c.message.tdid == 1 and c.delta == 1
    r = codec.decode_multi(phy.detect_tones(grid, cfg), params)
    mine = [e for e in r.entries if e.tdid == 1]
    assert mine and mine[0].delta == 1 and mine[0].match_count == 11


def test_detection_stats_rates():
    s = phy.DetectionStats(periods=10, devices=3, erasures=6, false_reports=3)
    assert s.erasure_rate == pytest.approx(0.2)
    assert s.error_rate == pytest.approx(0.1)


def test_run_detection_mc_deterministic_and_snr_paired():
    params = codec.make_params(p=199, n=11, k=1, delta_window=0)
    cfg = phy.PhyConfig()
    a = phy.run_detection_mc(params, cfg, n_devices=10, tone_snr_db=10.0,
                             n_periods=200, seed=99)
    b = phy.run_detection_mc(params, cfg, n_devices=10, tone_snr_db=10.0,
                             n_periods=200, seed=99)
    assert (a.erasures, a.false_reports) == (b.erasures, b.false_reports)
    lo = phy.run_detection_mc(params, cfg, n_devices=10, tone_snr_db=5.0,
                              n_periods=200, seed=99)
    assert lo.erasures > a.erasures
    hi = phy.run_detection_mc(params, cfg, n_devices=10, tone_snr_db=20.0,
                              n_periods=400, seed=41)
    assert hi.erasure_rate < 0.05
    assert hi.error_rate < 0.01


def test_run_detection_mc_antenna_gain():
    params = codec.make_params(p=199, n=11, k=1, delta_window=0)
    one = phy.run_detection_mc(params, phy.PhyConfig(rx_antennas=1), 10, 12.0, 300, 7)
    four = phy.run_detection_mc(params, phy.PhyConfig(rx_antennas=4), 10, 12.0, 300, 7)
    assert four.erasures < one.erasures


def test_uplink_config_validation():
    with pytest.raises(ValueError):
        phy.UplinkConfig(n_symbols=15, data_symbols=14)


def test_uplink_clean_link_at_high_snr():
    r = phy.uplink_punctured_link(25.0, None, False, phy.PhyConfig(), seed=1,
                                  n_blocks=300)
    assert r.blocks == 300 and r.block_errors == 0
    assert r.bler == 0.0


def test_uplink_bler_decreases_with_snr():
    cfg = phy.PhyConfig()
    blers = [phy.uplink_punctured_link(s, None, False, cfg, seed=2, n_blocks=800).bler
             for s in (7.0, 8.5, 10.0)]
    assert blers[0] > blers[1] > blers[2]


def overlay_into_subband(n_symbols=11):
    # channels 100..123 map to subcarriers 200..246 inside the data subband
    return [{100 + (3 * i) % 24} for i in range(n_symbols)]


def test_uplink_puncturing_removes_overlay_power_dependence():
    cfg = phy.PhyConfig()
    overlay = overlay_into_subband()
    errs = []
    for pwr in (0.0, 20.0, 40.0):
        ucfg = phy.UplinkConfig(overlay_power_db=pwr)
        r = phy.uplink_punctured_link(8.0, overlay, True, cfg, seed=5,
                                      n_blocks=300, ucfg=ucfg)
        errs.append(r.block_errors)
    assert errs[0] == errs[1] == errs[2]


def test_uplink_puncturing_beats_decoding_through_interference():
    cfg = phy.PhyConfig()
    overlay = overlay_into_subband()
    for snr in (7.0, 8.5, 10.0):
        punct = phy.uplink_punctured_link(snr, overlay, True, cfg, seed=6, n_blocks=400)
        raw = phy.uplink_punctured_link(snr, overlay, False, cfg, seed=6, n_blocks=400)
        assert punct.block_errors <= raw.block_errors


def test_uplink_deterministic():
    overlay = overlay_into_subband()
    a = phy.uplink_punctured_link(8.0, overlay, True, phy.PhyConfig(), seed=9, n_blocks=200)
    b = phy.uplink_punctured_link(8.0, overlay, True, phy.PhyConfig(), seed=9, n_blocks=200)
    assert a.block_errors == b.block_errors


def test_bit_interleaver_structure():
    cfg = phy.PhyConfig()
    ucfg = phy.UplinkConfig()
    tx_of_bit, bit_of_tx = phy._bit_interleaver(cfg, ucfg)
    nbits = 4 * ucfg.data_symbols * ucfg.subband_subcarriers
    assert sorted(tx_of_bit.tolist()) == list(range(nbits))
    assert np.array_equal(tx_of_bit[bit_of_tx], np.arange(nbits))
    # even coded positions ride strong constellation bits, odd ride weak
    assert np.all(tx_of_bit[0::2] % 2 == 0)
    assert np.all(tx_of_bit[1::2] % 2 == 1)
    # no encoder step can lose both its bits to tone-exposed elements
    re_idx = tx_of_bit // 4
    sub = ucfg.subband_start + (re_idx % ucfg.subband_subcarriers)
    sym = re_idx // ucfg.subband_subcarriers
    tone_capable = ((sub - cfg.offset) % cfg.stride == 0) \
        & ((sub - cfg.offset) // cfg.stride < cfg.num_channels) \
        & (sub >= cfg.offset)
    exposed = tone_capable & (sym >= ucfg.data_symbols - ucfg.n_symbols)
    assert not np.any(exposed[0::2] & exposed[1::2])
    # the interleaver is frozen: same tables on every call
    again, _ = phy._bit_interleaver(cfg, ucfg)
    assert np.array_equal(tx_of_bit, again)
