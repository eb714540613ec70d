"""Tone-level physical layer on an OFDMA uplink grid.

Discovery signals are single tones: per OFDM symbol a device lights exactly
one subcarrier, chosen by its codeword channel index through the channel ->
subcarrier map (stride/offset). Receivers are noncoherent: per symbol and
antenna the energy on every discovery subcarrier is summed across antennas
and compared against a per-symbol noise floor estimate (median energy across
the discovery subcarriers) scaled by detection_gamma.

Also hosts the coded-uplink leg used for puncturing studies: a 16-QAM OFDM
subband block protected by a rate-1/2 constraint-length-7 convolutional code
with soft Viterbi decoding, where resource elements hit by discovery tones
can be erased (zero LLR) instead of decoded through the interference.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import j0

from . import kernels
from .codec import CodecParams, codebook, delta_scan_order


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def lin_to_db(x: float) -> float:
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PhyConfig:
    num_subcarriers: int = 512
    subcarrier_spacing_hz: float = 15e3
    stride: int = 2
    offset: int = 0
    num_channels: int = 199
    rx_antennas: int = 2
    noise_psd_dbm_hz: float = -174.0
    detection_gamma: float = 8.0
    fading: str = "block"  # "block" (fresh per period) or "ar1" (Doppler-correlated)
    doppler_hz: float = 5.5
    period_s: float = 0.01  # one discovery period per radio frame

    def __post_init__(self):
        if self.stride < 1 or self.offset < 0 or self.num_channels < 1:
            raise ValueError("bad channel map")
        top = self.stride * (self.num_channels - 1) + self.offset
        if top >= self.num_subcarriers:
            raise ValueError(
                f"channel map exceeds grid: subcarrier {top} >= {self.num_subcarriers}")
        if self.rx_antennas < 1:
            raise ValueError("need at least one antenna")
        if self.detection_gamma <= 0:
            raise ValueError("detection_gamma must be positive")
        if self.fading not in ("block", "ar1"):
            raise ValueError(f"unknown fading model {self.fading!r}")

    @property
    def noise_var_mw(self) -> float:
        """Noise power per subcarrier sample in mW."""
        return db_to_lin(self.noise_psd_dbm_hz) * self.subcarrier_spacing_hz


def map_channel(channel: int, cfg: PhyConfig) -> int:
    if not 0 <= channel < cfg.num_channels:
        raise ValueError(f"channel {channel} outside [0, {cfg.num_channels})")
    return cfg.stride * channel + cfg.offset


def unmap_subcarrier(subcarrier: int, cfg: PhyConfig) -> int | None:
    """Channel index of a subcarrier, or None for unmapped subcarriers."""
    if not 0 <= subcarrier < cfg.num_subcarriers:
        raise ValueError(f"subcarrier {subcarrier} outside grid")
    q, r = divmod(subcarrier - cfg.offset, cfg.stride)
    if r != 0 or not 0 <= q < cfg.num_channels:
        return None
    return q


def mapped_subcarriers(cfg: PhyConfig) -> np.ndarray:
    return cfg.stride * np.arange(cfg.num_channels) + cfg.offset


# ---------------------------------------------------------------- fading

@dataclass(frozen=True)
class LinkRealization:
    """One tx->rx link for one discovery period.

    gains holds one complex coefficient per rx antenna (fading is static
    across the 11 symbols of a period) with E|h|^2 = path_gain.
    delta_subcarriers is the integer frequency misalignment of this
    transmitter as seen by this receiver.
    """

    gains: np.ndarray
    delta_subcarriers: int = 0
    path_gain: float = 1.0


def rayleigh_gains(rng: np.random.Generator, antennas: int, path_gain: float = 1.0) -> np.ndarray:
    h = rng.standard_normal(antennas) + 1j * rng.standard_normal(antennas)
    return h * np.sqrt(path_gain / 2.0)


def draw_link(rng: np.random.Generator, cfg: PhyConfig, path_gain: float = 1.0,
              delta_subcarriers: int = 0) -> LinkRealization:
    return LinkRealization(gains=rayleigh_gains(rng, cfg.rx_antennas, path_gain),
                           delta_subcarriers=delta_subcarriers, path_gain=path_gain)


def ar1_rho(cfg: PhyConfig) -> float:
    """Period-to-period fading correlation, Jakes model."""
    return float(j0(2.0 * np.pi * cfg.doppler_hz * cfg.period_s))


def advance_link(link: LinkRealization, cfg: PhyConfig,
                 rng: np.random.Generator) -> LinkRealization:
    """Next-period realization: fresh draw (block) or AR(1) step (ar1)."""
    if cfg.fading == "block":
        return draw_link(rng, cfg, link.path_gain, link.delta_subcarriers)
    rho = ar1_rho(cfg)
    fresh = rayleigh_gains(rng, link.gains.shape[0], link.path_gain)
    gains = rho * link.gains + np.sqrt(1.0 - rho * rho) * fresh
    return LinkRealization(gains=gains, delta_subcarriers=link.delta_subcarriers,
                           path_gain=link.path_gain)


# ---------------------------------------------------------------- tone grid

def transmit(assignments: Mapping[int, Sequence[int]],
             links: Mapping[tuple[int, int], LinkRealization],
             cfg: PhyConfig, seed: int | np.random.Generator,
             tx_power_mw: float | Mapping[int, float] = 1.0,
             n_symbols: int | None = None) -> dict[int, np.ndarray]:
    """Superpose every assigned codeword onto each receiver's grid plus noise.

    assignments maps device id -> codeword (one channel per symbol); links
    maps (tx, rx) -> LinkRealization. Returns per-receiver complex grids of
    shape (n_symbols, num_subcarriers, rx_antennas). Tones shifted off the
    grid by a link's subcarrier offset are clipped, not wrapped. Noise is
    drawn first per receiver, so the same seed yields the same noise
    regardless of which devices transmit.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lengths = {len(cw) for cw in assignments.values()}
    if len(lengths) > 1:
        raise ValueError("codewords must share one length")
    n_sym = lengths.pop() if lengths else 0
    if n_symbols is not None:
        if n_sym and n_sym != n_symbols:
            raise ValueError("n_symbols disagrees with codeword length")
        n_sym = n_symbols
    if n_sym == 0:
        raise ValueError("no codewords and no n_symbols given")
    sigma = np.sqrt(cfg.noise_var_mw / 2.0)
    grids: dict[int, np.ndarray] = {}
    for rx in sorted({r for (_, r) in links}):
        shape = (n_sym, cfg.num_subcarriers, cfg.rx_antennas)
        grid = sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        for tx in sorted(assignments):
            link = links.get((tx, rx))
            if link is None or tx == rx:
                continue
            power = tx_power_mw[tx] if isinstance(tx_power_mw, Mapping) else tx_power_mw
            amp = np.sqrt(power)
            for i, chan in enumerate(assignments[tx]):
                s = map_channel(chan, cfg) + link.delta_subcarriers
                if 0 <= s < cfg.num_subcarriers:
                    grid[i, s, :] += amp * link.gains
        grids[rx] = grid
    return grids


def threshold_mask(energies: np.ndarray, gamma: float) -> np.ndarray:
    """Detection mask over the trailing channel axis: energy > gamma * median."""
    floor = np.median(energies, axis=-1, keepdims=True)
    return energies > gamma * floor


def detect_tones(grid: np.ndarray, cfg: PhyConfig) -> list[set[int]]:
    """Noncoherent per-symbol detection; returns one channel set per symbol.

    Energy is summed across antennas; the noise floor is the median energy
    over the discovery subcarriers of the same symbol. Unmapped subcarriers
    never produce detections.
    """
    if grid.ndim != 3 or grid.shape[1] != cfg.num_subcarriers:
        raise ValueError("grid must be (symbols, subcarriers, antennas)")
    energy = np.abs(grid) ** 2
    energy = energy.sum(axis=2)[:, mapped_subcarriers(cfg)]
    hits = threshold_mask(energy, cfg.detection_gamma)
    return [set(map(int, np.nonzero(row)[0])) for row in hits]


# ------------------------------------------------- batched detection runs

@dataclass(frozen=True)
class DetectionStats:
    periods: int
    devices: int
    erasures: int       # transmitted TDID not reported
    false_reports: int  # reported TDID nobody transmitted

    @property
    def erasure_rate(self) -> float:
        return self.erasures / (self.periods * self.devices)

    @property
    def error_rate(self) -> float:
        return self.false_reports / (self.periods * self.devices)


def run_detection_mc(params: CodecParams, cfg: PhyConfig, n_devices: int,
                     tone_snr_db: float, n_periods: int, seed: int,
                     chunk: int = 256) -> DetectionStats:
    """Monte Carlo of simultaneous tone detection and codeword decoding.

    n_devices distinct TDIDs transmit every period over iid Rayleigh fading
    (fresh per period, i.e. block fading) with per-tone SNR tone_snr_db per
    rx antenna at unit noise. Works in the channel domain, which matches
    detect_tones exactly for zero subcarrier offsets. Deterministic per seed;
    the random stream does not depend on tone_snr_db, so runs with the same
    seed are paired across SNR points.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    p, n_sym = params.p, params.n
    tdids = np.sort(rng.choice(params.num_tdids, size=n_devices, replace=False))
    book = codebook(params, tdids)
    deltas = delta_scan_order(params.delta_window)
    shifted = kernels.shifted_indices(codebook(params), deltas, p)
    amp = np.float32(np.sqrt(db_to_lin(tone_snr_db)))
    tx_mask = np.zeros(params.num_tdids, dtype=bool)
    tx_mask[tdids] = True
    sym_idx = np.arange(n_sym)
    erasures = 0
    false_reports = 0
    done = 0
    while done < n_periods:
        b = min(chunk, n_periods - done)
        energy = np.zeros((b, n_sym, p), dtype=np.float32)
        for _ in range(cfg.rx_antennas):
            re = rng.standard_normal((b, n_sym, p), dtype=np.float32)
            im = rng.standard_normal((b, n_sym, p), dtype=np.float32)
            grid = (re + 1j * im) * np.float32(np.sqrt(0.5))
            hre = rng.standard_normal((b, n_devices), dtype=np.float32)
            him = rng.standard_normal((b, n_devices), dtype=np.float32)
            h = (hre + 1j * him) * np.float32(np.sqrt(0.5))
            for d in range(n_devices):
                grid[:, sym_idx, book[d]] += amp * h[:, d][:, None]
            energy += np.abs(grid) ** 2
        mask = threshold_mask(energy, cfg.detection_gamma).astype(np.uint8)
        counts = kernels.match_counts_batch(mask, shifted)
        best = counts.max(axis=2)
        reported = best >= params.theta
        erasures += int((~reported[:, tdids]).sum())
        false_reports += int(reported[:, ~tx_mask].sum())
        done += b
    return DetectionStats(periods=n_periods, devices=n_devices,
                          erasures=erasures, false_reports=false_reports)


# ------------------------------------------------------- coded uplink leg

@dataclass(frozen=True)
class UplinkConfig:
    """Subband data block overlapped by discovery tones.

    One block spans data_symbols OFDM symbols by subband_subcarriers
    contiguous subcarriers, 16-QAM, coded at rate 1/2. Discovery tones
    occupy only the last n_symbols of the block (the leading symbols are
    the control region). overlay_power_db sets interferer tone power above
    the unit-energy data resource elements.
    """

    subband_start: int = 200
    subband_subcarriers: int = 48
    n_symbols: int = 11
    data_symbols: int = 14
    overlay_power_db: float = 20.0

    def __post_init__(self) -> None:
        if self.n_symbols > self.data_symbols:
            raise ValueError("overlay symbols exceed the data block")


@dataclass(frozen=True)
class LinkResult:
    blocks: int
    block_errors: int

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks


_QAM_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
# Gray map per axis: (b_hi, b_lo) 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
_BIT_TO_LEVEL = np.array([0, 1, 3, 2])
_LEVEL_BIT_HI = np.array([0, 0, 1, 1], dtype=bool)
_LEVEL_BIT_LO = np.array([0, 1, 1, 0], dtype=bool)


def _qam16_modulate(coded: np.ndarray) -> np.ndarray:
    """(B, 4R) coded bits -> (B, R) unit-energy 16-QAM symbols."""
    b = coded.reshape(coded.shape[0], -1, 4)
    i_lvl = _QAM_LEVELS[_BIT_TO_LEVEL[2 * b[..., 0] + b[..., 1]]]
    q_lvl = _QAM_LEVELS[_BIT_TO_LEVEL[2 * b[..., 2] + b[..., 3]]]
    return i_lvl + 1j * q_lvl


def _qam16_llrs(y: np.ndarray, noise_var: float) -> np.ndarray:
    """Max-log per-bit LLRs, positive favors bit 0; (B, R) -> (B, 4R)."""
    out = np.empty(y.shape + (4,), dtype=np.float64)
    for axis, vals in ((0, y.real), (1, y.imag)):
        d2 = (vals[..., None] - _QAM_LEVELS) ** 2
        for pos, sel in ((0, _LEVEL_BIT_HI), (1, _LEVEL_BIT_LO)):
            llr = d2[..., sel].min(axis=-1) - d2[..., ~sel].min(axis=-1)
            out[..., 2 * axis + pos] = llr / noise_var
    return out.reshape(y.shape[0], -1)


def _overlay_positions(overlay_channels: Sequence[Iterable[int]] | None,
                       cfg: PhyConfig, ucfg: UplinkConfig) -> np.ndarray:
    """Flat RE indices inside the subband hit by overlay tones.

    Tone symbol i lands on block symbol data_symbols - n_symbols + i.
    """
    if overlay_channels is None:
        return np.empty(0, dtype=np.int64)
    if len(overlay_channels) != ucfg.n_symbols:
        raise ValueError(f"need {ucfg.n_symbols} per-symbol channel sets")
    first = ucfg.data_symbols - ucfg.n_symbols
    pos = set()
    for i, chans in enumerate(overlay_channels):
        for c in chans:
            s = map_channel(c, cfg)
            if ucfg.subband_start <= s < ucfg.subband_start + ucfg.subband_subcarriers:
                pos.add((first + i) * ucfg.subband_subcarriers
                        + (s - ucfg.subband_start))
    return np.array(sorted(pos), dtype=np.int64)


@lru_cache(maxsize=4)
def _bit_interleaver(cfg: PhyConfig,
                     ucfg: UplinkConfig) -> tuple[np.ndarray, np.ndarray]:
    """Fixed coded-bit to resource-element mapping for the subband block.

    Tones can only ever land on tone-mappable subcarriers of the overlay
    symbols, so those REs are known in advance. The mapping gives every
    encoder step (two coded bits) one bit slot in that exposed region at
    most, and one high- plus one low-reliability 16-QAM position, so a
    wiped RE costs four separate steps one bit each and no step is ever
    fully erased. Deterministic; independent of the run seed.
    Returns (tx_of_bit, bit_of_tx) index maps of length 4 * res.
    """
    res = ucfg.data_symbols * ucfg.subband_subcarriers
    re_idx = np.arange(res)
    sub = ucfg.subband_start + (re_idx % ucfg.subband_subcarriers)
    sym = re_idx // ucfg.subband_subcarriers
    tone_capable = ((sub - cfg.offset) % cfg.stride == 0) \
        & ((sub - cfg.offset) // cfg.stride < cfg.num_channels) \
        & (sub >= cfg.offset)
    exposed = tone_capable & (sym >= ucfg.data_symbols - ucfg.n_symbols)

    slot = np.arange(4 * res)
    strong = slot % 2 == 0          # 16-QAM positions 0,2 carry the sign bits
    slot_exposed = exposed[slot // 4]
    rng = np.random.default_rng(np.random.SeedSequence([0xB1751]))
    es = rng.permutation(slot[strong & slot_exposed])
    ew = rng.permutation(slot[~strong & slot_exposed])
    ss = rng.permutation(slot[strong & ~slot_exposed])
    sw = rng.permutation(slot[~strong & ~slot_exposed])
    # pair exposed slots with safe partners; leftovers pair safe with safe
    strong_of_step = np.concatenate([es, ss[:len(ew)], ss[len(ew):]])
    weak_of_step = np.concatenate([sw[:len(es)], ew, sw[len(es):]])
    order = rng.permutation(2 * res)
    tx_of_bit = np.empty(4 * res, dtype=np.int64)
    tx_of_bit[0::2] = strong_of_step[order]
    tx_of_bit[1::2] = weak_of_step[order]
    bit_of_tx = np.empty_like(tx_of_bit)
    bit_of_tx[tx_of_bit] = np.arange(tx_of_bit.size)
    return tx_of_bit, bit_of_tx


def uplink_punctured_link(snr_db: float,
                          overlay_channels: Sequence[Iterable[int]] | None,
                          puncture: bool, cfg: PhyConfig, seed: int,
                          n_blocks: int = 2000,
                          ucfg: UplinkConfig = UplinkConfig()) -> LinkResult:
    """Block error rate of the coded subband with optional tone puncturing.

    Data, noise, and interference come from independent substreams of the
    seed, so runs with the same seed share data and noise bit for bit across
    puncture settings and across overlay on/off (interference only touches
    overlay RE positions). With puncture=True the LLRs of overlaid REs are
    zeroed, making the result independent of overlay power.
    """
    res = ucfg.data_symbols * ucfg.subband_subcarriers
    n_info = 2 * res - kernels.CONV_TAIL
    ss = np.random.SeedSequence([seed])
    rng_data, rng_noise, rng_intf = (np.random.default_rng(c) for c in ss.spawn(3))
    positions = _overlay_positions(overlay_channels, cfg, ucfg)
    tx_of_bit, bit_of_tx = _bit_interleaver(cfg, ucfg)
    noise_var = db_to_lin(-snr_db)
    p_ov = db_to_lin(ucfg.overlay_power_db)
    info = rng_data.integers(0, 2, size=(n_blocks, n_info), dtype=np.uint8)
    tailed = np.concatenate(
        [info, np.zeros((n_blocks, kernels.CONV_TAIL), dtype=np.uint8)], axis=1)
    coded = kernels.conv_encode(tailed)
    x = _qam16_modulate(coded[:, bit_of_tx])
    noise = rng_noise.standard_normal(x.shape) + 1j * rng_noise.standard_normal(x.shape)
    y = x + noise * np.sqrt(noise_var / 2.0)
    if positions.size:
        intf = rng_intf.standard_normal((n_blocks, positions.size)) \
            + 1j * rng_intf.standard_normal((n_blocks, positions.size))
        y[:, positions] += intf * np.sqrt(p_ov / 2.0)
    llrs = _qam16_llrs(y, noise_var)
    if puncture and positions.size:
        bitpos = (4 * positions[:, None] + np.arange(4)).ravel()
        llrs[:, bitpos] = 0.0
    decided = kernels.viterbi_decode(llrs[:, tx_of_bit])[:, :n_info]
    errors = int(np.any(decided != info, axis=1).sum())
    return LinkResult(blocks=n_blocks, block_errors=errors)
