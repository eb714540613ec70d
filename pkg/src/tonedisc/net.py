"""Network layer: topology, link budgets, and scheme-level simulations.

Covers the analytic random-access discovery baseline and its Monte Carlo,
an 802.11-style CSMA beacon scheme, the tone scheme end to end (phy + codec
+ neighbor MAC), and the capacity studies built on top of discovery: mode
selection, relay selection, and conflict-graph resource allocation.

Link budgets are average-SNR based (no interference term) with one
path-loss law for every link; BS and device receivers differ only in noise
figure. Rates use the truncated Shannon map.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from . import mac
from .codec import CodecParams, codebook, delta_scan_order
from .kernels import match_counts_batch, shifted_indices
from .phy import PhyConfig, db_to_lin, lin_to_db, threshold_mask

RATE_CAP = 6.0
RATE_SCALE = 0.75


# ------------------------------------------------------------- analytics

def p_discovery(tx_prob: float, group_size: int, n_periods: int) -> float:
    """Chance that a listener discovers a given neighbor within n_periods.

    Per period the neighbor must transmit while the other group_size-1
    mutually audible stations (the listener included) stay silent, so the
    per-period success probability is p*(1-p)**(group_size-1).
    """
    if not 0.0 <= tx_prob <= 1.0:
        raise ValueError("tx_prob outside [0, 1]")
    if group_size < 1 or n_periods < 0:
        raise ValueError("need group_size >= 1 and n_periods >= 0")
    q = tx_prob * (1.0 - tx_prob) ** (group_size - 1)
    return 1.0 - (1.0 - q) ** n_periods


def p_discovery_opt(group_size: int) -> float:
    """Transmit probability maximizing the per-period success rate."""
    if group_size < 1:
        raise ValueError("need group_size >= 1")
    return 1.0 / group_size


def cost231_hata(distance_km: float, carrier_mhz: float = 2000.0,
                 bs_height_m: float = 30.0, device_height_m: float = 1.5,
                 metro_correction_db: float = 3.0) -> float:
    """COST231-Hata urban path loss in dB; distances below 20 m are clamped."""
    if distance_km > 20.0:
        raise ValueError(f"distance {distance_km} km beyond model range")
    d = max(distance_km, 0.02)
    lf = np.log10(carrier_mhz)
    a_hm = (1.1 * lf - 0.7) * device_height_m - (1.56 * lf - 0.8)
    return float(46.3 + 33.9 * lf - 13.82 * np.log10(bs_height_m) - a_hm
                 + (44.9 - 6.55 * np.log10(bs_height_m)) * np.log10(d)
                 + metro_correction_db)


def sinr_to_rate(sinr_linear: float) -> float:
    """Truncated Shannon spectral efficiency, capped at 6 bit/s/Hz."""
    if sinr_linear < 0:
        raise ValueError("sinr must be nonnegative")
    return min(RATE_SCALE * np.log2(1.0 + sinr_linear), RATE_CAP)


# ------------------------------------------------------------- topology

@dataclass(frozen=True)
class RadioParams:
    carrier_mhz: float = 2000.0
    bs_height_m: float = 30.0
    device_height_m: float = 1.5
    metro_correction_db: float = 3.0
    bs_power_dbm: float = 43.0
    device_power_dbm: float = 23.0
    data_bandwidth_hz: float = 4.5e6
    tone_bandwidth_hz: float = 15e3
    noise_psd_dbm_hz: float = -174.0
    bs_noise_figure_db: float = 6.0
    device_noise_figure_db: float = 10.0
    tone_detect_gamma: float = 8.0

    def noise_dbm(self, bandwidth_hz: float, noise_figure_db: float) -> float:
        return self.noise_psd_dbm_hz + noise_figure_db + lin_to_db(bandwidth_hz)

    @property
    def tone_audible_snr_db(self) -> float:
        return lin_to_db(self.tone_detect_gamma)


def path_loss_db(distance_km: float | np.ndarray, radio: RadioParams) -> np.ndarray:
    """Vectorized path loss with the same clamp as cost231_hata."""
    d = np.maximum(np.asarray(distance_km, dtype=np.float64), 0.02)
    lf = np.log10(radio.carrier_mhz)
    a_hm = (1.1 * lf - 0.7) * radio.device_height_m - (1.56 * lf - 0.8)
    return (46.3 + 33.9 * lf - 13.82 * np.log10(radio.bs_height_m) - a_hm
            + (44.9 - 6.55 * np.log10(radio.bs_height_m)) * np.log10(d)
            + radio.metro_correction_db)


def hex_cells(n_cells: int, site_distance_m: float = 1000.0) -> np.ndarray:
    """(n_cells, 2) BS coordinates: center plus full hex rings (1, 7, 19...)."""
    ring = 0
    total = 1
    while total < n_cells:
        ring += 1
        total += 6 * ring
    if total != n_cells:
        raise ValueError(f"n_cells {n_cells} is not 1 + sum of full rings")
    pts = [(0.0, 0.0)]
    for r in range(1, ring + 1):
        corner = np.array([r * site_distance_m, 0.0])
        rot = np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)])
        for k in range(6):
            ang = k * np.pi / 3
            ca, sa = np.cos(ang), np.sin(ang)
            start = np.array([ca * corner[0] - sa * corner[1],
                              sa * corner[0] + ca * corner[1]])
            step_ang = ang + 2 * np.pi / 3
            step = site_distance_m * np.array([np.cos(step_ang), np.sin(step_ang)])
            for j in range(r):
                pts.append(tuple(start + j * step))
    return np.asarray(pts[:n_cells], dtype=np.float64)


def drop_devices(cell_xy: np.ndarray, per_cell: int, radius_m: float,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform disc drop around each BS; returns (positions (n,2), serving (n,))."""
    n_cells = cell_xy.shape[0]
    r = radius_m * np.sqrt(rng.random((n_cells, per_cell)))
    ang = 2 * np.pi * rng.random((n_cells, per_cell))
    pos = cell_xy[:, None, :] + np.stack(
        [r * np.cos(ang), r * np.sin(ang)], axis=-1)
    pos = pos.reshape(-1, 2)
    d = np.linalg.norm(pos[:, None, :] - cell_xy[None], axis=2)
    serving = d.argmin(axis=1)
    return pos, serving


# ------------------------------------------------------------ pair table

@dataclass(frozen=True)
class PairTable:
    """Per-link budgets; matrix convention is [receiver, transmitter].

    rate is the truncated-Shannon device-device spectral efficiency, forced
    to zero where the discovery tone is below the detection floor (a link
    that cannot be discovered cannot be used).
    """

    tone_snr_db: np.ndarray
    rate: np.ndarray
    audible: np.ndarray
    uplink_rate: np.ndarray
    downlink_rate: np.ndarray
    gain_to_bs_db: np.ndarray
    gain_db: np.ndarray


def build_pair_table(positions_m: np.ndarray, serving: np.ndarray,
                     cell_xy: np.ndarray, radio: RadioParams) -> PairTable:
    n = positions_m.shape[0]
    d_km = np.linalg.norm(positions_m[:, None] - positions_m[None], axis=2) / 1000.0
    gain = -path_loss_db(d_km, radio)
    np.fill_diagonal(gain, -np.inf)
    tone_noise = radio.noise_dbm(radio.tone_bandwidth_hz, radio.device_noise_figure_db)
    data_noise_dev = radio.noise_dbm(radio.data_bandwidth_hz, radio.device_noise_figure_db)
    data_noise_bs = radio.noise_dbm(radio.data_bandwidth_hz, radio.bs_noise_figure_db)
    tone_snr = radio.device_power_dbm + gain - tone_noise
    audible = tone_snr >= radio.tone_audible_snr_db
    np.fill_diagonal(audible, False)
    with np.errstate(invalid="ignore"):
        snr_lin = db_to_lin(radio.device_power_dbm + gain - data_noise_dev)
    rate = np.minimum(RATE_SCALE * np.log2(1.0 + snr_lin), RATE_CAP)
    rate[~audible] = 0.0
    np.fill_diagonal(rate, 0.0)
    d_bs_km = np.linalg.norm(positions_m - cell_xy[serving], axis=1) / 1000.0
    gain_bs = -path_loss_db(d_bs_km, radio)
    up = np.minimum(RATE_SCALE * np.log2(
        1.0 + db_to_lin(radio.device_power_dbm + gain_bs - data_noise_bs)), RATE_CAP)
    down = np.minimum(RATE_SCALE * np.log2(
        1.0 + db_to_lin(radio.bs_power_dbm + gain_bs - data_noise_dev)), RATE_CAP)
    return PairTable(tone_snr_db=tone_snr, rate=rate, audible=audible,
                     uplink_rate=up, downlink_rate=down,
                     gain_to_bs_db=gain_bs, gain_db=gain)


# ------------------------------------------------- random-access baseline

@dataclass(frozen=True)
class BaselineResult:
    empirical_probability: float
    trials: int
    successes: int


def run_baseline_discovery(tx_prob: float, group_size: int, n_periods: int,
                           n_trials: int, seed: int) -> BaselineResult:
    """Monte Carlo of one listener/neighbor pair in a mutually audible group."""
    if group_size < 2:
        raise ValueError("simulation needs listener plus neighbor (group_size >= 2)")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    hits = 0
    chunk = max(1, min(n_trials, 1 << 22 // max(1, n_periods * group_size)))
    done = 0
    while done < n_trials:
        b = min(chunk, n_trials - done)
        coins = rng.random((b, n_periods, group_size)) < tx_prob
        solo = coins[:, :, 1] & (coins.sum(axis=2) == 1)
        hits += int(solo.any(axis=1).sum())
        done += b
    return BaselineResult(empirical_probability=hits / n_trials,
                          trials=n_trials, successes=hits)


@dataclass(frozen=True)
class DiscoveryTimeResult:
    mean_periods: float
    period_ms: float
    n_pairs: int
    censored: int

    @property
    def mean_ms(self) -> float:
        return self.mean_periods * self.period_ms


def run_aloha_discovery(group_size: int, n_trials: int, seed: int,
                        tx_prob: float | None = None, horizon: int = 20000,
                        period_ms: float = 10.0) -> DiscoveryTimeResult:
    """Mean periods until a device's beacon gets through (solo transmission).

    Every station uses transmit probability tx_prob (default the optimum
    1/group_size). A device is discovered by everyone else simultaneously at
    its first solo-transmission period; censored devices count the horizon.
    """
    p = p_discovery_opt(group_size) if tx_prob is None else tx_prob
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    first = np.full((n_trials, group_size), horizon, dtype=np.int64)
    unset = np.ones((n_trials, group_size), dtype=bool)
    chunk = 256
    t0 = 0
    while t0 < horizon and unset.any():
        b = min(chunk, horizon - t0)
        coins = rng.random((n_trials, b, group_size)) < p
        solo = coins & (coins.sum(axis=2, keepdims=True) == 1)
        any_solo = solo.any(axis=1)
        tfirst = t0 + solo.argmax(axis=1)
        take = unset & any_solo
        first[take] = tfirst[take]
        unset &= ~any_solo
        t0 += b
    censored = int(unset.sum())
    return DiscoveryTimeResult(mean_periods=float(first.mean() + 1.0),
                               period_ms=period_ms,
                               n_pairs=n_trials * group_size, censored=censored)


# ------------------------------------------------------------ CSMA beacon

def run_csma_beacon(audible: np.ndarray, contention_window: int, seed: int,
                    horizon: int = 6000, period_ms: float = 100.0) -> DiscoveryTimeResult:
    """802.11-style beaconing: per period every station draws a backoff slot
    in [0, 2*cw) and transmits unless it first hears an audible station with
    a strictly smaller slot; equal smallest slots collide. A listener
    receives a beacon when exactly one audible station transmitted and the
    listener itself stayed silent. Mean is over ordered audible pairs,
    censored pairs counted at the horizon.
    """
    n = audible.shape[0]
    if audible.shape != (n, n):
        raise ValueError("audible must be square")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    first = np.full((n, n), horizon, dtype=np.int64)
    pending = audible.copy()
    chunk = 128
    t0 = 0
    while t0 < horizon and pending.any():
        b = min(chunk, horizon - t0)
        slots = rng.integers(0, 2 * contention_window, size=(b, n))
        masked = np.where(audible[None], slots[:, None, :], np.inf)
        min_aud = masked.min(axis=2)
        tx = slots <= min_aud
        aud_tx_count = (tx[:, None, :] & audible[None]).sum(axis=2)
        heard = (tx[:, None, :] & audible[None]
                 & ~tx[:, :, None] & (aud_tx_count == 1)[:, :, None])
        hit_any = heard.any(axis=0)
        tfirst = t0 + heard.argmax(axis=0)
        take = pending & hit_any
        first[take] = tfirst[take]
        pending &= ~hit_any
        t0 += b
    n_pairs = int(audible.sum())
    mean = float(first[audible].mean() + 1.0) if n_pairs else 0.0
    return DiscoveryTimeResult(mean_periods=mean, period_ms=period_ms,
                               n_pairs=n_pairs, censored=int(pending.sum()))


# ----------------------------------------------------- tone scheme, end to end

SELF_TONE_SNR_DB = 40.0  # own transmit leakage; always detected, always decodable


def run_tone_discovery(params: CodecParams, cfg: PhyConfig, table: PairTable,
                       tdids: np.ndarray, seed: int, max_frames: int = 30,
                       ) -> DiscoveryTimeResult:
    """Frames until neighbor admission (4 consecutive detections) per pair.

    All devices transmit their codeword every frame and listen in full
    duplex (own tone enters the grid at SELF_TONE_SNR_DB). Detection and
    decoding run per listener in the channel domain exactly as
    phy.run_detection_mc; decoded TDIDs feed mac.update_neighbor_list with
    the pair's quantized link rate as LQI. A pair counts as discovered at
    its first Add event (fourth consecutive detection); above the list
    capacity an Add can be followed by eviction in the same update, so the
    event, not membership, is the discovery criterion. The mean counts
    frames from start to discovery over ordered audible pairs.
    """
    n = table.rate.shape[0]
    tdids = np.asarray(tdids, dtype=np.int64)
    if tdids.size != n or len(set(tdids.tolist())) != n:
        raise ValueError("need one distinct tdid per device")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    p, n_sym = params.p, params.n
    book = codebook(params, tdids)
    shifted = shifted_indices(codebook(params), delta_scan_order(params.delta_window), p)
    amp = np.sqrt(db_to_lin(table.tone_snr_db)).astype(np.float32)
    amp[np.arange(n), np.arange(n)] = np.sqrt(db_to_lin(SELF_TONE_SNR_DB))
    owner = -np.ones(params.num_tdids, dtype=np.int64)
    owner[tdids] = np.arange(n)
    lqi = np.zeros((n, n), dtype=np.int64)
    for l in range(n):
        for j in range(n):
            if l != j:
                lqi[l, j] = mac.lqi_quantize(min(table.rate[l, j], mac.LQI_MAX_RATE))
    lists = [mac.NeighborList() for _ in range(n)]
    admitted_at = np.full((n, n), max_frames, dtype=np.int64)
    pending = table.audible.copy()
    sym_idx = np.arange(n_sym)
    for frame in range(max_frames):
        if not pending.any():
            break
        energy = np.zeros((n, n_sym, p), dtype=np.float32)
        for _ in range(cfg.rx_antennas):
            re = rng.standard_normal((n, n_sym, p), dtype=np.float32)
            im = rng.standard_normal((n, n_sym, p), dtype=np.float32)
            grid = (re + 1j * im) * np.float32(np.sqrt(0.5))
            hre = rng.standard_normal((n, n), dtype=np.float32)
            him = rng.standard_normal((n, n), dtype=np.float32)
            h = (hre + 1j * him) * np.float32(np.sqrt(0.5))
            for j in range(n):
                grid[:, sym_idx, book[j]] += (amp[:, j] * h[:, j])[:, None]
            energy += np.abs(grid) ** 2
        mask = threshold_mask(energy, cfg.detection_gamma).astype(np.uint8)
        counts = match_counts_batch(mask, shifted).max(axis=2)
        reported = counts >= params.theta
        for l in range(n):
            dets = {}
            for t in np.nonzero(reported[l])[0]:
                j = owner[t]
                if j >= 0 and j != l:
                    dets[int(tdids[j])] = int(lqi[l, j])
            lists[l], events = mac.update_neighbor_list(lists[l], dets)
            for ev in events:
                if isinstance(ev, mac.Add):
                    j = owner[ev.tdid]
                    if pending[l, j]:
                        admitted_at[l, j] = frame
                        pending[l, j] = False
    n_pairs = int(table.audible.sum())
    mean = float(admitted_at[table.audible].mean() + 1.0) if n_pairs else 0.0
    return DiscoveryTimeResult(mean_periods=mean, period_ms=cfg.period_s * 1e3,
                               n_pairs=n_pairs, censored=int(pending.sum()))


# --------------------------------------------------- mode / relay / colors

class Mode(Enum):
    CELLULAR = "cellular"
    P2P = "p2p"


def select_mode(strength_target_dbm: float, strength_bs_dbm: float,
                margin_db: float = 0.0) -> Mode:
    """P2P when the peer's discovery signal is at least margin above the BS
    reference; exact ties go P2P."""
    return Mode.P2P if strength_target_dbm >= strength_bs_dbm + margin_db else Mode.CELLULAR


@dataclass(frozen=True)
class RouteChoice:
    relay: int | None
    rate: float
    direct_rate: float


def select_relay(table: PairTable, source: int, target_uplink_rate: float,
                 uplink: np.ndarray, candidates: Sequence[int]) -> RouteChoice:
    """Best two-hop route source -> relay -> BS against a direct uplink.

    Two-hop rate is half the weaker hop (store and forward on one channel).
    The relay must beat direct strictly; ties between relays break to the
    lowest device id. With no candidates the direct route wins by default.
    """
    best_rate = target_uplink_rate
    best_relay = None
    for r in sorted(int(c) for c in candidates):
        if r == source:
            continue
        two_hop = 0.5 * min(table.rate[r, source], uplink[r])
        if two_hop > best_rate:
            best_rate = two_hop
            best_relay = r
    return RouteChoice(relay=best_relay, rate=best_rate,
                       direct_rate=target_uplink_rate)


def allocate_resources(pairs: Sequence[tuple[int, int]],
                       neighbors: Mapping[int, set[int]]) -> list[int]:
    """Greedy conflict-graph coloring of transmit pairs.

    Pairs (a, b) and (c, d) conflict when they share an endpoint or when a
    transmitter sits in the neighbor set of the other pair's receiver
    (b-c or a-d adjacency, either direction). Colors are assigned in
    descending conflict degree, pair index breaking ties, each pair taking
    the smallest color absent from its already-colored conflicts.
    """
    m = len(pairs)
    conflict = np.zeros((m, m), dtype=bool)

    def nbr(x: int) -> set[int]:
        return neighbors.get(x, set())

    for i, (a, b) in enumerate(pairs):
        for j in range(i + 1, m):
            c, d = pairs[j]
            clash = (len({a, b} & {c, d}) > 0
                     or b in nbr(c) or c in nbr(b)
                     or a in nbr(d) or d in nbr(a))
            conflict[i, j] = conflict[j, i] = clash
    degree = conflict.sum(axis=1)
    order = sorted(range(m), key=lambda i: (-int(degree[i]), i))
    colors = [-1] * m
    for i in order:
        used = {colors[j] for j in np.nonzero(conflict[i])[0] if colors[j] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    return colors


# ----------------------------------------------------------- capacity drops

@dataclass(frozen=True)
class CapacityDrop:
    """Inner-cell per-device rates for one random drop (bit/s/Hz)."""

    cellular: np.ndarray
    mode_selected: np.ndarray
    direct_uplink: np.ndarray
    relayed_uplink: np.ndarray


def run_capacity_drop(seed: int, n_cells: int = 7, per_cell: int = 15,
                      site_distance_m: float = 1000.0,
                      radio: RadioParams = RadioParams(),
                      margin_db: float = 0.0) -> CapacityDrop:
    """One drop of the capacity studies.

    Local pairs: every inner-cell source pairs with its nearest same-cell
    device; cellular service relays through the BS at half the weaker of the
    two hops, the peer-to-peer alternative is taken when mode selection
    says so. Uplink study: best device relay per select_relay against the
    direct uplink, candidates being the source's audible same-cell devices.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    cells = hex_cells(n_cells, site_distance_m)
    pos, serving = drop_devices(cells, per_cell, site_distance_m / 2.0, rng)
    table = build_pair_table(pos, serving, cells, radio)
    inner = np.nonzero(serving == 0)[0]
    n = pos.shape[0]
    d = np.linalg.norm(pos[:, None] - pos[None], axis=2)
    cellular = []
    selected = []
    direct = []
    relayed = []
    for s in inner:
        same = [j for j in range(n) if serving[j] == serving[s] and j != s]
        if not same:
            continue
        t = min(same, key=lambda j: d[s, j])
        cell_rate = 0.5 * min(table.uplink_rate[s], table.downlink_rate[t])
        strength_target = radio.device_power_dbm + table.gain_db[s, t]
        strength_bs = radio.device_power_dbm + table.gain_to_bs_db[s]
        if select_mode(strength_target, strength_bs, margin_db) is Mode.P2P:
            chosen = table.rate[t, s]
        else:
            chosen = cell_rate
        cellular.append(cell_rate)
        selected.append(chosen)
        cands = [j for j in same if table.audible[j, s]]
        route = select_relay(table, int(s), float(table.uplink_rate[s]),
                             table.uplink_rate, cands)
        direct.append(table.uplink_rate[s])
        relayed.append(route.rate)
    return CapacityDrop(cellular=np.asarray(cellular),
                        mode_selected=np.asarray(selected),
                        direct_uplink=np.asarray(direct),
                        relayed_uplink=np.asarray(relayed))
