"""Stochastic oracles for every closed form in the analytical modules.

Each estimator samples the underlying random model directly (Poisson
fields, Gamma aggregate gains, log-normal shadowing, slotted retries) and
reports a mean with its standard error, so the library's quadrature-based
results can be checked to within sampling noise.

Randomness comes from counter-based Philox streams keyed by
``(seed, stream path)``: every batch owns an independent substream, so
results are bit-reproducible and independent of execution order.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import multipath
from .multipath import MULTIPATH, SCHEMES

_CHUNK = 50_000


class TopologyError(RuntimeError):
    """A sampled topology cannot support the requested transfer."""


class ChainDisconnectedError(TopologyError):
    """No relay chain with hops within range exists for some path."""


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo mean with its standard error."""

    mean: float
    std_error: float
    n_samples: int
    seed: int

    def z_score(self, reference):
        """Standardised deviation of the estimate from ``reference``."""
        if self.std_error == 0.0:
            return 0.0 if self.mean == reference else math.inf
        return (self.mean - reference) / self.std_error


@dataclass(frozen=True)
class SampledTopology:
    """One realisation of the four planar Poisson fields."""

    region_radius: float
    mbs: np.ndarray
    sbs: np.ndarray
    edc: np.ndarray
    users: np.ndarray
    densities: tuple  # (lambda_m, lambda_s, lambda_e, lambda_u)
    seed: int

    def content_hash(self):
        digest = hashlib.sha256()
        for pts in (self.mbs, self.sbs, self.edc, self.users):
            digest.update(np.ascontiguousarray(pts, dtype=float).tobytes())
        return digest.hexdigest()[:12]


def substream(seed, *path):
    """Independent counter-based generator for ``(seed, path)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def sample_ppp(lam, region_radius, seed=0, rng=None):
    """Sample a planar Poisson field on a disc centred at the origin.

    Returns an (N, 2) coordinate array with N ~ Poisson(lam * pi * R^2)
    and positions uniform on the disc.
    """
    if lam < 0 or region_radius <= 0:
        raise ValueError("need lam >= 0 and region_radius > 0")
    rng = rng if rng is not None else substream(seed)
    n = rng.poisson(lam * math.pi * region_radius ** 2)
    radii = region_radius * np.sqrt(rng.random(n))
    angles = rng.random(n) * 2.0 * math.pi
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def sample_topology(s, region_radius=None, seed=0):
    """Sample all four tiers; region covers 5 / sqrt(sparsest density)."""
    if region_radius is None:
        region_radius = 5.0 / math.sqrt(
            min(s.lambda_m, s.lambda_s, s.lambda_e, s.lambda_u))
    tiers = []
    for i, lam in enumerate((s.lambda_m, s.lambda_s, s.lambda_e, s.lambda_u)):
        tiers.append(sample_ppp(lam, region_radius, rng=substream(seed, i)))
    return SampledTopology(
        region_radius=region_radius, mbs=tiers[0], sbs=tiers[1],
        edc=tiers[2], users=tiers[3],
        densities=(s.lambda_m, s.lambda_s, s.lambda_e, s.lambda_u),
        seed=seed)


def _proportion_estimate(successes, trials, seed):
    p = successes / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return McEstimate(mean=p, std_error=se, n_samples=trials, seed=seed)


def proportion_z(est, analytic):
    """z-score of a sampled proportion against an analytic probability.

    Uses the binomial standard error under the analytic value, which
    stays meaningful when the sample happens to contain no failures (or
    no successes) and the empirical standard error degenerates to zero.
    """
    var = analytic * (1.0 - analytic)
    if var == 0.0:
        return 0.0 if est.mean == analytic else math.inf
    return (est.mean - analytic) / math.sqrt(var / est.n_samples)


def _counts_and_uniform_sq_radii(rng, mean_count, chunk):
    """Poisson point counts plus concatenated squared radii in [0, 1]."""
    counts = rng.poisson(mean_count, size=chunk)
    sq = rng.random(int(counts.sum()))
    return counts, sq


def _segment_min(values, counts):
    """Per-segment minimum of a packed ragged array; inf for empty rows."""
    out = np.full(len(counts), np.inf)
    if values.size == 0:
        return out
    nonzero = counts > 0
    starts = np.zeros(len(counts), dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    out[nonzero] = np.minimum.reduceat(values, starts[nonzero])
    return out


def _nearest_distances(rng, lam, region_radius, chunk):
    mean_count = lam * math.pi * region_radius ** 2
    counts, sq = _counts_and_uniform_sq_radii(rng, mean_count, chunk)
    return region_radius * np.sqrt(_segment_min(sq, counts))


def kth_nearest_distances(lambda_e, k, trials, seed=0, region=None):
    """Sampled distances to the k-th nearest point of a Poisson field.

    The region is sized so censoring (fewer than k points) is rare.  A
    censored trial keeps its points and grows the region: the field on a
    larger disc is the field on the smaller one plus an independent
    annulus population, so the expansion is exact, not a resample.
    """
    if k < 1 or lambda_e <= 0:
        raise ValueError("need k >= 1 and lambda_e > 0")
    if region is None:
        mean0 = max(25.0 * math.pi, k + 10.0 * math.sqrt(k) + 10.0)
        region = math.sqrt(mean0 / (lambda_e * math.pi))
    out = np.empty(trials)
    for chunk_idx, start in enumerate(range(0, trials, _CHUNK)):
        m = min(_CHUNK, trials - start)
        rng = substream(seed, 0, chunk_idx)
        dist, missing = _kth_in_disc(rng, lambda_e, k, region, m)
        inner_sq = region ** 2
        attempt = 1
        while missing:
            outer_sq = inner_sq * 4.0
            rng_a = substream(seed, 0, chunk_idx, attempt)
            mean_annulus = lambda_e * math.pi * (outer_sq - inner_sq)
            still = {}
            for trial, short in missing.items():
                n_new = rng_a.poisson(mean_annulus)
                if n_new >= short:
                    sq = inner_sq + (outer_sq - inner_sq) * rng_a.random(n_new)
                    dist[trial] = math.sqrt(
                        np.partition(sq, short - 1)[short - 1])
                else:
                    still[trial] = short - n_new
            missing = still
            inner_sq = outer_sq
            attempt += 1
            if attempt > 40:
                raise TopologyError(
                    "region expansion failed to cover k points")
        out[start:start + m] = dist
    return out


def _kth_in_disc(rng, lam, k, region, m):
    """k-th nearest distance per trial; censored trials report how many
    points they are short of k."""
    mean_count = lam * math.pi * region ** 2
    counts = rng.poisson(mean_count, size=m)
    max_n = max(int(counts.max()) if m else 0, k)
    rect = rng.random((m, max_n))
    rect[np.arange(max_n) >= counts[:, None]] = np.inf
    kth_sq = np.partition(rect, k - 1, axis=1)[:, k - 1]
    dist = region * np.sqrt(kth_sq)
    missing = {int(i): int(k - counts[i])
               for i in np.flatnonzero(counts < k)}
    return dist, missing


def estimate_kth_nearest(lambda_e, k, trials, seed=0):
    """Mean distance to the k-th nearest edge node, sampled."""
    dist = kth_nearest_distances(lambda_e, k, trials, seed)
    se = float(dist.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return McEstimate(mean=float(dist.mean()), std_error=se,
                      n_samples=trials, seed=seed)


def _nearest_threshold_successes(lam, order, threshold_scale, alpha,
                                 trials, seed):
    """Trials where a Gamma(order, 1) gain beats a distance-based threshold."""
    region = 5.0 / math.sqrt(lam)
    successes = 0
    for chunk_idx, start in enumerate(range(0, trials, _CHUNK)):
        m = min(_CHUNK, trials - start)
        rng = substream(seed, 1, chunk_idx)
        r = _nearest_distances(rng, lam, region, m)
        gains = rng.gamma(order, size=m)
        with np.errstate(over="ignore"):
            threshold = threshold_scale * r ** alpha
        successes += int(np.count_nonzero(gains >= threshold))
    return successes


def estimate_uplink_success(s, trials=1_000_000, seed=0):
    """Oracle for the uplink request success probability."""
    order = s.nt_u * s.nr_m
    scale = s.theta1 * s.nt_u / s.p_u
    n = _nearest_threshold_successes(
        s.lambda_m, order, scale, s.alpha1, trials, seed)
    return _proportion_estimate(n, trials, seed)


def estimate_access_success(s, trials=1_000_000, seed=0):
    """Oracle for the mmWave access-hop success probability."""
    order = s.nt_s * s.nr_u
    scale = s.theta3 * s.nt_s / s.p_s
    n = _nearest_threshold_successes(
        s.lambda_s, order, scale, s.alpha2, trials, seed)
    return _proportion_estimate(n, trials, seed)


def estimate_deli_success(s, trials=1_000_000, seed=0, noise_power=None):
    """Oracle for the routing-info delivery success probability.

    Samples the macro-cell field, serves from the nearest node and treats
    all others as interferers, each link with an independent
    Gamma(order, 1) aggregate gain.  Interference beyond the sampled
    region is added as its (deterministic) expectation; its fluctuation
    is negligible at the region size used.  ``noise_power`` overrides the
    default receiver noise ``n0 * w_mmw`` (Watts).
    """
    order = s.nt_m * s.nr_e
    lam = s.lambda_m
    alpha = s.alpha1
    region = 8.0 / math.sqrt(lam)
    mean_count = lam * math.pi * region ** 2
    # mean far-field contribution to sum(g_l * r_l^-alpha) beyond the region;
    # its fluctuation is O(region^(1-alpha)) and far below the sampling noise
    far_mean = order * 2.0 * math.pi * lam * region ** (2.0 - alpha) / (alpha - 2.0)
    sigma_z2 = s.n0 * s.w_mmw if noise_power is None else noise_power
    noise = s.nt_m * sigma_z2 / s.p_m
    successes = 0
    chunk = max(1, int(_CHUNK * 100 / max(mean_count, 100)))
    for chunk_idx, start in enumerate(range(0, trials, chunk)):
        m = min(chunk, trials - start)
        rng = substream(seed, 2, chunk_idx)
        counts, sq = _counts_and_uniform_sq_radii(rng, mean_count, m)
        gains = rng.gamma(order, size=sq.size)
        contrib = gains * (region * np.sqrt(sq)) ** (-alpha)
        nonzero = counts > 0
        starts = np.zeros(m, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        totals = np.zeros(m)
        min_sq = np.full(m, np.inf)
        if sq.size:
            totals[nonzero] = np.add.reduceat(contrib, starts[nonzero])
            min_sq[nonzero] = np.minimum.reduceat(sq, starts[nonzero])
        # locate the serving (nearest) point to split its gain out
        is_min = sq == np.repeat(min_sq, counts)
        pos = np.flatnonzero(is_min)
        seg = np.searchsorted(starts, pos, side="right") - 1
        _, first = np.unique(seg, return_index=True)
        serving_power = contrib[pos[first]]
        interference = totals[nonzero] - serving_power + far_mean
        ok = serving_power >= s.theta2 * (interference + noise)
        successes += int(np.count_nonzero(ok))
    return _proportion_estimate(successes, trials, seed)


def estimate_shadowing_success(s, trials=1_000_000, seed=0):
    """Oracle for the per-slot mmWave link success under shadowing."""
    f = multipath.mmwave_link_margin(s)
    successes = 0
    for chunk_idx, start in enumerate(range(0, trials, _CHUNK)):
        m = min(_CHUNK, trials - start)
        rng = substream(seed, 3, chunk_idx)
        zeta = rng.normal(0.0, s.sigma_db, size=m)
        successes += int(np.count_nonzero(zeta <= f))
    return _proportion_estimate(successes, trials, seed)


def _split_packets(shares, total):
    """Integer packet counts per path, largest-remainder apportionment."""
    raw = shares * total
    base = np.floor(raw).astype(int)
    short = total - int(base.sum())
    if short:
        order = np.argsort(-(raw - base), kind="stable")
        base[order[:short]] += 1
    return base


def _resolve_transfer(s, topology, scheme):
    """Destination, per-path distances/hops and a connectivity check."""
    if topology.users.size == 0:
        raise TopologyError("topology contains no users")
    if topology.sbs.size == 0:
        raise TopologyError("topology contains no small cells")
    user = topology.users[
        np.argmin((topology.users ** 2).sum(axis=1))]
    sbs_d = np.linalg.norm(topology.sbs - user, axis=1)
    dest = topology.sbs[np.argmin(sbs_d)]
    b = 1 if scheme != MULTIPATH else s.b_paths
    if len(topology.edc) < b:
        raise TopologyError(
            f"topology has {len(topology.edc)} edge nodes, need {b}")
    edc_d = np.linalg.norm(topology.edc - dest, axis=1)
    nearest = np.argsort(edc_d, kind="stable")[:b]
    dists = edc_d[nearest]
    hops = np.maximum(1, np.ceil(dists / s.r_mmw)).astype(int)
    for path, idx in enumerate(nearest):
        _check_chain(s, topology, topology.edc[idx], dest, int(hops[path]),
                     path)
    return dest, dists, hops


def _check_chain(s, topology, src, dest, hops, path):
    """Verify a minimum-hop relay chain exists along the path."""
    if hops == 1:
        if np.linalg.norm(dest - src) > s.r_mmw * (1.0 + 1e-9):
            raise ChainDisconnectedError(
                f"path {path}: single hop longer than r_mmw")
        return
    waypoints = np.linspace(src, dest, hops + 1)
    nodes = [src]
    for j in range(1, hops):
        d = np.linalg.norm(topology.sbs - waypoints[j], axis=1)
        nodes.append(topology.sbs[np.argmin(d)])
    nodes.append(dest)
    for a, b in zip(nodes[:-1], nodes[1:]):
        if np.linalg.norm(b - a) > s.r_mmw * (1.0 + 1e-9):
            raise ChainDisconnectedError(
                f"path {path}: no relay within r_mmw of a waypoint")


def simulate_backhaul(s, topology, scheme=MULTIPATH, trials=1000, seed=0,
                      trace_path=None):
    """Packet-level slotted stop-and-wait simulation of a buffer transfer.

    Every packet crosses its relay chain hop by hop; a hop repeats slots
    until relay selection and the shadowing-limited link both succeed in
    the same slot (slot counts are drawn from the equivalent geometric
    law).  A packet enters the chain only after the previous one reached
    the destination; the trial delay is the slowest path's total.

    Parameters
    ----------
    s : NetworkScenario
    topology : SampledTopology
        Fixed geometry; the destination is the small cell nearest the
        most central user, sources are its nearest edge nodes.
    scheme : str
        ``"multipath"`` (share across b_paths sources) or
        ``"single-path"`` (everything over the nearest source).
    trace_path : str, optional
        Write one JSON record per trial (hops, slots, delay).

    Raises
    ------
    ChainDisconnectedError
        If a path has no relay chain with hops within range.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if trials < 1:
        raise ValueError("need at least one trial")
    dest, dists, hops = _resolve_transfer(s, topology, scheme)
    shares = (1.0 / dists) / (1.0 / dists).sum()
    packets = _split_packets(shares, multipath.buffer_packets(s))
    p1 = multipath.relay_selection_prob(s.lambda_s, s.lambda_e, s.relay_coeff)
    p_first = p1 * multipath.mmwave_success_prob(s, tx_power_w=s.p_e)
    p_relay = p1 * multipath.mmwave_success_prob(s)
    if p_first <= 0.0 or p_relay <= 0.0:
        raise TopologyError(
            "per-slot success probability is zero; the transfer can never "
            "complete")

    slots = np.zeros((trials, len(dists)), dtype=np.int64)
    for path in range(len(dists)):
        rng = substream(seed, 4, path)
        n_first = int(packets[path])
        n_rest = int(packets[path]) * (int(hops[path]) - 1)
        if n_first:
            slots[:, path] += rng.geometric(p_first, size=(trials, n_first)
                                            ).sum(axis=1)
        if n_rest:
            slots[:, path] += rng.geometric(p_relay, size=(trials, n_rest)
                                            ).sum(axis=1)
    delays = slots.max(axis=1) * s.tau_mmw

    if trace_path is not None:
        _write_trace(trace_path, s, topology, seed, hops, slots, delays)
    se = float(delays.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return McEstimate(mean=float(delays.mean()), std_error=se,
                      n_samples=trials, seed=seed)


def _write_trace(path, s, topology, seed, hops, slots, delays):
    topo_hash = topology.content_hash()
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(delays)):
            fh.write(json.dumps({
                "trial": i,
                "seed": seed,
                "topology": topo_hash,
                "hops": [int(h) for h in hops],
                "slots": [int(v) for v in slots[i]],
                "delay": delays[i],
            }) + "\n")


def mean_distance_topology(s, b=None, relay_jitter=0.0, seed=0):
    """Topology whose b nearest sources sit exactly at their mean distances.

    Destination small cell at the origin, one user beside it, sources on
    evenly spread bearings at the closed-form mean distances, and relay
    small cells placed at the chain waypoints so every chain is
    connected.  Useful for comparing the packet simulator against the
    integer-hop closed form without geometric sampling noise.
    """
    b = s.b_paths if b is None else b
    dists = np.array([multipath.mean_kth_edc_distance(s.lambda_e, p)
                      for p in range(1, b + 1)])
    angles = 2.0 * math.pi * np.arange(b) / b
    edc = np.column_stack([dists * np.cos(angles), dists * np.sin(angles)])
    sbs = [np.zeros(2)]
    rng = substream(seed, 5)
    for p in range(b):
        hops = max(1, math.ceil(dists[p] / s.r_mmw))
        waypoints = np.linspace(edc[p], np.zeros(2), hops + 1)
        for j in range(1, hops):
            sbs.append(waypoints[j]
                       + relay_jitter * rng.standard_normal(2))
    return SampledTopology(
        region_radius=float(max(s.r_max, dists.max()) * 1.2),
        mbs=np.empty((0, 2)), sbs=np.array(sbs), edc=edc,
        users=np.array([[1.0, 0.0]]),
        densities=(s.lambda_m, s.lambda_s, s.lambda_e, s.lambda_u),
        seed=seed)
