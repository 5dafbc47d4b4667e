"""Monte Carlo for the plaquette-dual Ising model of the decohered code.

The relative-loop weight exp(-4 mu |h|) is the square-lattice Ising model
at coupling J = 2 mu with spins on the plaquettes.  The string observable
is the two-point function <sigma_a sigma_b>, the Wilson observable is the
bond product <prod_{l in C} exp(-2 mu sigma_i sigma_j)>, and the Renyi-2
entropy of an edge region is assembled from boundary-pinning free
energies, S = rank * log 2 + dF(mu).

RNG contract: each chain seeds numba's generator from
SeedSequence([seed, chain_index]); with a single thread, identical
(config, seed) gives bit-identical measurement streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .loopmodel import (EdgeRegion, TorusLattice, kitaev_preskill_regions,
                        p_to_mu, pinning_clusters)


class ChainNotConverged(Exception):
    pass


class NoCrossingInGrid(Exception):
    pass


@dataclass(frozen=True)
class MCConfig:
    seed: int = 1
    algorithm: str = "cluster"     # cluster | single-flip
    therm: int = 2000
    sweeps: int = 20000
    check_reverse: bool = False    # rerun pinning chains in reverse order
    reverse_tol: float = 5.0       # allowed |dF_f - dF_r| in combined sigma


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int

    def __add__(self, other):
        return Estimate(self.value + other.value,
                        math.hypot(self.stderr, other.stderr),
                        min(self.samples, other.samples))


def blocked_estimate(series) -> Estimate:
    """Mean with stderr from block doubling; keeps >= 8 blocks."""
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if n < 2:
        return Estimate(float(x.mean()) if n else 0.0, 0.0, n)
    mean = float(x.mean())
    err = float(x.std(ddof=1) / math.sqrt(n))
    blocks = x
    while blocks.size // 2 >= 8:
        m = (blocks.size // 2) * 2
        blocks = 0.5 * (blocks[0:m:2] + blocks[1:m:2])
        err = max(err, float(blocks.std(ddof=1) / math.sqrt(blocks.size)))
    return Estimate(mean, err, n)


def chain_seed(seed: int, chain_index: int) -> int:
    ss = np.random.SeedSequence([int(seed), int(chain_index)])
    return int(ss.generate_state(1, np.uint32)[0])


def neighbor_table(L: int) -> np.ndarray:
    nbr = np.zeros((L * L, 4), dtype=np.int64)
    for y in range(L):
        for x in range(L):
            i = x + L * y
            nbr[i] = ((x + 1) % L + L * y, (x - 1) % L + L * y,
                      x + L * ((y + 1) % L), x + L * ((y - 1) % L))
    return nbr


# -- kernels ----------------------------------------------------------------

@njit(cache=True)
def _seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True)
def _wolff_once(spin, nbr, padd):
    n = spin.shape[0]
    start = np.random.randint(n)
    s0 = spin[start]
    stack = np.empty(n, np.int64)
    stack[0] = start
    top = 1
    spin[start] = -s0
    size = 1
    while top > 0:
        top -= 1
        i = stack[top]
        for k in range(4):
            j = nbr[i, k]
            if spin[j] == s0 and np.random.random() < padd:
                spin[j] = -s0
                stack[top] = j
                top += 1
                size += 1
    return size


@njit(cache=True)
def _metropolis_sweep(spin, nbr, J):
    """One sweep of random single-site Metropolis; returns energy change
    of H = -J sum_<ij> s_i s_j."""
    n = spin.shape[0]
    de_total = 0.0
    for _ in range(n):
        i = np.random.randint(n)
        h = 0
        for k in range(4):
            h += spin[nbr[i, k]]
        de = 2.0 * J * spin[i] * h
        if de <= 0.0 or np.random.random() < math.exp(-de):
            spin[i] = -spin[i]
            de_total += de
    return de_total


@njit(cache=True)
def _update(spin, nbr, J, padd, use_cluster):
    if use_cluster:
        _wolff_once(spin, nbr, padd)
    else:
        _metropolis_sweep(spin, nbr, J)


@njit(cache=True)
def _run_moments(spin, nbr, J, padd, therm, sweeps, use_cluster):
    n = spin.shape[0]
    m2 = np.empty(sweeps)
    m4 = np.empty(sweeps)
    for _ in range(therm):
        _update(spin, nbr, J, padd, use_cluster)
    for t in range(sweeps):
        _update(spin, nbr, J, padd, use_cluster)
        m = 0.0
        for i in range(n):
            m += spin[i]
        m /= n
        m2[t] = m * m
        m4[t] = m2[t] * m2[t]
    return m2, m4


@njit(cache=True)
def _run_pair_products(spin, nbr, J, padd, therm, sweeps, use_cluster,
                       pa, pb):
    out = np.empty((sweeps, pa.shape[0]))
    for _ in range(therm):
        _update(spin, nbr, J, padd, use_cluster)
    for t in range(sweeps):
        _update(spin, nbr, J, padd, use_cluster)
        for q in range(pa.shape[0]):
            out[t, q] = spin[pa[q]] * spin[pb[q]]
    return out


@njit(cache=True)
def _run_bond_exponentials(spin, nbr, J, padd, therm, sweeps, use_cluster,
                           mu, ba, bb, offs):
    nl = offs.shape[0] - 1
    out = np.empty((sweeps, nl))
    for _ in range(therm):
        _update(spin, nbr, J, padd, use_cluster)
    for t in range(sweeps):
        _update(spin, nbr, J, padd, use_cluster)
        for q in range(nl):
            acc = 0
            for e in range(offs[q], offs[q + 1]):
                acc += spin[ba[e]] * spin[bb[e]]
            out[t, q] = math.exp(-2.0 * mu * acc)
    return out


@njit(cache=True)
def _pinned_sweep(s1, s2, nbr, J, group_of, members):
    """One sweep of the two-replica ensemble with tau = s1*s2 forced
    equal inside the merged group (group_of[i] == 0 for members)."""
    n = s1.shape[0]
    for _ in range(n):
        i = np.random.randint(n)
        # joint flip of (s1_i, s2_i): tau unchanged, always legal
        h1 = 0
        h2 = 0
        for k in range(4):
            h1 += s1[nbr[i, k]]
            h2 += s2[nbr[i, k]]
        de = 2.0 * J * (s1[i] * h1 + s2[i] * h2)
        if de <= 0.0 or np.random.random() < math.exp(-de):
            s1[i] = -s1[i]
            s2[i] = -s2[i]
        # single flip of s1_i for unconstrained sites
        if group_of[i] < 0:
            h1 = 0
            for k in range(4):
                h1 += s1[nbr[i, k]]
            de = 2.0 * J * s1[i] * h1
            if de <= 0.0 or np.random.random() < math.exp(-de):
                s1[i] = -s1[i]
            h2 = 0
            for k in range(4):
                h2 += s2[nbr[i, k]]
            de = 2.0 * J * s2[i] * h2
            if de <= 0.0 or np.random.random() < math.exp(-de):
                s2[i] = -s2[i]
    # group move: flip s1 on every merged site (changes the group tau)
    if members.shape[0] > 0:
        de = 0.0
        for idx in range(members.shape[0]):
            i = members[idx]
            for k in range(4):
                j = nbr[i, k]
                if group_of[j] < 0:
                    de += 2.0 * J * s1[i] * s1[j]
        if de <= 0.0 or np.random.random() < math.exp(-de):
            for idx in range(members.shape[0]):
                s1[members[idx]] = -s1[members[idx]]


@njit(cache=True)
def _run_pinned_indicator(s1, s2, nbr, J, group_of, members, therm, sweeps,
                          ref, target):
    """Series of P(tau_target = tau_ref | all other spins).

    Conditioned on the rest of the lattice, the target pair (s1, s2) has
    P(tau = +1) ~ cosh(J(h1+h2)) and P(tau = -1) ~ cosh(J(h1-h2)); using
    this exact conditional instead of a 0/1 indicator removes the
    single-site sampling noise.
    """
    out = np.empty(sweeps)
    for _ in range(therm):
        _pinned_sweep(s1, s2, nbr, J, group_of, members)
    for t in range(sweeps):
        _pinned_sweep(s1, s2, nbr, J, group_of, members)
        h1 = 0
        h2 = 0
        for k in range(4):
            h1 += s1[nbr[target, k]]
            h2 += s2[nbr[target, k]]
        w_plus = math.cosh(J * (h1 + h2))
        w_minus = math.cosh(J * (h1 - h2))
        if s1[ref] * s2[ref] > 0:
            out[t] = w_plus / (w_plus + w_minus)
        else:
            out[t] = w_minus / (w_plus + w_minus)
    return out


@njit(cache=True)
def _run_config_samples(spin, nbr, J, therm, sweeps):
    out = np.empty(sweeps, np.int64)
    for _ in range(therm):
        _metropolis_sweep(spin, nbr, J)
    for t in range(sweeps):
        _metropolis_sweep(spin, nbr, J)
        code = 0
        for i in range(spin.shape[0]):
            if spin[i] > 0:
                code |= 1 << i
        out[t] = code
    return out


# -- drivers ----------------------------------------------------------------

def _fresh_spins(L: int) -> np.ndarray:
    return np.ones(L * L, dtype=np.int8)


def _padd(J: float) -> float:
    return 1.0 - math.exp(-2.0 * J)


def run_correlator(L: int, mu: float, pairs, cfg: MCConfig = None,
                   chain_index: int = 0):
    """Estimates of <sigma_a sigma_b> for a list of plaquette pairs."""
    cfg = cfg or MCConfig()
    nbr = neighbor_table(L)
    J = 2.0 * mu
    pa = np.array([a for a, _ in pairs], dtype=np.int64)
    pb = np.array([b for _, b in pairs], dtype=np.int64)
    _seed_rng(chain_seed(cfg.seed, chain_index))
    series = _run_pair_products(_fresh_spins(L), nbr, J, _padd(J),
                                cfg.therm, cfg.sweeps,
                                cfg.algorithm == "cluster", pa, pb)
    return [blocked_estimate(series[:, q]) for q in range(len(pairs))]


def wilson_observable(L: int, mu: float, loops, cfg: MCConfig = None,
                      chain_index: int = 0):
    """Estimates of <prod_{l in C} exp(-2 mu s_i s_j)> per edge loop.

    `loops` is a list of edge-index lists.  Returns the estimates and the
    per-measurement series matrix (for covariance-aware fits).
    """
    cfg = cfg or MCConfig()
    lat = TorusLattice(L)
    nbr = neighbor_table(L)
    J = 2.0 * mu
    ba, bb, offs = [], [], [0]
    for loop in loops:
        for e in loop:
            a, b = lat.edge_plaquettes[e]
            ba.append(int(a))
            bb.append(int(b))
        offs.append(len(ba))
    _seed_rng(chain_seed(cfg.seed, chain_index))
    series = _run_bond_exponentials(
        _fresh_spins(L), nbr, J, _padd(J), cfg.therm, cfg.sweeps,
        cfg.algorithm == "cluster", mu,
        np.array(ba, dtype=np.int64), np.array(bb, dtype=np.int64),
        np.array(offs, dtype=np.int64))
    ests = [blocked_estimate(series[:, q]) for q in range(len(loops))]
    return ests, series


def binder_point(L: int, p: float, cfg: MCConfig = None,
                 chain_index: int = 0) -> Estimate:
    """Binder cumulant U = 1 - <m^4> / 3<m^2>^2 at one (L, p)."""
    cfg = cfg or MCConfig()
    J = 2.0 * p_to_mu(p)
    nbr = neighbor_table(L)
    _seed_rng(chain_seed(cfg.seed, chain_index))
    m2, m4 = _run_moments(_fresh_spins(L), nbr, J, _padd(J),
                          cfg.therm, cfg.sweeps,
                          cfg.algorithm == "cluster")
    nb = 16
    cut = (m2.size // nb) * nb
    b2 = m2[:cut].reshape(nb, -1).mean(axis=1)
    b4 = m4[:cut].reshape(nb, -1).mean(axis=1)
    u_full = 1.0 - b4.mean() / (3.0 * b2.mean() ** 2)
    jk = np.empty(nb)
    for k in range(nb):
        mm2 = (b2.sum() - b2[k]) / (nb - 1)
        mm4 = (b4.sum() - b4[k]) / (nb - 1)
        jk[k] = 1.0 - mm4 / (3.0 * mm2 ** 2)
    err = math.sqrt((nb - 1) / nb * ((jk - jk.mean()) ** 2).sum())
    return Estimate(float(u_full), float(err), int(m2.size))


def binder_scan(Ls, p_grid, cfg: MCConfig = None):
    """Binder cumulants on a (L, p) grid and the crossing estimate of p_c.

    Crossings are located per pair of sizes by linear interpolation of
    U_{L1} - U_{L2} between adjacent grid points; p_c is their
    error-weighted mean.
    """
    cfg = cfg or MCConfig()
    Ls = sorted(Ls)
    ps = sorted(p_grid)
    if len(Ls) < 2 or len(ps) < 2:
        raise ValueError("need at least 2 sizes and 2 grid points")
    points = {}
    for li, L in enumerate(Ls):
        for pi, p in enumerate(ps):
            points[(L, p)] = binder_point(L, p, cfg,
                                          chain_index=li * len(ps) + pi)
    crossings = []
    for i in range(len(Ls)):
        for j in range(i + 1, len(Ls)):
            d = [points[(Ls[i], p)].value - points[(Ls[j], p)].value
                 for p in ps]
            s = [math.hypot(points[(Ls[i], p)].stderr,
                            points[(Ls[j], p)].stderr) for p in ps]
            hit = None
            for k in range(len(ps) - 1):
                if d[k] == 0.0 or d[k] * d[k + 1] < 0.0:
                    hit = k
                    break
            if hit is None:
                raise NoCrossingInGrid(
                    f"no U crossing for L={Ls[i]},{Ls[j]} in "
                    f"[{ps[0]}, {ps[-1]}]")
            k = hit
            slope = (d[k + 1] - d[k]) / (ps[k + 1] - ps[k])
            pc = ps[k] - d[k] / slope
            err = math.hypot(s[k], s[k + 1]) / abs(slope) / math.sqrt(2.0)
            crossings.append(Estimate(pc, err, points[(Ls[i], ps[k])].samples))
    w = [1.0 / max(c.stderr, 1e-12) ** 2 for c in crossings]
    pc = sum(wi * c.value for wi, c in zip(w, crossings)) / sum(w)
    err = 1.0 / math.sqrt(sum(w))
    scatter = (max(c.value for c in crossings)
               - min(c.value for c in crossings)) / 2.0
    return points, crossings, Estimate(pc, max(err, scatter / 2.0),
                                       sum(c.samples for c in crossings))


# -- boundary pinning and TEE ----------------------------------------------

def _ordered_cluster(lat: TorusLattice, cluster, start=None):
    """BFS order so each new site touches an earlier one (keeps every
    conditional probability O(1)).  The boundary-parity constraints tie
    plaquettes sharing a vertex, so adjacency is the 8-neighborhood."""
    cset = set(cluster)
    L = lat.L
    adj = {p: set() for p in cluster}
    for p in cluster:
        x, y = p % L, p // L
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                q = (x + dx) % L + L * ((y + dy) % L)
                if q != p and q in cset:
                    adj[p].add(q)
    start = cluster[0] if start is None else start
    order = [start]
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            for b in sorted(adj[a]):
                if b not in seen:
                    seen.add(b)
                    order.append(b)
                    nxt.append(b)
        frontier = nxt
    if len(order) != len(cluster):
        raise ValueError("cluster is not connected under adjacency")
    return order


def _conditioned_free_energy(L, mu, order, cfg, chain_base):
    """-sum_k log P(tau_k = tau_0 | earlier) along the given site order."""
    nbr = neighbor_table(L)
    J = 2.0 * mu
    n = L * L
    total = 0.0
    var = 0.0
    samples = 0
    for k in range(1, len(order)):
        group_of = np.full(n, -1, dtype=np.int64)
        members = np.array(order[:k], dtype=np.int64)
        if k > 1:
            group_of[members] = 0
        s1 = _fresh_spins(L)
        s2 = _fresh_spins(L)
        _seed_rng(chain_seed(cfg.seed, chain_base + k))
        ind = _run_pinned_indicator(s1, s2, nbr, J, group_of, members,
                                    cfg.therm, cfg.sweeps,
                                    int(order[0]), int(order[k]))
        est = blocked_estimate(ind)
        if est.value <= 0.0:
            raise ChainNotConverged(
                f"conditional probability estimated as {est.value}")
        total += -math.log(est.value)
        var += (est.stderr / est.value) ** 2
        samples += est.samples
    return Estimate(total, math.sqrt(var), samples)


def pinning_free_energy(L: int, mu: float, region: EdgeRegion,
                        cfg: MCConfig = None,
                        chain_base: int = 0) -> Estimate:
    """Excess free energy dF(mu) of aligning tau across the region's
    boundary-plaquette clusters, by incremental conditioning.

    The mu = 0 part is analytic, rank * log 2; this returns only the
    mu-dependent part.  With cfg.check_reverse the conditioning is redone
    in reverse order and the two results must agree.
    """
    cfg = cfg or MCConfig()
    lat = TorusLattice(L)
    clusters, rank = pinning_clusters(lat, region)
    if mu == 0.0:
        return Estimate(0.0, 0.0, 0)
    total = Estimate(0.0, 0.0, 0)
    base = chain_base
    for cluster in clusters:
        order = _ordered_cluster(lat, cluster)
        fwd = _conditioned_free_energy(L, mu, order, cfg, base)
        base += len(order)
        if cfg.check_reverse:
            rorder = _ordered_cluster(lat, cluster, start=order[-1])
            rev = _conditioned_free_energy(L, mu, rorder, cfg, base)
            base += len(rorder)
            gap = abs(fwd.value - rev.value)
            sig = math.hypot(fwd.stderr, rev.stderr)
            if gap > cfg.reverse_tol * max(sig, 1e-12):
                raise ChainNotConverged(
                    f"forward/reverse pinning disagree: {fwd.value:.6f} "
                    f"vs {rev.value:.6f} (+- {sig:.6f})")
            fwd = Estimate(0.5 * (fwd.value + rev.value),
                           0.5 * sig, fwd.samples + rev.samples)
        total = total + fwd
    return Estimate(total.value, total.stderr, total.samples)


def renyi2_pinned(L: int, p: float, region: EdgeRegion,
                  cfg: MCConfig = None, chain_base: int = 0) -> Estimate:
    """S^(2) of an edge region: rank * log 2 + dF(mu), in nats."""
    lat = TorusLattice(L)
    _, rank = pinning_clusters(lat, region)
    mu = p_to_mu(p)
    df = pinning_free_energy(L, mu, region, cfg, chain_base)
    return Estimate(rank * math.log(2.0) + df.value, df.stderr, df.samples)


KP_SIGNS = (("A", 1), ("B", 1), ("C", 1),
            ("AB", -1), ("BC", -1), ("AC", -1), ("ABC", 1))


def kp_region_set(lat: TorusLattice, m: int, x0: int = 1, y0: int = 1):
    from .loopmodel import region_union
    secs = kitaev_preskill_regions(lat, m, x0, y0)
    A, B, C = secs["A"], secs["B"], secs["C"]
    return {"A": A, "B": B, "C": C,
            "AB": region_union(A, B), "BC": region_union(B, C),
            "AC": region_union(A, C), "ABC": region_union(A, B, C)}


def tee_kitaev_preskill(L: int, p: float, m: int, cfg: MCConfig = None,
                        x0: int = 1, y0: int = 1):
    """TEE gamma from the tripartite-disk combination of Renyi-2 entropies.

    gamma = -(S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC); the
    rank * log 2 parts combine analytically (they contribute exactly
    log 2), and at p = 0 the whole result is analytic with zero error.
    Returns (gamma Estimate, per-region entropies).
    """
    cfg = cfg or MCConfig()
    lat = TorusLattice(L)
    regs = kp_region_set(lat, m, x0, y0)
    ranks = {k: pinning_clusters(lat, r)[1] for k, r in regs.items()}
    rank_combo = sum(s * ranks[k] for k, s in KP_SIGNS)
    entropies = {}
    if p == 0.0:
        for k in regs:
            entropies[k] = Estimate(2 * ranks[k] * math.log(2.0), 0.0, 0)
        gamma = Estimate(-2 * rank_combo * math.log(2.0), 0.0, 0)
        return gamma, entropies
    mu = p_to_mu(p)
    base = 0
    for k, r in regs.items():
        df = pinning_free_energy(L, mu, r, cfg, chain_base=base)
        base += ranks[k] * (2 if cfg.check_reverse else 1) + 2
        entropies[k] = Estimate(ranks[k] * math.log(2.0) + df.value,
                                df.stderr, df.samples)
    val = -sum(s * entropies[k].value for k, s in KP_SIGNS)
    err = math.sqrt(sum(entropies[k].stderr ** 2 for k, _ in KP_SIGNS))
    samples = sum(entropies[k].samples for k, _ in KP_SIGNS)
    return Estimate(val, err, samples), entropies


# -- support for exactness tests --------------------------------------------

def sample_configurations(L: int, mu: float, cfg: MCConfig = None,
                          chain_index: int = 0) -> np.ndarray:
    """Metropolis chain returning one spin-configuration code per sweep."""
    cfg = cfg or MCConfig()
    nbr = neighbor_table(L)
    _seed_rng(chain_seed(cfg.seed, chain_index))
    return _run_config_samples(_fresh_spins(L), nbr, 2.0 * mu,
                               cfg.therm, cfg.sweeps)


def energy_of(spin, nbr, J) -> float:
    e = 0.0
    n = len(spin)
    for i in range(n):
        e -= J * spin[i] * (spin[nbr[i, 0]] + spin[nbr[i, 2]])
    return e


def fit_perimeter_area(loop_shapes, series):
    """Weighted fit of -log W = a * perimeter + b * area + c.

    `loop_shapes` is a list of (w, h) rectangle sizes aligned with the
    columns of `series` (per-measurement Wilson values).  Parameter errors
    come from a delete-one-block jackknife over the measurement stream, so
    cross-loop correlations are accounted for.
    """
    per = np.array([2.0 * (w + h) for w, h in loop_shapes])
    area = np.array([float(w * h) for w, h in loop_shapes])
    X = np.column_stack([per, area, np.ones_like(per)])

    def params(block_means):
        y = -np.log(block_means.mean(axis=0))
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        return coef

    nb = 16
    cut = (series.shape[0] // nb) * nb
    blocks = series[:cut].reshape(nb, -1, series.shape[1]).mean(axis=1)
    full = params(blocks)
    jk = np.empty((nb, 3))
    for k in range(nb):
        jk[k] = params(np.delete(blocks, k, axis=0))
    err = np.sqrt((nb - 1) / nb * ((jk - jk.mean(axis=0)) ** 2).sum(axis=0))
    return {"perimeter": Estimate(float(full[0]), float(err[0]), cut),
            "area": Estimate(float(full[1]), float(err[1]), cut),
            "offset": Estimate(float(full[2]), float(err[2]), cut)}
