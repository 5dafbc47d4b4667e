import math

import numpy as np
import pytest
from scipy.stats import chisquare

from decophase.ising import (ChainNotConverged, Estimate, MCConfig,
                             NoCrossingInGrid, _metropolis_sweep, _seed_rng,
                             binder_point, binder_scan, blocked_estimate,
                             chain_seed, energy_of, neighbor_table,
                             pinning_free_energy, renyi2_pinned,
                             run_correlator, sample_configurations,
                             wilson_observable)
from decophase.loopmodel import (TorusLattice, exact_renyi2,
                                 exact_string_expectation, exact_wilson_loop,
                                 p_to_mu, rectangle_loop, vertex_rectangle)
from oracles import boltzmann_weights

FAST = MCConfig(seed=11, sweeps=8000, therm=1000)


def pull(est, truth):
    return abs(est.value - truth) / max(est.stderr, 1e-15)


def test_blocked_estimate_basics():
    e = blocked_estimate(np.ones(100))
    assert e.value == 1.0 and e.stderr == 0.0 and e.samples == 100
    assert blocked_estimate([]).samples == 0
    rng = np.random.default_rng(0)
    x = rng.normal(size=4096)
    e = blocked_estimate(x)
    assert abs(e.value) < 5 * e.stderr
    # correlated series must report a larger error than the naive one
    y = np.repeat(rng.normal(size=256), 16)
    naive = y.std(ddof=1) / math.sqrt(y.size)
    assert blocked_estimate(y).stderr > 2 * naive


def test_estimate_addition():
    s = Estimate(1.0, 0.3, 10) + Estimate(2.0, 0.4, 20)
    assert s.value == 3.0 and abs(s.stderr - 0.5) < 1e-15 and s.samples == 10


def test_chain_seed_distinct_and_stable():
    assert chain_seed(1, 0) == chain_seed(1, 0)
    seen = {chain_seed(5, k) for k in range(100)}
    assert len(seen) == 100


def test_seed_reproducibility_bytes():
    a = sample_configurations(4, 0.4, FAST)
    b = sample_configurations(4, 0.4, FAST)
    assert a.tobytes() == b.tobytes()
    c = sample_configurations(4, 0.4, MCConfig(seed=12, sweeps=8000,
                                               therm=1000))
    assert a.tobytes() != c.tobytes()


def test_energy_tally_matches_recompute():
    L = 4
    nbr = neighbor_table(L)
    J = 2.0 * p_to_mu(0.2)
    spin = np.ones(L * L, dtype=np.int8)
    _seed_rng(chain_seed(7, 0))
    e = energy_of(spin, nbr, J)
    for _ in range(2000):
        e += _metropolis_sweep(spin, nbr, J)
    assert abs(e - energy_of(spin, nbr, J)) < 1e-8 * max(1.0, abs(e))


def test_detailed_balance_chi2():
    # weak coupling so the chain mixes between magnetization sectors
    lat = TorusLattice(3)
    mu = p_to_mu(0.15)
    weights = np.array(boltzmann_weights(lat, 2.0 * mu))
    probs = weights / weights.sum()
    codes = sample_configurations(3, mu, MCConfig(seed=2, sweeps=200000,
                                                  therm=2000))
    codes = codes[::20]     # thin out the autocorrelation of the chain
    counts = np.bincount(codes, minlength=probs.size).astype(float)
    expected = probs * codes.size
    # merge rare states so every bucket expects >= 5 counts
    order = np.argsort(expected)
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for i in order:
        o_acc += counts[i]
        e_acc += expected[i]
        if e_acc >= 5.0:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    obs[-1] += o_acc
    exp[-1] += e_acc
    stat, pval = chisquare(obs, np.array(exp) * sum(obs) / sum(exp))
    assert pval > 0.01


def test_correlator_matches_exact():
    L = 4
    lat = TorusLattice(L)
    mu = p_to_mu(0.25)
    pairs = [(0, 1), (0, 5)]
    ests = run_correlator(L, mu, pairs, FAST)
    exact = [exact_string_expectation(lat, mu, [0, 1]),
             exact_string_expectation(lat, mu, [0, 1, 5])]
    for est, truth in zip(ests, exact):
        assert pull(est, truth) < 3.0


def test_cluster_and_single_flip_agree():
    L = 4
    mu = p_to_mu(0.2)
    a = run_correlator(L, mu, [(0, 1)], FAST)[0]
    b = run_correlator(L, mu, [(0, 1)],
                       MCConfig(seed=11, algorithm="single-flip",
                                sweeps=30000, therm=3000))[0]
    assert abs(a.value - b.value) < 3 * math.hypot(a.stderr, b.stderr)


def test_wilson_matches_exact():
    L = 4
    lat = TorusLattice(L)
    mu = p_to_mu(0.1)
    loop = rectangle_loop(lat, 0, 0, 1, 1)
    edges = [e for e in range(lat.n_edges) if (loop >> e) & 1]
    ests, series = wilson_observable(L, mu, [edges],
                                     MCConfig(seed=11, sweeps=60000,
                                              therm=2000,
                                              algorithm="single-flip"))
    assert series.shape == (60000, 1)
    assert pull(ests[0], exact_wilson_loop(lat, mu, loop)) < 3.0


def test_binder_point_limits():
    # large p = strong coupling J = 2 mu: ordered, U -> 2/3
    deep = binder_point(4, 0.45, FAST)
    hot = binder_point(4, 0.05, FAST)      # weak coupling: U -> 0
    assert abs(deep.value - 2.0 / 3.0) < 0.02
    assert hot.value < 0.25


def test_binder_scan_small():
    pts, crossings, pc = binder_scan(
        (4, 8), (0.15, 0.17, 0.19, 0.21),
        MCConfig(seed=4, sweeps=6000, therm=800))
    assert len(crossings) == 1
    assert 0.14 < pc.value < 0.22
    assert pc.stderr > 0.0
    with pytest.raises(NoCrossingInGrid):
        binder_scan((4, 8), (0.30, 0.35, 0.40),
                    MCConfig(seed=4, sweeps=2000, therm=400))
    with pytest.raises(ValueError):
        binder_scan((4,), (0.1, 0.2), FAST)


def test_pinning_free_energy_matches_exact():
    L = 4
    lat = TorusLattice(L)
    reg = vertex_rectangle(lat, 0, 0, 2, 2)
    p = 0.2
    mu = p_to_mu(p)
    est = renyi2_pinned(L, p, reg, MCConfig(seed=9, sweeps=20000, therm=2000,
                                            check_reverse=True))
    assert pull(est, exact_renyi2(lat, mu, reg)) < 3.0
    assert pinning_free_energy(L, 0.0, reg).value == 0.0


def test_reverse_check_flags_bad_chains():
    L = 4
    lat = TorusLattice(L)
    reg = vertex_rectangle(lat, 0, 0, 3, 3)
    with pytest.raises(ChainNotConverged):
        # absurdly short chains at strong coupling cannot satisfy the
        # forward/reverse consistency requirement at tight tolerance
        pinning_free_energy(L, 0.45, reg,
                            MCConfig(seed=1, sweeps=24, therm=0,
                                     check_reverse=True, reverse_tol=0.02))
