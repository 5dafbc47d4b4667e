"""Independent brute-force oracles used by the tests.

Everything here enumerates spin configurations directly (no loop-space
machinery), so agreement with the package is a nontrivial cross-check.
"""

import math


def _spins(lat, bits):
    return [1 if (bits >> i) & 1 else -1 for i in range(lat.n_plaquettes)]


def boltzmann_weights(lat, J):
    """Weight exp(J sum_<ij> s_i s_j) for every spin configuration."""
    out = []
    for bits in range(2 ** lat.n_plaquettes):
        s = _spins(lat, bits)
        e = sum(s[a] * s[b] for a, b in lat.edge_plaquettes)
        out.append(math.exp(J * e))
    return out


def ising_correlator(lat, J, a, b):
    """<sigma_a sigma_b> on the plaquette-dual lattice at coupling J."""
    num = den = 0.0
    for bits in range(2 ** lat.n_plaquettes):
        s = _spins(lat, bits)
        e = sum(s[i] * s[j] for i, j in lat.edge_plaquettes)
        w = math.exp(J * e)
        den += w
        num += w * s[a] * s[b]
    return num / den


def ising_bond_product(lat, mu, loop_edges):
    """<prod_{l in C} exp(-2 mu s_i s_j)> at coupling J = 2 mu."""
    J = 2.0 * mu
    num = den = 0.0
    loop = set(loop_edges)
    for bits in range(2 ** lat.n_plaquettes):
        s = _spins(lat, bits)
        e = 0.0
        x = 0.0
        for l in range(lat.n_edges):
            i, j = lat.edge_plaquettes[l]
            e += s[i] * s[j]
            if l in loop:
                x += -2.0 * mu * s[i] * s[j]
        w = math.exp(J * e)
        den += w
        num += w * math.exp(x)
    return num / den


def pinned_renyi2(lat, mu, clusters, rank):
    """S^(2) from the two-replica ensemble with tau equal inside each
    cluster: rank*log2 - log(Z_pinned / Z^2)."""
    J = 2.0 * mu
    weights = []
    for bits in range(2 ** lat.n_plaquettes):
        s = _spins(lat, bits)
        e = sum(s[i] * s[j] for i, j in lat.edge_plaquettes)
        weights.append((s, math.exp(J * e)))
    z = sum(w for _, w in weights)
    zp = 0.0
    for s1, w1 in weights:
        for s2, w2 in weights:
            ok = True
            for cl in clusters:
                t0 = s1[cl[0]] * s2[cl[0]]
                if any(s1[i] * s2[i] != t0 for i in cl[1:]):
                    ok = False
                    break
            if ok:
                zp += w1 * w2
    return rank * math.log(2.0) - math.log(zp / z ** 2)
