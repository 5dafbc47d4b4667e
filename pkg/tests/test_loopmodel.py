import math

import pytest

from decophase.loopmodel import (MU_CRITICAL, EdgeRegion, ErrorModel,
                                 NotClosed, OutOfRange, TooLarge,
                                 TorusLattice, contractible_space,
                                 cycle_space, exact_renyi2,
                                 exact_string_expectation, exact_wilson_loop,
                                 is_closed, ising_equivalent,
                                 kitaev_preskill_regions, p_to_mu,
                                 pinning_clusters, pinning_entropy_bits,
                                 rectangle_loop, region_from_vertices,
                                 region_union, vertex_rectangle)
from oracles import ising_bond_product, ising_correlator, pinned_renyi2

LOG2 = math.log(2.0)


def test_p_to_mu():
    assert p_to_mu(0.0) == 0.0
    assert p_to_mu(0.5) == math.inf
    assert abs(p_to_mu(0.17821) - MU_CRITICAL) < 2e-5
    assert abs(p_to_mu(0.3) - math.atanh(3 / 7)) < 1e-15
    with pytest.raises(OutOfRange):
        p_to_mu(0.6)
    with pytest.raises(OutOfRange):
        p_to_mu(-0.1)


def test_error_model():
    assert ErrorModel("X", 0.3).mu == p_to_mu(0.3)
    with pytest.raises(ValueError):
        ErrorModel("Y", 0.1)
    with pytest.raises(OutOfRange):
        ErrorModel("X", 0.7)


def test_ising_equivalent():
    eq = ising_equivalent(MU_CRITICAL)
    assert abs(eq["J"] - 0.5 * math.log(1 + math.sqrt(2))) < 1e-15
    assert abs(eq["J"] - eq["critical_J"]) < 1e-15
    assert ising_equivalent(0.0)["J"] == 0.0


def test_cycle_space_structure():
    for L in (2, 3, 4):
        lat = TorusLattice(L)
        basis = cycle_space(lat)
        assert len(basis) == L * L + 1
        assert all(is_closed(lat, b) for b in basis)
        assert len(contractible_space(lat)) == L * L - 1
        # all plaquette boundaries multiply to the identity
        acc = 0
        for p in range(lat.n_plaquettes):
            acc ^= lat.plaquette_boundary_bits(p)
        assert acc == 0


def test_incidence_consistency():
    lat = TorusLattice(4)
    for e in range(lat.n_edges):
        assert len(set(int(v) for v in lat.edge_vertices[e])) == 2
        assert len(set(int(p) for p in lat.edge_plaquettes[e])) == 2
    for p in range(lat.n_plaquettes):
        assert is_closed(lat, lat.plaquette_boundary_bits(p))


def test_string_matches_spin_enumeration():
    lat = TorusLattice(3)
    for mu, path in ((0.3, [0, 1]), (0.45, [0, 1, 2]), (0.1, [0, 3, 4])):
        loop_val = exact_string_expectation(lat, mu, path)
        spin_val = ising_correlator(lat, 2 * mu, path[0], path[-1])
        assert abs(loop_val - spin_val) < 1e-12
    assert exact_string_expectation(lat, 0.0, [0, 1]) == 0.0
    assert exact_string_expectation(lat, 6.0, [0, 1]) > 0.999


def test_string_rejects_bad_path():
    lat = TorusLattice(3)
    with pytest.raises(ValueError):
        exact_string_expectation(lat, 0.3, [0, 4])   # diagonal plaquettes


def test_wilson_matches_spin_enumeration():
    for L, mu in ((3, 0.5), (4, 0.5)):
        lat = TorusLattice(L)
        loop = rectangle_loop(lat, 0, 0, 1, 1)
        edges = [e for e in range(lat.n_edges) if (loop >> e) & 1]
        lhs = exact_wilson_loop(lat, mu, loop)
        rhs = ising_bond_product(lat, mu, edges)
        assert abs(lhs - rhs) < 1e-12
        assert exact_wilson_loop(lat, 0.0, loop) == 1.0
        per = len(edges)
        assert math.exp(-2 * mu * per) <= lhs <= math.exp(2 * mu * per)


def test_wilson_rejects_open_loops():
    lat = TorusLattice(3)
    with pytest.raises(NotClosed):
        exact_wilson_loop(lat, 0.3, 1)   # a single edge


def test_enumeration_cap():
    lat = TorusLattice(6)
    with pytest.raises(TooLarge):
        exact_string_expectation(lat, 0.3, [0, 1], cap=16)


def test_renyi2_fixed_point_anchors():
    lat = TorusLattice(3)
    reg = vertex_rectangle(lat, 0, 0, 2, 2)    # the 4 edges of a plaquette
    assert abs(exact_renyi2(lat, 0.0, reg) - 6 * LOG2) < 1e-12
    assert abs(exact_renyi2(lat, 8.0, reg) - 3 * LOG2) < 1e-9
    lat4 = TorusLattice(4)
    reg4 = vertex_rectangle(lat4, 0, 0, 3, 3)
    nb = len(reg4.boundary_vertices)
    assert abs(exact_renyi2(lat4, 0.0, reg4) - 2 * (nb - 1) * LOG2) < 1e-12
    assert abs(exact_renyi2(lat4, 6.0, reg4) - (nb - 1) * LOG2) < 1e-9


def test_renyi2_matches_pinned_two_replica_ensemble():
    lat = TorusLattice(3)
    reg = vertex_rectangle(lat, 0, 0, 2, 2)
    clusters, rank = pinning_clusters(lat, reg)
    for mu in (0.2, 0.45):
        direct = exact_renyi2(lat, mu, reg)
        pinned = pinned_renyi2(lat, mu, clusters, rank)
        assert abs(direct - pinned) < 1e-10


def test_pinning_rank_formula_rectangles():
    for L, w, h in ((4, 2, 2), (5, 3, 2), (6, 3, 3), (8, 4, 4)):
        lat = TorusLattice(L)
        reg = vertex_rectangle(lat, 0, 0, w, h)
        clusters, rank = pinning_clusters(lat, reg)
        assert rank == len(reg.boundary_vertices) - 1
        assert len(clusters) == 1
        assert len(clusters[0]) == rank + 1
        assert pinning_entropy_bits(lat, reg) == rank


def test_edge_region_bookkeeping():
    lat = TorusLattice(4)
    reg = vertex_rectangle(lat, 1, 1, 3, 3)
    assert set(reg.edges) | set(reg.co_edges) == set(range(lat.n_edges))
    assert not set(reg.edges) & set(reg.co_edges)
    assert set(reg.interior_vertices).isdisjoint(reg.boundary_vertices)
    assert len(reg.boundary_vertices) == 8
    assert len(reg.interior_vertices) == 1


def test_kitaev_preskill_sectors_partition_disk():
    lat = TorusLattice(8)
    secs = kitaev_preskill_regions(lat, 2, 1, 1)
    disk = region_from_vertices(lat, [lat.vertex(1 + dx, 1 + dy)
                                      for dx in range(4) for dy in range(4)])
    union = set()
    for r in secs.values():
        assert union.isdisjoint(r.edges)
        union.update(r.edges)
    assert union == set(disk.edges)
    with pytest.raises(ValueError):
        kitaev_preskill_regions(lat, 4)    # disk as large as the torus


def test_kp_pinning_rank_combination():
    lat = TorusLattice(16)
    secs = kitaev_preskill_regions(lat, 4, 1, 1)
    A, B, C = secs["A"], secs["B"], secs["C"]
    regs = {"A": A, "B": B, "C": C,
            "AB": region_union(A, B), "BC": region_union(B, C),
            "AC": region_union(A, C), "ABC": region_union(A, B, C)}
    ranks = {k: pinning_clusters(lat, r)[1] for k, r in regs.items()}
    combo = (ranks["A"] + ranks["B"] + ranks["C"] - ranks["AB"]
             - ranks["BC"] - ranks["AC"] + ranks["ABC"])
    assert combo == -1    # the p=0 path gives exactly gamma = 2 log 2
