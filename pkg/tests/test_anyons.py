import math
import random
from fractions import Fraction

import pytest

from decophase.anyons import (KTheory, NonSymmetric, Singular, build_theory,
                              signed_block_sum_ok)
from decophase.models import REGISTRY

K_TORIC = [[0, 2], [2, 0]]
K_DS = [[2, 0], [0, -2]]
K_L3 = [[3]]


def test_input_validation():
    with pytest.raises(NonSymmetric):
        KTheory([[0, 1], [2, 0]])
    with pytest.raises(Singular):
        KTheory([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        KTheory(K_TORIC, 0)


def test_discriminant_orders():
    assert build_theory(K_TORIC).order == 4
    assert build_theory(K_TORIC, 2).order == 256
    assert build_theory(K_DS).order == 4
    assert build_theory(K_L3).order == 3
    assert build_theory(K_L3, 2).order == 81


def test_toric_single_copy_statistics():
    t = build_theory(K_TORIC)
    e = t.project([1, 0])
    m = t.project([0, 1])
    f = t.fuse(e, m)
    assert t.mutual_statistics(e, m) == 1      # pi phase
    assert t.self_statistics(e) == 0
    assert t.self_statistics(m) == 0
    assert t.self_statistics(f) == 1           # fermion
    assert t.mutual_statistics(e, e) == 0


def test_double_semion_statistics():
    t = build_theory(K_DS)
    ma = t.project([1, 0])
    mb = t.project([0, 1])
    assert t.self_statistics(ma) == Fraction(1, 2)    # semion
    assert t.self_statistics(mb) % 2 == Fraction(3, 2)
    b = t.fuse(ma, mb)
    assert t.self_statistics(b) == 0                  # boson


def test_laughlin_fermionic():
    t = build_theory(K_L3)
    assert not t.bosonic
    eta = t.project([1])
    assert t.self_statistics(eta) == Fraction(1, 3)


def test_lift_project_roundtrip():
    for model in REGISTRY.values():
        t = model.theory(2)
        for a in t.anyons():
            assert t.project(t.lift(a)) == a


def statistics_properties(t, trials, seed=0):
    rng = random.Random(seed)
    anyons = list(t.anyons())
    for _ in range(trials):
        a, b, c = (rng.choice(anyons) for _ in range(3))
        # symmetry
        assert t.mutual_statistics(a, b) == t.mutual_statistics(b, a)
        # bilinearity of braiding under fusion
        lhs = t.mutual_statistics(t.fuse(a, b), c)
        rhs = (t.mutual_statistics(a, c) + t.mutual_statistics(b, c)) % 2
        assert lhs == rhs
        # representative invariance: shift a lift by a K-column
        l = t.lift(a)
        j = rng.randrange(t.N)
        shifted = [x + t.kmat[i][j] for i, x in enumerate(l)]
        assert t.project(shifted) == a
        assert t.mutual_statistics(t.project(shifted), b) == \
            t.mutual_statistics(a, b)


def test_statistics_properties_small():
    for model in REGISTRY.values():
        statistics_properties(model.theory(2), trials=100)


def test_symmetry_generators_structure():
    t = build_theory(K_TORIC, 2)
    gens = {g.name: g for g in t.symmetry_generators()}
    assert gens["conj"].antiunitary
    assert not gens["shift"].antiunitary
    # n = 2: shift and conj are involutions on labels
    for g in gens.values():
        for a in list(t.anyons())[:32]:
            assert t.apply_symmetry(g, t.apply_symmetry(g, a)) == a


def test_conj_reverses_copy_order_at_n3():
    t = build_theory(K_L3, 3)
    conj = [g for g in t.symmetry_generators() if g.name == "conj"][0]
    # anyon living on phi_2 (block 2) must map to phibar_{-1 mod 3} = block 5
    v = [0] * t.N
    v[2] = 1
    img = t.apply_symmetry(conj, t.project(v))
    w = [0] * t.N
    w[5] = 1
    assert img == t.project(w)


def test_symmetry_preserves_mutual_statistics():
    t = build_theory(K_TORIC, 2)
    rng = random.Random(3)
    anyons = list(t.anyons())
    for g in t.symmetry_generators():
        for _ in range(200):
            a, b = rng.choice(anyons), rng.choice(anyons)
            assert t.mutual_statistics(a, b) == t.mutual_statistics(
                t.apply_symmetry(g, a), t.apply_symmetry(g, b))


def test_allowed_lattice_toric():
    t = build_theory(K_TORIC, 2)
    lat = t.allowed_lattice()
    img = lat.image_subgroup()
    # channel pair e ebar is allowed, a lone e in one copy is not
    chan = [1, 0, -1, 0, 0, 0, 0, 0]
    lone = [1, 0, 0, 0, 0, 0, 0, 0]
    assert t.project(chan) in img and lat.membership(t.project(chan))
    assert t.project(lone) not in img
    assert not lat.membership(t.project(lone))
    # image is closed under fusion
    for a in list(img)[:16]:
        for b in list(img)[:16]:
            assert t.fuse(a, b) in img


def test_blocksum_agrees_with_lattice_at_two_replicas():
    t = build_theory(K_TORIC, 2)
    img = t.allowed_lattice().image_subgroup()
    ok_lattice = {a for a in t.anyons() if a in img}
    ok_blocksum = {a for a in t.anyons() if signed_block_sum_ok(t, a)}
    assert ok_lattice == ok_blocksum
    t3 = build_theory(K_TORIC, 3)
    with pytest.raises(ValueError):
        signed_block_sum_ok(t3, t3.zero)


def test_elementary_condensates_inside_lattice():
    for model in REGISTRY.values():
        t = model.theory(2)
        img = t.allowed_lattice().image_subgroup()
        fam = t.elementary_condensates()
        assert fam <= img
        assert t.zero in fam
