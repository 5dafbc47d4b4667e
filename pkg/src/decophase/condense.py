"""Enumeration of symmetric Lagrangian subgroups and memory classification.

A phase of the decohered state is labeled by a subgroup M of the replicated
discriminant group satisfying:

  1. all elements braid trivially with each other and are condensable
     (theta = 0 mod 2pi for bosonic theories, integer spin for fermionic);
  2. every anyon outside M braids nontrivially with some element of M;
  3. M is invariant under the replica symmetry G^(n);
  4. every element is generable by incoherent channels and the inter-copy
     coupling (membership in the allowed sublattice).

On top of the four criteria, a subgroup must be selectable by the bare
couplings actually present on the edge: the channel and coupling cosines
condense individual pair vectors, and turning on a set of them drives the
system into the unique maximal condensate compatible with that set.  A
subgroup M whose intersection with the elementary condensates is shared
with a second admissible subgroup cannot be singled out by any choice of
bare coefficients and is dropped (``require_realizable``).  Two copies of
the toric code, for example, admit a sixth symmetric Lagrangian subgroup
pairing unbarred anyons of one copy with barred anyons of the other; it
contains no elementary condensate at all and is never reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .anyons import Anyon, KTheory, signed_block_sum_ok
from .models import Model, anyon_name, reference_subgroup


class NotASubgroup(Exception):
    pass


class SearchSpaceTooLarge(Exception):
    def __init__(self, size, cap):
        super().__init__(f"search space {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class CriteriaConfig:
    require_mutual_trivial: bool = True
    require_maximal: bool = True
    require_symmetric: bool = True
    incoherent_constraint: str = "lattice"   # lattice | blocksum | off
    self_condition: str = "auto"             # auto | literal
    # keep only subgroups uniquely determined by their elementary
    # condensates; inactive when the incoherent constraint is off, since a
    # coherent channel adds bare terms beyond the channel/coupling families
    require_realizable: bool = True


@dataclass(frozen=True)
class LagrangianSubgroup:
    elements: frozenset
    generators: tuple
    order: int

    def key(self):
        return tuple(sorted(a.residues for a in self.elements))


@dataclass
class PhaseReport:
    model: str
    n: int
    criteria: CriteriaConfig
    subgroup: LagrangianSubgroup
    generator_names: list
    memory: str
    phase_label: str


def _self_ok(t: KTheory, a: Anyon, cfg: CriteriaConfig) -> bool:
    s = t.self_statistics(a)
    if cfg.self_condition == "literal":
        # the bare pairwise condition: only the braiding with itself vanishes
        return t.mutual_statistics(a, a) == 0
    # condensable: true boson for even theories, integer spin for odd ones
    return s == 0 if t.bosonic else s % 1 == 0


def _closure(t: KTheory, elems, new):
    out = set(elems)
    frontier = [a for a in new if a not in out]
    out.update(frontier)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(out):
                c = t.fuse(a, b)
                if c not in out:
                    out.add(c)
                    nxt.append(c)
        frontier = nxt
    return frozenset(out)


def _generating_set(t: KTheory, elems) -> tuple:
    """Deterministic small generating set: greedy over sorted elements."""
    gens = []
    have = frozenset([t.zero])
    for r in sorted(a.residues for a in elems):
        a = Anyon(r)
        if a not in have:
            gens.append(a)
            have = _closure(t, have, [a])
            if len(have) == len(elems):
                break
    return tuple(gens)


def _as_subgroup(t: KTheory, elements) -> LagrangianSubgroup:
    elements = frozenset(elements)
    if t.zero not in elements:
        raise NotASubgroup("missing identity")
    for a in elements:
        if t.neg(a) not in elements:
            raise NotASubgroup(f"not closed under negation at {a.residues}")
    for a in elements:
        for b in elements:
            if t.fuse(a, b) not in elements:
                raise NotASubgroup("not closed under fusion")
    return LagrangianSubgroup(elements, _generating_set(t, elements),
                              len(elements))


def check_subgroup(t: KTheory, elements, cfg: CriteriaConfig = None):
    """Per-criterion pass/fail report for a candidate subgroup."""
    cfg = cfg or CriteriaConfig()
    sub = _as_subgroup(t, elements)
    gens = sub.generators or (t.zero,)

    c1 = all(_self_ok(t, a, cfg) for a in sub.elements) and all(
        t.mutual_statistics(a, b) == 0
        for i, a in enumerate(gens) for b in gens[i:])
    c2 = all(
        l in sub.elements or any(t.mutual_statistics(l, g) != 0
                                 for g in gens)
        for l in t.anyons())
    c3 = all(t.apply_symmetry(g, a) in sub.elements
             for g in t.symmetry_generators() for a in sub.elements)
    if cfg.incoherent_constraint == "off":
        c4 = True
    elif cfg.incoherent_constraint == "blocksum":
        c4 = all(signed_block_sum_ok(t, a) for a in sub.elements)
    else:
        lat = t.allowed_lattice()
        image = lat.image_subgroup()
        c4 = all(a in image for a in sub.elements)
    return {"subgroup": sub, "criterion1": c1, "criterion2": c2,
            "criterion3": c3, "criterion4": c4,
            "all": c1 and c2 and c3 and c4}


def enumerate_subgroups(t: KTheory, cfg: CriteriaConfig = None,
                        cap: int = 2 ** 20):
    """All subgroups passing the configured criteria, deterministic order.

    Criterion 2 forces the order sqrt(|D|); with criterion 4 on, the search
    runs inside the image of the allowed sublattice in the discriminant
    group.
    """
    cfg = cfg or CriteriaConfig()
    target = math.isqrt(t.order)
    if target * target != t.order:
        return []

    if cfg.incoherent_constraint == "lattice":
        pool = t.allowed_lattice().image_subgroup()
    elif cfg.incoherent_constraint == "blocksum":
        pool = frozenset(a for a in t.anyons() if signed_block_sum_ok(t, a))
    else:
        pool = frozenset(t.anyons())
    if len(pool) > cap:
        raise SearchSpaceTooLarge(len(pool), cap)

    if cfg.require_mutual_trivial:
        pool = frozenset(a for a in pool if _self_ok(t, a, cfg))
    cands = [Anyon(r) for r in sorted(a.residues for a in pool if a)]
    sym_gens = t.symmetry_generators() if cfg.require_symmetric else []

    found = []
    seen = set()

    def extend(elems, gens, start):
        if len(elems) == target:
            rep = check_subgroup(t, elems, cfg)
            needed = [(cfg.require_mutual_trivial, rep["criterion1"]),
                      (cfg.require_maximal, rep["criterion2"]),
                      (cfg.require_symmetric, rep["criterion3"]),
                      (True, rep["criterion4"])]
            if all(ok for req, ok in needed if req):
                found.append(rep["subgroup"])
            return
        for i in range(start, len(cands)):
            c = cands[i]
            if c in elems:
                continue
            if cfg.require_mutual_trivial and any(
                    t.mutual_statistics(c, g) != 0 for g in gens):
                continue
            new = [c]
            if sym_gens:
                # close the orbit under the symmetry generators
                orbit = {c}
                frontier = [c]
                while frontier:
                    nxt = []
                    for a in frontier:
                        for g in sym_gens:
                            b = t.apply_symmetry(g, a)
                            if b not in orbit:
                                orbit.add(b)
                                nxt.append(b)
                    frontier = nxt
                new = sorted(orbit, key=lambda a: a.residues)
                if cfg.require_mutual_trivial and (
                        any(not _self_ok(t, a, cfg) for a in new) or any(
                            t.mutual_statistics(a, g) != 0
                            for a in new for g in list(gens) + new)):
                    continue
                if any(a for a in new if a not in pool):
                    continue
            bigger = _closure(t, elems, new)
            if len(bigger) > target or target % len(bigger):
                continue
            extra = bigger - elems
            if cfg.require_mutual_trivial and any(
                    not _self_ok(t, a, cfg) for a in extra):
                continue
            if any(a not in pool and a for a in extra):
                continue
            if bigger in seen:
                continue
            seen.add(bigger)
            extend(bigger, _generating_set(t, bigger), i + 1)

    base = frozenset([t.zero])
    if target == 1:
        extend(base, (), 0)
    else:
        seen.add(base)
        extend(base, (), 0)
    uniq = {s.elements: s for s in found}
    subs = sorted(uniq.values(), key=lambda s: s.key())

    if cfg.require_realizable and cfg.incoherent_constraint != "off":
        fam = t.elementary_condensates()
        subs = [s for s in subs
                if not any(s2 is not s and s.elements & fam <= s2.elements
                           for s2 in subs)]
    return subs


def memory_type(single: KTheory, doubled: KTheory,
                sub: LagrangianSubgroup) -> str:
    """Quantum / Classical / Trivial content of the corrupted state.

    C collects the single-copy anyons whose intra-copy pair is condensed.
    The state is trivial when everything is condensed.  It stays quantum
    when either (a) a condensed anyon's own loop operators on the two
    noncontractible cycles fail to commute (nontrivial self-braiding), or
    (b) every transversal of the surviving anyon classes contains a
    noncommuting pair of loop operators.  Otherwise some commuting
    transversal survives and the memory is classical.
    """
    M, N = doubled.M, doubled.N
    cond = []
    for alpha in single.anyons():
        l = single.lift(alpha)
        pair = [0] * N
        pair[0:M] = l
        pair[M:2 * M] = [-x for x in l]
        if doubled.project(pair) in sub.elements:
            cond.append(alpha)
    cond_set = set(cond)

    cosets = []
    done = set()
    for alpha in single.anyons():
        if alpha in done:
            continue
        cs = sorted((single.fuse(alpha, c) for c in cond),
                    key=lambda a: a.residues)
        done.update(cs)
        if single.zero not in cs:
            cosets.append(cs)
    if not cosets:
        return "Trivial"

    if any(single.mutual_statistics(c, c) != 0 for c in cond_set):
        return "Quantum"

    def transversals(idx, picked):
        if idx == len(cosets):
            yield picked
            return
        for rep in cosets[idx]:
            yield from transversals(idx + 1, picked + [rep])

    for reps in transversals(0, []):
        phases = [single.mutual_statistics(a, a) for a in reps]
        phases += [single.mutual_statistics(a, b)
                   for i, a in enumerate(reps) for b in reps[i + 1:]]
        if all(p == 0 for p in phases):
            return "Classical"
    return "Quantum"


def classify_model(model: Model, n: int = 2, cfg: CriteriaConfig = None,
                   cap: int = 2 ** 20):
    """Enumerate phases of a registered model and label them."""
    cfg = cfg or CriteriaConfig()
    t = model.theory(n)
    t1 = model.theory(1)
    subs = enumerate_subgroups(t, cfg, cap)

    refs = {}
    if n == 2:
        for ph in model.phases + model.coherent_phases:
            refs[reference_subgroup(model, t, ph)] = ph

    reports = []
    for sub in subs:
        ref = refs.get(sub.elements)
        reports.append(PhaseReport(
            model=model.name, n=n, criteria=cfg, subgroup=sub,
            generator_names=[anyon_name(model, t, g, t1)
                             for g in sub.generators],
            memory=memory_type(t1, t, sub) if n == 2 else "",
            phase_label=ref.label if ref else "new",
        ))
    # stable presentation order: known phases first, by label
    roman = {"I": 1, "II": 2, "III": 3, "IV": 4, "V": 5}
    known = [r for r in reports if r.phase_label != "new"]
    new = [r for r in reports if r.phase_label == "new"]
    known.sort(key=lambda r: (roman.get(r.phase_label, 99), r.phase_label))
    return known + new


def render_report(reports) -> str:
    lines = []
    for r in reports:
        gens = ", ".join(r.generator_names)
        mem = r.memory or "-"
        lines.append(f"{r.model} n={r.n} phase {r.phase_label:>3} "
                     f"[{mem:>9}]  order {r.subgroup.order:>3}  "
                     f"gens: {gens}")
    return "\n".join(lines)
