"""Built-in model registry: K-matrices, anyon names, reference subgroups.

The replicated theory is stored internally in the folded block order
[phi_1, phibar_1, phi_2, phibar_2]; the conventional L/R presentation is a
display layer on top of it (phibar_R = phi_1, phi_R = phibar_1,
phi_L = phi_2, phibar_L = phibar_2).  A named anyon maps to a label vector
as

    alpha_L    -> +l at phi_2        alphabar_L -> -l at phibar_2
    alpha_R    -> -l at phibar_1     alphabar_R -> +l at phi_1

so that e.g. alpha_R alphabar_R is exactly the channel vector
(+l at phi_1, -l at phibar_1) and alpha_L alpha'_R lands in the span of the
coupling vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .anyons import Anyon, KTheory, build_theory

BAR = "̄"  # combining macron


def _barred(name: str) -> str:
    return name[0] + BAR + name[1:]


# (base symbol, side, barred) -> (block, sign) in the internal order
_DISPLAY = {
    ("L", False): (2, +1),
    ("L", True): (3, -1),
    ("R", False): (1, -1),
    ("R", True): (0, +1),
}


def display_vector(t: KTheory, parts):
    """Label vector of a product of named single-copy anyons (n = 2).

    `parts` is a sequence of (l, side, barred) with l a length-M integer
    charge vector, side in {"L", "R"}.
    """
    assert t.n == 2
    out = [0] * t.N
    for l, side, barred in parts:
        block, sign = _DISPLAY[(side, barred)]
        for i, x in enumerate(l):
            out[block * t.M + i] += sign * x
    return out


@dataclass
class ReferencePhase:
    label: str
    memory: str
    generators: list  # lists of (charge vector, side, barred)


@dataclass
class Model:
    name: str
    K: list
    base_names: dict        # charge tuple -> symbol, single-copy
    phases: list = field(default_factory=list)
    coherent_phases: list = field(default_factory=list)

    def theory(self, n=1) -> KTheory:
        return build_theory(self.K, n)

    def single_names(self, t1: KTheory) -> dict:
        """Anyon -> symbol for the n = 1 theory."""
        return {t1.project(list(l)): s for l, s in self.base_names.items()}


def _tc(*parts):
    vec = {"e": (1, 0), "m": (0, 1), "f": (1, 1)}
    return [(vec[p[0]], p[1], p[2]) for p in parts]


def _ds(*parts):
    vec = {"ma": (1, 0), "mb": (0, 1), "b": (1, 1)}
    return [(vec[p[0]], p[1], p[2]) for p in parts]


def _lg(*parts):
    vec = {"n": (1,), "n2": (2,)}
    return [(vec[p[0]], p[1], p[2]) for p in parts]


TORIC = Model(
    name="toric",
    K=[[0, 2], [2, 0]],
    base_names={(0, 0): "1", (1, 0): "e", (0, 1): "m", (1, 1): "f"},
    phases=[
        ReferencePhase("I", "Quantum", [
            _tc(("e", "L", False), ("e", "R", False)),
            _tc(("e", "L", True), ("e", "R", True)),
            _tc(("m", "L", False), ("m", "R", False)),
            _tc(("m", "L", True), ("m", "R", True)),
        ]),
        ReferencePhase("II", "Classical", [
            _tc(("e", "L", False), ("e", "L", True)),
            _tc(("e", "R", False), ("e", "R", True)),
            _tc(("e", "L", False), ("e", "R", True)),
            _tc(("m", "L", False), ("m", "L", True),
                ("m", "R", False), ("m", "R", True)),
        ]),
        ReferencePhase("III", "Classical", [
            _tc(("m", "L", False), ("m", "L", True)),
            _tc(("m", "R", False), ("m", "R", True)),
            _tc(("m", "L", False), ("m", "R", True)),
            _tc(("e", "L", False), ("e", "L", True),
                ("e", "R", False), ("e", "R", True)),
        ]),
        ReferencePhase("IV", "Classical", [
            _tc(("f", "L", False), ("f", "L", True)),
            _tc(("f", "R", False), ("f", "R", True)),
            _tc(("f", "L", False), ("f", "R", True)),
            _tc(("e", "L", False), ("e", "L", True),
                ("e", "R", False), ("e", "R", True)),
        ]),
        ReferencePhase("V", "Trivial", [
            _tc(("e", "L", False), ("e", "L", True)),
            _tc(("e", "R", False), ("e", "R", True)),
            _tc(("m", "L", False), ("m", "L", True)),
            _tc(("m", "R", False), ("m", "R", True)),
        ]),
    ],
    coherent_phases=[
        ReferencePhase("coherent-e", "", [
            _tc(("e", s, b)) for s in "LR" for b in (False, True)]),
        ReferencePhase("coherent-m", "", [
            _tc(("m", s, b)) for s in "LR" for b in (False, True)]),
        ReferencePhase("coherent-em", "", [
            _tc(("e", s, False), ("m", s, True)) for s in "LR"] + [
            _tc(("m", s, False), ("e", s, True)) for s in "LR"]),
    ],
)

DOUBLE_SEMION = Model(
    name="double-semion",
    K=[[2, 0], [0, -2]],
    base_names={(0, 0): "1", (1, 0): "ma", (0, 1): "mb", (1, 1): "b"},
    phases=[
        ReferencePhase("I", "Quantum", [
            _ds(("ma", "L", False), ("ma", "R", False)),
            _ds(("ma", "L", True), ("ma", "R", True)),
            _ds(("mb", "L", False), ("mb", "R", False)),
            _ds(("mb", "L", True), ("mb", "R", True)),
        ]),
        ReferencePhase("II", "Quantum", [
            _ds(("ma", "L", False), ("ma", "L", True)),
            _ds(("ma", "R", False), ("ma", "R", True)),
            _ds(("mb", "L", False), ("mb", "R", False)),
            _ds(("mb", "L", True), ("mb", "R", True)),
        ]),
        ReferencePhase("III", "Quantum", [
            _ds(("mb", "L", False), ("mb", "L", True)),
            _ds(("mb", "R", False), ("mb", "R", True)),
            _ds(("ma", "L", False), ("ma", "R", False)),
            _ds(("ma", "L", True), ("ma", "R", True)),
        ]),
        ReferencePhase("IV", "Quantum", [
            _ds(("b", "L", False), ("b", "L", True)),
            _ds(("b", "R", False), ("b", "R", True)),
            _ds(("b", "L", False), ("b", "R", False)),
            _ds(("ma", "L", False), ("ma", "L", True),
                ("ma", "R", False), ("ma", "R", True)),
        ]),
        ReferencePhase("V", "Trivial", [
            _ds(("ma", "L", False), ("ma", "L", True)),
            _ds(("ma", "R", False), ("ma", "R", True)),
            _ds(("mb", "L", False), ("mb", "L", True)),
            _ds(("mb", "R", False), ("mb", "R", True)),
        ]),
    ],
    coherent_phases=[
        ReferencePhase("coherent-b", "", [
            _ds(("b", s, b)) for s in "LR" for b in (False, True)]),
    ],
)

LAUGHLIN3 = Model(
    name="laughlin3",
    K=[[3]],
    base_names={(0,): "1", (1,): "η", (2,): "η²"},
    phases=[
        ReferencePhase("I", "Quantum", [
            _lg(("n", "L", False), ("n2", "R", False)),
            _lg(("n", "L", True), ("n2", "R", True)),
        ]),
        ReferencePhase("II", "Trivial", [
            _lg(("n", "L", False), ("n", "L", True)),
            _lg(("n", "R", False), ("n", "R", True)),
        ]),
    ],
)

REGISTRY = {m.name: m for m in (TORIC, DOUBLE_SEMION, LAUGHLIN3)}
# common aliases accepted on the command line
ALIASES = {"toric": "toric", "toric-code": "toric", "tc": "toric",
           "double-semion": "double-semion", "ds": "double-semion",
           "doublesemion": "double-semion",
           "laughlin3": "laughlin3", "laughlin": "laughlin3"}


def get_model(name: str) -> Model:
    key = ALIASES.get(name.lower().strip())
    if key is None:
        raise KeyError(f"unknown model {name!r}; "
                       f"known: {sorted(REGISTRY)}")
    return REGISTRY[key]


def reference_subgroup(model: Model, t2: KTheory, phase: ReferencePhase):
    """Closure of a reference phase's generators as a set of labels."""
    gens = [t2.project(display_vector(t2, g)) for g in phase.generators]
    elems = {t2.zero}
    frontier = [t2.zero]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = t2.fuse(a, g)
                if b not in elems:
                    elems.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(elems)


def anyon_name(model: Model, t: KTheory, a: Anyon,
               t1: KTheory = None) -> str:
    """Human-readable name of a replicated-theory anyon.

    n = 2 labels use the L/R presentation; other n use numbered copies.
    """
    if t1 is None:
        t1 = model.theory(1)
    names = model.single_names(t1)
    blocks = t.block_content(a)
    if t.n == 1:
        return names.get(t1.project(blocks[0]), str(a.residues))

    pieces = []
    if t.n == 2:
        # display order: phi_L, phibar_L, phi_R, phibar_R
        layout = [(2, +1, "L", False), (3, -1, "L", True),
                  (1, -1, "R", False), (0, +1, "R", True)]
    else:
        layout = []
        for s in range(t.n):
            layout.append((2 * s, +1, str(s + 1), False))
            layout.append((2 * s + 1, -1, str(s + 1), True))
    for block, sign, sub, barred in layout:
        l = [sign * x for x in blocks[block]]
        single = t1.project(l)
        if not single:
            continue
        base = names.get(single)
        if base is None:
            pieces.append(f"[{tuple(single.residues)}]_{sub}")
            continue
        if barred:
            base = _barred(base)
        pieces.append(f"{base}_{sub}")
    return " ".join(pieces) if pieces else "1"
