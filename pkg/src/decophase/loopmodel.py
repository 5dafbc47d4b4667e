"""Exact loop-model evaluation of the decohered toric code on small tori.

The corrupted double state assigns a tension mu = artanh(p/(1-p)) to the
relative loop h; partition sums carry weight exp(-4*mu*|h|).  Since the
reference ground state is built from contractible loops only, h ranges
over the span of the plaquette boundaries, which makes the model exactly
the L x L periodic Ising model at coupling J = 2*mu (spins on plaquettes,
h = domain walls).

Everything here is brute-force enumeration and serves as the oracle for
the Monte Carlo module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np


class OutOfRange(Exception):
    pass


class TooLarge(Exception):
    pass


class NotClosed(Exception):
    pass


def p_to_mu(p: float) -> float:
    """Loop tension mu = artanh(p/(1-p)); p = 1/2 maps to +inf."""
    if not 0.0 <= p <= 0.5:
        raise OutOfRange(f"error rate {p} outside [0, 1/2]")
    if p == 0.5:
        return math.inf
    return math.atanh(p / (1.0 - p))


MU_CRITICAL = 0.25 * math.log(1.0 + math.sqrt(2.0))  # Kramers-Wannier point


class TorusLattice:
    """L x L square lattice on the torus.

    Edge indexing: e(x, y, o) = 2*(x + L*y) + o with o = 0 for the edge
    from (x, y) to (x+1, y) and o = 1 for the edge to (x, y+1).
    Plaquettes are indexed by their lower-left vertex, p(x, y) = x + L*y.
    """

    def __init__(self, L: int):
        if L < 2:
            raise ValueError("torus needs L >= 2")
        self.L = L
        self.n_vertices = L * L
        self.n_edges = 2 * L * L
        self.n_plaquettes = L * L
        self._build()

    def vertex(self, x, y):
        L = self.L
        return (x % L) + L * (y % L)

    def edge(self, x, y, o):
        L = self.L
        return 2 * ((x % L) + L * (y % L)) + o

    def _build(self):
        L = self.L
        ev = np.zeros((self.n_edges, 2), dtype=np.int64)
        ep = np.zeros((self.n_edges, 2), dtype=np.int64)
        for y in range(L):
            for x in range(L):
                h = self.edge(x, y, 0)
                v = self.edge(x, y, 1)
                ev[h] = (self.vertex(x, y), self.vertex(x + 1, y))
                ev[v] = (self.vertex(x, y), self.vertex(x, y + 1))
                # plaquette p(x, y) has corners (x,y)..(x+1,y+1); a
                # horizontal edge separates the plaquettes above and below
                ep[h] = (x % L + L * (y % L), x % L + L * ((y - 1) % L))
                ep[v] = ((x - 1) % L + L * (y % L), x % L + L * (y % L))
        self.edge_vertices = ev
        self.edge_plaquettes = ep
        # plaquette boundary: 4 edges of p(x, y)
        pb = np.zeros((self.n_plaquettes, 4), dtype=np.int64)
        for y in range(L):
            for x in range(L):
                pb[x + L * y] = (self.edge(x, y, 0), self.edge(x, y + 1, 0),
                                 self.edge(x, y, 1), self.edge(x + 1, y, 1))
        self.plaquette_edges = pb

    def vertex_edges(self, v):
        x, y = v % self.L, v // self.L
        return [self.edge(x, y, 0), self.edge(x - 1, y, 0),
                self.edge(x, y, 1), self.edge(x, y - 1, 1)]

    def plaquette_boundary_bits(self, p) -> int:
        bits = 0
        for e in self.plaquette_edges[p]:
            bits ^= 1 << int(e)
        return bits

    def winding_cuts(self):
        """Edge sets whose odd intersection detects winding (not cycles)."""
        cut_x = 0
        cut_y = 0
        for k in range(self.L):
            cut_x ^= 1 << self.edge(0, k, 0)   # horizontal edges, column 0
            cut_y ^= 1 << self.edge(k, 0, 1)   # vertical edges, row 0
        return cut_x, cut_y

    def noncontractible_loops(self):
        """One closed loop around each handle of the torus."""
        loop_x = 0
        loop_y = 0
        for k in range(self.L):
            loop_x ^= 1 << self.edge(k, 0, 0)  # straight around in x
            loop_y ^= 1 << self.edge(0, k, 1)  # straight around in y
        return loop_x, loop_y


def is_closed(lat: TorusLattice, bits: int) -> bool:
    deg = [0] * lat.n_vertices
    e = 0
    while bits:
        if bits & 1:
            a, b = lat.edge_vertices[e]
            deg[a] += 1
            deg[b] += 1
        bits >>= 1
        e += 1
    return all(d % 2 == 0 for d in deg)


def cycle_space(lat: TorusLattice):
    """Basis of closed loop configs: L^2 - 1 plaquettes + 2 windings."""
    basis = [lat.plaquette_boundary_bits(p)
             for p in range(lat.n_plaquettes - 1)]
    basis.extend(lat.noncontractible_loops())
    return basis


def contractible_space(lat: TorusLattice):
    """Span of plaquette boundaries: the relative-loop sector of the state."""
    return [lat.plaquette_boundary_bits(p)
            for p in range(lat.n_plaquettes - 1)]


def _enumerate(basis):
    """All subset sums (XOR) of a bit basis; 2^len(basis) configs."""
    configs = [0]
    for b in basis:
        configs.extend([c ^ b for c in configs])
    return configs


_DEFAULT_CAP = 18  # 2^18 loop configs; L = 4 full cycle space is 2^17


def _check_cap(dim, cap):
    if dim > cap:
        raise TooLarge(f"enumeration of 2^{dim} loop configs exceeds "
                       f"cap 2^{cap}")


@dataclass(frozen=True)
class ErrorModel:
    """Pauli error channel: X creates m mbar pairs, Z creates e ebar."""

    basis: str = "X"
    p: float = 0.0

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise ValueError("basis must be X or Z")
        if not 0.0 <= self.p <= 0.5:
            raise OutOfRange(f"error rate {self.p} outside [0, 1/2]")

    @property
    def mu(self) -> float:
        return p_to_mu(self.p)


def ising_equivalent(mu: float) -> dict:
    """Coupling and observable dictionary of the equivalent Ising model."""
    return {
        "J": 2.0 * mu,
        "lattice": "square, periodic, spins on plaquettes",
        "string": "two-point function <sigma_a sigma_b>",
        "wilson": "bond product <prod_{l in C} exp(-2 mu sigma_i sigma_j)>",
        "critical_J": 0.5 * math.log(1.0 + math.sqrt(2.0)),
    }


def dual_path_crossings(lat: TorusLattice, path) -> int:
    """Bitmask of edges crossed by a dual path (plaquette sequence)."""
    bits = 0
    for a, b in zip(path, path[1:]):
        shared = [e for e in range(lat.n_edges)
                  if set(lat.edge_plaquettes[e]) == {a, b}]
        if not shared:
            raise ValueError(f"plaquettes {a}, {b} are not adjacent")
        bits ^= 1 << shared[0]
    return bits


def exact_string_expectation(lat: TorusLattice, mu: float, path,
                             cap: int = _DEFAULT_CAP) -> float:
    """Open-string value sum_h (-1)^crossings e^{-4 mu |h|} / Z.

    `path` is a dual path (sequence of adjacent plaquettes) joining the
    endpoints of the string; h runs over the contractible sector.
    """
    basis = contractible_space(lat)
    _check_cap(len(basis), cap)
    cross = dual_path_crossings(lat, path)
    num = []
    den = []
    for h in _enumerate(basis):
        w = -4.0 * mu * bin(h).count("1")
        den.append(w)
        num.append((w, 1 if bin(h & cross).count("1") % 2 == 0 else -1))
    m = max(w for w in den)
    top = sum(s * math.exp(w - m) for w, s in num)
    bot = sum(math.exp(w - m) for w in den)
    return top / bot


def exact_wilson_loop(lat: TorusLattice, mu: float, loop_bits: int,
                      cap: int = _DEFAULT_CAP) -> float:
    """Wilson value sum_h e^{-2 mu (|h| + |h+C|)} / sum_h e^{-4 mu |h|}."""
    if not is_closed(lat, loop_bits):
        raise NotClosed("Wilson loop must be a closed edge set")
    basis = contractible_space(lat)
    _check_cap(len(basis), cap)
    num = []
    den = []
    for h in _enumerate(basis):
        nh = bin(h).count("1")
        num.append(-2.0 * mu * (nh + bin(h ^ loop_bits).count("1")))
        den.append(-4.0 * mu * nh)
    m = max(max(num), max(den))
    return (sum(math.exp(w - m) for w in num)
            / sum(math.exp(w - m) for w in den))


def rectangle_loop(lat: TorusLattice, x0, y0, w, h) -> int:
    """Edge bitmask of the boundary of a w x h plaquette rectangle."""
    if not (0 < w < lat.L and 0 < h < lat.L):
        raise ValueError("rectangle must be smaller than the torus")
    bits = 0
    for x in range(x0, x0 + w):
        bits ^= 1 << lat.edge(x, y0, 0)
        bits ^= 1 << lat.edge(x, y0 + h, 0)
    for y in range(y0, y0 + h):
        bits ^= 1 << lat.edge(x0, y, 1)
        bits ^= 1 << lat.edge(x0 + w, y, 1)
    return bits


@dataclass
class EdgeRegion:
    """A set of edges; a vertex touching in- and out-edges is boundary."""

    lattice: TorusLattice
    edges: tuple
    co_edges: tuple = field(init=False)
    interior_vertices: tuple = field(init=False)
    boundary_vertices: tuple = field(init=False)

    def __post_init__(self):
        lat = self.lattice
        eset = set(self.edges)
        self.edges = tuple(sorted(eset))
        self.co_edges = tuple(e for e in range(lat.n_edges)
                              if e not in eset)
        touched = {}
        for e in range(lat.n_edges):
            a, b = lat.edge_vertices[e]
            for v in (int(a), int(b)):
                touched.setdefault(v, [0, 0])[0 if e in eset else 1] += 1
        self.interior_vertices = tuple(sorted(
            v for v, (na, nb) in touched.items() if na and not nb))
        self.boundary_vertices = tuple(sorted(
            v for v, (na, nb) in touched.items() if na and nb))


def region_from_vertices(lat: TorusLattice, vertices) -> EdgeRegion:
    """Region of the edges with both endpoints inside a vertex set."""
    vs = frozenset(vertices)
    edges = [e for e in range(lat.n_edges)
             if lat.edge_vertices[e][0] in vs
             and lat.edge_vertices[e][1] in vs]
    return EdgeRegion(lat, tuple(edges))


def vertex_rectangle(lat: TorusLattice, x0, y0, w, h) -> EdgeRegion:
    """Region from a w x h block of vertices (w, h counted in vertices)."""
    return region_from_vertices(
        lat, (lat.vertex(x0 + dx, y0 + dy)
              for dx in range(w) for dy in range(h)))


def region_union(*regions) -> EdgeRegion:
    lat = regions[0].lattice
    edges = set()
    for r in regions:
        if r.lattice is not lat and r.lattice.L != lat.L:
            raise ValueError("regions live on different lattices")
        edges.update(r.edges)
    return EdgeRegion(lat, tuple(edges))


def kitaev_preskill_regions(lat: TorusLattice, m: int, x0: int = 0,
                            y0: int = 0):
    """Tripartite division of a 2m x 2m disk of edges.

    The disk is split along the horizontal midline (A above, B and C
    below) and the lower half along the vertical midline; sectors are
    edge sets sharing the interface vertices, so every vertex's
    contribution to the boundary measure cancels in the combination
    S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC, triple point included.
    """
    if not (1 <= m and 2 * m < lat.L):
        raise ValueError("disk must fit strictly inside the torus")
    cx, cy = x0 + m - 0.5, y0 + m - 0.5  # disk center, lattice coords
    sectors = {"A": [], "B": [], "C": []}
    for dy in range(2 * m):
        for dx in range(2 * m):
            x, y = x0 + dx, y0 + dy
            for o, (mx, my) in ((0, (x + 0.5, y)), (1, (x, y + 0.5))):
                if o == 0 and dx == 2 * m - 1:
                    continue
                if o == 1 and dy == 2 * m - 1:
                    continue
                if my > cy:
                    sectors["A"].append(lat.edge(x, y, o))
                elif mx < cx:
                    sectors["B"].append(lat.edge(x, y, o))
                else:
                    sectors["C"].append(lat.edge(x, y, o))
    return {k: EdgeRegion(lat, tuple(v)) for k, v in sectors.items()}


def _part_sums(lat: TorusLattice, edges, boundary, mu, cap,
               winding_cuts=None):
    """Signature-resolved partition sums of one part of the torus.

    Enumerates the space of edge subsets with even degree at every vertex
    interior to the part; the signature is the parity vector at the given
    boundary vertices, optionally extended by winding parities.  Returns
    {signature: sum of exp(-4 mu |h_part|)} (counts when mu = 0).
    """
    edges = list(edges)
    k = len(edges)
    col = {e: i for i, e in enumerate(edges)}
    interior = [v for v in range(lat.n_vertices)
                if v not in boundary
                and any(e in col for e in lat.vertex_edges(v))]
    # GF(2) nullspace of the interior-vertex incidence matrix
    rows = []
    for v in interior:
        r = 0
        for e in lat.vertex_edges(v):
            if e in col:
                r ^= 1 << col[e]
        rows.append(r)
    pivots = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead in pivots:
                r ^= pivots[lead]
            else:
                pivots[lead] = r
                break
    free = [i for i in range(k) if i not in pivots]
    dim = len(free)
    _check_cap(dim, cap)
    # back-substitution: express each pivot column via the free columns
    solved = {}
    for lead in sorted(pivots):
        r = pivots[lead]
        expr = 0  # bitmask over columns, excluding the lead
        rr = r ^ (1 << lead)
        i = 0
        while rr:
            if rr & 1:
                expr ^= solved.get(i, 1 << i)
            rr >>= 1
            i += 1
        solved[lead] = expr
    basis = []
    for f in free:
        vec = 1 << f
        for lead, expr in solved.items():
            if (expr >> f) & 1:
                vec ^= 1 << lead
        basis.append(vec)

    bindex = {v: i for i, v in enumerate(boundary)}
    nb = len(boundary)
    cuts = winding_cuts or ()

    def signature(colbits):
        ebits = 0
        for i in range(k):
            if (colbits >> i) & 1:
                ebits ^= 1 << edges[i]
        sig = 0
        for i in range(k):
            if (colbits >> i) & 1:
                a, b = lat.edge_vertices[edges[i]]
                for v in (int(a), int(b)):
                    if v in bindex:
                        sig ^= 1 << bindex[v]
        for j, cut in enumerate(cuts):
            if bin(ebits & cut).count("1") % 2:
                sig ^= 1 << (nb + j)
        return sig

    out = {}
    for colbits in _enumerate(basis):
        sig = signature(colbits)
        w = math.exp(-4.0 * mu * bin(colbits).count("1")) if mu else 1.0
        out[sig] = out.get(sig, 0.0) + w
    return out


def exact_renyi2(lat: TorusLattice, mu: float, region: EdgeRegion,
                 cap: int = _DEFAULT_CAP) -> float:
    """Renyi-2 entropy S = -log Gamma_A(0) - log Gamma_A(mu).

    Gamma_A(mu) = sum_c [Omega_A(mu;c) Omega_Abar(mu;c)]^2 / Omega(mu)^2
    with the total relative loop restricted to the contractible sector
    (zero winding), enforced through two extra signature bits.
    """
    cuts = lat.winding_cuts()
    boundary = region.boundary_vertices

    def gamma(m):
        wa = _part_sums(lat, region.edges, boundary, m, cap, cuts)
        wb = _part_sums(lat, region.co_edges, boundary, m, cap, cuts)
        omega = 0.0
        num = 0.0
        for sig, a in wa.items():
            b = wb.get(sig)
            if b is None:
                continue
            omega += a * b
            num += (a * b) ** 2
        # refinement identity: the signature-matched product must rebuild
        # the full contractible partition sum
        basis = contractible_space(lat)
        if len(basis) <= cap:
            direct = sum(math.exp(-4.0 * m * bin(h).count("1"))
                         for h in _enumerate(basis))
            if abs(omega - direct) > 1e-9 * direct:
                raise AssertionError("partition refinement mismatch")
        return num / omega ** 2

    return -math.log(gamma(0.0)) - math.log(gamma(mu))


# -- pinning constraints for the Monte Carlo estimator ---------------------

def pinning_clusters(lat: TorusLattice, region: EdgeRegion):
    """Plaquette clusters whose relative spins the Renyi-2 swap aligns.

    The swap glues replicas with equal boundary parity; in spin language
    the relative spin tau must put no domain wall on the region's
    boundary: for every boundary vertex, the tau-walls among its in-region
    edges must pair up.  These parity constraints are computed exactly
    over GF(2) and, for the simply connected regions used here, reduce to
    equalities tying plaquettes into clusters.  Raises if they do not.
    """
    eset = set(region.edges)
    rows = []
    for v in region.boundary_vertices:
        r = 0
        for e in lat.vertex_edges(v):
            if e in eset:
                a, b = lat.edge_plaquettes[e]
                r ^= (1 << int(a)) ^ (1 << int(b))
        if r:
            rows.append(r)
    # reduce, then verify the row space is generated by weight-2 vectors
    pivots = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead in pivots:
                r ^= pivots[lead]
            else:
                pivots[lead] = r
                break
    rank = len(pivots)
    parent = list(range(lat.n_plaquettes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            return True
        return False

    merged = 0
    for r in rows:
        idx = [i for i in range(lat.n_plaquettes) if (r >> i) & 1]
        for a, b in zip(idx, idx[1:]):
            if union(a, b):
                merged += 1
    clusters = {}
    for i in range(lat.n_plaquettes):
        clusters.setdefault(find(i), []).append(i)
    clusters = [sorted(c) for c in clusters.values() if len(c) > 1]
    if merged != rank:
        raise ValueError("boundary parity constraints do not reduce to "
                         "pairwise spin equalities for this region")
    return sorted(clusters), rank


def pinning_entropy_bits(lat: TorusLattice, region: EdgeRegion) -> int:
    """Exact mu = 0 pinning cost in units of log 2 (= constraint rank)."""
    _, rank = pinning_clusters(lat, region)
    return rank
