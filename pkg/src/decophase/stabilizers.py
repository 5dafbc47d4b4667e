"""Stabilizer description of the doubled state at its two fixed points.

Vectorizing the density matrix of an L x L toric code gives a pure state
on 4 L^2 qubits (a ket and a bra copy per edge).  At p = 0 the two copies
are independent ground states; at p = 1/2 the dephasing channel projects
onto the +1 eigenspace of P_e Pbar_e for every edge, where P is the error
operator.  Both fixed points are stabilizer states, so every Renyi entropy
of a qubit region follows from a GF(2) rank.

Sign conventions of the stabilizers are irrelevant for entropies and are
not tracked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .loopmodel import EdgeRegion, TorusLattice


class NotMaximal(Exception):
    """The assembled generators do not stabilize a unique pure state."""


def gf2_rank(rows) -> int:
    """Rank over GF(2); rows are Python-int bitmasks."""
    pivots = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead in pivots:
                r ^= pivots[lead]
            else:
                pivots[lead] = r
                break
    return len(pivots)


@dataclass(frozen=True)
class StabilizerGroup:
    """Independent generators of a pure stabilizer state on n qubits.

    Each generator is a 2n-bit int: bit q is the X part on qubit q, bit
    n + q the Z part.
    """

    n_qubits: int
    generators: tuple

    def entropy_bits(self, qubits) -> int:
        """Entanglement entropy of the qubit set, in units of log 2.

        For a pure stabilizer state S_A = rank(G|_A) - |A|, where G|_A is
        the symplectic generator matrix restricted to the region's
        columns.
        """
        qubits = sorted(set(qubits))
        n = self.n_qubits
        pos = {q: i for i, q in enumerate(qubits)}
        rows = []
        for g in self.generators:
            r = 0
            for q, i in pos.items():
                if (g >> q) & 1:
                    r |= 1 << i
                if (g >> (n + q)) & 1:
                    r |= 1 << (len(qubits) + i)
            rows.append(r)
        return gf2_rank(rows) - len(qubits)


def _reduce(n_qubits, raw) -> StabilizerGroup:
    pivots = {}
    kept = []
    for r in raw:
        g = r
        while r:
            lead = r.bit_length() - 1
            if lead in pivots:
                r ^= pivots[lead]
            else:
                pivots[lead] = r
                kept.append(g)
                break
    if len(kept) != n_qubits:
        raise NotMaximal(f"{len(kept)} independent generators for "
                         f"{n_qubits} qubits")
    return StabilizerGroup(n_qubits, tuple(kept))


def _single_copy_ops(lat: TorusLattice):
    """(star X ops, plaquette Z ops, Z logicals, X logicals) as bitmasks
    over the edges of one copy."""
    E = lat.n_edges
    stars = []
    for v in range(lat.n_vertices):
        x = 0
        for e in lat.vertex_edges(v):
            x |= 1 << e
        stars.append(x)
    plaqs = []
    for p in range(lat.n_plaquettes):
        z = 0
        for e in lat.plaquette_edges[p]:
            z |= 1 << int(e)
        plaqs.append(z)
    logical_z = lat.noncontractible_loops()   # cycles on the lattice
    logical_x = lat.winding_cuts()            # cycles on the dual lattice
    return stars, plaqs, logical_z, logical_x


def efd_stabilizer_group(L: int, limit: str = "p0",
                         basis: str = "X") -> StabilizerGroup:
    """Stabilizer group of the doubled state at p = 0 or p = 1/2.

    Qubit layout: ket copy on qubits 0..2L^2-1 (edge index), bra copy on
    2L^2..4L^2-1.  The reference ground state is the one fixed by the two
    straight Z logicals.  `basis` is the Pauli type of the dephasing
    noise; it only matters at `limit` = "phalf".
    """
    if limit not in ("p0", "phalf"):
        raise ValueError("limit must be 'p0' or 'phalf'")
    if basis not in ("X", "Z"):
        raise ValueError("basis must be 'X' or 'Z'")
    lat = TorusLattice(L)
    E = lat.n_edges
    N = 2 * E
    stars, plaqs, logical_z, logical_x = _single_copy_ops(lat)

    def ket(x=0, z=0):
        return x | (z << N)

    def bra(x=0, z=0):
        return (x << E) | (z << (N + E))

    raw = []
    if limit == "p0":
        # two independent ground-state copies (conjugation does not change
        # the symplectic content of X- and Z-type operators)
        for side in (ket, bra):
            raw += [side(x=s) for s in stars]
            raw += [side(z=p) for p in plaqs]
            raw += [side(z=w) for w in logical_z]
    elif basis == "X":
        # X-dephasing: keep X_e Xbar_e, the X-type stabilizers of each
        # copy, and the Z-type ones glued across the copies
        raw += [ket(x=1 << e) | bra(x=1 << e) for e in range(E)]
        raw += [ket(x=s) for s in stars]
        raw += [bra(x=s) for s in stars]
        raw += [ket(z=p) | bra(z=p) for p in plaqs]
        raw += [ket(z=w) | bra(z=w) for w in logical_z]
    else:
        # Z-dephasing: the Z-type content survives per copy, X-type glues
        raw += [ket(z=1 << e) | bra(z=1 << e) for e in range(E)]
        raw += [ket(z=p) for p in plaqs]
        raw += [bra(z=p) for p in plaqs]
        raw += [ket(z=w) for w in logical_z]
        raw += [bra(z=w) for w in logical_z]
        raw += [ket(x=s) | bra(x=s) for s in stars]
    return _reduce(N, raw)


def region_qubits(region: EdgeRegion, copies: str = "both"):
    """Qubit indices of a geometric edge region in the doubled layout."""
    E = region.lattice.n_edges
    out = []
    if copies in ("ket", "both"):
        out += [e for e in region.edges]
    if copies in ("bra", "both"):
        out += [E + e for e in region.edges]
    if not out:
        raise ValueError(f"unknown copies selector {copies!r}")
    return out


def entanglement_entropy(group: StabilizerGroup, qubits) -> int:
    """Region entropy in units of log 2; requires a maximal group."""
    if len(group.generators) != group.n_qubits:
        raise NotMaximal(f"{len(group.generators)} generators for "
                         f"{group.n_qubits} qubits")
    return group.entropy_bits(qubits)


def region_entropy_bits(L: int, region: EdgeRegion, limit: str,
                        basis: str = "X") -> int:
    group = efd_stabilizer_group(L, limit, basis)
    return entanglement_entropy(group, region_qubits(region))
