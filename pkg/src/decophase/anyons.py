"""Anyon data of (replicated) abelian K-matrix theories.

A theory with K-matrix K, replicated n times with its conjugate, has the
block-diagonal matrix KK = [K (+) (-K)]^{(+) n} acting on 2n blocks of M
fields each, laid out as [phi_1, phibar_1, ..., phi_n, phibar_n].
Anyons are elements of the discriminant group D = Z^N / KK Z^N, handled
through a Smith decomposition of KK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .intlinalg import (block_diag, det, integer_solve, mat_neg, mat_vec,
                        rational_inverse, smith_normal_form)


class NonSymmetric(Exception):
    pass


class Singular(Exception):
    pass


@dataclass(frozen=True)
class Anyon:
    """Canonical label: residues r_i mod d_i in the discriminant group."""

    residues: tuple

    def __bool__(self):
        return any(self.residues)


@dataclass(frozen=True)
class SymmetryElement:
    """Permutation of the 2n field blocks, possibly antiunitary.

    Antiunitary elements act on labels as the bare block permutation; the
    overall sign l -> -l they could carry is dropped, which is harmless for
    subgroup questions because subgroups are closed under negation.
    """

    name: str
    perm: tuple  # perm[b] = image block of block b
    antiunitary: bool


class KTheory:
    """Discriminant-group data of K replicated n times (n = 1: bare K)."""

    def __init__(self, K, n=1):
        M = len(K)
        if any(len(row) != M for row in K):
            raise NonSymmetric("K must be square")
        if any(K[i][j] != K[j][i] for i in range(M) for j in range(M)):
            raise NonSymmetric("K must be symmetric")
        if det(K) == 0:
            raise Singular("K must be nondegenerate")
        if n < 1:
            raise ValueError("replica count must be >= 1")
        self.K = [list(row) for row in K]
        self.M = M
        self.n = n
        if n == 1:
            self.kmat = self.K
            self.blocks = 1
        else:
            self.kmat = block_diag([self.K, mat_neg(self.K)] * n)
            self.blocks = 2 * n
        self.N = len(self.kmat)
        self.bosonic = all(self.kmat[i][i] % 2 == 0 for i in range(self.N))
        self.kinv = rational_inverse(self.kmat)

        snf = smith_normal_form(self.kmat)
        self.snf = snf
        self.moduli = tuple(abs(d) for d in snf.diagonal)
        self.order = math.prod(self.moduli)
        uinv = rational_inverse(snf.U)
        self.uinv = [[int(x) for x in row] for row in uinv]

        # residue-coordinate bilinear forms, cleared to a common integer
        # denominator so statistics are pure integer arithmetic
        q_self = [[sum(Fraction(self.uinv[k][i]) * self.kinv[k][l]
                       * self.uinv[l][j]
                       for k in range(self.N) for l in range(self.N))
                   for j in range(self.N)] for i in range(self.N)]
        den = math.lcm(*[x.denominator for row in q_self for x in row], 1)
        self._den = den
        self._qself = [[int(x * den) for x in row] for row in q_self]

    # -- group structure -------------------------------------------------

    def project(self, l) -> Anyon:
        """Canonical label of the integer vector l."""
        ul = mat_vec(self.snf.U, list(l))
        return Anyon(tuple(x % d for x, d in zip(ul, self.moduli)))

    def lift(self, a: Anyon):
        """An integer-vector representative of a."""
        return mat_vec(self.uinv, list(a.residues))

    def anyons(self):
        for r in product(*[range(d) for d in self.moduli]):
            yield Anyon(r)

    @property
    def zero(self) -> Anyon:
        return Anyon((0,) * self.N)

    def fuse(self, a: Anyon, b: Anyon) -> Anyon:
        return Anyon(tuple((x + y) % d for x, y, d in
                           zip(a.residues, b.residues, self.moduli)))

    def neg(self, a: Anyon) -> Anyon:
        return Anyon(tuple((-x) % d for x, d in
                           zip(a.residues, self.moduli)))

    # -- statistics -------------------------------------------------------

    def _form(self, a: Anyon, b: Anyon) -> Fraction:
        q = self._qself
        ra, rb = a.residues, b.residues
        tot = 0
        for i, x in enumerate(ra):
            if x:
                row = q[i]
                tot += x * sum(row[j] * y for j, y in enumerate(rb) if y)
        return Fraction(tot, self._den)

    def mutual_statistics(self, a: Anyon, b: Anyon) -> Fraction:
        """Braiding phase theta/pi = 2 l_a^T KK^{-1} l_b, reduced mod 2."""
        return (2 * self._form(a, b)) % 2

    def self_statistics(self, a: Anyon) -> Fraction:
        """Exchange phase theta/pi = l^T KK^{-1} l.

        Reduced mod 2 for bosonic KK; only defined mod 1 for fermionic KK
        (a transparent-fermion shift of the representative changes it by 1).
        """
        v = self._form(a, a)
        return v % 2 if self.bosonic else v % 1

    # -- symmetry ---------------------------------------------------------

    def symmetry_generators(self):
        """Generators of G^(n) = Z_n x Z_2^H acting on the 2n blocks."""
        if self.n == 1:
            return []
        n = self.n
        conj = []
        shift = []
        for s in range(n):
            # hermiticity swaps ket and bra and reverses the copy order
            # (transposing a product of n factors); for n = 2 the
            # reversal is trivial
            r = (-s) % n
            conj += [2 * r + 1, 2 * r]
            t = (s + 1) % n
            shift += [2 * t, 2 * t + 1]
        return [SymmetryElement("conj", tuple(conj), True),
                SymmetryElement("shift", tuple(shift), False)]

    def apply_symmetry(self, g: SymmetryElement, a: Anyon) -> Anyon:
        l = self.lift(a)
        out = [0] * self.N
        M = self.M
        for b in range(self.blocks):
            tb = g.perm[b]
            out[tb * M:(tb + 1) * M] = l[b * M:(b + 1) * M]
        return self.project(out)

    def block_content(self, a: Anyon):
        """Per-block integer vectors of a representative of a."""
        l = self.lift(a)
        M = self.M
        return [l[b * M:(b + 1) * M] for b in range(self.blocks)]

    # -- interaction-generated sublattice ----------------------------------

    def allowed_lattice(self) -> "AllowedLattice":
        if self.n < 2:
            raise ValueError("allowed lattice requires n >= 2")
        n, M, N = self.n, self.M, self.N
        cols = []
        for s in range(n):
            for i in range(M):
                chan = [0] * N
                chan[(2 * s) * M + i] = 1        # +e_i at phi_s
                chan[(2 * s + 1) * M + i] = -1   # -e_i at phibar_s
                cols.append(chan)
                coup = [0] * N
                coup[(2 * s) * M + i] = 1                     # +e_i at phi_s
                coup[(2 * ((s + 1) % n) + 1) * M + i] = 1     # +e_i at phibar_{s+1}
                cols.append(coup)
        for j in range(N):
            cols.append([self.kmat[i][j] for i in range(N)])
        return AllowedLattice(self, cols)

    def elementary_condensates(self) -> frozenset:
        """Labels reachable by a single bare cosine term.

        The edge Lagrangian contains one cosine per channel vector
        (+l at phi_s, -l at phibar_s) and per coupling vector
        (+l at phi_s, +l at phibar_{s+1}); the vectors at fixed family and
        copy are linear in the charge l, so their projections form a union
        of 2n subgroups of the discriminant group.
        """
        if self.n < 2:
            raise ValueError("elementary condensates require n >= 2")
        n, M, N = self.n, self.M, self.N
        fam = set()
        for s in range(n):
            for kind in ("channel", "coupling"):
                gens = []
                for i in range(M):
                    v = [0] * N
                    v[(2 * s) * M + i] = 1
                    if kind == "channel":
                        v[(2 * s + 1) * M + i] = -1
                    else:
                        v[(2 * ((s + 1) % n) + 1) * M + i] = 1
                    gens.append(self.project(v))
                seen = {self.zero}
                frontier = [self.zero]
                while frontier:
                    nxt = []
                    for a in frontier:
                        for g in gens:
                            b = self.fuse(a, g)
                            if b not in seen:
                                seen.add(b)
                                nxt.append(b)
                    frontier = nxt
                fam.update(seen)
        return frozenset(fam)


class AllowedLattice:
    """Integer span of channel, coupling, and local (KK-column) vectors."""

    def __init__(self, theory: KTheory, columns):
        self.theory = theory
        self.columns = columns
        self.matrix = [[col[i] for col in columns]
                       for i in range(theory.N)]
        self._image = None

    def membership(self, a: Anyon) -> bool:
        return integer_solve(self.matrix, self.theory.lift(a)) is not None

    def image_subgroup(self) -> frozenset:
        """Projection of the lattice into the discriminant group."""
        if self._image is None:
            t = self.theory
            gens = {t.project(col) for col in self.columns}
            seen = {t.zero}
            frontier = [t.zero]
            while frontier:
                nxt = []
                for a in frontier:
                    for g in gens:
                        b = t.fuse(a, g)
                        if b not in seen:
                            seen.add(b)
                            nxt.append(b)
                frontier = nxt
            self._image = frozenset(seen)
        return self._image


def signed_block_sum_ok(t: KTheory, a: Anyon) -> bool:
    """Cheaper n = 2 reading of the incoherent-error constraint.

    Requires m_{phi_1} + m_{phibar_1} - m_{phi_2} - m_{phibar_2} to lie in
    K Z^M.  Necessary but weaker than full lattice membership (it misses
    mod-2 obstructions like a lone fermion label in the toric code).
    """
    if t.n != 2:
        raise ValueError("signed block sum is defined for n = 2")
    b0, b1, b2, b3 = t.block_content(a)
    s = [b0[i] + b1[i] - b2[i] - b3[i] for i in range(t.M)]
    return integer_solve(t.K, s) is not None


def build_theory(K, n=1) -> KTheory:
    return KTheory(K, n)


def read_kmatrix(path):
    """Plain-text K-matrix: first line M, then M rows of M integers."""
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError("empty K-matrix file")
    m = int(tokens[0])
    vals = [int(x) for x in tokens[1:]]
    if len(vals) != m * m:
        raise ValueError(f"expected {m * m} entries, got {len(vals)}")
    return [vals[i * m:(i + 1) * m] for i in range(m)]
