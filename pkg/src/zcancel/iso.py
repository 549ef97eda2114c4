"""Isomorphism of inclusion diagrams, with certificates.

A diagram map between inclusion diagrams is fixed by its maps at the
maximal nodes; lower maps are restrictions.  So the unknowns are one square
matrix per maximal node, written in the canonical bases of the source and
target lattices there.  Containment at lower nodes (and agreement of the
maximal maps where they share a lower node) are linear conditions, and
their integer solutions form the constraint lattice.

Matrix convention for the unknown ``U`` at a maximal node ``t``: column
``j`` holds the target-basis coordinates of the image of source basis
vector ``j``.  The unknown tuple is flattened row-major, maximal nodes in
poset order.

An isomorphism is a lattice point whose node matrices (at every node, in
the canonical bases there) all have determinant +-1.  If for some modulus
``m`` no residue class of the constraint lattice has all determinants
congruent to +-1 mod ``m``, no such point exists.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial, gcd
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .diagrams import InclusionDiagram
from .groups import (
    GroupInvariants,
    coordinate_matrix,
    coordinates,
    lattice_from_generators,
    quotient_invariants,
    shell,
    zigzag,
)
from .linalg import IntMatrix, hnf, left_kernel_basis, snf, solve_in_row_lattice

log = logging.getLogger(__name__)

__all__ = [
    "ConstraintLattice",
    "IsoWitness",
    "ObstructionCert",
    "IsoVerdict",
    "invariant_screen",
    "screen_exponent",
    "constraint_lattice",
    "witness_search",
    "obstruction_search",
    "decide_iso",
    "verify_witness",
    "verify_obstruction",
    "witness_from_ambient",
    "modulus_schedule",
    "DEFAULT_COEFF_BOUND",
    "DEFAULT_MAX_MODULUS",
    "DEFAULT_RESIDUE_BUDGET",
]

DEFAULT_COEFF_BOUND = 5
DEFAULT_MAX_MODULUS = 64
DEFAULT_RESIDUE_BUDGET = 200_000


class ScreenFailure(ValueError):
    pass


def _compact(inv: GroupInvariants) -> str:
    return str(inv).replace(" ", "")


def _screen_pairs(poset):
    # each lower node is compared with larger nodes first
    idx = {a: n for n, a in enumerate(poset.elements)}
    return sorted(poset.pairs(), key=lambda p: (idx[p[0]], -idx[p[1]]))


def _check_same_poset(b: InclusionDiagram, c: InclusionDiagram):
    if b.poset != c.poset:
        raise ValueError("diagrams are over different posets")


def invariant_screen(b: InclusionDiagram, c: InclusionDiagram) -> Optional[str]:
    """First invariant mismatch between ``b`` and ``c``, or None when all agree."""
    _check_same_poset(b, c)
    for a in b.nodes:
        if b[a].rank != c[a].rank:
            return f"node({a}):rank{b[a].rank}!=rank{c[a].rank}"
    for i, j in _screen_pairs(b.poset):
        qb, qc = quotient_invariants(b[j], b[i]), quotient_invariants(c[j], c[i])
        if qb != qc:
            return f"pair({i},{j}):{_compact(qb)}!={_compact(qc)}"
    return None


def screen_exponent(d: InclusionDiagram) -> int:
    """lcm of all torsion coefficients of the pairwise quotients of ``d``."""
    e = 1
    for i, j in d.poset.pairs():
        for t in quotient_invariants(d[j], d[i]).torsion:
            e = e * t // gcd(e, t)
    return e


@dataclass(frozen=True)
class ConstraintLattice:
    source: InclusionDiagram
    target: InclusionDiagram
    tops: tuple           # maximal nodes, each owning one unknown block
    ranks: tuple          # rank at each top
    basis: IntMatrix      # rows span the solutions in the flattened unknown space
    node_top: Mapping     # node -> the top whose block defines its map
    # per basis row: flattened node matrices (nodes in poset order)
    node_data: tuple = field(repr=False, default=())

    @property
    def dim(self) -> int:
        return sum(r * r for r in self.ranks)

    @property
    def shape(self) -> tuple:
        return tuple((r, r) for r in self.ranks)

    def offsets(self) -> dict:
        out, k = {}, 0
        for t, r in zip(self.tops, self.ranks):
            out[t] = k
            k += r * r
        return out

    def unknowns(self, point: Sequence[int]) -> dict:
        """Split a flattened point into one square matrix per top."""
        out = {}
        for t, r in zip(self.tops, self.ranks):
            k = self.offsets()[t]
            out[t] = IntMatrix(tuple(tuple(point[k + a * r: k + a * r + r]) for a in range(r)), r)
        return out

    def point(self, coeffs: Sequence[int]) -> tuple:
        return self.basis.apply(coeffs) if self.basis.nrows else (0,) * self.dim


def _node_setup(b: InclusionDiagram, c: InclusionDiagram):
    tops = b.poset.maximal()
    node_top = {a: next(t for t in tops if b.poset.le(a, t)) for a in b.nodes}
    return tops, node_top


def constraint_lattice(b: InclusionDiagram, c: InclusionDiagram) -> ConstraintLattice:
    mismatch = invariant_screen(b, c)
    if mismatch is not None:
        raise ScreenFailure(f"invariant screen failed: {mismatch}")
    tops, node_top = _node_setup(b, c)
    ranks = tuple(b[t].rank for t in tops)
    offs, N = {}, 0
    for t, r in zip(tops, ranks):
        offs[t] = N
        N += r * r

    # Each block is a column group: rows are the N unknowns followed by
    # auxiliary y-variables (coordinates inside a target node lattice).
    blocks = []  # (unknown_rows: list of N-vectors per column, aux rows)
    for a in b.nodes:
        for t in tops:
            if not b.poset.le(a, t) or a == t:
                continue
            r = b[t].rank
            P = coordinate_matrix(b[t], b[a])   # source node a in top basis
            Q = coordinate_matrix(c[t], c[a])   # target node a in top basis
            for p in P.rows:
                # image coords w_x = sum_y U[x][y] p_y must lie in rowspan(Q)
                cols = []
                for x in range(r):
                    col = [0] * N
                    for y in range(r):
                        col[offs[t] + x * r + y] = p[y]
                    cols.append(col)
                blocks.append((cols, Q))
    # maximal maps must agree on shared lower nodes
    for a in b.nodes:
        above = [t for t in tops if b.poset.le(a, t)]
        t0 = above[0]
        for t1 in above[1:]:
            P0, P1 = coordinate_matrix(b[t0], b[a]), coordinate_matrix(b[t1], b[a])
            T0, T1 = c[t0].basis, c[t1].basis
            for p0, p1 in zip(P0.rows, P1.rows):
                cols = []
                for k in range(c.ambient_dim):
                    col = [0] * N
                    for sgn, t, p, T in ((1, t0, p0, T0), (-1, t1, p1, T1)):
                        r = b[t].rank
                        for x in range(r):
                            for y in range(r):
                                col[offs[t] + x * r + y] += sgn * p[y] * T[x, k]
                    cols.append(col)
                blocks.append((cols, IntMatrix.zeros(0, c.ambient_dim)))

    if not blocks or N == 0:
        basis = IntMatrix.identity(N)
    else:
        aux = sum(Q.nrows for _, Q in blocks)
        width = sum(len(cols) for cols, _ in blocks)
        rows = [[0] * width for _ in range(N + aux)]
        ccol, crow = 0, N
        for cols, Q in blocks:
            for k, col in enumerate(cols):
                for i in range(N):
                    rows[i][ccol + k] = col[i]
                for qi, qrow in enumerate(Q.rows):
                    rows[crow + qi][ccol + k] = -qrow[k]
            ccol += len(cols)
            crow += Q.nrows
        ker = left_kernel_basis(IntMatrix.from_rows(rows, width))
        proj = IntMatrix(tuple(r[:N] for r in ker.rows), N)
        basis = lattice_from_generators(N, proj).basis
    cl = ConstraintLattice(b, c, tops, ranks, basis, node_top)
    data = tuple(_node_data(cl, row) for row in basis.rows)
    return ConstraintLattice(b, c, tops, ranks, basis, node_top, data)


def node_matrices(cl: ConstraintLattice, point: Sequence[int]) -> dict:
    """Node maps in canonical bases (column convention) for a lattice point.

    Computed through ambient images, so this also serves as the
    independent route for re-verification.  Raises ValueError if an image
    leaves the target node lattice.
    """
    b, c = cl.source, cl.target
    us = cl.unknowns(point)
    out = {}
    for a in b.nodes:
        t = cl.node_top[a]
        P = coordinate_matrix(b[t], b[a])
        imgs = (P @ us[t].transpose()) @ c[t].basis if P.nrows else IntMatrix.zeros(0, c.ambient_dim)
        cols = []
        for v in imgs.rows:
            x = coordinates(c[a], v)
            if x is None:
                raise ValueError(f"image {v} of node {a} leaves {c[a]}")
            cols.append(x)
        r = b[a].rank
        out[a] = IntMatrix(tuple(cols), r).transpose() if r else IntMatrix.zeros(0, 0)
    return out


def _node_data(cl: ConstraintLattice, point) -> tuple:
    mats = node_matrices(cl, point)
    return tuple(x for a in cl.source.nodes for row in mats[a].rows for x in row)


def _data_dets(cl: ConstraintLattice, data: Sequence[int], modulus: Optional[int] = None):
    k = 0
    for a in cl.source.nodes:
        r = cl.source[a].rank
        m = IntMatrix(tuple(tuple(data[k + i * r: k + i * r + r]) for i in range(r)), r)
        k += r * r
        d = m.det()
        yield a, (d % modulus if modulus else d)


@dataclass(frozen=True)
class IsoWitness:
    """Node maps in canonical bases; column j is the image of source basis vector j."""

    node_maps: Mapping
    point: tuple = ()
    coeffs: tuple = ()


@dataclass(frozen=True)
class ObstructionCert:
    modulus: int
    checked_count: int


@dataclass(frozen=True)
class IsoVerdict:
    kind: str  # "ISO", "NOT-ISO", "INCONCLUSIVE"
    witness: Optional[IsoWitness] = None
    certificate: Optional[ObstructionCert] = None
    mismatch: Optional[str] = None
    coeff_bound: Optional[int] = None
    max_modulus: Optional[int] = None
    skipped_moduli: tuple = ()

    def record(self) -> str:
        if self.kind == "ISO":
            return "ISO"
        if self.kind == "NOT-ISO":
            if self.mismatch is not None:
                return f"NOT-ISO invariant-mismatch={self.mismatch}"
            return f"NOT-ISO modulus={self.certificate.modulus}"
        return f"INCONCLUSIVE coeff={self.coeff_bound} modulus={self.max_modulus}"


def _is_unit_tuple(cl, data) -> bool:
    return all(abs(d) == 1 for _, d in _data_dets(cl, data))


def verify_witness(b: InclusionDiagram, c: InclusionDiagram, w: IsoWitness) -> bool:
    """Ambient-level check of a witness, independent of the constraint lattice.

    Rebuilds every node map from the maximal-node matrices, then checks
    forward containment, equality of images with the target lattices,
    injectivity, and agreement of maximal maps on shared lower nodes.
    """
    _check_same_poset(b, c)
    tops, _ = _node_setup(b, c)
    for a in b.nodes:
        imgs_seen = None
        for t in tops:
            if not b.poset.le(a, t):
                continue
            U = w.node_maps[t]
            if U.shape != (b[t].rank, b[t].rank) or c[t].rank != b[t].rank:
                return False
            P = coordinate_matrix(b[t], b[a])
            imgs = (P @ U.transpose()) @ c[t].basis if P.nrows else IntMatrix.zeros(0, c.ambient_dim)
            if imgs_seen is not None and imgs != imgs_seen:
                return False
            imgs_seen = imgs
            if any(coordinates(c[a], v) is None for v in imgs.rows):
                return False
            img = lattice_from_generators(c.ambient_dim, imgs)
            if img != c[a] or img.rank != b[a].rank:
                return False
    return True


def witness_from_ambient(cl: ConstraintLattice, maps: Mapping) -> Optional[IsoWitness]:
    """Turn ambient matrices (row convention, one per top) into a verified witness."""
    b, c = cl.source, cl.target
    point = []
    for t in cl.tops:
        M = maps[t]
        imgs = b[t].basis @ M
        cols = []
        for v in imgs.rows:
            x = coordinates(c[t], v)
            if x is None:
                return None
            cols.append(x)
        r = b[t].rank
        U = IntMatrix(tuple(cols), r).transpose() if r else IntMatrix.zeros(0, 0)
        point += [x for row in U.rows for x in row]
    point = tuple(point)
    try:
        mats = node_matrices(cl, point)
    except ValueError:
        return None
    if not all(abs(m.det()) == 1 for m in mats.values()):
        return None
    w = IsoWitness({t: mats[t] for t in cl.tops} | mats, point)
    return w if verify_witness(b, c, w) else None


def _combine(vectors, coeffs):
    out = None
    for cf, v in zip(coeffs, vectors):
        if cf:
            out = [cf * x for x in v] if out is None else [o + cf * x for o, x in zip(out, v)]
    return out


def _witness_from_coeffs(cl: ConstraintLattice, coeffs) -> Optional[IsoWitness]:
    data = _combine(cl.node_data, coeffs)
    if data is None:
        data = [0] * sum(cl.source[a].rank ** 2 for a in cl.source.nodes)
    # the top determinants are the cheapest filter, but checking all is fine
    if not _is_unit_tuple(cl, data):
        return None
    point = cl.point(coeffs)
    mats = node_matrices(cl, point)
    w = IsoWitness(mats, tuple(point), tuple(coeffs))
    if not verify_witness(cl.source, cl.target, w):
        return None
    return w


def _tail_table(k: int, radius: int) -> np.ndarray:
    vals = sorted(range(-radius, radius + 1), key=zigzag)
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.array(vals, dtype=np.int64)] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _shell_batches(dim: int, radius: int, tail: int = 5):
    """Shell vectors in scan order, as numpy blocks."""
    if radius == 0:
        yield np.zeros((1, dim), dtype=np.int64)
        return
    k = min(dim, tail)
    table = _tail_table(k, radius)
    tmax = np.abs(table).max(axis=1) if k else np.zeros(1, dtype=np.int64)
    vals = sorted(range(-radius, radius + 1), key=zigzag)
    for prefix in product(vals, repeat=dim - k):
        pmax = max((abs(x) for x in prefix), default=0)
        rows = table if pmax == radius else table[tmax == radius]
        if len(rows) == 0:
            continue
        if prefix:
            block = np.empty((len(rows), dim), dtype=np.int64)
            block[:, : dim - k] = prefix
            block[:, dim - k:] = rows
            yield block
        else:
            yield rows


def _batch_dets(mats: np.ndarray, r: int) -> np.ndarray:
    """Leibniz determinants of a batch of r x r int64 matrices."""
    if r == 0:
        return np.ones(len(mats), dtype=np.int64)
    out = np.zeros(len(mats), dtype=np.int64)
    for perm in permutations(range(r)):
        inv = sum(1 for i in range(r) for j in range(i + 1, r) if perm[i] > perm[j])
        term = np.ones(len(mats), dtype=np.int64)
        for i, p in enumerate(perm):
            term = term * mats[:, i, p]
        out += -term if inv % 2 else term
    return out


_MAX_FAST_RANK = 5


def _top_filter(cl: ConstraintLattice, radius: int):
    """Arrays for the vectorised top-determinant filter, or None when unsafe."""
    b = cl.source
    blocks = []
    k = 0
    for a in b.nodes:
        r = b[a].rank
        if a in cl.tops:
            if r > _MAX_FAST_RANK:
                return None
            D = np.array([row[k:k + r * r] for row in cl.node_data], dtype=object)
            bound = radius * int(np.abs(D).sum(axis=0).max()) if D.size else 0
            if factorial(r) * bound ** r >= 2 ** 62:
                return None
            blocks.append((D.astype(np.int64), r))
        k += r * r
    return blocks


def _witness_in_shell(cl: ConstraintLattice, radius: int) -> Optional[IsoWitness]:
    dim = cl.basis.nrows
    blocks = _top_filter(cl, radius)
    if blocks is None or dim == 0:
        for coeffs in shell(dim, radius):
            w = _witness_from_coeffs(cl, coeffs)
            if w is not None:
                return w
        return None
    for batch in _shell_batches(dim, radius):
        keep = np.ones(len(batch), dtype=bool)
        for D, r in blocks:
            mats = (batch @ D).reshape(len(batch), r, r)
            keep &= np.abs(_batch_dets(mats, r)) == 1
        for idx in np.flatnonzero(keep):
            w = _witness_from_coeffs(cl, tuple(int(x) for x in batch[idx]))
            if w is not None:
                return w
    return None


def witness_search(cl: ConstraintLattice, coeff_bound: int) -> Optional[IsoWitness]:
    """First lattice point (ascending max-norm, zigzag-lexicographic) giving an isomorphism."""
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be at least 1")
    for r in range(coeff_bound + 1):
        w = _witness_in_shell(cl, r)
        if w is not None:
            return w
    return None


class BudgetExceeded(RuntimeError):
    pass


def _residues(gens, modulus: int, budget: Optional[int]):
    """Distinct residues mod ``modulus`` of the integer span of ``gens``.

    Enumerates the Hermite basis of ``span + modulus Z^K``, whose pivots
    divide ``modulus``; each residue class is produced exactly once.
    """
    K = len(gens[0])
    stacked = IntMatrix.from_rows(list(gens) + [[modulus * int(i == j) for j in range(K)] for i in range(K)], K)
    h = [r for r in hnf(stacked).h.rows if any(r)]
    ranges = []
    for row in h:
        piv = next(x for x in row if x)
        ranges.append(modulus // piv)
    count = 1
    for n in ranges:
        count *= n
    if budget is not None and count > budget:
        raise BudgetExceeded(f"{count} residues mod {modulus} exceed the budget of {budget}")

    def rec(i, acc):
        if i == len(h):
            yield tuple(x % modulus for x in acc)
            return
        row = h[i]
        for cf in range(ranges[i]):
            yield from rec(i + 1, [a + cf * x for a, x in zip(acc, row)])

    return count, rec(0, [0] * K)


def _modulus_obstructs(cl: ConstraintLattice, modulus: int, budget: Optional[int]) -> Optional[ObstructionCert]:
    units = {1 % modulus, (-1) % modulus}
    if not cl.node_data:
        # single point at the origin
        data = [[0] * sum(cl.source[a].rank ** 2 for a in cl.source.nodes)]
    else:
        data = cl.node_data
    if not data[0]:
        return None  # rank-zero diagrams: the empty map is an isomorphism
    count, it = _residues(data, modulus, budget)
    for res in it:
        if all(d in units for _, d in _data_dets(cl, res, modulus)):
            return None
    return ObstructionCert(modulus, count)


def obstruction_search(cl: ConstraintLattice, moduli: Iterable[int],
                       budget: Optional[int] = DEFAULT_RESIDUE_BUDGET,
                       skipped: Optional[list] = None) -> Optional[ObstructionCert]:
    """First modulus in ``moduli`` whose residues all miss unit determinants.

    Moduli whose residue count exceeds ``budget`` are skipped, logged, and
    appended to ``skipped`` when a list is supplied.
    """
    for m in moduli:
        if m < 2:
            raise ValueError("moduli must be at least 2")
        try:
            cert = _modulus_obstructs(cl, m, budget)
        except BudgetExceeded as exc:
            log.info("%s", exc)
            if skipped is not None:
                skipped.append(m)
            continue
        if cert is not None:
            return cert
    return None


def verify_obstruction(cl: ConstraintLattice, cert: ObstructionCert) -> bool:
    """Brute-force re-check: every coefficient vector mod m over the lattice basis.

    Node matrices are rebuilt from ambient images for each point, so this
    shares nothing with the residue enumeration beyond the lattice basis.
    """
    m = cert.modulus
    k = cl.basis.nrows
    units = {1 % m, (-1) % m}
    for coeffs in product(range(m), repeat=k):
        mats = node_matrices(cl, cl.point(coeffs))
        if all(M.det() % m in units for M in mats.values()):
            return False
    return True


def modulus_schedule(exponent: int, max_modulus: int) -> list:
    """Divisors > 1 of ``exponent`` first, then the other integers up to ``max_modulus``."""
    first = [d for d in range(2, min(exponent, max_modulus) + 1) if exponent % d == 0]
    rest = [m for m in range(2, max_modulus + 1) if m not in first]
    return first + rest


def snf_seed(b: InclusionDiagram, c: InclusionDiagram) -> Optional[dict]:
    """Candidate ambient map for two-node chains built from adapted Smith bases."""
    if len(b.nodes) != 2:
        return None
    lo, hi = b.poset.pairs()[0]
    bases = []
    for d in (b, c):
        P = coordinate_matrix(d[hi], d[lo])
        r = d[hi].rank
        if P.nrows == 0:
            R = IntMatrix.identity(r)
        else:
            R = snf(P).r
        bases.append(R)
    Rb, Rc = bases
    if Rb.shape != Rc.shape:
        return None
    # source basis S = Rb S', target T = Rc T'; send S'_j to T'_j
    return {"coords": Rb @ _unimodular_inverse(Rc)}


def _unimodular_inverse(m: IntMatrix) -> IntMatrix:
    n = m.nrows
    rows = []
    for i in range(n):
        e = [int(i == j) for j in range(n)]
        x = solve_in_row_lattice(m, e)
        if x is None:
            raise ValueError("matrix is not unimodular")
        rows.append(x)
    return IntMatrix(tuple(rows), n)


def _seed_candidates(cl: ConstraintLattice, seeds) -> Iterable[IsoWitness]:
    b, c = cl.source, cl.target
    # ambient identity, when it happens to fit
    if b.ambient_dim == c.ambient_dim:
        ident = IntMatrix.identity(b.ambient_dim)
        w = witness_from_ambient(cl, {t: ident for t in cl.tops})
        if w is not None:
            yield w
    s = snf_seed(b, c)
    if s is not None:
        X = s["coords"]  # row convention, in top coordinates
        point = tuple(x for row in X.transpose().rows for x in row)
        try:
            mats = node_matrices(cl, point)
        except ValueError:
            mats = None
        if mats is not None and all(abs(m.det()) == 1 for m in mats.values()):
            w = IsoWitness(mats, point)
            if verify_witness(b, c, w):
                yield w
    for maps in seeds or ():
        w = witness_from_ambient(cl, maps)
        if w is not None:
            yield w


def decide_iso(b: InclusionDiagram, c: InclusionDiagram,
               coeff_bound: int = DEFAULT_COEFF_BOUND,
               max_modulus: int = DEFAULT_MAX_MODULUS,
               seeds: Optional[Sequence[Mapping]] = None,
               residue_budget: Optional[int] = DEFAULT_RESIDUE_BUDGET) -> IsoVerdict:
    """Screen invariants, then alternate witness shells with obstruction moduli.

    ``seeds`` are optional ambient maps (one row-convention matrix per
    maximal node) tried before the enumeration.  Every returned witness or
    certificate has already passed its verification routine.
    """
    _check_same_poset(b, c)
    mismatch = invariant_screen(b, c)
    if mismatch is not None:
        return IsoVerdict("NOT-ISO", mismatch=mismatch)
    cl = constraint_lattice(b, c)
    for w in _seed_candidates(cl, seeds):
        return IsoVerdict("ISO", witness=w)
    exponent = screen_exponent(b)
    moduli = modulus_schedule(exponent, max_modulus)
    skipped: list = []
    steps = max(coeff_bound + 1, len(moduli))
    for step in range(steps):
        if step <= coeff_bound:
            w = _witness_in_shell(cl, step)
            if w is not None:
                return IsoVerdict("ISO", witness=w)
        if step < len(moduli):
            cert = obstruction_search(cl, [moduli[step]], residue_budget, skipped)
            if cert is not None:
                return IsoVerdict("NOT-ISO", certificate=cert)
    return IsoVerdict("INCONCLUSIVE", coeff_bound=coeff_bound, max_modulus=max_modulus,
                      skipped_moduli=tuple(skipped))
