"""Finitely generated abelian groups as lattices in Z^n.

A subgroup of Z^n is stored by its canonical Hermite basis, so two
generating sets of the same subgroup produce equal ``Lattice`` values.
Quotients never exist as objects; only their invariants are computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterator, Optional, Sequence

from .linalg import IntMatrix, hnf, left_kernel_basis, snf, solve_in_row_lattice

__all__ = [
    "Lattice",
    "GroupInvariants",
    "AmbientFunctional",
    "ImagePair",
    "RankOneCancelInstance",
    "RankOneReport",
    "ContainmentError",
    "SurjectivityError",
    "lattice_from_generators",
    "member",
    "contains",
    "coordinates",
    "quotient_invariants",
    "pair_iso_decide",
    "kernel_of_functional",
    "image_of_functional",
    "theorem1_images",
    "split_check",
    "common_complement_search",
    "stable_range_witness",
    "rank_one_cancellation",
    "zigzag",
    "shell",
    "scan",
]


class ContainmentError(ValueError):
    """A required subgroup containment or membership does not hold."""


class SurjectivityError(ValueError):
    """A functional that must map onto Z does not."""


@dataclass(frozen=True)
class Lattice:
    """Subgroup of Z^n held by its canonical Hermite basis.

    ``generators`` remembers the rows the lattice was built from (for error
    reports); it takes no part in equality.
    """

    ambient_dim: int
    basis: IntMatrix
    generators: tuple = field(default=(), compare=False, repr=False)

    def spanning_rows(self) -> tuple:
        return self.generators or self.basis.rows

    @property
    def rank(self) -> int:
        return self.basis.nrows

    def __contains__(self, v) -> bool:
        return member(self, v)

    def __str__(self):
        gens = ", ".join("(" + ",".join(map(str, r)) + ")" for r in self.basis.rows)
        return f"<{gens}>" if gens else "0"


def lattice_from_generators(n: int, gens) -> Lattice:
    if not isinstance(gens, IntMatrix):
        gens = IntMatrix.from_rows(gens, n)
    if gens.ncols != n:
        raise ValueError(f"generators have {gens.ncols} columns, ambient dimension is {n}")
    h = hnf(gens).h
    return Lattice(n, IntMatrix(tuple(r for r in h.rows if any(r)), n),
                   tuple(r for r in gens.rows if any(r)))


def full_lattice(n: int) -> Lattice:
    return Lattice(n, IntMatrix.identity(n))


def zero_lattice(n: int) -> Lattice:
    return Lattice(n, IntMatrix.zeros(0, n))


def _check_dim(l: Lattice, v: Sequence[int]):
    if len(v) != l.ambient_dim:
        raise ValueError(f"vector of length {len(v)} in Z^{l.ambient_dim}")


def coordinates(l: Lattice, v: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Coordinates of ``v`` in the basis of ``l``, or None if ``v`` is outside."""
    _check_dim(l, v)
    if l.rank == 0:
        return () if not any(v) else None
    return solve_in_row_lattice(l.basis, v)


def member(l: Lattice, v: Sequence[int]) -> bool:
    return coordinates(l, v) is not None


def contains(big: Lattice, small: Lattice) -> bool:
    if big.ambient_dim != small.ambient_dim:
        raise ValueError("lattices live in different ambient spaces")
    return all(member(big, r) for r in small.basis.rows)


def sum_lattice(*ls: Lattice) -> Lattice:
    n = ls[0].ambient_dim
    return lattice_from_generators(n, IntMatrix([r for l in ls for r in l.basis.rows], n))


def coordinate_matrix(big: Lattice, small: Lattice) -> IntMatrix:
    """Rows are the coordinates of ``small``'s basis in ``big``'s basis."""
    rows = []
    for r in small.basis.rows:
        x = coordinates(big, r)
        if x is None:
            raise ContainmentError(f"generator {r} of the smaller lattice is not in {big}")
        rows.append(x)
    return IntMatrix(tuple(rows), big.rank)


@dataclass(frozen=True)
class GroupInvariants:
    """Free rank plus invariant factors (each > 1, each dividing the next)."""

    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        for t in self.torsion:
            if t <= 1:
                raise ValueError("torsion coefficients must exceed 1")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion chain broken: {a} does not divide {b}")

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def quotient_invariants(big: Lattice, small: Lattice) -> GroupInvariants:
    """Invariants of ``big / small`` via the Smith form of the coordinate matrix."""
    coords = coordinate_matrix(big, small)
    if coords.nrows == 0 or coords.ncols == 0:
        return GroupInvariants(big.rank - small.rank)
    diag = snf(coords).diagonal
    return GroupInvariants(big.rank - small.rank, tuple(d for d in diag if d > 1))


def pair_iso_decide(a0: Lattice, a1: Lattice, b0: Lattice, b1: Lattice) -> bool:
    """Complete isomorphism test for two-node inclusion diagrams ``a0 <= a1`` and ``b0 <= b1``."""
    for lo, hi in ((a0, a1), (b0, b1)):
        if not contains(hi, lo):
            raise ContainmentError(f"{lo} is not contained in {hi}")
    if a1.rank != b1.rank:
        return False
    return quotient_invariants(a1, a0) == quotient_invariants(b1, b0)


@dataclass(frozen=True)
class AmbientFunctional:
    """The map ``x -> coeffs . x`` from Z^n to Z."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in coeffs))

    def __call__(self, v: Sequence[int]) -> int:
        if len(v) != len(self.coeffs):
            raise ValueError(f"functional on Z^{len(self.coeffs)} applied to vector of length {len(v)}")
        return sum(a * b for a, b in zip(self.coeffs, v))

    @property
    def dim(self) -> int:
        return len(self.coeffs)


def image_of_functional(l: Lattice, f: AmbientFunctional) -> Lattice:
    """f(l) as a subgroup of Z."""
    if f.dim != l.ambient_dim:
        raise ValueError("functional and lattice dimensions differ")
    g = 0
    for r in l.basis.rows:
        g = gcd(g, f(r))
    return lattice_from_generators(1, IntMatrix(((g,),), 1))


def kernel_of_functional(l: Lattice, f: AmbientFunctional) -> Lattice:
    if f.dim != l.ambient_dim:
        raise ValueError("functional and lattice dimensions differ")
    if l.rank == 0:
        return l
    vals = IntMatrix(tuple((f(r),) for r in l.basis.rows), 1)
    combos = left_kernel_basis(vals)
    if combos.nrows == 0:
        return zero_lattice(l.ambient_dim)
    return lattice_from_generators(l.ambient_dim, combos @ l.basis)


def is_surjective(l: Lattice, f: AmbientFunctional) -> bool:
    return image_of_functional(l, f).basis.rows == ((1,),)


@dataclass(frozen=True)
class ImagePair:
    f_of_ker_g: Lattice
    g_of_ker_f: Lattice
    subdirect_image: Lattice


def theorem1_images(a: Lattice, f: AmbientFunctional, g: AmbientFunctional) -> ImagePair:
    """Images f(ker g) and g(ker f) for two epimorphisms ``a -> Z``.

    The two images always coincide; a mismatch raises ArithmeticError,
    since it would mean the arithmetic here is broken.
    """
    for name, h in (("f", f), ("g", g)):
        if not is_surjective(a, h):
            raise SurjectivityError(f"{name} does not map {a} onto Z")
    fk = image_of_functional(kernel_of_functional(a, g), f)
    gk = image_of_functional(kernel_of_functional(a, f), g)
    sub = lattice_from_generators(2, IntMatrix(tuple((f(r), g(r)) for r in a.basis.rows), 2))
    if fk != gk:
        raise ArithmeticError(f"f(ker g) = {fk} differs from g(ker f) = {gk}")
    return ImagePair(fk, gk, sub)


def split_check(a: Lattice, k: Lattice, z: Sequence[int], f: Optional[AmbientFunctional] = None) -> bool:
    """Is ``a`` the internal direct sum of ``k`` and ``Z z``?

    With ``f`` given, also require ``k == ker f`` on ``a`` and ``f(z) == 1``.
    """
    if not contains(a, k):
        raise ContainmentError(f"{k} is not contained in {a}")
    if not member(a, z):
        raise ContainmentError(f"{tuple(z)} is not in {a}")
    zl = lattice_from_generators(a.ambient_dim, [z])
    total = sum_lattice(k, zl)
    # k meets Z z trivially exactly when the rank goes up by one
    ok = total == a and total.rank == k.rank + 1
    if f is not None:
        ok = ok and f(z) == 1 and kernel_of_functional(a, f) == k
    return ok


def zigzag(x: int) -> tuple[int, int]:
    """Sort key for the scan order 0, 1, -1, 2, -2, ..."""
    return (abs(x), x < 0)


def shell(dim: int, radius: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors of max-norm exactly ``radius``, in zigzag-lexicographic order."""
    if radius == 0:
        yield (0,) * dim
        return
    vals = sorted(range(-radius, radius + 1), key=zigzag)
    edge = (radius, -radius)

    def rec(prefix, seen):
        left = dim - len(prefix)
        if left == 0:
            yield tuple(prefix)
            return
        # the last free coordinate must reach the radius if nothing has yet
        for x in (edge if left == 1 and not seen else vals):
            prefix.append(x)
            yield from rec(prefix, seen or abs(x) == radius)
            prefix.pop()

    yield from rec([], False)


def scan(dim: int, bound: int, start: int = 0) -> Iterator[tuple[int, ...]]:
    """All vectors with max-norm <= bound, ascending by norm, then zigzag-lexicographic."""
    for r in range(start, bound + 1):
        yield from shell(dim, r)


def _det2(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def common_complement_search(s1: Lattice, s2: Lattice, bound: int) -> tuple[Optional[tuple[int, int]], bool]:
    """Search for ``v`` with ``<v>`` complementing both rank-one summands of Z^2.

    Returns ``(v, complete)``.  ``v`` is the first hit in scan order with
    entries bounded by ``bound``.  When ``v`` is None and ``complete`` is
    True, no complement exists at any size: the vectors complementing
    ``s1 = <g1>`` form the two lines ``+-v0 + t g1``, along which
    ``det(v, g2)`` is affine in ``t``, so existence is decided exactly.
    """
    for s in (s1, s2):
        if s.ambient_dim != 2 or s.rank != 1:
            raise ValueError("common_complement_search needs rank-1 subgroups of Z^2")
    g1, g2 = s1.basis[0], s2.basis[0]
    if gcd(*g1) != 1 or gcd(*g2) != 1:
        # a non-primitive subgroup is not a summand, so nothing complements it
        return None, True
    for v in scan(2, bound, start=1):
        if abs(_det2(v, g1)) == 1 and abs(_det2(v, g2)) == 1:
            return v, True
    exists = _complement_exists(g1, g2)
    return None, not exists


def _complement_exists(g1, g2) -> bool:
    # v0 with det(v0, g1) = 1 from Bezout on g1 = (a, b): det((x, y), (a, b)) = xb - ya
    a, b = g1
    x, y = _bezout_pair(b, -a)
    v0 = (x, y)
    D = _det2(g1, g2)
    for sgn in (1, -1):
        base = sgn * _det2(v0, g2)
        # det(sgn v0 + t g1, g2) = base + t D
        for target in (1, -1):
            if D == 0:
                if base == target:
                    return True
            elif (target - base) % D == 0:
                return True
    return False


def _bezout_pair(p: int, q: int) -> tuple[int, int]:
    """x, y with x p + y q = gcd(p, q) (assumed 1)."""
    old_r, r = p, q
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def stable_range_witness(a: int, b: int) -> Optional[int]:
    """Some k with a + b k a unit of Z, given gcd(a, b) = 1; None if there is none."""
    if gcd(a, b) != 1:
        raise ValueError(f"gcd({a}, {b}) != 1, so aZ + bZ is not Z")
    if b == 0:
        return 0  # a is already +-1
    hits = [(u - a) // b for u in (1, -1) if (u - a) % b == 0]
    return min(hits, key=zigzag) if hits else None


@dataclass(frozen=True)
class RankOneCancelInstance:
    """B = dZ inside Z, f(b, n) = (k/d) b + s n, so f sends the generator d of B to k."""

    d: int
    k: int
    s: int


@dataclass(frozen=True)
class RankOneReport:
    kernel: Lattice
    preimage: Lattice  # f1^{-1}(sZ) inside B, as a subgroup of Z
    m: int
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def rank_one_cancellation(inst: RankOneCancelInstance) -> RankOneReport:
    """Kernel of f : dZ + Z -> Z and the check that it is isomorphic to mB."""
    d, k, s = inst.d, inst.k, inst.s
    if d <= 0:
        raise ValueError("d must be positive")
    if gcd(k, s) != 1:
        raise SurjectivityError(f"gcd({k}, {s}) != 1: f is not onto Z")
    # B + Z inside Z^2 with basis (d, 0), (0, 1); f has values k and s on it
    ambient = Lattice(2, IntMatrix(((d, 0), (0, 1)), 2))
    # f(b, n) = (k b)/d + s n; scale by d to stay integral on Z^2
    scaled = AmbientFunctional((k, d * s))
    kernel = kernel_of_functional(ambient, scaled)
    # f1^{-1}(sZ): multiples t of d with k t in sZ
    if s == 0:
        preimage = lattice_from_generators(1, [[0]])
        m = 1
    else:
        t_gen = abs(s) // gcd(k, abs(s))
        preimage = lattice_from_generators(1, [[d * t_gen]])
        m = abs(s)
    gen = kernel.basis.rows[0] if kernel.rank else None
    checks = {"kernel rank 1": kernel.rank == 1}
    if s == 0:
        checks["kernel is 0 + Z"] = kernel == lattice_from_generators(2, [[0, 1]])
    else:
        checks["first coordinate is +-d*s"] = gen is not None and abs(gen[0]) == d * abs(s)
        checks["preimage equals sB"] = preimage == lattice_from_generators(1, [[d * s]])
        # projection to B is injective on the kernel and lands on the preimage
        checks["kernel projects onto preimage"] = (
            gen is not None and lattice_from_generators(1, [[gen[0]]]) == preimage
        )
    return RankOneReport(kernel, preimage, m, checks)
