"""Exact integer matrix algebra.

Everything here works on Python ints, so no intermediate value can overflow.
Matrices are immutable; the normal-form routines return their unimodular
transforms alongside the reduced matrix.

Conventions
-----------
* Vectors are row vectors.  The row lattice of ``m`` is the set of ``x @ m``
  for integer row vectors ``x``.
* Hermite normal form is row style: positive pivots, zeros below each pivot,
  entries above a pivot reduced into ``[0, pivot)``, zero rows at the bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

__all__ = [
    "IntMatrix",
    "HnfResult",
    "SnfResult",
    "hnf",
    "snf",
    "solve_in_row_lattice",
    "left_kernel_basis",
    "is_hnf",
    "parse_matrix",
    "format_matrix",
]


@dataclass(frozen=True)
class IntMatrix:
    """Dense matrix of arbitrary-precision integers.

    ``ncols`` is stored explicitly so that matrices with zero rows still
    know their width.
    """

    rows: tuple[tuple[int, ...], ...]
    ncols: int

    def __post_init__(self):
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError(f"row of length {len(r)} in matrix with {self.ncols} columns")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], ncols: Optional[int] = None) -> IntMatrix:
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix without rows")
            ncols = len(rows[0])
        return cls(rows, ncols)

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> IntMatrix:
        return cls(tuple((0,) * ncols for _ in range(nrows)), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx):
        if isinstance(idx, tuple):
            i, j = idx
            return self.rows[i][j]
        return self.rows[idx]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
        return IntMatrix(
            tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows),
            other.ncols,
        )

    def __neg__(self) -> IntMatrix:
        return IntMatrix(tuple(tuple(-x for x in r) for r in self.rows), self.ncols)

    def transpose(self) -> IntMatrix:
        if not self.rows:
            return IntMatrix.zeros(self.ncols, 0)
        return IntMatrix(tuple(zip(*self.rows)), self.nrows)

    T = property(transpose)

    def vstack(self, other: IntMatrix) -> IntMatrix:
        if self.ncols != other.ncols:
            raise ValueError("column mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.ncols)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        """Row vector times matrix."""
        if len(v) != self.nrows:
            raise ValueError(f"vector of length {len(v)} against {self.nrows} rows")
        return tuple(
            sum(x * r[j] for x, r in zip(v, self.rows)) for j in range(self.ncols)
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        n = self.nrows
        if n != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        if n == 0:
            return 1
        a = [list(r) for r in self.rows]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __repr__(self):
        return f"IntMatrix({self.tolist()!r}, ncols={self.ncols})"


@dataclass(frozen=True)
class HnfResult:
    h: IntMatrix
    u: IntMatrix

    @property
    def rank(self) -> int:
        return sum(1 for r in self.h.rows if any(r))


@dataclass(frozen=True)
class SnfResult:
    d: IntMatrix
    l: IntMatrix
    r: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.d[i, i] for i in range(min(self.d.shape)))


def _sub_row(a, i, k, q):
    # row_i -= q * row_k
    if q:
        ri, rk = a[i], a[k]
        for j in range(len(ri)):
            ri[j] -= q * rk[j]


def hnf(m: IntMatrix) -> HnfResult:
    """Row Hermite normal form with a unimodular ``u`` such that ``u @ m == h``."""
    nr, nc = m.shape
    a = [list(r) for r in m.rows]
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    r = 0
    for c in range(nc):
        if r == nr:
            break
        while True:
            live = [i for i in range(r, nr) if a[i][c]]
            if not live:
                break
            p = min(live, key=lambda i: (abs(a[i][c]), i))
            a[r], a[p] = a[p], a[r]
            u[r], u[p] = u[p], u[r]
            clean = True
            for i in range(r + 1, nr):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    _sub_row(a, i, r, q)
                    _sub_row(u, i, r, q)
                    if a[i][c]:
                        clean = False
            if clean:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        piv = a[r][c]
        for i in range(r):
            q = a[i][c] // piv
            _sub_row(a, i, r, q)
            _sub_row(u, i, r, q)
        r += 1
    return HnfResult(IntMatrix.from_rows(a, nc), IntMatrix.from_rows(u, nr))


def is_hnf(h: IntMatrix) -> bool:
    """Canonical row-HNF predicate, including zero rows at the bottom."""
    last = -1
    seen_zero = False
    pivots = []
    for i, row in enumerate(h.rows):
        nz = [j for j, x in enumerate(row) if x]
        if not nz:
            seen_zero = True
            continue
        if seen_zero:
            return False
        c = nz[0]
        if c <= last or row[c] <= 0:
            return False
        pivots.append((i, c))
        last = c
    for i, c in pivots:
        piv = h[i, c]
        for k in range(h.nrows):
            if k < i and not 0 <= h[k, c] < piv:
                return False
            if k > i and h[k, c] != 0:
                return False
    return True


def snf(m: IntMatrix) -> SnfResult:
    """Smith normal form with unimodular ``l``, ``r`` such that ``l @ m @ r == d``."""
    nr, nc = m.shape
    a = [list(row) for row in m.rows]
    L = [[int(i == j) for j in range(nr)] for i in range(nr)]
    # R is kept transposed so column operations become row operations.
    Rt = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        Rt[j], Rt[k] = Rt[k], Rt[j]

    def sub_col(j, k, q):
        # col_j -= q * col_k
        if q:
            for row in a:
                row[j] -= q * row[k]
            _sub_row(Rt, j, k, q)

    for t in range(min(nr, nc)):
        cands = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not cands:
            break
        _, i0, j0 = min(cands)
        a[t], a[i0] = a[i0], a[t]
        L[t], L[i0] = L[i0], L[t]
        swap_cols(t, j0)
        while True:
            for i in range(t + 1, nr):
                q = a[i][t] // a[t][t]
                _sub_row(a, i, t, q)
                _sub_row(L, i, t, q)
            for j in range(t + 1, nc):
                sub_col(j, t, a[t][j] // a[t][t])
            rest = [(abs(a[i][t]), i, t) for i in range(t + 1, nr) if a[i][t]]
            rest += [(abs(a[t][j]), t, j) for j in range(t + 1, nc) if a[t][j]]
            if rest:
                _, i0, j0 = min(rest)
                if i0 != t:
                    a[t], a[i0] = a[i0], a[t]
                    L[t], L[i0] = L[i0], L[t]
                else:
                    swap_cols(t, j0)
                continue
            piv = a[t][t]
            bad = next(
                (i for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % piv),
                None,
            )
            if bad is None:
                break
            # fold the offending row into the pivot row; the next pass
            # produces a strictly smaller pivot
            _sub_row(a, t, bad, -1)
            _sub_row(L, t, bad, -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            L[t] = [-x for x in L[t]]
    R = IntMatrix.from_rows(Rt, nc).transpose()
    return SnfResult(IntMatrix.from_rows(a, nc), IntMatrix.from_rows(L, nr), R)


def solve_in_row_lattice(m: IntMatrix, v: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Return integer ``x`` with ``x @ m == v``, or ``None`` if ``v`` is not in the row lattice."""
    if len(v) != m.ncols:
        raise ValueError(f"vector of length {len(v)} against {m.ncols} columns")
    res = hnf(m)
    h = res.h
    resid = list(v)
    y = [0] * m.nrows
    for i, row in enumerate(h.rows):
        c = next((j for j, x in enumerate(row) if x), None)
        if c is None:
            break
        q, rem = divmod(resid[c], row[c])
        if rem:
            return None
        y[i] = q
        for j in range(c, m.ncols):
            resid[j] -= q * row[j]
    if any(resid):
        return None
    return res.u.apply(y) if m.nrows else ()


def left_kernel_basis(m: IntMatrix) -> IntMatrix:
    """Basis (as rows) of the integer left kernel ``{x : x @ m == 0}``."""
    res = hnf(m)
    rank = res.rank
    return IntMatrix(res.u.rows[rank:], m.nrows)


def parse_matrix(text: str) -> IntMatrix:
    """Parse the ``rows cols`` header format followed by one line per row."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        nr, nc = (int(x) for x in lines[0].split())
    except ValueError:
        raise ValueError(f"bad matrix header: {lines[0]!r}") from None
    body = lines[1:]
    if len(body) != nr:
        raise ValueError(f"expected {nr} rows, found {len(body)}")
    rows = []
    for k, ln in enumerate(body):
        row = [int(x) for x in ln.split()]
        if len(row) != nc:
            raise ValueError(f"row {k} has {len(row)} entries, expected {nc}")
        rows.append(row)
    return IntMatrix.from_rows(rows, nc)


def format_matrix(m: IntMatrix) -> str:
    lines = [f"{m.nrows} {m.ncols}"]
    lines += [" ".join(str(x) for x in r) for r in m.rows]
    return "\n".join(lines) + "\n"
