"""Exact rational linear algebra on small dense matrices.

Row reduction, nullspace extraction and determinants over
arbitrary-precision rationals.  Every operation here is exact: no
floating point enters at any stage, so rank and nullity statements
produced downstream are mathematical facts rather than numerical
estimates.

Determinants use fraction-free Bareiss elimination (integer
intermediates of bounded size after clearing denominators); reduced
row-echelon form uses classical exact Gauss-Jordan with
first-nonzero partial pivoting, ties broken by lowest row index.

All public operations are pure functions on immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

try:  # pragma: no cover - exercised implicitly by the whole suite
    from gmpy2 import mpq as _mpq

    def rational(num=0, den=1):
        """Exact rational in lowest terms with positive denominator."""
        return _mpq(num, den)

except ImportError:  # pragma: no cover - fallback backend
    from fractions import Fraction as _Fraction

    def rational(num=0, den=1):
        """Exact rational in lowest terms with positive denominator."""
        return _Fraction(num, den)


_ZERO = rational(0)
_ONE = rational(1)


class NonSquareError(ValueError):
    """Raised when a square-only operation receives a rectangular matrix."""


def as_rational(x):
    """Coerce ints, rational strings like '3/7', and rationals to the exact type."""
    if isinstance(x, str):
        if "/" in x:
            num, den = x.split("/", 1)
            return rational(int(num), int(den))
        return rational(int(x))
    return rational(x)


@dataclass(frozen=True)
class QMatrix:
    """Dense row-major matrix of arbitrary-precision rationals.

    Immutable: `entries` is a flat tuple of length rows * cols.
    """

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"entries has length {len(self.entries)}, "
                f"expected {self.rows * self.cols}"
            )

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "QMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        flat = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            flat.extend(as_rational(v) for v in r)
        return QMatrix(nrows, ncols, tuple(flat))

    @staticmethod
    def identity(n: int) -> "QMatrix":
        return QMatrix(
            n, n, tuple(_ONE if i == j else _ZERO for i in range(n) for j in range(n))
        )

    @staticmethod
    def zeros(rows: int, cols: int) -> "QMatrix":
        return QMatrix(rows, cols, (_ZERO,) * (rows * cols))

    # -- accessors ------------------------------------------------------

    def at(self, i: int, j: int):
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_lists(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    # -- algebra (small helpers used by tests and callers) --------------

    def matvec(self, x: Sequence) -> list:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        xs = [as_rational(v) for v in x]
        out = []
        for i in range(self.rows):
            base = i * self.cols
            acc = _ZERO
            for j, xv in enumerate(xs):
                if xv:
                    acc += self.entries[base + j] * xv
            out.append(acc)
        return out

    def matmul(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        flat = []
        for i in range(self.rows):
            arow = self.row(i)
            for j in range(other.cols):
                acc = _ZERO
                for k in range(self.cols):
                    acc += arow[k] * other.at(k, j)
                flat.append(acc)
        return QMatrix(self.rows, other.cols, tuple(flat))


# ---------------------------------------------------------------------------
# Sparse elimination core.
#
# Rows are dicts {column: nonzero rational}.  This is an internal
# representation only; the public contract is dense QMatrix in / dense
# QMatrix out.  The certifier's truncated systems are extremely sparse
# (a handful of entries per row), and dict rows make the difference
# between seconds and hours at high truncation orders.
# ---------------------------------------------------------------------------


def sparse_rref(rows: list, ncols: int):
    """Gauss-Jordan elimination on sparse dict rows (mutated in place).

    Returns (pivots, pivot_rows, order) where `pivots` lists pivot
    columns in increasing order, `pivot_rows[k]` is the fully reduced
    row whose leading entry (equal to 1) sits at `pivots[k]`, and
    `order[k]` is the original index of the row supplying that pivot.

    Pivot selection: for each column left to right, the not-yet-used
    row of lowest original index with a nonzero entry in that column.
    """
    nrows = len(rows)
    unused = list(range(nrows))
    pivots = []
    pivot_rows = []
    order = []
    for c in range(ncols):
        sel = None
        for idx in unused:
            if c in rows[idx]:
                sel = idx
                break
        if sel is None:
            continue
        unused.remove(sel)
        prow = rows[sel]
        inv = _ONE / prow[c]
        if inv != 1:
            prow = {k: v * inv for k, v in prow.items()}
            rows[sel] = prow
        # Eliminate column c from every other row (Jordan: above and below).
        for idx in range(nrows):
            if idx == sel:
                continue
            r = rows[idx]
            f = r.get(c)
            if f is None:
                continue
            for k, v in prow.items():
                if k == c:
                    del r[c]
                    continue
                acc = r.get(k, _ZERO) - f * v
                if acc:
                    r[k] = acc
                elif k in r:
                    del r[k]
        pivots.append(c)
        pivot_rows.append(prow)
        order.append(sel)
    return pivots, pivot_rows, order


def sparse_nullspace(pivots: list, pivot_rows: list, ncols: int) -> list:
    """Nullspace basis (one sparse dict per free column) from rref data."""
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        vec = {f: _ONE}
        for pc, prow in zip(pivots, pivot_rows):
            v = prow.get(f)
            if v:
                vec[pc] = -v
        basis.append(vec)
    return basis


def _to_sparse_rows(m: QMatrix) -> list:
    rows = []
    for i in range(m.rows):
        base = i * m.cols
        rows.append(
            {j: m.entries[base + j] for j in range(m.cols) if m.entries[base + j]}
        )
    return rows


def rref(m: QMatrix):
    """Reduced row-echelon form.

    Returns (reduced, rank, pivots).  Pivot rows come first in
    `reduced`, ordered by pivot column; zero rows fill the remainder.
    """
    rows = _to_sparse_rows(m)
    pivots, pivot_rows, _ = sparse_rref(rows, m.cols)
    flat = []
    for prow in pivot_rows:
        flat.extend(prow.get(j, _ZERO) for j in range(m.cols))
    for _ in range(m.rows - len(pivot_rows)):
        flat.extend((_ZERO,) * m.cols)
    return QMatrix(m.rows, m.cols, tuple(flat)), len(pivots), pivots


def nullspace_basis(m: QMatrix) -> list:
    """Exact basis of ker(m): list of rational vectors (length cols).

    One vector per free column; each satisfies m . x = 0 exactly.
    """
    rows = _to_sparse_rows(m)
    pivots, pivot_rows, _ = sparse_rref(rows, m.cols)
    sparse = sparse_nullspace(pivots, pivot_rows, m.cols)
    return [[vec.get(j, _ZERO) for j in range(m.cols)] for vec in sparse]


def determinant(m: QMatrix):
    """Exact determinant via fraction-free Bareiss elimination.

    Denominators are cleared row by row first, so all intermediates
    are integers whose size Bareiss keeps polynomially bounded.
    """
    if m.rows != m.cols:
        raise NonSquareError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    if n == 0:
        return _ONE

    a = []
    denom = 1
    for i in range(n):
        row = m.row(i)
        scale = 1
        for v in row:
            scale = scale * v.denominator // math.gcd(scale, int(v.denominator))
        denom *= scale
        a.append([int(v.numerator) * (scale // int(v.denominator)) for v in row])

    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return rational(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            rowi = a[i]
            rowk = a[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * pivot - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = pivot
    return rational(sign * a[n - 1][n - 1], denom)
