"""Exact rational linear algebra.

Scalars are :class:`fractions.Fraction`. Vectors are plain tuples of
fractions. :class:`RatMatrix` is an immutable dense row-major matrix.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

Rational = Fraction
RatVector = tuple  # tuple[Fraction, ...]
Number = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE = Fraction(1)


class Infeasible(Exception):
    """Raised by :func:`solve` when the system has no solution."""


def as_rational(value: Number) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def vec(values: Iterable[Number]) -> RatVector:
    return tuple(as_rational(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v) if a and b), ZERO)


def vadd(u: Sequence[Fraction], v: Sequence[Fraction]) -> RatVector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Sequence[Fraction], v: Sequence[Fraction]) -> RatVector:
    return tuple(a - b for a, b in zip(u, v))


def vscale(s: Number, v: Sequence[Fraction]) -> RatVector:
    s = as_rational(s)
    return tuple(s * a for a in v)


def kron_vec(u: Sequence[Fraction], v: Sequence[Fraction]) -> RatVector:
    return tuple(a * b for a in u for b in v)


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[tuple[int, ...], Fraction]:
    """Scale ``v`` by a positive rational to coprime integers.

    Returns the integer vector and the positive factor used. The zero
    vector is returned unchanged with factor 1.
    """
    den = 1
    for q in v:
        den = den * q.denominator // gcd(den, q.denominator)
    ints = [int(q * den) for q in v]
    g = 0
    for k in ints:
        g = gcd(g, k)
    if g == 0:
        return tuple(ints), ONE
    return tuple(k // g for k in ints), Fraction(den, g)


class RatMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("_rows", "_ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable[Number]], ncols: int | None = None):
        data = tuple(tuple(as_rational(v) for v in row) for row in rows)
        if ncols is None:
            if not data:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(data[0])
        for row in data:
            if len(row) != ncols:
                raise ValueError("ragged rows")
        self._rows = data
        self._ncols = ncols
        self._hash = None

    @classmethod
    def _trusted(cls, rows: tuple, ncols: int) -> "RatMatrix":
        m = cls.__new__(cls)
        m._rows = rows
        m._ncols = ncols
        m._hash = None
        return m

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RatMatrix":
        return cls._trusted(tuple((ZERO,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls._trusted(
            tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Number]], nrows: int | None = None) -> "RatMatrix":
        if not columns:
            if nrows is None:
                raise ValueError("nrows is required for a matrix with no columns")
            return cls._trusted(tuple(() for _ in range(nrows)), 0)
        return cls._trusted(
            tuple(tuple(as_rational(v) for v in r) for r in zip(*columns)), len(columns)
        )

    @classmethod
    def outer(cls, u: Sequence[Fraction], v: Sequence[Fraction]) -> "RatMatrix":
        return cls._trusted(tuple(tuple(a * b for b in v) for a in u), len(v))

    @property
    def rows(self) -> tuple:
        return self._rows

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self._rows), self._ncols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> RatVector:
        return self._rows[i]

    def col(self, j: int) -> RatVector:
        return tuple(r[j] for r in self._rows)

    @property
    def T(self) -> "RatMatrix":
        if not self._rows:
            return RatMatrix._trusted(tuple(() for _ in range(self._ncols)), 0)
        return RatMatrix._trusted(tuple(zip(*self._rows)), len(self._rows))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._ncols, self._rows))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(v) for v in r) for r in self._rows)
        return f"RatMatrix({self.nrows}x{self.ncols}: [{body}])"

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix._trusted(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows)),
            self._ncols,
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix._trusted(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows)),
            self._ncols,
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._trusted(tuple(tuple(-a for a in r) for r in self._rows), self._ncols)

    def scale(self, s: Number) -> "RatMatrix":
        s = as_rational(s)
        return RatMatrix._trusted(tuple(tuple(s * a for a in r) for r in self._rows), self._ncols)

    def __mul__(self, s: Number) -> "RatMatrix":
        return self.scale(s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            if self._ncols != other.nrows:
                raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
            cols = other.T._rows
            return RatMatrix._trusted(
                tuple(tuple(_sparse_dot(r, c) for c in cols) for r in self._rows),
                other.ncols,
            )
        v = tuple(other)
        if len(v) != self._ncols:
            raise ValueError(f"shape mismatch: {self.shape} @ vector of length {len(v)}")
        return tuple(_sparse_dot(r, v) for r in self._rows)

    def vecmat(self, v: Sequence[Fraction]) -> RatVector:
        """Row vector times matrix, ``v @ self``."""
        if len(v) != self.nrows:
            raise ValueError(f"shape mismatch: vector of length {len(v)} @ {self.shape}")
        out = [ZERO] * self._ncols
        for coef, r in zip(v, self._rows):
            if coef:
                for j, a in enumerate(r):
                    if a:
                        out[j] += coef * a
        return tuple(out)

    def kron(self, other: "RatMatrix") -> "RatMatrix":
        rows = []
        for r in self._rows:
            for s in other._rows:
                rows.append(tuple(a * b for a in r for b in s))
        return RatMatrix._trusted(tuple(rows), self._ncols * other.ncols)

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch")
        return RatMatrix._trusted(
            tuple(r + s for r, s in zip(self._rows, other._rows)), self._ncols + other.ncols
        )

    def vstack(self, other: "RatMatrix") -> "RatMatrix":
        if self._ncols != other.ncols:
            raise ValueError("column count mismatch")
        return RatMatrix._trusted(self._rows + other._rows, self._ncols)

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "RatMatrix":
        rsel = self._rows if rows is None else [self._rows[i] for i in rows]
        if cols is None:
            return RatMatrix._trusted(tuple(rsel), self._ncols)
        return RatMatrix._trusted(tuple(tuple(r[j] for j in cols) for r in rsel), len(cols))

    def is_zero(self) -> bool:
        return all(not a for r in self._rows for a in r)

    def _same_shape(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")


def _sparse_dot(r, c) -> Fraction:
    s = ZERO
    for a, b in zip(r, c):
        if a and b:
            s += a * b
    return s


def rref(M: RatMatrix) -> tuple[RatMatrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot columns.

    Pivots are taken as the first nonzero entry in column order and each
    pivot row is normalized immediately.
    """
    rows = [list(r) for r in M.rows]
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(M.ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        if piv != 1:
            rows[r] = [a / piv for a in rows[r]]
        prow = rows[r]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b if b else a for a, b in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
    return RatMatrix._trusted(tuple(tuple(x) for x in rows), M.ncols), tuple(pivots)


def rank(M: RatMatrix) -> int:
    if M.nrows == 0 or M.ncols == 0:
        return 0
    return len(rref(M)[1])


def kernel_basis(M: RatMatrix) -> list[RatVector]:
    """Basis of the right null space, one vector per free column."""
    n = M.ncols
    if M.nrows == 0:
        return [tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n)]
    R, pivots = rref(M)
    pivset = set(pivots)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for k, p in enumerate(pivots):
            v[p] = -R[k, f]
        basis.append(tuple(v))
    return basis


def solve(M: RatMatrix, b: Sequence[Number]) -> RatVector:
    """One exact solution of ``M x = b``; free variables are set to zero.

    Raises :class:`Infeasible` if the system is inconsistent.
    """
    b = vec(b)
    if len(b) != M.nrows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {M.nrows}")
    n = M.ncols
    aug = RatMatrix._trusted(tuple(r + (bi,) for r, bi in zip(M.rows, b)), n + 1)
    R, pivots = rref(aug)
    if pivots and pivots[-1] == n:
        raise Infeasible("inconsistent linear system")
    x = [ZERO] * n
    for k, p in enumerate(pivots):
        x[p] = R[k, n]
    return tuple(x)


def inverse(M: RatMatrix) -> RatMatrix:
    n = M.nrows
    if M.ncols != n:
        raise ValueError("inverse of a non-square matrix")
    R, pivots = rref(M.hstack(RatMatrix.identity(n)))
    if pivots[:n] != tuple(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return R.submatrix(cols=range(n, 2 * n))


def pseudo_inverse(M: RatMatrix) -> RatMatrix:
    """Moore-Penrose pseudoinverse via a rank factorization ``M = B C``."""
    m, n = M.shape
    R, pivots = rref(M)
    r = len(pivots)
    if r == 0:
        return RatMatrix.zeros(n, m)
    C = R.submatrix(rows=range(r))
    B = M.submatrix(cols=pivots)
    Ct = C.T
    Bt = B.T
    return Ct @ inverse(C @ Ct) @ inverse(Bt @ B) @ Bt


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    work = [list(r) for r in rows if any(r)]
    if not work:
        return 0
    ncols = len(work[0])
    rk = 0
    prev = 1
    for c in range(ncols):
        p = next((i for i in range(rk, len(work)) if work[i][c]), None)
        if p is None:
            continue
        work[rk], work[p] = work[p], work[rk]
        piv = work[rk]
        pv = piv[c]
        for i in range(rk + 1, len(work)):
            row = work[i]
            f = row[c]
            row_new = [(pv * row[j] - f * piv[j]) // prev for j in range(ncols)]
            work[i] = row_new
        prev = pv
        rk += 1
        if rk == len(work):
            break
    return rk
