"""Exact rational matrices, row reduction, kernels and algebra closure.

Everything here works over ``fractions.Fraction``; nothing is ever rounded.
Matrices are flattened row-major whenever they are treated as vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import StructuralError

Vector = tuple  # tuple of Fraction


def to_fraction(x) -> Fraction:
    """Parse an int, Fraction or ``"a/b"`` string. Floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


class RationalMatrix:
    """Immutable dense matrix with Fraction entries."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(to_fraction(x) for x in row) for row in rows)
        if not data or not data[0]:
            raise StructuralError("matrix must have at least one row and column")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise StructuralError("ragged matrix rows")
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", width)
        object.__setattr__(self, "_data", data)

    @classmethod
    def _raw(cls, data):
        m = cls.__new__(cls)
        object.__setattr__(m, "_data", data)
        object.__setattr__(m, "rows", len(data))
        object.__setattr__(m, "cols", len(data[0]))
        return m

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix is immutable")

    def __reduce__(self):
        return (RationalMatrix, (self._data,))

    @classmethod
    def identity(cls, n: int) -> RationalMatrix:
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> RationalMatrix:
        cols = rows if cols is None else cols
        return cls._raw(tuple((Fraction(0),) * cols for _ in range(rows)))

    @classmethod
    def unit(cls, n: int, i: int, j: int) -> RationalMatrix:
        """Matrix unit E_ij of size n x n."""
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(tuple(tuple(one if (r, c) == (i, j) else zero for c in range(n))
                              for r in range(n)))

    @classmethod
    def from_flat(cls, values: Sequence, rows: int, cols: int | None = None) -> RationalMatrix:
        cols = rows if cols is None else cols
        if len(values) != rows * cols:
            raise StructuralError(f"expected {rows * cols} entries, got {len(values)}")
        return cls(values[r * cols:(r + 1) * cols] for r in range(rows))

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i][j]

    def tolist(self):
        return [list(r) for r in self._data]

    def row(self, i):
        return self._data[i]

    def flatten(self) -> Vector:
        return tuple(x for r in self._data for x in r)

    @property
    def T(self) -> RationalMatrix:
        return RationalMatrix._raw(tuple(zip(*self._data)))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __matmul__(self, other: RationalMatrix) -> RationalMatrix:
        if self.cols != other.rows:
            raise StructuralError(f"cannot multiply {self.shape} by {other.shape}")
        cols = tuple(zip(*other._data))
        out = []
        for r in self._data:
            nz = [(k, a) for k, a in enumerate(r) if a]
            out.append(tuple(sum((a * c[k] for k, a in nz), Fraction(0)) for c in cols))
        return RationalMatrix._raw(tuple(out))

    def _check_same(self, other):
        if self.shape != other.shape:
            raise StructuralError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: RationalMatrix) -> RationalMatrix:
        self._check_same(other)
        return RationalMatrix._raw(tuple(tuple(a + b for a, b in zip(r, s))
                                         for r, s in zip(self._data, other._data)))

    def __sub__(self, other: RationalMatrix) -> RationalMatrix:
        self._check_same(other)
        return RationalMatrix._raw(tuple(tuple(a - b for a, b in zip(r, s))
                                         for r, s in zip(self._data, other._data)))

    def __neg__(self) -> RationalMatrix:
        return RationalMatrix._raw(tuple(tuple(-a for a in r) for r in self._data))

    def __mul__(self, scalar) -> RationalMatrix:
        c = to_fraction(scalar)
        return RationalMatrix._raw(tuple(tuple(c * a for a in r) for r in self._data))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self):
        return hash(self._data)

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._data)
        return f"RationalMatrix([{body}])"

    def rank(self) -> int:
        return len(rref([list(r) for r in self._data])[1])

    def to_numpy(self, dtype=float) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self._data], dtype=dtype)

    def to_json(self):
        """Entries as strings, ``"a/b"`` for non-integers."""
        return [[str(x) for x in r] for r in self._data]


def block_diag(*mats: RationalMatrix) -> RationalMatrix:
    n = sum(m.rows for m in mats)
    m_cols = sum(m.cols for m in mats)
    out = [[Fraction(0)] * m_cols for _ in range(n)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                out[r0 + i][c0 + j] = m[i, j]
        r0 += m.rows
        c0 += m.cols
    return RationalMatrix._raw(tuple(tuple(r) for r in out))


def block_matrix(blocks: Sequence[Sequence[RationalMatrix]]) -> RationalMatrix:
    rows = []
    for brow in blocks:
        for i in range(brow[0].rows):
            rows.append(tuple(x for b in brow for x in b.row(i)))
    return RationalMatrix._raw(tuple(rows))


def split_blocks(m: RationalMatrix, size: int) -> list[list[RationalMatrix]]:
    """Cut a square matrix into size x size blocks."""
    if m.rows % size or m.cols % size:
        raise StructuralError(f"{m.shape} is not a multiple of block size {size}")
    return [[RationalMatrix(row[bj * size:(bj + 1) * size]
                            for row in (m.row(bi * size + i) for i in range(size)))
             for bj in range(m.cols // size)]
            for bi in range(m.rows // size)]


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form, pivoting on the first nonzero entry of each column.

    Works on a copy. Returns (reduced nonzero rows, pivot columns).
    """
    a = [list(r) for r in rows]
    if not a:
        return [], []
    ncols = len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(a):
            break
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        pr = a[r]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], pr)]
        pivots.append(c)
        r += 1
    return a[:r], pivots


@dataclass(frozen=True)
class SubspaceBasis:
    """A list of linearly independent rational vectors in Q^ambient_dim."""

    ambient_dim: int
    vectors: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def rank(self) -> int:
        if not self.vectors:
            return 0
        return len(rref([list(v) for v in self.vectors])[1])

    def contains(self, v: Sequence) -> bool:
        v = tuple(to_fraction(x) for x in v)
        if len(v) != self.ambient_dim:
            raise StructuralError("vector has the wrong length")
        return coordinates(self.vectors, v) is not None

    def as_matrices(self, n: int) -> list[RationalMatrix]:
        if n * n != self.ambient_dim:
            raise StructuralError(f"ambient dim {self.ambient_dim} is not {n}^2")
        return [RationalMatrix.from_flat(v, n) for v in self.vectors]

    def same_span(self, other: SubspaceBasis) -> bool:
        return (self.ambient_dim == other.ambient_dim and self.dim == other.dim
                and all(self.contains(v) for v in other.vectors))


def kernel(m: RationalMatrix | Sequence[Sequence]) -> SubspaceBasis:
    """Basis of {v : m v = 0}, one vector per free column of the RREF."""
    rows = [list(r) for r in (m._data if isinstance(m, RationalMatrix) else m)]
    ncols = len(rows[0]) if rows else 0
    return _kernel_rows(rows, ncols)


def _kernel_rows(rows, ncols) -> SubspaceBasis:
    rows = [[to_fraction(x) for x in r] for r in rows]
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    vectors = []
    zero = Fraction(0)
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [zero] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        vectors.append(tuple(v))
    return SubspaceBasis(ncols, tuple(vectors))


def solve(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
    """One exact solution x of A x = b, or None if inconsistent."""
    ncols = len(a_rows[0])
    aug = [list(r) + [bi] for r, bi in zip(a_rows, b)]
    red, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][ncols]
    return tuple(x)


def coordinates(basis: Sequence[Vector], v: Vector):
    """Coefficients c with sum c_i basis_i = v (basis independent), or None."""
    if not basis:
        return () if all(x == 0 for x in v) else None
    a_rows = [[b[k] for b in basis] for k in range(len(v))]
    return solve(a_rows, v)


class _Echelon:
    """Incremental span membership: keeps reduced rows keyed by pivot column."""

    def __init__(self):
        self._rows: dict[int, list[Fraction]] = {}

    def _reduce(self, v):
        v = list(v)
        for c in sorted(self._rows):
            if v[c] != 0:
                f = v[c]
                v = [x - f * y for x, y in zip(v, self._rows[c])]
        return v

    def rows(self) -> list[list[Fraction]]:
        return [self._rows[c] for c in sorted(self._rows)]

    def add(self, v) -> bool:
        v = self._reduce(v)
        c = next((i for i, x in enumerate(v) if x != 0), None)
        if c is None:
            return False
        inv = 1 / v[c]
        v = [x * inv for x in v]
        for k, row in self._rows.items():
            if row[c] != 0:
                f = row[c]
                self._rows[k] = [x - f * y for x, y in zip(row, v)]
        self._rows[c] = v
        return True


def algebra_closure(generators: Sequence[RationalMatrix], n: int) -> list[RationalMatrix]:
    """Q-basis of the unital algebra generated by ``generators``.

    The identity comes first, then the generators that are new, then
    products in the order they are discovered.
    """
    for g in generators:
        if g.shape != (n, n):
            raise StructuralError(f"generator of shape {g.shape}, expected {(n, n)}")
    ech = _Echelon()
    basis = [RationalMatrix.identity(n)]
    ech.add(basis[0].flatten())
    for g in generators:
        if ech.add(g.flatten()):
            basis.append(g)
    m = 0
    while m < len(basis):
        bm = basis[m]
        for i in range(m + 1):
            for prod in (basis[i] @ bm, bm @ basis[i]):
                if ech.add(prod.flatten()):
                    basis.append(prod)
        m += 1
    return basis


class CommutatorMap:
    """X -> X @ right - left @ X, with its coordinate matrix built directly."""

    def __init__(self, left: RationalMatrix, right: RationalMatrix):
        self.left = left
        self.right = right

    def __call__(self, x: RationalMatrix) -> RationalMatrix:
        return x @ self.right - self.left @ x

    def matrix_rows(self, n: int) -> list[list[Fraction]]:
        zero = Fraction(0)
        rows = []
        for i in range(n):
            for j in range(n):
                row = [zero] * (n * n)
                for k in range(n):
                    row[i * n + k] += self.right[k, j]
                    row[k * n + j] -= self.left[i, k]
                rows.append(row)
        return rows


class FormPreservingMap:
    """X -> X^T @ form + form @ X (infinitesimal isometries of ``form``)."""

    def __init__(self, form: RationalMatrix):
        self.form = form

    def __call__(self, x: RationalMatrix) -> RationalMatrix:
        return x.T @ self.form + self.form @ x

    def matrix_rows(self, n: int) -> list[list[Fraction]]:
        zero = Fraction(0)
        rows = []
        for i in range(n):
            for j in range(n):
                row = [zero] * (n * n)
                for k in range(n):
                    row[k * n + i] += self.form[k, j]
                    row[k * n + j] += self.form[i, k]
                rows.append(row)
        return rows


def linear_map_matrix(fn: Callable[[RationalMatrix], RationalMatrix], n: int) -> list[list[Fraction]]:
    """Matrix of a linear map on n x n matrices in row-major coordinates."""
    if hasattr(fn, "matrix_rows"):
        return fn.matrix_rows(n)
    images = [fn(RationalMatrix.unit(n, i, j)).flatten() for i in range(n) for j in range(n)]
    return [list(col) for col in zip(*images)]


def common_kernel(maps: Sequence[Callable[[RationalMatrix], RationalMatrix]], n: int) -> SubspaceBasis:
    """Intersection of the kernels of linear maps on the n x n matrix space."""
    ech = _Echelon()
    for fn in maps:
        for row in linear_map_matrix(fn, n):
            ech.add(row)
    return _kernel_rows(ech.rows(), n * n)
