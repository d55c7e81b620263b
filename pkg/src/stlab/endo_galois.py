"""Endomorphism algebras D with a finite group acting by automorphisms.

The acting group stands for Gal(K_e/K). When it is multi-quadratic,
K_e = Q(sqrt(d_1), ..., sqrt(d_r)), and Frobenius classes of primes are read
off from Kronecker symbols: element index ``i`` has bit ``j`` set iff the
Frobenius at p moves sqrt(d_j), i.e. iff (d_j / p) = -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .errors import (RamifiedPrimeError, StructuralError, UnknownElementError,
                     UnlabelableError)
from .exact_linalg import RationalMatrix, algebra_closure, coordinates, rref


class EndAlgebra:
    """A unital subalgebra of End_Q(V) given by a Q-basis with basis[0] = Id."""

    def __init__(self, n: int, basis: Sequence[RationalMatrix]):
        basis = list(basis)
        if not basis or basis[0] != RationalMatrix.identity(n):
            raise StructuralError("algebra basis must start with the identity")
        for b in basis:
            if b.shape != (n, n):
                raise StructuralError(f"basis element of shape {b.shape}, expected {(n, n)}")
        flat = [b.flatten() for b in basis]
        if len(rref([list(v) for v in flat])[1]) != len(basis):
            raise StructuralError("algebra basis is linearly dependent")
        self.n = n
        self.basis = basis
        self._flat = flat
        consts = []
        for bi in basis:
            row = []
            for bj in basis:
                c = coordinates(flat, (bi @ bj).flatten())
                if c is None:
                    raise StructuralError("basis span is not closed under multiplication")
                row.append(c)
            consts.append(row)
        self.structure_constants = consts

    @classmethod
    def generated_by(cls, generators: Sequence[RationalMatrix], n: int) -> EndAlgebra:
        return cls(n, algebra_closure(generators, n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, m: RationalMatrix):
        """Coordinates of ``m`` in the basis, or None if m is not in D."""
        return coordinates(self._flat, m.flatten())

    def element(self, coeffs) -> RationalMatrix:
        out = RationalMatrix.zeros(self.n)
        for c, b in zip(coeffs, self.basis):
            if c:
                out = out + b * c
        return out


def _is_squarefree(d: int) -> bool:
    d = abs(d)
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def kronecker_odd(d: int, p: int) -> int:
    """Kronecker symbol (d/p) for an odd prime p, via Euler's criterion."""
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@dataclass(frozen=True)
class GaloisTwistGroup:
    """A finite group with multiplication table and (optionally) its action on D.

    ``actions[i]`` is the matrix of rho_e(element i) on D-basis coordinates,
    columns being images of basis vectors. ``discs`` is None for an abstract
    group that cannot label primes.
    """

    labels: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    discs: tuple[int, ...] | None = None
    actions: tuple[RationalMatrix, ...] | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})
        if len(self._index) != len(self.labels):
            raise StructuralError("duplicate group element labels")
        if len(self.table) != len(self.labels) or any(len(r) != len(self.labels) for r in self.table):
            raise StructuralError("multiplication table does not match the element count")
        if self.actions is not None and len(self.actions) != len(self.labels):
            raise StructuralError("need one action matrix per group element")

    @classmethod
    def multiquadratic(cls, discs: Sequence[int], actions=None) -> GaloisTwistGroup:
        """(Z/2)^r for K_e = Q(sqrt(d_1), ..., sqrt(d_r))."""
        discs = tuple(int(d) for d in discs)
        for d in discs:
            if d in (0, 1) or not _is_squarefree(d):
                raise StructuralError(f"field descriptor {d} is not a squarefree integer != 0, 1")
        r = len(discs)
        labels = tuple(_bits_label(i, r) for i in range(2 ** r))
        table = tuple(tuple(i ^ j for j in range(2 ** r)) for i in range(2 ** r))
        return cls(labels, table, discs, None if actions is None else tuple(actions))

    @classmethod
    def trivial(cls, algebra_dim: int | None = None) -> GaloisTwistGroup:
        acts = None if algebra_dim is None else (RationalMatrix.identity(algebra_dim),)
        return cls(("id",), ((0,),), (), acts)

    @property
    def order(self) -> int:
        return len(self.labels)

    @property
    def labelable(self) -> bool:
        return self.discs is not None

    def index(self, label) -> int:
        if isinstance(label, int) and 0 <= label < self.order:
            return label
        try:
            return self._index[label]
        except KeyError:
            raise UnknownElementError(f"unknown group element {label!r}") from None

    def label(self, i: int) -> str:
        return self.labels[i]

    @property
    def identity(self) -> int:
        for e in range(self.order):
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(self.order)):
                return e
        raise StructuralError("multiplication table has no identity element")

    def inverse(self, i: int) -> int:
        e = self.identity
        return next(j for j in range(self.order) if self.table[i][j] == e)

    def mul(self, a, b) -> int:
        return self.table[self.index(a)][self.index(b)]

    def action(self, tau) -> RationalMatrix:
        if self.actions is None:
            raise StructuralError("group carries no action on an algebra")
        return self.actions[self.index(tau)]

    def apply(self, algebra: EndAlgebra, tau, beta: RationalMatrix) -> RationalMatrix:
        """rho_e(tau)(beta) for beta in D."""
        c = algebra.coords(beta)
        if c is None:
            raise StructuralError("matrix is not an element of the algebra")
        a = self.action(tau)
        img = [sum((a[i, j] * c[j] for j in range(len(c))), Fraction(0)) for i in range(len(c))]
        return algebra.element(img)

    def basis_images(self, algebra: EndAlgebra, tau) -> list[RationalMatrix]:
        a = self.action(tau)
        return [algebra.element([a[i, j] for i in range(algebra.dim)]) for j in range(algebra.dim)]


def _bits_label(i: int, r: int) -> str:
    if i == 0:
        return "id"
    return "".join(f"g{j + 1}" for j in range(r) if i >> j & 1)


def group_table_problems(g: GaloisTwistGroup) -> list[str]:
    problems = []
    n = g.order
    if any(not 0 <= x < n for row in g.table for x in row):
        return ["multiplication table has out-of-range entries"]
    try:
        e = g.identity
    except StructuralError:
        return ["multiplication table has no identity element"]
    for a, b, c in product(range(n), repeat=3):
        if g.table[g.table[a][b]][c] != g.table[a][g.table[b][c]]:
            problems.append(f"multiplication is not associative at ({g.labels[a]}, {g.labels[b]}, {g.labels[c]})")
            break
    for a in range(n):
        if not any(g.table[a][b] == e for b in range(n)):
            problems.append(f"element {g.labels[a]} has no inverse")
    return problems


def validate_action(algebra: EndAlgebra, group: GaloisTwistGroup) -> list[str]:
    """List every violated invariant of the action; an empty list means valid."""
    if group.actions is None:
        raise StructuralError("group carries no action matrices")
    d = algebra.dim
    for lab, a in zip(group.labels, group.actions):
        if a.shape != (d, d):
            raise StructuralError(f"action of {lab} has shape {a.shape}, algebra has dimension {d}")
    report = group_table_problems(group)
    if report:
        return report
    e = group.identity
    ident = RationalMatrix.identity(d)
    if group.actions[e] != ident:
        report.append("identity element does not act as the identity")
    for s, t in product(range(group.order), repeat=2):
        if group.actions[group.table[s][t]] != group.actions[s] @ group.actions[t]:
            report.append(f"not a homomorphism at ({group.labels[s]}, {group.labels[t]})")
    c = algebra.structure_constants
    for s, lab in enumerate(group.labels):
        a = group.actions[s]
        if a.rank() != d:
            report.append(f"action of {lab} is not invertible")
            continue
        if any(a[i, 0] != (1 if i == 0 else 0) for i in range(d)):
            report.append(f"action of {lab} does not fix the identity of D")
        images = group.basis_images(algebra, s)
        for i, j in product(range(d), repeat=2):
            lhs = images[i] @ images[j]
            rhs = RationalMatrix.zeros(algebra.n)
            for k in range(d):
                if c[i][j][k]:
                    rhs = rhs + images[k] * c[i][j][k]
            if lhs != rhs:
                report.append(f"action of {lab} is not an algebra automorphism "
                              f"(fails on basis product {i}*{j})")
                break
    return report


def frobenius_class(p: int, group: GaloisTwistGroup) -> str:
    """Label of the Frobenius class of the odd unramified prime p."""
    if not group.labelable:
        raise UnlabelableError("abstract group has no field descriptor; primes cannot be labeled")
    if p % 2 == 0:
        raise RamifiedPrimeError(f"p = {p} is even")
    idx = 0
    for j, d in enumerate(group.discs):
        k = kronecker_odd(d, p)
        if k == 0:
            raise RamifiedPrimeError(f"p = {p} divides the descriptor {d}")
        if k == -1:
            idx |= 1 << j
    return group.labels[idx]


def is_ramified(p: int, group: GaloisTwistGroup) -> bool:
    return p % 2 == 0 or any(d % p == 0 for d in group.discs or ())
