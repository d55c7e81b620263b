"""Lefschetz Lie algebras, Galois-twisted components and their isometry points.

For a polarized space (V, psi), an algebra D and a group acting on D, the
twisted component for tau is

    {g in Iso(V, psi) : g beta g^-1 = tau(beta) for all beta in D}.

It is the intersection of the linear space {g : g beta = tau(beta) g} with
the isometry quadric g^T Psi g = Psi. The linear part is computed exactly;
points on the quadric are searched for numerically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .endo_galois import EndAlgebra, GaloisTwistGroup, validate_action
from .errors import StructuralError
from .exact_linalg import (CommutatorMap, FormPreservingMap, RationalMatrix,
                           SubspaceBasis, algebra_closure, block_diag,
                           block_matrix, common_kernel, coordinates,
                           split_blocks)
from .pairing import PolarizedSpace, direct_sum, is_isometry
from .rng import generator

SUCCESS_RESIDUAL = 1e-8
MAX_ITER = 200
DEFAULT_BUDGET = 100
SURJECTIVE = "surjective onto Gal(K_e/K) (complex points)"
UNDETERMINED = "undetermined"


def _check_dims(space: PolarizedSpace, algebra: EndAlgebra):
    if space.n != algebra.n:
        raise StructuralError(f"algebra acts on dimension {algebra.n}, space has dimension {space.n}")


def lefschetz_lie_algebra(space: PolarizedSpace, algebra: EndAlgebra) -> SubspaceBasis:
    """Exact basis of {X : X^T Psi + Psi X = 0, X beta = beta X for beta in D}."""
    _check_dims(space, algebra)
    maps = [FormPreservingMap(space.pairing)]
    maps += [CommutatorMap(b, b) for b in algebra.basis[1:]]
    return common_kernel(maps, space.n)


@dataclass(frozen=True)
class TwistSpace:
    tau: str
    linear_basis: SubspaceBasis
    n: int

    @property
    def dim(self) -> int:
        return self.linear_basis.dim

    def matrices(self) -> list[RationalMatrix]:
        return self.linear_basis.as_matrices(self.n)


def twist_linear_space(space: PolarizedSpace, algebra: EndAlgebra,
                       group: GaloisTwistGroup, tau) -> TwistSpace:
    """Exact basis of {g : g beta = tau(beta) g for every basis element beta of D}."""
    _check_dims(space, algebra)
    idx = group.index(tau)
    images = group.basis_images(algebra, idx)
    maps = [CommutatorMap(img, b) for b, img in zip(algebra.basis, images)]
    return TwistSpace(group.label(idx), common_kernel(maps, space.n), space.n)


@dataclass
class IsometrySearch:
    """Outcome of looking for an isometry inside a twist space."""

    mode: str
    representative: np.ndarray | None
    coefficients: np.ndarray | None
    residual: float | None
    restarts: int
    status: str

    @property
    def found(self) -> bool:
        return self.representative is not None


def _newton(basis, psi, x, max_iter, tol):
    """Damped Gauss-Newton on F(x) = vec(g^T Psi g - Psi), g = sum x_i B_i."""
    def resid(x):
        g = np.tensordot(x, basis, axes=1)
        return g, (g.T @ psi @ g - psi).ravel()

    g, f = resid(x)
    fn = np.linalg.norm(f)
    for _ in range(max_iter):
        if np.max(np.abs(f)) < tol:
            break
        # dF/dx_i = B_i^T Psi g + g^T Psi B_i
        jac = np.stack([(b.T @ psi @ g + g.T @ psi @ b).ravel() for b in basis], axis=1)
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        alpha = 1.0
        while alpha > 1e-6:
            xn = x + alpha * step
            gn, fnew = resid(xn)
            nn = np.linalg.norm(fnew)
            if nn < fn:
                break
            alpha /= 2
        else:
            break
        x, g, f, fn = xn, gn, fnew, nn
    return x, g, float(np.max(np.abs(f)))


def find_isometry_in_twist(twist: TwistSpace, space: PolarizedSpace, mode: str = "complex",
                           budget: int = DEFAULT_BUDGET, seed: int = 0,
                           max_iter: int = MAX_ITER) -> IsometrySearch:
    """Search for g = sum x_i basis_i with g^T Psi g = Psi, x real or complex.

    If the identity lies in the twist space it is returned exactly. Otherwise
    restart ``r`` starts from a point drawn by the counter-based generator
    keyed on (seed, r); the first successful restart in index order wins.
    """
    if mode not in ("real", "complex"):
        raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")
    n = space.n
    if twist.dim == 0:
        return IsometrySearch(mode, None, None, None, 0, "twist space is zero-dimensional")
    ident = RationalMatrix.identity(n)
    c = coordinates(twist.linear_basis.vectors, ident.flatten())
    if c is not None and is_isometry(ident, space):
        dtype = complex if mode == "complex" else float
        return IsometrySearch(mode, np.eye(n, dtype=dtype), np.array([float(x) for x in c], dtype=dtype),
                              0.0, 0, "identity")
    basis = np.array([m.to_numpy() for m in twist.matrices()])
    psi = space.pairing.to_numpy()
    if mode == "complex":
        basis = basis.astype(complex)
        psi = psi.astype(complex)
    d = twist.dim
    for r in range(budget):
        rng = generator(seed, r)
        x = rng.uniform(-1.0, 1.0, d)
        if mode == "complex":
            x = x + 1j * rng.uniform(-1.0, 1.0, d)
        x, g, res = _newton(basis, psi, x, max_iter, 1e-13)
        if res < SUCCESS_RESIDUAL:
            return IsometrySearch(mode, g, x, res, r + 1, "found")
    return IsometrySearch(mode, None, None, None, budget, "no representative found within budget")


def _principal_minors_sign_ok(a: list[list[Fraction]], sign: int) -> bool:
    """True iff sign*a is positive semidefinite (all principal minors >= 0)."""
    k = len(a)
    for size in range(1, k + 1):
        for idx in itertools.combinations(range(k), size):
            sub = [[sign * a[i][j] for j in idx] for i in idx]
            if _det(sub) < 0:
                return False
    return True


def _det(m):
    if len(m) == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _det([r[:j] + r[j + 1:] for r in m[1:]])
               for j in range(len(m)) if m[0][j])


def quadric_forms(twist: TwistSpace, space: PolarizedSpace):
    """Yield ((k, l), A_kl, Psi_kl) with (g^T Psi g)_kl = x^T A_kl x for g = sum x_i B_i."""
    mats = twist.matrices()
    psi = space.pairing
    d = len(mats)
    prods = [[mats[i].T @ psi @ mats[j] for j in range(d)] for i in range(d)]
    for k in range(space.n):
        for l in range(k + 1, space.n):
            a = [[(prods[i][j][k, l] + prods[j][i][k, l]) / 2 for j in range(d)] for i in range(d)]
            yield (k, l), a, psi[k, l]


def real_obstruction(twist: TwistSpace, space: PolarizedSpace) -> bool | None:
    """Exact certificate that the twist space has no real isometries.

    Expands every entry of g^T Psi g = Psi as a quadratic form in the
    coordinates. If some entry reads x^T A x = c with A semidefinite of the
    sign opposite to c, there is no real solution. Only attempted for twist
    spaces of dimension <= 3; returns None when not attempted, False when no
    certificate was found.
    """
    if twist.dim > 3:
        return None
    if twist.dim == 0:
        return True
    for _, a, c in quadric_forms(twist, space):
        if c > 0 and _principal_minors_sign_ok(a, -1):
            return True
        if c < 0 and _principal_minors_sign_ok(a, 1):
            return True
    return False


def complex_obstruction(twist: TwistSpace, space: PolarizedSpace) -> bool:
    """True when some equation degenerates to 0 = c with c != 0 (empty over C)."""
    if twist.dim == 0:
        return True
    return any(c != 0 and all(x == 0 for row in a for x in row)
               for _, a, c in quadric_forms(twist, space))


@dataclass
class TwistComponentReport:
    tau: str
    twist_dim: int
    lie_dim_at_identity: int
    real_search: IsometrySearch
    complex_search: IsometrySearch
    real_empty_certified: bool | None
    nonempty_over_C: str  # "yes" | "no-evidence" | "undetermined"

    def to_json(self):
        def rep(s: IsometrySearch):
            if not s.found:
                return {"status": s.status, "restarts": s.restarts}
            g = s.representative
            out = {"status": s.status, "restarts": s.restarts, "residual": s.residual}
            if np.iscomplexobj(g):
                out["real"] = g.real.tolist()
                out["imag"] = g.imag.tolist()
            else:
                out["matrix"] = g.tolist()
            return out

        return {
            "tau": self.tau,
            "twist_dim": self.twist_dim,
            "lie_dim": self.lie_dim_at_identity,
            "real_representative": rep(self.real_search),
            "complex_representative": rep(self.complex_search),
            "real_empty_certified": self.real_empty_certified,
            "nonempty_over_C": self.nonempty_over_C,
        }


def component_report(space, algebra, group, tau, budget=DEFAULT_BUDGET, seed=0,
                     lie_dim=None) -> TwistComponentReport:
    twist = twist_linear_space(space, algebra, group, tau)
    if lie_dim is None:
        lie_dim = lefschetz_lie_algebra(space, algebra).dim
    real = find_isometry_in_twist(twist, space, "real", budget, seed)
    cplx = find_isometry_in_twist(twist, space, "complex", budget, seed)
    empty_over_c = complex_obstruction(twist, space)
    if real.found:
        cert = False
    else:
        cert = True if empty_over_c else real_obstruction(twist, space)
    if cplx.found:
        status = "yes"
    elif cert or empty_over_c:
        status = "no-evidence"
    else:
        status = "undetermined"
    return TwistComponentReport(twist.tau, twist.dim, lie_dim, real, cplx, cert, status)


def component_surjection_report(space, algebra, group, budget=DEFAULT_BUDGET, seed=0):
    """One report per group element and the verdict on DL_K -> Gal(K_e/K).

    The map is reported surjective (on complex points) only when every twisted
    component is shown nonempty by an explicit representative.
    """
    problems = validate_action(algebra, group)
    if problems:
        raise StructuralError("invalid Galois action: " + "; ".join(problems))
    lie_dim = lefschetz_lie_algebra(space, algebra).dim
    reports = [component_report(space, algebra, group, lab, budget, seed, lie_dim)
               for lab in group.labels]
    verdict = SURJECTIVE if all(r.nonempty_over_C == "yes" for r in reports) else UNDETERMINED
    return reports, verdict


# -- powers and direct sums -------------------------------------------------

def _lift_action(group: GaloisTwistGroup, big: EndAlgebra, transform) -> GaloisTwistGroup:
    """Express ``transform(tau, X)`` on the basis of ``big`` for every tau."""
    actions = []
    for t in range(group.order):
        cols = []
        for b in big.basis:
            c = big.coords(transform(t, b))
            if c is None:
                raise StructuralError("lifted action leaves the algebra")
            cols.append(c)
        actions.append(RationalMatrix([[cols[j][i] for j in range(big.dim)] for i in range(big.dim)]))
    return GaloisTwistGroup(group.labels, group.table, group.discs, tuple(actions))


def power_structure(space: PolarizedSpace, algebra: EndAlgebra, group: GaloisTwistGroup, s: int):
    """(V^s, psi^s, M_s(D)) with tau acting entrywise on M_s(D)."""
    if s < 1:
        raise StructuralError("power must be >= 1")
    n = space.n
    gens = [block_diag(*([b] * s)) for b in algebra.basis[1:]]
    ident = RationalMatrix.identity(n)
    zero = RationalMatrix.zeros(n)
    for i in range(s):
        for j in range(s):
            gens.append(block_matrix([[ident if (r, c) == (i, j) else zero for c in range(s)]
                                      for r in range(s)]))
    big = EndAlgebra(n * s, algebra_closure(gens, n * s))

    def transform(t, x):
        return block_matrix([[group.apply(algebra, t, blk) for blk in row]
                             for row in split_blocks(x, n)])

    return space.power(s), big, _lift_action(group, big, transform)


def sum_structure(factors: Sequence[tuple[PolarizedSpace, EndAlgebra, GaloisTwistGroup]]):
    """(V_1 + ... + V_t, psi_1 + ... + psi_t, D_1 x ... x D_t), tau acting factorwise."""
    spaces = [f[0] for f in factors]
    sizes = [p.n for p in spaces]
    total = sum(sizes)
    group = factors[0][2]
    for f in factors[1:]:
        if f[2].labels != group.labels or f[2].table != group.table:
            raise StructuralError("direct-sum factors must share the same acting group")
    gens = []
    for k, (p, d, _) in enumerate(factors):
        for b in d.basis:
            gens.append(block_diag(*[b if i == k else RationalMatrix.zeros(sizes[i])
                                     for i in range(len(factors))]))
    big = EndAlgebra(total, algebra_closure(gens, total))
    offsets = list(itertools.accumulate([0] + sizes))

    def transform(t, x):
        blocks = []
        for k, (p, d, g) in enumerate(factors):
            o = offsets[k]
            blk = RationalMatrix([x.row(o + i)[o:o + p.n] for i in range(p.n)])
            blocks.append(g.apply(d, t, blk))
        return block_diag(*blocks)

    return direct_sum(*spaces), big, _lift_action(group, big, transform)


@dataclass
class PowerProductCheck:
    passed: bool
    kind: str
    tau: str
    table: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, "tau": self.tau, "passed": self.passed, **self.table}


def power_product_check(space, algebra, group, tau, power: int | None = None,
                        summands=None) -> PowerProductCheck:
    """Compare twist-space dimensions of a power or direct sum with its factors.

    ``power=s`` checks dim L_tau(V^s, M_s(D)) == dim L_tau(V, D).
    ``summands`` is a list of (space, algebra, group) or (space, algebra,
    group, s) tuples; it checks that the dimension of the direct sum of the
    (powered) factors equals the sum of the factor dimensions. When
    ``summands`` is given the positional triple is ignored.
    """
    if (power is None) == (summands is None):
        raise ValueError("give exactly one of power= or summands=")
    label = group.label(group.index(tau))
    if power is not None:
        base = twist_linear_space(space, algebra, group, tau).dim
        ps, pa, pg = power_structure(space, algebra, group, power)
        problems = validate_action(pa, pg)
        if problems:
            raise StructuralError("lifted action invalid: " + "; ".join(problems))
        lifted = twist_linear_space(ps, pa, pg, tau).dim
        table = {"s": power, "base_dim": base, "power_dim": lifted,
                 "base_lie_dim": lefschetz_lie_algebra(space, algebra).dim,
                 "power_lie_dim": lefschetz_lie_algebra(ps, pa).dim}
        return PowerProductCheck(base == lifted, "power", label, table)

    factors, base_dims, powers = [], [], []
    for item in summands:
        p, d, g = item[:3]
        s = item[3] if len(item) > 3 else 1
        base_dims.append(twist_linear_space(p, d, g, tau).dim)
        powers.append(s)
        factors.append(power_structure(p, d, g, s) if s > 1 else (p, d, g))
    sp, sa, sg = sum_structure(factors)
    problems = validate_action(sa, sg)
    if problems:
        raise StructuralError("direct-sum action invalid: " + "; ".join(problems))
    total = twist_linear_space(sp, sa, sg, tau).dim
    table = {"powers": powers, "factor_dims": base_dims, "sum_dim": total}
    return PowerProductCheck(total == sum(base_dims), "sum", label, table)
