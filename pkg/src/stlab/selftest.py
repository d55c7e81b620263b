"""Fast invariant checks across all modules, run by ``stlab selftest``."""
from __future__ import annotations

import time
import traceback
from fractions import Fraction

import numpy as np

from .endo_galois import EndAlgebra, GaloisTwistGroup, frobenius_class, validate_action
from .equidist import Policy, compare_to_group, component_conditional_test
from .exact_linalg import RationalMatrix, kernel
from .frobenius import CurveSpec, count_points_genus1, count_points_genus2, scan_primes
from .haar import GROUPS, CompactGroupId, sample_matrices, trace_moments_mc, trace_moments_quadrature
from .lefschetz import SURJECTIVE, component_surjection_report, lefschetz_lie_algebra, power_product_check
from .pairing import PolarizedSpace, similitude_factor
from .rng import generator

I2 = [[0, -1], [1, 0]]


def gaussian_structure():
    """(V, psi, Q(i)) with complex conjugation acting on D."""
    space = PolarizedSpace.standard(2)
    alg = EndAlgebra.generated_by([RationalMatrix(I2)], 2)
    grp = GaloisTwistGroup.multiquadratic([-1], (RationalMatrix.identity(2), RationalMatrix([[1, 0], [0, -1]])))
    return space, alg, grp


def check_linalg():
    m = RationalMatrix([[1, 2, 3], [2, 4, 6]])
    k = kernel(m)
    assert k.dim == 2 and all(not any((m @ RationalMatrix([[x] for x in v])).flatten()) for v in k.vectors)
    assert RationalMatrix([[1, 2], [3, 4]]).rank() == 2


def check_pairing():
    space = PolarizedSpace.standard(4)
    rng = generator(0, 0)
    for _ in range(10):
        a = Fraction(int(rng.integers(-50, 50)) or 1, int(rng.integers(1, 50)))
        assert similitude_factor(RationalMatrix.identity(4) * a, space) == a * a


def check_galois():
    space, alg, grp = gaussian_structure()
    assert validate_action(alg, grp) == []
    assert frobenius_class(5, grp) == "id" and frobenius_class(7, grp) == "g1"


def check_lefschetz_dims():
    sp2, sp4 = PolarizedSpace.standard(2), PolarizedSpace.standard(4)
    cases = [(sp2, EndAlgebra.generated_by([], 2), 3),
             (sp2, EndAlgebra.generated_by([RationalMatrix(I2)], 2), 1),
             (sp2, EndAlgebra.generated_by([RationalMatrix.unit(2, i, j) for i in range(2) for j in range(2)], 2), 0),
             (sp4, EndAlgebra.generated_by([], 4), 10)]
    for space, alg, want in cases:
        assert lefschetz_lie_algebra(space, alg).dim == want


def check_twists():
    space, alg, grp = gaussian_structure()
    reports, verdict = component_surjection_report(space, alg, grp, budget=20)
    assert verdict == SURJECTIVE
    assert reports[1].real_empty_certified is True
    for tau in grp.labels:
        assert power_product_check(space, alg, grp, tau, power=2).passed


def check_haar():
    cat = [1, 0, 1, 0, 2, 0, 5, 0, 14]
    assert np.allclose(trace_moments_quadrature("SU2").values, cat, atol=1e-8)
    assert np.allclose(trace_moments_quadrature("U1").values[::2], [1, 2, 6, 20, 70], atol=1e-8)
    g = sample_matrices(CompactGroupId("USp4"), 50, generator(1, 0))
    j = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    assert np.allclose(np.einsum("nji,jk,nkl->nil", g, j, g), j)
    for name in GROUPS:
        mc = trace_moments_mc(name, k_max=4, n=20000, seed=3)
        rep = compare_to_group(mc, name, policy=Policy(z_threshold=5.0, k_max=4))
        assert rep.verdict == "pass", name


def _naive_count(f, p):
    sq = {}
    for y in range(p):
        sq[y * y % p] = sq.get(y * y % p, 0) + 1
    return 1 + sum(sq.get(sum(c * x ** i for i, c in enumerate(f)) % p, 0) for x in range(p))


def check_counts():
    assert count_points_genus1([0, 1, 0, 1], 5) == 4 and count_points_genus1([0, 1, 0, 1], 7) == 8
    for p in (3, 5, 7, 11, 13):
        assert count_points_genus1([1, 1, 0, 1], p) == _naive_count([1, 1, 0, 1], p)
    assert count_points_genus2([1, 0, 0, 0, 0, 1], 3) == (4, 10)
    curve = CurveSpec(2, (1, 1, 0, 0, 0, 1))
    assert not any(r.flagged for r in scan_primes(curve, 200))


def check_equidist():
    curve = CurveSpec(1, (0, 1, 0, 1))
    grp = GaloisTwistGroup.multiquadratic([-1])
    recs = scan_primes(curve, 20000, grp)
    assert all(r.s1 == 0 for r in recs if r.class_label == "g1")
    rep = component_conditional_test(recs, grp, {"id": ("U1", "identity"), "g1": ("NU1", "nontrivial")})
    assert rep.verdict == "pass"


CHECKS = [("exact_linalg", check_linalg), ("pairing_core", check_pairing),
          ("endo_galois", check_galois), ("twisted_lefschetz.dims", check_lefschetz_dims),
          ("twisted_lefschetz.twists", check_twists), ("compact_haar", check_haar),
          ("frobenius_counts", check_counts), ("equidist_analysis", check_equidist)]


def run_selftest(out=print) -> bool:
    ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            fn()
            status = "PASS"
        except Exception:
            ok = False
            status = "FAIL"
            out(traceback.format_exc().rstrip())
        out(f"{status} {name} ({time.perf_counter() - t0:.2f}s)")
    return ok


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(0 if run_selftest() else 1)
