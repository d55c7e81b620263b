from math import pi

import numpy as np
import pytest
from scipy import integrate

from oracles import exact_moment
from stlab.errors import InvalidComponentError
from stlab.haar import (GROUPS, J4, CompactGroupId, coset_trace_cdf, sample_element,
                        sample_matrices, sample_traces, trace_moments_mc,
                        trace_moments_quadrature, usp4_normalization)
from stlab.rng import generator

PAIRS = [("U1", "identity"), ("NU1", "identity"), ("NU1", "nontrivial"), ("NU1", "mixture"),
         ("SU2", "identity"), ("SU2xSU2", "identity"), ("USp4", "identity")]


def test_component_selector_rules():
    assert CompactGroupId("NU1").component == "mixture"
    assert CompactGroupId("SU2").component == "identity"
    with pytest.raises(InvalidComponentError):
        CompactGroupId("SU2", "nontrivial")
    with pytest.raises(InvalidComponentError):
        CompactGroupId("SO3")
    with pytest.raises(InvalidComponentError):
        trace_moments_quadrature("USp4", "nontrivial")
    with pytest.raises(InvalidComponentError):
        coset_trace_cdf("U1", "nontrivial")


@pytest.mark.parametrize("name,comp", PAIRS)
def test_quadrature_matches_exact_moments(name, comp):
    mv = trace_moments_quadrature(name, comp, k_max=16)
    for k in range(17):
        want = float(exact_moment(name, comp, k))
        tol = 1e-9 if k <= 8 else 1e-11 * max(1.0, want)
        assert abs(mv.values[k] - want) <= tol, (k, mv.values[k], want)
    assert mv.values[0] == pytest.approx(1.0, abs=1e-12)
    assert all(mv.values[k] == 0 for k in range(1, 17, 2))
    assert not mv.stderr.any()


def test_named_examples():
    assert np.allclose(trace_moments_quadrature("U1", k_max=4).values[[2, 4]], [2, 6], atol=1e-9)
    assert np.allclose(trace_moments_quadrature("SU2", k_max=8).values[2::2], [1, 2, 5, 14], atol=1e-9)
    assert np.allclose(trace_moments_quadrature("NU1", "mixture", 4).values[[2, 4]], [1, 3], atol=1e-9)
    assert np.allclose(trace_moments_quadrature("USp4", k_max=4).values[[2, 4]], [1, 3], atol=1e-9)


def test_usp4_normalization_positive():
    assert usp4_normalization() > 0


def test_k_max_bound():
    with pytest.raises(ValueError):
        trace_moments_quadrature("SU2", k_max=33)


def test_sample_membership():
    n = 10 ** 4
    rng = generator(11, 0)
    for name in GROUPS:
        g = sample_matrices(CompactGroupId(name), n, rng)
        d = g.shape[1]
        eye = np.eye(d)
        assert np.max(np.abs(np.conj(np.swapaxes(g, 1, 2)) @ g - eye)) < 1e-12
        if name == "SU2":
            assert np.max(np.abs(np.linalg.det(g) - 1)) < 1e-12
        if name == "USp4":
            assert np.max(np.abs(np.swapaxes(g, 1, 2) @ J4 @ g - J4)) < 1e-10
            ev = np.linalg.eigvals(g)
            t = ev.sum(axis=1).real
            e2 = np.array([sum(v[i] * v[j] for i in range(4) for j in range(i + 1, 4)) for v in ev]).real
            assert np.all(np.abs(t) <= 4 + 1e-9)
            assert np.all((e2 >= -2 - 1e-9) & (e2 <= 6 + 1e-9))
        if name in ("U1", "NU1"):
            t = np.trace(g, axis1=1, axis2=2)
            assert np.all(np.abs(t.imag) < 1e-12) and np.all(np.abs(t.real) <= 2 + 1e-12)


def test_nu1_components():
    rng = generator(5, 0)
    nt = sample_matrices(CompactGroupId("NU1", "nontrivial"), 1000, rng)
    assert np.max(np.abs(np.trace(nt, axis1=1, axis2=2))) < 1e-12
    mix = sample_traces("NU1", 20000, seed=1, component="mixture")
    frac = np.mean(np.abs(mix) < 1e-12)
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / 20000)


def test_sample_element_shapes():
    assert sample_element("USp4", generator(0, 0)).shape == (4, 4)
    assert sample_element("U1", generator(0, 0)).shape == (2, 2)


def test_mc_determinism_and_m0():
    a = trace_moments_mc("SU2", k_max=4, n=5000, seed=3)
    b = trace_moments_mc("SU2", k_max=4, n=5000, seed=3)
    assert np.array_equal(a.values, b.values)
    assert a.values[0] == 1.0 and a.stderr[0] == 0.0
    assert not np.array_equal(a.values, trace_moments_mc("SU2", k_max=4, n=5000, seed=4).values)
    with pytest.raises(ValueError):
        trace_moments_mc("SU2", n=10)


@pytest.mark.parametrize("name", ["U1", "USp4"])
def test_mc_second_moment(name):
    mc = trace_moments_mc(name, k_max=2, n=10 ** 6, seed=0)
    ref = trace_moments_quadrature(name, k_max=2)
    assert abs(mc.values[2] - ref.values[2]) <= 3 * mc.stderr[2]


def test_cdf_examples():
    assert coset_trace_cdf("NU1", "nontrivial")(np.array([-0.1, 0.0, 0.1])).tolist() == [0, 1, 1]
    assert coset_trace_cdf("SU2")(0.0) == pytest.approx(0.5, abs=1e-12)
    assert coset_trace_cdf("U1")(2.0) == pytest.approx(1.0, abs=1e-12)
    for name in ("SU2xSU2", "USp4"):
        f = coset_trace_cdf(name)
        assert f(np.array([-4.0]))[0] == pytest.approx(0, abs=1e-9)
        assert f(np.array([4.0]))[0] == pytest.approx(1, abs=1e-9)
        assert f(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("name,comp", PAIRS)
def test_cdf_monotone(name, comp):
    d = CompactGroupId(name, comp).dim
    grid = np.linspace(-d - 0.5, d + 0.5, 2001)
    f = coset_trace_cdf(name, comp)(grid)
    assert np.all(np.diff(f) >= -1e-12) and f[0] == pytest.approx(0, abs=1e-9) and f[-1] == pytest.approx(1, abs=1e-9)


def _nested_reference(x, weight, norm):
    """P(2cos a + 2cos b <= x) by nested adaptive quadrature of a Weyl weight."""
    def inner(a):
        lo_arg = (x - 2 * np.cos(a)) / 2
        if lo_arg >= 1:
            return integrate.quad(lambda b: weight(a, b), 0, pi, epsabs=1e-12)[0]
        if lo_arg <= -1:
            return 0.0
        return integrate.quad(lambda b: weight(a, b), np.arccos(lo_arg), pi, epsabs=1e-12)[0]
    return integrate.quad(inner, 0, pi, epsabs=1e-11, limit=200)[0] / norm


def test_cdf_against_nested_quadrature():
    su2su2 = lambda a, b: (2 / pi) ** 2 * np.sin(a) ** 2 * np.sin(b) ** 2
    usp4 = lambda a, b: (2 * np.cos(a) - 2 * np.cos(b)) ** 2 * (2 * np.sin(a)) ** 2 * (2 * np.sin(b)) ** 2
    usp4_norm = integrate.dblquad(lambda b, a: usp4(a, b), 0, pi, 0, pi, epsabs=1e-12)[0]
    pts = np.array([-3.1, -1.0, 0.37, 1.5, 2.9])
    got_ss = coset_trace_cdf("SU2xSU2")(pts)
    got_usp = coset_trace_cdf("USp4")(pts)
    for i, x in enumerate(pts):
        assert abs(got_ss[i] - _nested_reference(x, su2su2, 1.0)) < 1e-6
        assert abs(got_usp[i] - _nested_reference(x, usp4, usp4_norm)) < 1e-6


@pytest.mark.parametrize("name", ["SU2xSU2", "USp4"])
def test_cdf_against_samples(name):
    t = np.sort(sample_traces(name, 200000, seed=9))
    grid = np.linspace(-4, 4, 81)
    emp = np.searchsorted(t, grid, side="right") / len(t)
    assert np.max(np.abs(emp - coset_trace_cdf(name)(grid))) < 0.006
