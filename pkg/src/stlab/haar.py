"""Haar sampling and trace moments for a small catalog of compact groups.

Catalog (all embedded in SU(2) or USp(4)):

========  =====================================================  ==========
name      model                                                  trace
========  =====================================================  ==========
U1        diag(e^{i th}, e^{-i th})                              [-2, 2]
NU1       U1 together with J * U1, J = [[0, 1], [-1, 0]]          [-2, 2]
SU2       [[a, -conj(b)], [b, conj(a)]], |a|^2 + |b|^2 = 1       [-2, 2]
SU2xSU2   block diagonal pair of independent SU2 elements        [-4, 4]
USp4      unitary matrices preserving [[0, I], [-I, 0]]          [-4, 4]
========  =====================================================  ==========

Only NU1 has two components; its nontrivial coset consists of trace-zero
matrices [[0, conj(w)], [-w, 0]].
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb, pi

import numpy as np
from scipy import integrate

from .errors import InvalidComponentError
from .rng import generator

GROUPS = ("U1", "NU1", "SU2", "SU2xSU2", "USp4")
COMPONENTS = ("identity", "nontrivial", "mixture")
MAX_QUAD_K = 32
MC_BLOCK = 1 << 16

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


@dataclass(frozen=True)
class CompactGroupId:
    name: str
    component: str | None = None  # defaults to the whole group: "mixture" for NU1

    def __post_init__(self):
        if self.component is None:
            object.__setattr__(self, "component", "mixture" if self.name == "NU1" else "identity")
        if self.name not in GROUPS:
            raise InvalidComponentError(f"unknown group {self.name!r}; catalog is {', '.join(GROUPS)}")
        if self.component not in COMPONENTS:
            raise InvalidComponentError(f"unknown component selector {self.component!r}")
        if self.component == "nontrivial" and self.name != "NU1":
            raise InvalidComponentError(f"{self.name} is connected; it has no nontrivial component")

    @property
    def dim(self) -> int:
        return 4 if self.name in ("SU2xSU2", "USp4") else 2


def as_group(group, component: str | None = None) -> CompactGroupId:
    if isinstance(group, CompactGroupId):
        return group if component is None else CompactGroupId(group.name, component)
    return CompactGroupId(group, component)


# -- sampling ---------------------------------------------------------------

def _u1(theta):
    m = np.zeros(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = np.exp(1j * theta)
    m[..., 1, 1] = np.exp(-1j * theta)
    return m


def _su2(rng, n):
    x = rng.standard_normal((n, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    a = x[:, 0] + 1j * x[:, 1]
    b = x[:, 2] + 1j * x[:, 3]
    m = np.empty((n, 2, 2), dtype=complex)
    m[:, 0, 0] = a
    m[:, 0, 1] = -b.conj()
    m[:, 1, 0] = b
    m[:, 1, 1] = a.conj()
    return m


def _usp4(rng, n):
    """Symplectic Gram-Schmidt on two complex Gaussian columns.

    Columns are (v1, v2, -J conj(v1), -J conj(v2)); v2 is orthogonalized
    against v1 and -J conj(v1). Left-invariance of the Gaussian makes the
    result Haar distributed.
    """
    z = rng.standard_normal((n, 4, 2)) + 1j * rng.standard_normal((n, 4, 2))
    v1 = z[:, :, 0]
    v1 = v1 / np.linalg.norm(v1, axis=1, keepdims=True)
    w1 = -np.einsum("ij,nj->ni", J4, v1.conj())
    v2 = z[:, :, 1]
    v2 = (v2 - v1 * np.sum(v1.conj() * v2, axis=1, keepdims=True)
          - w1 * np.sum(w1.conj() * v2, axis=1, keepdims=True))
    v2 = v2 / np.linalg.norm(v2, axis=1, keepdims=True)
    w2 = -np.einsum("ij,nj->ni", J4, v2.conj())
    return np.stack([v1, v2, w1, w2], axis=2)


def sample_matrices(group: CompactGroupId, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-random elements of ``group`` (restricted to its component), shape (n, d, d)."""
    name, comp = group.name, group.component
    if name in ("U1", "NU1"):
        theta = rng.uniform(0.0, 2 * pi, n)
        m = _u1(theta)
        if name == "NU1" and comp != "identity":
            flip = np.ones(n, dtype=bool) if comp == "nontrivial" else rng.random(n) < 0.5
            j2 = np.array([[0, 1], [-1, 0]], dtype=complex)
            m[flip] = j2 @ m[flip]
        return m
    if name == "SU2":
        return _su2(rng, n)
    if name == "SU2xSU2":
        a, b = _su2(rng, n), _su2(rng, n)
        m = np.zeros((n, 4, 4), dtype=complex)
        m[:, :2, :2] = a
        m[:, 2:, 2:] = b
        return m
    return _usp4(rng, n)


def sample_element(group, rng: np.random.Generator) -> np.ndarray:
    return sample_matrices(as_group(group), 1, rng)[0]


def sample_traces(group, n: int, seed: int, component: str | None = None) -> np.ndarray:
    """Traces of n samples; block b of MC_BLOCK samples comes from stream (seed, b)."""
    g = as_group(group, component)
    out = []
    for b, start in enumerate(range(0, n, MC_BLOCK)):
        size = min(MC_BLOCK, n - start)
        m = sample_matrices(g, size, generator(seed, b))
        out.append(np.trace(m, axis1=1, axis2=2).real)
    return np.concatenate(out)


# -- moments ----------------------------------------------------------------

@dataclass
class MomentVector:
    values: np.ndarray
    stderr: np.ndarray
    method: str = "quadrature"
    group: str | None = None
    component: str | None = None

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def to_json(self):
        return {"group": self.group, "component": self.component,
                "k": list(range(self.k_max + 1)),
                "M": [float(x) for x in self.values],
                "stderr": [float(x) for x in self.stderr],
                "method": self.method}


_QUAD = dict(epsabs=1e-13, epsrel=1e-13, limit=200)


def _quiet(fn):
    """Odd moments vanish, so QUADPACK reports that roundoff caps the relative
    accuracy; the absolute error is what matters and is checked in the tests."""
    def wrapped(*args):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return fn(*args)
    return wrapped


@lru_cache(maxsize=None)
@_quiet
def _u1_moment(k: int) -> float:
    return integrate.quad(lambda th: (2 * np.cos(th)) ** k, 0, 2 * pi, **_QUAD)[0] / (2 * pi)


@lru_cache(maxsize=None)
@_quiet
def _su2_moment(k: int) -> float:
    return 2 / pi * integrate.quad(lambda th: (2 * np.cos(th)) ** k * np.sin(th) ** 2, 0, pi, **_QUAD)[0]


def _usp4_density(t2, t1):
    x1, x2 = 2 * np.cos(t1), 2 * np.cos(t2)
    return (x1 - x2) ** 2 * (2 * np.sin(t1)) ** 2 * (2 * np.sin(t2)) ** 2


@lru_cache(maxsize=None)
@_quiet
def _usp4_raw(k: int) -> float:
    f = lambda t2, t1: _usp4_density(t2, t1) * (2 * np.cos(t1) + 2 * np.cos(t2)) ** k
    return integrate.dblquad(f, 0, pi, 0, pi, epsabs=1e-12, epsrel=1e-13)[0]


def usp4_normalization() -> float:
    """Total mass of the unnormalized Weyl density; fixes M_0 = 1."""
    return _usp4_raw(0)


def _usp4_moment(k: int) -> float:
    return _usp4_raw(k) / usp4_normalization()


def _su2xsu2_moment(k: int) -> float:
    return sum(comb(k, j) * _su2_moment(j) * _su2_moment(k - j) for j in range(k + 1))


def _moment(group: CompactGroupId, k: int) -> float:
    name, comp = group.name, group.component
    if k % 2:
        return 0.0  # every catalog coset is stable under g -> -g
    if name == "U1":
        return _u1_moment(k)
    if name == "NU1":
        ident = _u1_moment(k)
        other = 1.0 if k == 0 else 0.0
        return {"identity": ident, "nontrivial": other, "mixture": (ident + other) / 2}[comp]
    if name == "SU2":
        return _su2_moment(k)
    if name == "SU2xSU2":
        return _su2xsu2_moment(k)
    return _usp4_moment(k)


def trace_moments_quadrature(group, component: str | None = None, k_max: int = 8) -> MomentVector:
    """Moments E[tr^k], k = 0..k_max, by adaptive quadrature of the Weyl density."""
    g = as_group(group, component)
    if not 0 <= k_max <= MAX_QUAD_K:
        raise ValueError(f"k_max must lie in [0, {MAX_QUAD_K}]")
    vals = np.array([_moment(g, k) for k in range(k_max + 1)])
    return MomentVector(vals, np.zeros(k_max + 1), "quadrature", g.name, g.component)


def moments_from_samples(t: np.ndarray, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample means of t^k and their standard errors (sample std / sqrt(N))."""
    n = len(t)
    vals = np.empty(k_max + 1)
    errs = np.empty(k_max + 1)
    ddof = 1 if n > 1 else 0
    for k in range(k_max + 1):
        tk = t ** k
        vals[k] = tk.mean()
        errs[k] = tk.std(ddof=ddof) / np.sqrt(n)
    vals[0], errs[0] = 1.0, 0.0
    return vals, errs


def trace_moments_mc(group, component: str | None = None, k_max: int = 8,
                     n: int = 10 ** 6, seed: int = 0) -> MomentVector:
    g = as_group(group, component)
    if n < 1000:
        raise ValueError("Monte Carlo moments need at least 1000 samples")
    vals, errs = moments_from_samples(sample_traces(g, n, seed), k_max)
    return MomentVector(vals, errs, "mc", g.name, g.component)


# -- trace distributions ----------------------------------------------------

def _u1_cdf(t):
    return 1 - np.arccos(np.clip(np.asarray(t, float) / 2, -1, 1)) / pi


def _su2_cdf(t):
    a = np.arccos(np.clip(np.asarray(t, float) / 2, -1, 1))
    return 1 - a / pi + np.sin(2 * a) / (2 * pi)


def _step(t):
    return (np.asarray(t, float) >= 0).astype(float)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def _convolve_cdf(t, inner):
    """int_0^pi inner(t, th) d th for a vector of t, by Gauss-Legendre on the three
    pieces of [0, pi] cut where t - 2 cos th leaves [-2, 2] (the integrand kinks there)."""
    t = np.asarray(t, float)
    shape = t.shape
    t = t.reshape(-1, 1)
    k1 = np.arccos(np.clip((t + 2) / 2, -1, 1))
    k2 = np.arccos(np.clip((t - 2) / 2, -1, 1))
    total = np.zeros(t.shape[0])
    for lo, hi in ((np.zeros_like(k1), k1), (k1, k2), (k2, np.full_like(k2, pi))):
        half = (hi - lo) / 2
        th = half * _GL_NODES + (hi + lo) / 2
        total += np.sum(half * _GL_WEIGHTS * inner(t, th), axis=1)
    return total.reshape(shape)


def _su2xsu2_cdf(t):
    return _convolve_cdf(t, lambda t, th: 2 / pi * np.sin(th) ** 2 * _su2_cdf(t - 2 * np.cos(th)))


def _usp4_tail(a, x1):
    """int_a^pi (x1 - 2 cos th)^2 (2 sin th)^2 d th, closed form."""
    def prim(th):
        s0 = th / 2 - np.sin(2 * th) / 4
        s1 = np.sin(th) ** 3 / 3
        s2 = th / 8 - np.sin(4 * th) / 32
        return 4 * (x1 * x1 * s0 - 4 * x1 * s1 + 4 * s2)
    return prim(pi) - prim(a)


def _usp4_unnormalized(t, th):
    x1 = 2 * np.cos(th)
    return (2 * np.sin(th)) ** 2 * _usp4_tail(np.arccos(np.clip((t - x1) / 2, -1, 1)), x1)


@lru_cache(maxsize=None)
def _usp4_cdf_mass() -> float:
    return float(_convolve_cdf(np.array([4.0]), _usp4_unnormalized)[0])


def _usp4_cdf(t):
    return _convolve_cdf(t, _usp4_unnormalized) / _usp4_cdf_mass()


def coset_trace_cdf(group, component: str | None = None):
    """CDF of the trace on one component (or the mixture) as a vectorized callable."""
    g = as_group(group, component)
    name, comp = g.name, g.component
    if name == "U1" or (name == "NU1" and comp == "identity"):
        return _u1_cdf
    if name == "NU1":
        if comp == "nontrivial":
            return _step
        return lambda t: (_u1_cdf(t) + _step(t)) / 2
    if name == "SU2":
        return _su2_cdf
    inner = _su2xsu2_cdf if name == "SU2xSU2" else _usp4_cdf

    def cdf(t):
        t = np.asarray(t, float)
        return np.clip(inner(np.clip(t, -4, 4)), 0.0, 1.0)
    return cdf
