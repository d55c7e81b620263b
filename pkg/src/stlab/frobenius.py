"""Point counts of y^2 = f(x) over F_p and F_{p^2}, and normalized Frobenius traces.

Conventions: s1 = sum of Frobenius eigenvalues = p + 1 - N1,
s2 = sum of their squares = p^2 + 1 - N2, e2 = (s1^2 - s2) / 2,
t = s1 / sqrt(p), u = e2 / p.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

from .endo_galois import GaloisTwistGroup, frobenius_class, is_ramified
from .errors import BadReductionError, DataCorruptionError, SingularModelError, StlabError

GENUS2_DEFAULT_PMAX = 1024


@dataclass(frozen=True)
class CurveSpec:
    """y^2 = f(x), coefficients ascending."""

    genus: int
    f: tuple[int, ...]

    def __post_init__(self):
        f = tuple(int(c) for c in self.f)
        while len(f) > 1 and f[-1] == 0:
            f = f[:-1]
        object.__setattr__(self, "f", f)
        allowed = {1: (3,), 2: (5, 6)}
        if self.genus not in allowed:
            raise SingularModelError(f"genus must be 1 or 2, got {self.genus}")
        if self.degree not in allowed[self.genus]:
            raise SingularModelError(f"degree {self.degree} is not allowed for genus {self.genus}")
        if self.discriminant == 0:
            raise SingularModelError("singular model: disc(f) = 0")

    @property
    def degree(self) -> int:
        return len(self.f) - 1

    @property
    def leading(self) -> int:
        return self.f[-1]

    @property
    def discriminant(self) -> int:
        return _discriminant(self.f)

    def is_good(self, p: int) -> bool:
        return p % 2 == 1 and (self.discriminant * self.leading) % p != 0


@lru_cache(maxsize=None)
def _discriminant(f: tuple[int, ...]) -> int:
    x = sympy.Symbol("x")
    return int(sympy.discriminant(sum(c * x ** i for i, c in enumerate(f)), x))


def _check_good(f: Sequence[int], p: int):
    if p % 2 == 0:
        raise BadReductionError(f"p = {p} is even")
    f = tuple(int(c) for c in f)
    if (_discriminant(f) * f[-1]) % p == 0:
        raise BadReductionError(f"bad reduction at p = {p}")


@lru_cache(maxsize=64)
def square_table(p: int) -> np.ndarray:
    """chi_p as a lookup table: table[a] = (a / p) for 0 <= a < p."""
    half = np.arange((p + 1) // 2, dtype=np.int64)
    sq = half * half
    sq %= p
    table = np.full(p, -1, dtype=np.int8)
    table[sq] = 1
    table[0] = 0
    return table


def _poly_mod(f: Sequence[int], x: np.ndarray, p: int) -> np.ndarray:
    """f(x) mod p for 0 <= x < p. Reduces only once when int64 cannot overflow."""
    if sum(abs(c) * (p - 1) ** i for i, c in enumerate(f)) < 2 ** 62:
        acc = np.full_like(x, f[-1])
        for c in reversed(f[:-1]):
            acc *= x
            if c:
                acc += c
        acc %= p
        return acc
    acc = np.zeros_like(x)
    for c in reversed(f):
        acc = (acc * x + c % p) % p
    return acc


def char_sum_fp(f: Sequence[int], p: int) -> int:
    """sum over x in F_p of chi_p(f(x))."""
    x = np.arange(p, dtype=np.int64)
    return int(square_table(p)[_poly_mod(f, x, p)].sum(dtype=np.int64))


def least_nonresidue(p: int) -> int:
    table = square_table(p)
    return int(np.argmax(table == -1))


def char_sum_fp2(f: Sequence[int], p: int) -> int:
    """sum over z in F_{p^2} of chi(f(z)), F_{p^2} = F_p[u]/(u^2 - nu).

    Uses chi_{p^2}(w) = chi_p(Norm w): w^((p^2-1)/2) = (w^(p+1))^((p-1)/2).
    """
    nu = least_nonresidue(p)
    a = np.repeat(np.arange(p, dtype=np.int64), p)
    b = np.tile(np.arange(p, dtype=np.int64), p)
    ra = np.zeros_like(a)
    rb = np.zeros_like(a)
    for c in reversed(f):
        ra, rb = (ra * a + nu * ((rb * b) % p) + c % p) % p, (ra * b + rb * a) % p
    norm = (ra * ra - nu * ((rb * rb) % p)) % p
    return int(square_table(p)[norm].sum(dtype=np.int64))


def count_points_genus1(f: Sequence[int], p: int) -> int:
    """#E(F_p) for y^2 = f(x), deg f = 3, including the point at infinity."""
    _check_good(f, p)
    return p + 1 + char_sum_fp(f, p)


def points_at_infinity(f: Sequence[int], p: int, extension: int = 1) -> int:
    deg = len(f) - 1
    if deg % 2 == 1:
        return 1
    if extension == 2:
        return 2
    return 1 + int(square_table(p)[f[-1] % p])


def count_points_fp2(f: Sequence[int], p: int) -> int:
    """Points of the smooth model over F_{p^2} (either genus)."""
    _check_good(f, p)
    return p * p + char_sum_fp2(f, p) + points_at_infinity(f, p, 2)


def count_points_genus2(f: Sequence[int], p: int) -> tuple[int, int]:
    """(N1, N2) for the smooth model of y^2 = f(x), deg f in {5, 6}."""
    _check_good(f, p)
    n1 = p + char_sum_fp(f, p) + points_at_infinity(f, p, 1)
    n2 = count_points_fp2(f, p)
    return n1, n2


@dataclass(frozen=True)
class TraceRecord:
    p: int
    genus: int
    N1: int
    s1: int
    N2: int | None = None
    s2: int | None = None
    e2: int | None = None
    class_label: str | None = None
    flagged: bool = False

    @property
    def t(self) -> float:
        return self.s1 / math.sqrt(self.p)

    @property
    def u(self) -> float | None:
        return None if self.e2 is None else self.e2 / self.p


def l_poly_genus2(n1: int, n2: int, p: int):
    """(s1, s2, e2, t, u, flagged) from the point counts over F_p and F_{p^2}.

    ``flagged`` marks a violation of |t| <= 4 or -2 <= u <= 6; values are
    never clamped.
    """
    s1 = p + 1 - n1
    s2 = p * p + 1 - n2
    if (s1 * s1 - s2) % 2:
        raise DataCorruptionError(f"e2 = ({s1}^2 - {s2})/2 is not an integer at p = {p}")
    e2 = (s1 * s1 - s2) // 2
    flagged = s1 * s1 > 16 * p or not (-2 * p <= e2 <= 6 * p)
    return s1, s2, e2, s1 / math.sqrt(p), e2 / p, flagged


def trace_record(curve: CurveSpec, p: int, group: GaloisTwistGroup | None = None) -> TraceRecord:
    label = frobenius_class(p, group) if group is not None and group.labelable else None
    if curve.genus == 1:
        n1 = count_points_genus1(curve.f, p)
        s1 = p + 1 - n1
        return TraceRecord(p, 1, n1, s1, class_label=label, flagged=s1 * s1 > 4 * p)
    n1, n2 = count_points_genus2(curve.f, p)
    s1, s2, e2, _, _, flagged = l_poly_genus2(n1, n2, p)
    return TraceRecord(p, 2, n1, s1, n2, s2, e2, label, flagged)


def good_primes(curve: CurveSpec, p_max: int, group: GaloisTwistGroup | None = None) -> list[int]:
    out = []
    for p in sympy.primerange(3, p_max + 1):
        if not curve.is_good(p):
            continue
        if group is not None and group.labelable and is_ramified(p, group):
            continue
        out.append(int(p))
    return out


def _records_chunk(args):
    curve, primes, group = args
    return [trace_record(curve, p, group) for p in primes]


def scan_primes(curve: CurveSpec, p_max: int, group: GaloisTwistGroup | None = None,
                parallelism: int = 1, allow_large: bool = False) -> list[TraceRecord]:
    """Trace records for every good odd prime p <= p_max, ascending.

    Primes dividing a field descriptor are skipped when ``group`` can label
    primes. Output does not depend on ``parallelism``.
    """
    if p_max < 3:
        raise StlabError("p_max must be at least 3", code="frobenius_counts.range")
    if curve.genus == 2 and p_max > GENUS2_DEFAULT_PMAX and not allow_large:
        raise StlabError(f"genus-2 scans are capped at p_max = {GENUS2_DEFAULT_PMAX} "
                         "(F_{p^2} counting is O(p^2)); pass allow_large to override",
                         code="frobenius_counts.range")
    primes = good_primes(curve, p_max, group)
    if parallelism <= 1 or len(primes) < 64:
        return _records_chunk((curve, primes, group))
    # interleaved chunks balance the O(p) cost; order restored by sorting on p
    chunks = [(curve, primes[i::parallelism * 4], group) for i in range(parallelism * 4)]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        records = [r for part in pool.map(_records_chunk, chunks) for r in part]
    return sorted(records, key=lambda r: r.p)


CSV_COLUMNS = ("p", "class", "N1", "N2", "s1", "e2", "t", "u")


def format_float(x: float) -> str:
    """12 significant digits; Python's formatting rounds half-to-even on the exact binary value."""
    return format(x, ".12g")


def record_to_row(r: TraceRecord) -> list[str]:
    return [str(r.p), r.class_label or "", str(r.N1),
            "" if r.N2 is None else str(r.N2), str(r.s1),
            "" if r.e2 is None else str(r.e2), format_float(r.t),
            "" if r.u is None else format_float(r.u)]


def write_csv(records: Sequence[TraceRecord], stream, header: str | None = None):
    if header is not None:
        stream.write(f"# {header}\n")
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        stream.write(",".join(record_to_row(r)) + "\n")


def read_csv(stream) -> list[TraceRecord]:
    """Inverse of write_csv; t and u are recomputed from the integer columns."""
    lines = [ln for ln in stream if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        p = int(row["p"])
        n2 = int(row["N2"]) if row["N2"] else None
        s1 = int(row["s1"])
        e2 = int(row["e2"]) if row["e2"] else None
        genus = 1 if n2 is None else 2
        s2 = None if n2 is None else p * p + 1 - n2
        if genus == 1:
            flagged = s1 * s1 > 4 * p
        else:
            flagged = s1 * s1 > 16 * p or not (-2 * p <= e2 <= 6 * p)
        out.append(TraceRecord(p, genus, int(row["N1"]), s1, n2, s2, e2,
                               row["class"] or None, flagged))
    return out
