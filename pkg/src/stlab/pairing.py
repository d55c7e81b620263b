"""Polarized rational spaces (V, psi) and the similitude character."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidPairingError, StructuralError
from .exact_linalg import RationalMatrix, block_diag


@dataclass(frozen=True)
class PolarizedSpace:
    """A rational vector space of dimension ``n`` with a nondegenerate
    alternating pairing. ``weight`` is the odd Hodge weight."""

    n: int
    weight: int
    pairing: RationalMatrix

    def __post_init__(self):
        if self.n < 1:
            raise InvalidPairingError("dimension must be positive")
        if self.weight < 1 or self.weight % 2 == 0:
            raise InvalidPairingError(
                f"weight must be a positive odd integer, got {self.weight}; "
                "even weight (symmetric pairings) is not supported")
        if self.pairing.shape != (self.n, self.n):
            raise InvalidPairingError(f"pairing has shape {self.pairing.shape}, expected ({self.n}, {self.n})")
        if self.pairing.T != -self.pairing:
            raise InvalidPairingError("pairing is not antisymmetric")
        if self.pairing.rank() != self.n:
            raise InvalidPairingError("pairing is degenerate (det = 0)")

    @classmethod
    def standard(cls, n: int, weight: int = 1) -> PolarizedSpace:
        """[[0, I], [-I, 0]] on Q^n, n even."""
        if n % 2:
            raise InvalidPairingError("an alternating form needs even dimension")
        h = n // 2
        rows = [[0] * n for _ in range(n)]
        for i in range(h):
            rows[i][h + i] = 1
            rows[h + i][i] = -1
        return cls(n, weight, RationalMatrix(rows))

    @classmethod
    def from_json(cls, obj) -> PolarizedSpace:
        pairing = obj["pairing"]
        n = int(obj.get("n", len(pairing)))
        flat = pairing and not isinstance(pairing[0], list)
        mat = RationalMatrix.from_flat(pairing, n) if flat else RationalMatrix(pairing)
        return cls(n, int(obj.get("weight", 1)), mat)

    def power(self, s: int) -> PolarizedSpace:
        """(V^s, psi^s) with block-diagonal pairing."""
        return PolarizedSpace(self.n * s, self.weight, block_diag(*([self.pairing] * s)))


def direct_sum(*spaces: PolarizedSpace) -> PolarizedSpace:
    weights = {p.weight for p in spaces}
    if len(weights) != 1:
        raise StructuralError("direct sum of spaces with different weights")
    return PolarizedSpace(sum(p.n for p in spaces), weights.pop(),
                          block_diag(*(p.pairing for p in spaces)))


def similitude_factor(g: RationalMatrix, space: PolarizedSpace) -> Fraction | None:
    """The scalar chi with g^T Psi g = chi Psi, or None if g is not a similitude."""
    if g.shape != (space.n, space.n):
        raise StructuralError(f"element of shape {g.shape} on a space of dimension {space.n}")
    psi = space.pairing
    m = g.T @ psi @ g
    i, j = next((i, j) for i in range(space.n) for j in range(space.n) if psi[i, j] != 0)
    chi = m[i, j] / psi[i, j]
    return chi if m == psi * chi else None


def is_isometry(g: RationalMatrix, space: PolarizedSpace) -> bool:
    return similitude_factor(g, space) == 1
