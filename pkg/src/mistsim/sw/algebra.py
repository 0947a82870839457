"""
Normal-ordered operators on qubit ⊗ resonator.

An operator is stored as components {(n, m): X} meaning Σ X_nm ⊗ (a†)^n a^m, where every X is
a qubit-space matrix. Products are reordered with

    a^m (a†)^p = Σ_s C(m, s) C(p, s) s! (a†)^(p−s) a^(m−s).
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from mistsim.core.exceptions import BasisMismatchError
from mistsim.core.types import ComplexArray

Channel = tuple[int, int]


@dataclass(frozen=True, eq=False)
class NormalOrdered:
    """Σ X_nm ⊗ (a†)^n a^m with qubit-space coefficients X_nm."""

    levels: int
    components: dict[Channel, ComplexArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for channel, matrix in self.components.items():
            if matrix.shape != (self.levels, self.levels):
                raise BasisMismatchError(
                    "component has the wrong qubit dimension",
                    expected=(self.levels, self.levels),
                    actual=matrix.shape,
                    details={"channel": channel},
                )

    @classmethod
    def from_mapping(cls, levels: int, components: Mapping[Channel, ComplexArray]) -> NormalOrdered:
        return cls(levels, {c: np.asarray(x, dtype=complex) for c, x in components.items()})

    def __getitem__(self, channel: Channel) -> ComplexArray:
        return self.components.get(channel, np.zeros((self.levels, self.levels), dtype=complex))

    def __iter__(self) -> Iterator[Channel]:
        return iter(sorted(self.components))

    def channels(self) -> list[Channel]:
        return sorted(self.components)

    def _check(self, other: NormalOrdered) -> None:
        if other.levels != self.levels:
            raise BasisMismatchError("qubit dimensions differ", expected=self.levels, actual=other.levels)

    def _combine(self, other: NormalOrdered, sign: float) -> NormalOrdered:
        self._check(other)
        out = {c: x.copy() for c, x in self.components.items()}
        for channel, matrix in other.components.items():
            out[channel] = out.get(channel, 0.0) + sign * matrix
        return NormalOrdered(self.levels, out)

    def __add__(self, other: NormalOrdered) -> NormalOrdered:
        return self._combine(other, 1.0)

    def __sub__(self, other: NormalOrdered) -> NormalOrdered:
        return self._combine(other, -1.0)

    def __mul__(self, scalar: complex) -> NormalOrdered:
        return NormalOrdered(self.levels, {c: scalar * x for c, x in self.components.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: NormalOrdered) -> NormalOrdered:
        self._check(other)
        out: dict[Channel, ComplexArray] = {}
        # fixed channel order keeps the summation deterministic
        for n, m in self.channels():
            left = self.components[(n, m)]
            for p, q in other.channels():
                product = left @ other.components[(p, q)]
                for s in range(min(m, p) + 1):
                    weight = comb(m, s) * comb(p, s) * factorial(s)
                    channel = (n + p - s, m + q - s)
                    out[channel] = out.get(channel, 0.0) + weight * product
        return NormalOrdered(self.levels, out)

    def commutator(self, other: NormalOrdered) -> NormalOrdered:
        return (self @ other) - (other @ self)

    def dag(self) -> NormalOrdered:
        return NormalOrdered(
            self.levels, {(m, n): x.conj().T for (n, m), x in self.components.items()}
        )

    def max_deviation(self, other: NormalOrdered) -> float:
        """Largest entry-wise difference over the union of channels."""
        channels = set(self.components) | set(other.components)
        if not channels:
            return 0.0
        return max(float(np.max(np.abs(self[c] - other[c]))) for c in channels)

    def pruned(self, tolerance: float = 0.0) -> NormalOrdered:
        """Drop components whose entries are all at or below ``tolerance``."""
        return NormalOrdered(
            self.levels,
            {c: x for c, x in self.components.items() if np.max(np.abs(x), initial=0.0) > tolerance},
        )

    def joint_matrix(self, photon_levels: int) -> ComplexArray:
        """Dense matrix on qubit ⊗ Fock(photon_levels), qubit index major."""
        a = np.diag(np.sqrt(np.arange(1, photon_levels, dtype=float)), k=1).astype(complex)
        adag = a.conj().T
        size = self.levels * photon_levels
        out = np.zeros((size, size), dtype=complex)
        for n, m in self.channels():
            ladder = np.linalg.matrix_power(adag, n) @ np.linalg.matrix_power(a, m)
            out += np.kron(self.components[(n, m)], ladder)
        return out


def zero(levels: int) -> NormalOrdered:
    return NormalOrdered(levels, {})
