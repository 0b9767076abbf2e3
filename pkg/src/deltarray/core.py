"""Transfer-matrix algebra for arrays of delta-function barriers.

A barrier of reduced strength ``g`` (nm^-1) at position ``x`` (nm), probed at
wave number ``k`` (nm^-1), has dimensionless strength ``lam = g / k`` and phase
``phi = k * x``. Its transfer matrix maps the plane-wave amplitudes (A, B) on
the left to those on the right::

    M = 1/2 [[2 - i lam,      -i lam E*],
             [i lam E,         2 + i lam]],     E = exp(2 i phi)

which can also be written ``M = I - (i lam / 2) L`` with the nilpotent
``L = [[1, E*], [-E, -1]]``. The transfer matrix of a whole array is the
ordered product ``M_N ... M_2 M_1``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DeltarrayError, DomainError

MAX_EXPANSION_ORDER = 20


@dataclass(frozen=True)
class Complex2x2:
    """A complex 2x2 matrix stored entrywise."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def zero(cls):
        return cls(0j, 0j, 0j, 0j)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError(f"expected a 2x2 array, got shape {a.shape}")
        return cls(complex(a[0, 0]), complex(a[0, 1]), complex(a[1, 0]), complex(a[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    def __matmul__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2(*_mul(self.entries(), other.entries()))

    def __add__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2(*(a + b for a, b in zip(self.entries(), other.entries())))

    def __sub__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2(*(a - b for a, b in zip(self.entries(), other.entries())))

    def scale(self, c: complex) -> "Complex2x2":
        return Complex2x2(*(c * a for a in self.entries()))

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.m11, self.m12, self.m21, self.m22)

    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> complex:
        return self.m11 + self.m22

    def max_abs_diff(self, other: "Complex2x2") -> float:
        return max(abs(a - b) for a, b in zip(self.entries(), other.entries()))


@dataclass(frozen=True)
class TransferMatrix(Complex2x2):
    """Transfer matrix of a barrier or array.

    Products of single-barrier matrices have unit determinant and the
    structure ``m11 = conj(m22)``, ``m12 = conj(m21)``; hence
    ``|m22|**2 = 1 + |m21|**2``.
    """

    @classmethod
    def of(cls, m: Complex2x2) -> "TransferMatrix":
        return cls(*m.entries())

    def __matmul__(self, other):
        out = Complex2x2(*_mul(self.entries(), other.entries()))
        return TransferMatrix.of(out) if isinstance(other, TransferMatrix) else out

    def structure_error(self) -> float:
        """Largest violation of the determinant and conjugation identities."""
        return max(
            abs(self.det() - 1),
            abs(self.m11 - self.m22.conjugate()),
            abs(self.m12 - self.m21.conjugate()),
        )


def _mul(a, b):
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    return (
        a11 * b11 + a12 * b21,
        a11 * b12 + a12 * b22,
        a21 * b11 + a22 * b21,
        a21 * b12 + a22 * b22,
    )


@dataclass(frozen=True)
class Barrier:
    """A delta barrier at ``x`` (nm) with reduced strength ``g`` (nm^-1); g < 0 is a well."""

    x: float
    g: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "g", float(self.g))
        if not (math.isfinite(self.x) and math.isfinite(self.g)):
            raise DomainError(f"barrier fields must be finite, got x={self.x!r}, g={self.g!r}")


class BarrierArray(Sequence[Barrier]):
    """Immutable ordered sequence of barriers with strictly increasing positions."""

    __slots__ = ("_barriers",)

    def __init__(self, barriers: Iterable[Barrier | tuple[float, float]] = ()):
        bs = tuple(b if isinstance(b, Barrier) else Barrier(*b) for b in barriers)
        for left, right in zip(bs, bs[1:]):
            if not right.x > left.x:
                raise DomainError(
                    f"barrier positions must be strictly increasing "
                    f"(got {left.x!r} then {right.x!r}); merge coincident barriers first"
                )
        self._barriers = bs

    @classmethod
    def from_lists(cls, xs: Sequence[float], gs: Sequence[float]) -> "BarrierArray":
        if len(xs) != len(gs):
            raise ValueError("positions and strengths differ in length")
        return cls(Barrier(x, g) for x, g in zip(xs, gs))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BarrierArray(self._barriers[i])
        return self._barriers[i]

    def __len__(self) -> int:
        return len(self._barriers)

    def __iter__(self) -> Iterator[Barrier]:
        return iter(self._barriers)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BarrierArray):
            return NotImplemented
        return self._barriers == other._barriers

    def __hash__(self) -> int:
        return hash(self._barriers)

    def __repr__(self) -> str:
        inner = ", ".join(f"({b.x!r}, {b.g!r})" for b in self._barriers)
        return f"BarrierArray([{inner}])"

    @property
    def positions(self) -> np.ndarray:
        return np.array([b.x for b in self._barriers], dtype=float)

    @property
    def strengths(self) -> np.ndarray:
        return np.array([b.g for b in self._barriers], dtype=float)

    @property
    def extent(self) -> float:
        """Distance between the first and last barrier."""
        if not self._barriers:
            return 0.0
        return self._barriers[-1].x - self._barriers[0].x

    def shifted(self, dx: float) -> "BarrierArray":
        return BarrierArray(Barrier(b.x + dx, b.g) for b in self._barriers)


def _check_k(k: float) -> None:
    if not k > 0:
        raise DomainError("nonpositive wave number")


def _check_nonempty(array: BarrierArray) -> None:
    if len(array) == 0:
        raise DeltarrayError("empty array")


def lmatrix(phi: float) -> Complex2x2:
    """L-matrix ``[[1, E*], [-E, -1]]`` with ``E = exp(2 i phi)``; traceless and nilpotent."""
    E = cmath.exp(2j * phi)
    return Complex2x2(1 + 0j, E.conjugate(), -E, -1 + 0j)


def single_transfer(lam: float, phi: float) -> TransferMatrix:
    """Transfer matrix of one barrier of dimensionless strength ``lam`` at phase ``phi``."""
    E = cmath.exp(2j * phi)
    return TransferMatrix(
        1 - 0.5j * lam,
        -0.5j * lam * E.conjugate(),
        0.5j * lam * E,
        1 + 0.5j * lam,
    )


def single_transfer_from_lmatrix(lam: float, phi: float) -> TransferMatrix:
    """Same matrix as :func:`single_transfer`, built as ``I - (i lam / 2) L``."""
    return TransferMatrix.of(Complex2x2.identity() - lmatrix(phi).scale(0.5j * lam))


def compose(array: BarrierArray, k: float) -> TransferMatrix:
    """Transfer matrix ``M_N ... M_1`` of the array at wave number ``k``.

    Factors are multiplied strictly right to left, barrier 1 first.
    """
    _check_nonempty(array)
    _check_k(k)
    acc = single_transfer(array[0].g / k, k * array[0].x)
    for b in array[1:]:
        acc = single_transfer(b.g / k, k * b.x) @ acc
    return acc


def compose_expansion(array: BarrierArray, k: float) -> TransferMatrix:
    """Transfer matrix from the ordered expansion over L-matrix products.

    Sums ``(-i/2)^m  lam_{n1} L_{n1} ... lam_{nm} L_{nm}`` over all
    ``n1 > ... > nm``. Costs 2^N products, so it is only meant as an
    independent cross-check of :func:`compose`.
    """
    _check_nonempty(array)
    _check_k(k)
    n = len(array)
    if n > MAX_EXPANSION_ORDER:
        raise DeltarrayError("expansion too large")
    terms = [lmatrix(k * b.x).scale(b.g / k) for b in array]
    total = Complex2x2.identity()
    for m in range(1, n + 1):
        coef = (-0.5j) ** m
        for idx in itertools.combinations(range(n - 1, -1, -1), m):
            prod = terms[idx[0]]
            for i in idx[1:]:
                prod = prod @ terms[i]
            total = total + prod.scale(coef)
    return TransferMatrix.of(total)


def transmission(tm: Complex2x2) -> float:
    """Transmission probability ``1 / |m22|**2``."""
    return 1.0 / abs(tm.m22) ** 2


def reflection(tm: Complex2x2) -> float:
    """Reflection probability ``|m21 / m22|**2``."""
    return abs(tm.m21 / tm.m22) ** 2


def array_transmission(array: BarrierArray, k: float) -> float:
    return transmission(compose(array, k))


def m22_n2(lam1: float, lam2: float, theta: float) -> complex:
    """Lower-right entry for a barrier pair, ``(z2 z1 + lam2 lam1 e^{i theta}) / 4``.

    ``theta = 2 k (x2 - x1)`` is the relative phase and ``z_n = 2 + i lam_n``.
    """
    z1 = 2 + 1j * lam1
    z2 = 2 + 1j * lam2
    return (z2 * z1 + lam2 * lam1 * cmath.exp(1j * theta)) / 4


def compose_grid(array: BarrierArray, ks) -> tuple[np.ndarray, ...]:
    """Vectorised :func:`compose` over an array of wave numbers.

    Returns the four entries ``(m11, m12, m21, m22)`` as complex arrays.
    """
    _check_nonempty(array)
    ks = np.asarray(ks, dtype=float)
    if np.any(~(ks > 0)):
        raise DomainError("nonpositive wave number")
    acc = None
    for b in array:
        lam = b.g / ks
        phase = 2.0 * ks * b.x
        E = np.cos(phase) + 1j * np.sin(phase)
        m = (1 - 0.5j * lam, -0.5j * lam * E.conj(), 0.5j * lam * E, 1 + 0.5j * lam)
        acc = m if acc is None else _mul(m, acc)
    return acc
