"""Conversions between laboratory units and the reduced quantities of the engine.

The engine works with lengths in nm, wave numbers in nm^-1 and reduced
barrier strengths ``g = 2 m J / hbar**2`` in nm^-1. The constants below are
pinned so that conversions are bit-stable across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Barrier, BarrierArray
from .errors import DomainError

HBAR = 1.054571817e-34  # J s
ELECTRON_MASS = 9.1093837015e-31  # kg
ELECTRON_VOLT = 1.602176634e-19  # J
ANGSTROM = 1e-10  # m
NANOMETER = 1e-9  # m
MILLI_ELECTRON_VOLT = 1e-3 * ELECTRON_VOLT

CONSTANTS = {
    "hbar_J_s": "1.054571817e-34",
    "electron_mass_kg": "9.1093837015e-31",
    "electron_volt_J": "1.602176634e-19",
    "angstrom_m": "1e-10",
    "nanometer_m": "1e-9",
}


@dataclass(frozen=True)
class Material:
    """Host medium, characterised by the carrier effective mass ratio m*/m_e."""

    effective_mass_ratio: float
    label: str = ""

    def __post_init__(self):
        r = self.effective_mass_ratio
        if not (math.isfinite(r) and r > 0):
            raise DomainError(f"effective mass ratio must be positive, got {r!r}")

    @property
    def mass(self) -> float:
        """Effective mass in kg."""
        return self.effective_mass_ratio * ELECTRON_MASS


MATERIALS = {
    "GaAs": Material(0.067, "GaAs"),
    "vacuum": Material(1.0, "vacuum"),
}


def get_material(name: str) -> Material:
    try:
        return MATERIALS[name]
    except KeyError:
        raise DomainError(
            f"unknown material {name!r}; known: {', '.join(sorted(MATERIALS))}"
        ) from None


def reduced_strength(J: float, material: Material) -> float:
    """Reduced strength ``g = 2 m J / hbar**2`` in nm^-1 for ``J`` in eV*Angstrom."""
    J_si = J * ELECTRON_VOLT * ANGSTROM
    return 2.0 * material.mass * J_si / HBAR**2 * NANOMETER


def strength_from_reduced(g: float, material: Material) -> float:
    """Inverse of :func:`reduced_strength`, returning J in eV*Angstrom."""
    return g / NANOMETER * HBAR**2 / (2.0 * material.mass) / (ELECTRON_VOLT * ANGSTROM)


def k_from_energy(energy: float, material: Material) -> float:
    """Wave number in nm^-1 of a free carrier with kinetic ``energy`` in meV."""
    if not energy > 0:
        raise DomainError(f"energy must be positive, got {energy!r} meV")
    return math.sqrt(2.0 * material.mass * energy * MILLI_ELECTRON_VOLT) / HBAR * NANOMETER


def energy_from_k(k: float, material: Material) -> float:
    """Kinetic energy in meV for wave number ``k`` in nm^-1."""
    if not k > 0:
        raise DomainError(f"wave number must be positive, got {k!r} nm^-1")
    p = k / NANOMETER * HBAR
    return p * p / (2.0 * material.mass) / MILLI_ELECTRON_VOLT


def energies_from_k(ks, material: Material):
    """Vectorised :func:`energy_from_k` for numpy arrays (no domain check)."""
    p = ks / NANOMETER * HBAR
    return p * p / (2.0 * material.mass) / MILLI_ELECTRON_VOLT


def dimensionless_strength(J: float, energy: float, material: Material) -> float:
    """``lambda = sqrt(2 m J**2 / eps) / hbar``, signed like ``J``."""
    if not energy > 0:
        raise DomainError(f"energy must be positive, got {energy!r} meV")
    J_si = J * ELECTRON_VOLT * ANGSTROM
    lam = math.sqrt(2.0 * material.mass * J_si**2 / (energy * MILLI_ELECTRON_VOLT)) / HBAR
    return math.copysign(lam, J)


@dataclass(frozen=True)
class PhysicalArraySpec:
    """Barrier array in laboratory units: positions in nm, strengths in eV*Angstrom."""

    material: Material
    barriers: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "barriers", tuple((float(x), float(J)) for x, J in self.barriers)
        )
        xs = [x for x, _ in self.barriers]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("barrier positions must be strictly increasing")

    @classmethod
    def from_pairs(cls, material: Material, pairs: Sequence[tuple[float, float]]):
        return cls(material, tuple(pairs))

    def to_array(self) -> BarrierArray:
        return BarrierArray(
            Barrier(x, reduced_strength(J, self.material)) for x, J in self.barriers
        )
