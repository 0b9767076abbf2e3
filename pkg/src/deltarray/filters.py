"""Tunnelling energy filters built from cells of barriers.

A composite of cells tunnels perfectly only at energies that are
perfect-tunnelling energies of every cell. Choosing cells that share exactly
one such energy yields a filter that passes that energy and suppresses the
other resonances of the individual cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .core import Barrier, BarrierArray
from .errors import DeltarrayError, DomainError
from .physunits import Material, k_from_energy, reduced_strength
from .resonance import Spectrum, find_perfect_tunnelling

DEFAULT_MATCH_TOL = 0.05  # meV
DEFAULT_PROMINENCE = 0.05


@dataclass(frozen=True)
class Cell:
    """A sub-array in local coordinates (first barrier at 0)."""

    array: BarrierArray
    label: str = ""

    def __post_init__(self):
        if len(self.array) == 0:
            raise DeltarrayError("empty cell")
        if self.array[0].x != 0:
            raise DomainError("cell positions must start at 0")

    @classmethod
    def local(cls, array: BarrierArray, label: str = "") -> "Cell":
        """Build a cell from an array placed anywhere, shifting it to start at 0."""
        return cls(array.shifted(-array[0].x), label)

    @property
    def extent(self) -> float:
        return self.array.extent


@dataclass(frozen=True)
class Composition:
    """Cells in series; ``spacers[i]`` is the gap from the last barrier of cell i to the first of cell i+1."""

    cells: tuple[Cell, ...]
    spacers: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "spacers", tuple(float(s) for s in self.spacers))
        if not self.cells:
            raise DeltarrayError("composition needs at least one cell")
        if len(self.spacers) != len(self.cells) - 1:
            raise DeltarrayError("need exactly one spacer between consecutive cells")
        if any(not (s > 0 and math.isfinite(s)) for s in self.spacers):
            raise DomainError("spacers must be positive (cells would overlap)")


def flatten(comp: Composition) -> BarrierArray:
    """Concatenate the cells of ``comp`` into one array in global coordinates."""
    out: list[Barrier] = []
    offset = 0.0
    for i, cell in enumerate(comp.cells):
        if i:
            offset += comp.cells[i - 1].extent + comp.spacers[i - 1]
        out.extend(Barrier(b.x + offset, b.g) for b in cell.array)
    return BarrierArray(out)


@dataclass(frozen=True)
class SharedResonance:
    energy_a: float
    energy_b: float

    @property
    def energy(self) -> float:
        return 0.5 * (self.energy_a + self.energy_b)


def shared_resonances(
    a: Cell,
    b: Cell,
    k_min: float,
    k_max: float,
    material: Material,
    match_tol: float = DEFAULT_MATCH_TOL,
    grid: int = 4000,
) -> list[SharedResonance]:
    """Pairs of perfect-tunnelling energies (meV) of two cells that agree within ``match_tol``."""
    ea = find_perfect_tunnelling(a.array, k_min, k_max, grid, material=material).energies()
    eb = find_perfect_tunnelling(b.array, k_min, k_max, grid, material=material).energies()
    out = []
    for x in ea:
        for y in eb:
            if abs(x - y) <= match_tol:
                out.append(SharedResonance(x, y))
    return out


def design_pair_cell(
    target_energy: float, material: Material, J: float, branch: int = 0
) -> float:
    """Spacing (nm) of two equal barriers of strength ``J`` (eV*Angstrom) that tunnel perfectly at ``target_energy`` (meV).

    ``d = (pi + 2 arctan(lam / 2) + 2 pi branch) / (2 k)`` with ``k`` and
    ``lam = g / k`` taken at the target energy.
    """
    if J == 0:
        raise DomainError("J must be nonzero")
    if branch < 0 or int(branch) != branch:
        raise DomainError("branch must be a nonnegative integer")
    k = k_from_energy(target_energy, material)
    lam = reduced_strength(J, material) / k
    d = (math.pi + 2 * math.atan(lam / 2) + 2 * math.pi * branch) / (2 * k)
    if not d > 0:
        raise DomainError("branch empty")
    return d


def pair_cell(d: float, g: float, label: str = "") -> Cell:
    return Cell(BarrierArray([Barrier(0.0, g), Barrier(d, g)]), label)


@dataclass(frozen=True)
class Peak:
    energy: float
    T_max: float
    fwhm: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.peaks)

    def highest(self) -> Peak | None:
        return max(self.peaks, key=lambda p: p.T_max, default=None)


def _crossing(x0, x1, y0, y1, level):
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def peak_analysis(spec: Spectrum, prominence: float = DEFAULT_PROMINENCE) -> PeakSet:
    """Interior transmission maxima with at least ``prominence`` and their FWHM.

    Positions are on the spectrum's energy axis (or wave number when no
    material is bound). The width is measured at ``T_max / 2`` by linear
    interpolation; it is NaN if the curve never drops that low on a side.
    """
    if len(spec) < 3:
        raise DeltarrayError("too few points for peak analysis")
    x = np.asarray(spec.axis)
    T = np.asarray(spec.T)
    idx, _ = find_peaks(T, prominence=prominence)
    peaks = []
    for i in idx:
        half = T[i] / 2
        left = right = math.nan
        j = i
        while j > 0 and T[j - 1] > half:
            j -= 1
        if j > 0:
            left = _crossing(x[j - 1], x[j], T[j - 1], T[j], half)
        j = i
        while j < len(T) - 1 and T[j + 1] > half:
            j += 1
        if j < len(T) - 1:
            right = _crossing(x[j], x[j + 1], T[j], T[j + 1], half)
        peaks.append(Peak(float(x[i]), float(T[i]), float(right - left)))
    return PeakSet(tuple(sorted(peaks, key=lambda p: p.energy)))
