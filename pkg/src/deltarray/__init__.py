"""Quantum transmission through one-dimensional arrays of delta-function barriers."""

__version__ = "0.1.0"

from .core import (
    Barrier,
    BarrierArray,
    Complex2x2,
    TransferMatrix,
    compose,
    compose_expansion,
    lmatrix,
    m22_n2,
    reflection,
    single_transfer,
    transmission,
)
from .errors import ConfigError, DeltarrayError, DomainError
from .physunits import Material, energy_from_k, k_from_energy, reduced_strength
from .reduction import genuine_order, phase_equal, reduce
from .resonance import find_perfect_tunnelling, pair_resonance_k, scan

__all__ = [
    "Barrier",
    "BarrierArray",
    "Complex2x2",
    "ConfigError",
    "DeltarrayError",
    "DomainError",
    "Material",
    "TransferMatrix",
    "compose",
    "compose_expansion",
    "energy_from_k",
    "find_perfect_tunnelling",
    "genuine_order",
    "k_from_energy",
    "lmatrix",
    "m22_n2",
    "pair_resonance_k",
    "phase_equal",
    "reduce",
    "reduced_strength",
    "reflection",
    "scan",
    "single_transfer",
    "transmission",
]
