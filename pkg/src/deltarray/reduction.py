"""Resonance-induced reduction of barrier arrays.

When ``k (x_b - x_a)`` is an integer multiple of pi the two barriers share the
same phase factor and hence the same L-matrix. Because ``L**2 = 0``, a run of
adjacent barriers with a common L-matrix acts as one barrier whose strength is
the sum of the run's strengths. This module finds such runs at a probe wave
number and rewrites the array accordingly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .core import Barrier, BarrierArray, array_transmission, lmatrix
from .errors import DeltarrayError, DomainError

DEFAULT_PHASE_TOL = 1e-9
VERIFY_TOL = 1e-10

EFFECTIVE_NAMES = {1: "EffectiveSingle", 2: "EffectivePair", 3: "EffectiveTriple"}


def phase_equal(x_a: float, x_b: float, k: float, tol: float = DEFAULT_PHASE_TOL) -> bool:
    """True when ``k (x_b - x_a)`` lies within ``tol * pi`` of an integer multiple of pi."""
    if not k > 0:
        raise DomainError("nonpositive wave number")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = k * (x_b - x_a) / math.pi
    return abs(a - round(a)) <= tol


@dataclass(frozen=True)
class MergeRecord:
    """One entry of a reduction log.

    ``indices`` are input barrier indices (0-based). For an adjacent merge,
    ``target`` is the index of the resulting barrier in the effective array.
    Non-adjacent equalities carry ``target = None`` and a descriptive note.
    """

    indices: tuple[int, ...]
    target: int | None
    note: str


@dataclass(frozen=True)
class Classification:
    """Effective barrier count; ``GenuineN`` when nothing could be merged."""

    effective_n: int
    input_n: int

    @property
    def name(self) -> str:
        if self.effective_n == self.input_n:
            return "GenuineN"
        return EFFECTIVE_NAMES.get(self.effective_n, "GenuineN")

    def __str__(self) -> str:
        if self.name == "GenuineN":
            return f"GenuineN({self.effective_n})"
        return self.name


@dataclass(frozen=True)
class ReductionResult:
    effective: BarrierArray
    classification: Classification
    merge_log: tuple[MergeRecord, ...] = field(default_factory=tuple)
    case: str | None = None

    @property
    def effective_n(self) -> int:
        return len(self.effective)

    def to_dict(self) -> dict:
        return {
            "classification": str(self.classification),
            "effective_n": self.effective_n,
            "case": self.case,
            "effective": [{"x": b.x, "g": b.g} for b in self.effective],
            "merge_log": [
                {"indices": list(r.indices), "target": r.target, "note": r.note}
                for r in self.merge_log
            ],
        }


def _runs(array: BarrierArray, k: float, tol: float) -> list[list[int]]:
    runs: list[list[int]] = []
    for i, b in enumerate(array):
        if runs and phase_equal(array[runs[-1][0]].x, b.x, k, tol):
            runs[-1].append(i)
        else:
            runs.append([i])
    return runs


def _merge(array: BarrierArray, runs: list[list[int]]) -> BarrierArray:
    out = []
    for run in runs:
        g = array[run[0]].g
        for i in run[1:]:
            g += array[i].g
        out.append(Barrier(array[run[0]].x, g))
    return BarrierArray(out)


def _transmission_agrees(a: BarrierArray, b: BarrierArray, k: float) -> bool:
    return abs(array_transmission(a, k) - array_transmission(b, k)) <= VERIFY_TOL


def reduce(array: BarrierArray, k: float, tol: float = DEFAULT_PHASE_TOL) -> ReductionResult:
    """Collapse runs of adjacent phase-equal barriers at wave number ``k``.

    Each run is anchored at its first barrier; a later barrier joins the run
    while it is phase-equal to that anchor. The merged barrier sits at the
    anchor position and carries the summed strength. A merge is kept only if
    the transmission at ``k`` is unchanged to 1e-10. Phase equalities between
    non-adjacent effective barriers are logged but never merged, since that
    would reorder the matrix product.
    """
    if len(array) == 0:
        raise DeltarrayError("empty array")
    if not k > 0:
        raise DomainError("nonpositive wave number")

    runs = _runs(array, k, tol)
    log: list[MergeRecord] = []
    effective = _merge(array, runs)
    if len(effective) < len(array) and not _transmission_agrees(array, effective, k):
        # tolerance admitted a merge that is not transmission-preserving;
        # fall back to the merges that individually survive verification
        kept: list[list[int]] = []
        for j, run in enumerate(runs):
            trial = kept + [run] + [[i] for r in runs[j + 1:] for i in r]
            if len(run) > 1 and _transmission_agrees(array, _merge(array, trial), k):
                kept.append(run)
            else:
                if len(run) > 1:
                    log.append(MergeRecord(tuple(run), None, "verification failed, not merged"))
                kept.extend([i] for i in run)
        runs = kept
        effective = _merge(array, runs)

    for target, run in enumerate(runs):
        if len(run) > 1:
            log.append(MergeRecord(tuple(run), target, "adjacent resonance merged"))

    for a, b in itertools.combinations(range(len(effective)), 2):
        if b - a > 1 and phase_equal(effective[a].x, effective[b].x, k, tol):
            src = (runs[a][0], runs[b][0])
            log.append(MergeRecord(src, None, "pattern matches, product-rank reduced"))

    case = four_barrier_case(array, k, tol) if len(array) == 4 else None
    if case == "iii(f)":
        log.append(MergeRecord((0, 2), None, "equivalent to case iii(d) up to relabelling strengths"))
    return ReductionResult(effective, Classification(len(effective), len(array)), tuple(log), case)


def genuine_order(array: BarrierArray, k: float, tol: float = DEFAULT_PHASE_TOL) -> int:
    """Number of barriers left after :func:`reduce`."""
    return reduce(array, k, tol).effective_n


def quadrilinear_norm(array: BarrierArray, k: float) -> float:
    """Largest entry of ``L4 L3 L2 L1``; zero iff two adjacent L-matrices coincide."""
    if len(array) != 4:
        raise DeltarrayError("quadrilinear product needs exactly four barriers")
    ls = [lmatrix(k * b.x) for b in array]
    q = ls[3] @ ls[2] @ ls[1] @ ls[0]
    return max(abs(e) for e in q.entries())


# equality pattern among (L1, L2, L3, L4) -> case label for N = 4
_FOUR_CASES = {
    frozenset({(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}): "i",
    frozenset({(0, 1), (0, 2), (1, 2)}): "ii(a)",
    frozenset({(1, 2), (1, 3), (2, 3)}): "ii(b)",
    frozenset({(0, 1), (2, 3)}): "ii(c)",
    frozenset({(0, 1)}): "iii(a)",
    frozenset({(0, 1), (0, 3), (1, 3)}): "iii(b)",
    frozenset({(1, 2)}): "iii(c)",
    frozenset({(0, 3)}): "iii(d)",
    frozenset({(2, 3)}): "iii(e)",
    frozenset({(0, 2)}): "iii(f)",
    frozenset(): "iv",
}


def four_barrier_case(array: BarrierArray, k: float, tol: float = DEFAULT_PHASE_TOL) -> str:
    """Label a four-barrier array by which of its L-matrices coincide at ``k``.

    Labels follow the usual taxonomy: ``i`` (all equal), ``ii(a)``-``ii(c)``
    (effective pair), ``iii(a)``-``iii(f)`` (one coincidence, effective triple
    or rank-reduced product), ``iv`` (genuine four). Other patterns return
    ``"other"``.
    """
    if len(array) != 4:
        raise DeltarrayError("case taxonomy is defined for four barriers only")
    equal = frozenset(
        (i, j)
        for i, j in itertools.combinations(range(4), 2)
        if phase_equal(array[i].x, array[j].x, k, tol)
    )
    return _FOUR_CASES.get(equal, "other")
