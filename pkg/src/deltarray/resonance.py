"""Transmission spectra, perfect-tunnelling search and closed-form QBS residuals.

Perfect tunnelling (T = 1) happens exactly where the lower-left entry ``m21``
of the composed transfer matrix vanishes. ``|m21|`` is smooth away from its
zeros and V-shaped at them, so zeros are located by a grid pre-scan followed
by golden-section minimisation inside each local-minimum bracket.

The closed-form residuals for symmetric arrays of two, three and four equal
barriers are kept alongside the numerical search so that each can be audited
against it (see :func:`audit_pair`, :func:`audit_triple`, :func:`audit_quad`).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import brentq

from .core import Barrier, BarrierArray, compose, compose_grid, transmission
from .errors import DeltarrayError, DomainError
from .physunits import Material, energies_from_k, energy_from_k

PERFECT_TOL = 1e-10
NEAR_TOL = 1e-3
GOLDEN_MAX_ITER = 200
GOLDEN_REL_TOL = 1e-12
MIN_GRID = 16
INVGOLD = (math.sqrt(5) - 1) / 2

ORACLE = "OracleRootFind"
TRANSCENDENTAL_N2 = "TranscendentalN2"
TRANSCENDENTAL_N3 = "TranscendentalN3"
TRANSCENDENTAL_N4 = "TranscendentalN4"


def thread_count() -> int:
    """Worker cap from ``DELTARRAY_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("DELTARRAY_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DeltarrayError(f"DELTARRAY_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DeltarrayError("DELTARRAY_THREADS must be nonnegative")
    return n or (os.cpu_count() or 1)


def golden_section(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = GOLDEN_REL_TOL,
    max_iter: int = GOLDEN_MAX_ITER,
) -> tuple[float, float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), width)`` where ``width`` is the final bracket size.
    Stops once the bracket is below ``rel_tol * |x|`` (or ``rel_tol`` near 0),
    or after ``max_iter`` iterations.
    """
    c = b - INVGOLD * (b - a)
    d = a + INVGOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rel_tol * max(abs(a), abs(b), 1e-300):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVGOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVGOLD * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, b - a


def bracket_minima(values: np.ndarray) -> list[int]:
    """Indices of interior local minima of a sampled function."""
    v = np.asarray(values)
    idx = np.nonzero((v[1:-1] <= v[:-2]) & (v[1:-1] < v[2:]))[0] + 1
    return idx.tolist()


def locate_zeros(
    magnitude: Callable[[float], float],
    grid: np.ndarray,
    sampled: np.ndarray,
) -> list[tuple[float, float, float]]:
    """Refine every local minimum of a sampled nonnegative function.

    ``sampled`` holds ``magnitude`` evaluated on ``grid``. Each interior
    local minimum ``i`` is refined on ``[grid[i-1], grid[i+1]]``. Returns
    ``(x, magnitude(x), bracket width)`` triples in grid order.
    """
    out = []
    for i in bracket_minima(sampled):
        out.append(golden_section(magnitude, grid[i - 1], grid[i + 1]))
    return out


@dataclass(frozen=True)
class Spectrum:
    """Transmission sampled on a uniform wave-number grid.

    ``energy`` (meV) is present only when the scan was bound to a material.
    """

    k: np.ndarray
    T: np.ndarray
    R: np.ndarray
    energy: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.k)

    def points(self) -> Iterator[tuple[float, float | None, float, float]]:
        for i in range(len(self.k)):
            e = None if self.energy is None else float(self.energy[i])
            yield float(self.k[i]), e, float(self.T[i]), float(self.R[i])

    @property
    def axis(self) -> np.ndarray:
        """Energy axis when available, else wave number."""
        return self.k if self.energy is None else self.energy


def _check_range(k_min: float, k_max: float, n_points: int, minimum: int = 2) -> None:
    ok = (
        math.isfinite(k_min)
        and math.isfinite(k_max)
        and 0 < k_min < k_max
        and int(n_points) == n_points
        and n_points >= minimum
    )
    if not ok:
        raise DeltarrayError("bad scan range")


def _grid_m(array: BarrierArray, ks: np.ndarray, workers: int | None):
    workers = workers or 1
    if workers <= 1 or len(ks) < 4096:
        return compose_grid(array, ks)
    chunks = np.array_split(ks, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: compose_grid(array, c), chunks))
    return tuple(np.concatenate([p[j] for p in parts]) for j in range(4))


def scan(
    array: BarrierArray,
    k_min: float,
    k_max: float,
    n_points: int,
    material: Material | None = None,
    workers: int | None = None,
) -> Spectrum:
    """Transmission and reflection on ``n_points`` equally spaced wave numbers."""
    _check_range(k_min, k_max, n_points)
    if len(array) == 0:
        raise DeltarrayError("empty array")
    ks = np.linspace(k_min, k_max, int(n_points))
    _, _, m21, m22 = _grid_m(array, ks, workers)
    a22 = np.abs(m22) ** 2
    T = 1.0 / a22
    R = np.abs(m21) ** 2 / a22
    energy = None if material is None else energies_from_k(ks, material)
    return Spectrum(ks, T, R, energy)


@dataclass(frozen=True)
class Resonance:
    """A refined transmission maximum.

    ``k`` is in nm^-1 for array searches; for the symmetric-array searches it is
    the dimensionless phase ``k x2`` (the probe is taken at k = 1).
    """

    k: float
    energy: float | None
    T: float
    residual: float
    bracket: float


@dataclass(frozen=True)
class ResonanceReport:
    resonances: tuple[Resonance, ...]
    method: str = ORACLE
    near_misses: tuple[Resonance, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.resonances)

    def ks(self) -> list[float]:
        return [r.k for r in self.resonances]

    def energies(self) -> list[float]:
        return [r.energy for r in self.resonances]


def _classify(candidates, evaluate, tol, near_tol, material):
    perfect, near = [], []
    for x, _, width in candidates:
        tm = evaluate(x)
        res = abs(tm.m21) ** 2
        e = energy_from_k(x, material) if material is not None else None
        r = Resonance(x, e, transmission(tm), res, width)
        if res < tol:
            perfect.append(r)
        elif res < near_tol:
            near.append(r)
    return tuple(perfect), tuple(near)


def find_perfect_tunnelling(
    array: BarrierArray,
    k_min: float,
    k_max: float,
    grid: int = 2000,
    tol: float = PERFECT_TOL,
    near_tol: float = NEAR_TOL,
    material: Material | None = None,
) -> ResonanceReport:
    """All wave numbers in ``[k_min, k_max]`` where ``|m21|**2 < tol``.

    Minima with ``tol <= |m21|**2 < near_tol`` are returned as near misses
    (resonant maxima with T < 1).
    """
    _check_range(k_min, k_max, grid, MIN_GRID)
    if len(array) == 0:
        raise DeltarrayError("empty array")
    ks = np.linspace(k_min, k_max, int(grid))
    m21 = compose_grid(array, ks)[2]
    cands = locate_zeros(lambda k: abs(compose(array, k).m21), ks, np.abs(m21))
    perfect, near = _classify(cands, lambda k: compose(array, k), tol, near_tol, material)
    return ResonanceReport(perfect, ORACLE, near)


def symmetric_array(n: int, lam: float, kx2: float) -> BarrierArray:
    """Equal-strength, equally spaced array probed at k = 1.

    Barrier ``j`` sits at ``j * kx2`` with strength ``lam`` so that every
    barrier has dimensionless strength ``lam`` and phase ``j * kx2``.
    """
    return BarrierArray(Barrier(j * kx2, lam) for j in range(n))


def symmetric_roots(
    n: int,
    lam: float,
    lo: float = 0.0,
    hi: float = math.pi,
    grid: int = 4000,
    tol: float = PERFECT_TOL,
) -> ResonanceReport:
    """Perfect-tunnelling spacings ``k x2`` of the symmetric ``n``-barrier array at fixed ``lam``."""
    if n < 2:
        raise DeltarrayError("need at least two barriers")
    if not (hi > lo and grid >= MIN_GRID):
        raise DeltarrayError("bad scan range")
    ts = np.linspace(lo, hi, int(grid) + 2)[1:-1]
    vals = np.array([abs(compose(symmetric_array(n, lam, t), 1.0).m21) for t in ts])

    def evaluate(t):
        return compose(symmetric_array(n, lam, t), 1.0)

    cands = locate_zeros(lambda t: abs(evaluate(t).m21), ts, vals)
    perfect, near = _classify(cands, evaluate, tol, NEAR_TOL, None)
    return ResonanceReport(perfect, ORACLE, near)


# -- closed-form residuals ---------------------------------------------------


def qbs_residual_n2(lam: float, theta: float) -> float:
    """Perfect-tunnelling residual of an equal-strength pair, ``theta = 2 k (x2 - x1)``.

    Equals ``8 (|m22|**2 - 1) / lam**2``; nonnegative, vanishing exactly at
    ``theta = pi + 2 arctan(lam / 2)`` (mod 2 pi).
    """
    return (4 + lam**2) + (4 - lam**2) * math.cos(theta) + 4 * lam * math.sin(theta)


def qbs_residual_n2_printed(lam: float, theta: float) -> float:
    """Published tangent form, ``tan(2 k (x1 - x2)) - 4 lam**2 / (4 + lam**2)``.

    Kept for auditing only; its roots do not give perfect tunnelling.
    """
    return math.tan(-theta) - 4 * lam**2 / (4 + lam**2)


def pair_root_theta(lam: float) -> float:
    """Relative phase in ``[0, 2 pi)`` at which an equal pair tunnels perfectly."""
    return (math.pi + 2 * math.atan(lam / 2)) % (2 * math.pi)


def qbs_residual_n3(lam: float, kx2: float) -> float:
    """Published residual for three equal, equally spaced barriers.

    ``cos(2 kx2) - (2 + lam**2 + 4 lam sin(2 kx2)) / (lam**2 - 4)``
    """
    if abs(lam * lam - 4) < 1e-12:
        raise DomainError("pole of transcendental form; use oracle")
    s = math.sin(2 * kx2)
    return math.cos(2 * kx2) - (2 + lam**2 + 4 * lam * s) / (lam**2 - 4)


def qbs_residual_n4(lam: float, kx2: float) -> float:
    """Published residual for four equal, equally spaced barriers.

    ``4 cos(2 kx2) + 6 lam**2 sin(kx2)
    - lam tan(kx2) (2 - 12 cos(kx2)**2 - lam**2 sin(kx2)**2)``
    """
    c = math.cos(kx2)
    if abs(c) < 1e-12:
        raise DomainError("tan pole of transcendental form; use oracle")
    s = math.sin(kx2)
    return 4 * math.cos(2 * kx2) + 6 * lam**2 * s - lam * (s / c) * (
        2 - 12 * c * c - lam**2 * s * s
    )


def pair_resonance_k(g: float, d: float, branch: int = 0) -> float:
    """Wave number of perfect tunnelling through two equal barriers.

    Solves ``2 k d = pi + 2 arctan(g / (2 k)) + 2 pi branch`` for ``k``.
    """
    if not d > 0:
        raise DomainError("spacing must be positive")
    if branch < 0 or int(branch) != branch:
        raise DomainError("branch must be a nonnegative integer")
    target = math.pi * (2 * branch + 1)
    if g == 0:
        return target / (2 * d)

    def F(k):
        return 2 * k * d - 2 * math.atan(g / (2 * k)) - target

    lo = 1e-300
    hi = (branch + 1) * math.pi / d + abs(g)
    if not (F(lo) < 0 < F(hi)):
        raise DomainError("branch empty")
    return brentq(F, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def pair_fixed_point_error(g: float, d: float, branch: int, k: float) -> float:
    """Relative residual of the pair resonance equation at ``k``."""
    lhs = 2 * k * d
    return abs(lhs - math.pi * (2 * branch + 1) - 2 * math.atan(g / (2 * k))) / lhs


# -- audits --------------------------------------------------------------------


@dataclass(frozen=True)
class AuditRecord:
    """One root checked against the transmission oracle.

    ``root`` is ``theta = 2 k d`` for pairs and ``k x2`` otherwise.
    """

    root: float
    T: float
    residual: float
    passes: bool


@dataclass(frozen=True)
class FormulaAudit:
    form: str
    method: str
    lam: float
    records: tuple[AuditRecord, ...]

    @property
    def passed(self) -> bool:
        return bool(self.records) and all(r.passes for r in self.records)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FLAGGED"
        return f"{self.form} lam={self.lam:g}: {verdict} ({len(self.records)} roots)"


def _pair_T(lam: float, theta: float) -> float:
    return transmission(compose(symmetric_array(2, lam, theta / 2), 1.0))


def audit_pair(lam: float, grid: int = 4000) -> tuple[FormulaAudit, FormulaAudit]:
    """Audit the derived and the published pair conditions on ``theta`` in (0, 2 pi).

    Derived-form roots are located by minimising the nonnegative residual;
    published-form roots are ``n pi - arctan(4 lam**2 / (4 + lam**2))``.
    Every root is passed to the oracle, which must report T = 1 to 1e-10.
    """
    if lam == 0:
        raise DomainError("lam = 0 is the free particle; every phase transmits")
    ts = np.linspace(0, 2 * math.pi, grid + 2)[1:-1]
    vals = np.array([qbs_residual_n2(lam, t) for t in ts])
    derived = []
    for th, res, _ in locate_zeros(lambda t: qbs_residual_n2(lam, t), ts, vals):
        T = _pair_T(lam, th)
        derived.append(AuditRecord(th, T, res, abs(1 - T) <= PERFECT_TOL and abs(res) <= 1e-9))

    c = math.atan(4 * lam**2 / (4 + lam**2))
    printed = []
    for n in (1, 2):
        th = n * math.pi - c
        res = qbs_residual_n2_printed(lam, th)
        T = _pair_T(lam, th)
        printed.append(AuditRecord(th, T, res, abs(1 - T) <= PERFECT_TOL))
    return (
        FormulaAudit("pair_derived", TRANSCENDENTAL_N2, lam, tuple(derived)),
        FormulaAudit("pair_printed", TRANSCENDENTAL_N2, lam, tuple(printed)),
    )


def _audit_symmetric(n, lam, residual, form, method, grid):
    report = symmetric_roots(n, lam, 0.0, math.pi, grid)
    records = []
    for r in report.resonances:
        try:
            res = residual(lam, r.k)
        except DomainError:
            res = math.nan
        ok = abs(1 - r.T) <= PERFECT_TOL and abs(res) <= 1e-9
        records.append(AuditRecord(r.k, r.T, res, bool(ok)))
    return FormulaAudit(form, method, lam, tuple(records))


def audit_triple(lam: float, grid: int = 4000) -> FormulaAudit:
    """Evaluate the published three-barrier residual at every oracle root in (0, pi)."""
    return _audit_symmetric(3, lam, qbs_residual_n3, "triple_printed", TRANSCENDENTAL_N3, grid)


def audit_quad(lam: float, grid: int = 4000) -> FormulaAudit:
    """Evaluate the published four-barrier residual at every oracle root in (0, pi)."""
    return _audit_symmetric(4, lam, qbs_residual_n4, "quad_printed", TRANSCENDENTAL_N4, grid)


def closed_form_residuals(array: BarrierArray, k: float) -> dict[str, float] | None:
    """Closed-form residuals for equal, equally spaced arrays of 2-4 barriers.

    Returns ``None`` when the array is not of that symmetric form or a
    residual is at a pole.
    """
    n = len(array)
    if n not in (2, 3, 4):
        return None
    gs = array.strengths
    xs = array.positions - array.positions[0]
    if not np.allclose(gs, gs[0], rtol=1e-12, atol=0):
        return None
    if not np.allclose(np.diff(xs), xs[1], rtol=1e-9, atol=0):
        return None
    lam = gs[0] / k
    kx2 = k * xs[1]
    try:
        if n == 2:
            return {
                "derived": qbs_residual_n2(lam, 2 * kx2),
                "printed": qbs_residual_n2_printed(lam, 2 * kx2),
            }
        if n == 3:
            return {"printed": qbs_residual_n3(lam, kx2)}
        return {"printed": qbs_residual_n4(lam, kx2)}
    except DomainError:
        return None
