"""Acceptance suite.

Each test prints one ``PASS``/``FAIL`` line and then asserts the same
condition, so ``pytest tests/test_acceptance.py -s`` doubles as a report.
"""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from deltarray.cli import main
from deltarray.core import (
    BarrierArray,
    Complex2x2,
    array_transmission,
    compose,
    compose_expansion,
    lmatrix,
    reflection,
    transmission,
)
from deltarray.filters import Composition, design_pair_cell, flatten, pair_cell, peak_analysis
from deltarray.physunits import MATERIALS, k_from_energy, reduced_strength
from deltarray.reduction import reduce
from deltarray.resonance import (
    audit_pair,
    audit_quad,
    find_perfect_tunnelling,
    qbs_residual_n3,
    scan,
    symmetric_roots,
)

from conftest import FIXTURES

GaAs = MATERIALS["GaAs"]
G = reduced_strength(2.0, GaAs)
E_LO, E_HI = 0.1, 15.0


def report(n, title, ok, detail=""):
    print(f"\n{'PASS' if ok else 'FAIL'}  [{n:>2}] {title}" + (f"  ({detail})" if detail else ""))
    assert ok, f"[{n}] {title}: {detail}"


def random_array(rng, n, span=20.0, gmax=2.0):
    xs = np.sort(rng.uniform(0, span, n))
    while np.any(np.diff(xs) <= 1e-6):
        xs = np.sort(rng.uniform(0, span, n))
    return BarrierArray.from_lists(xs, rng.uniform(-gmax, gmax, n))


# 1 -------------------------------------------------------------------------


def test_algebraic_identities():
    rng = np.random.default_rng(1)
    cases = 1000
    worst = dict(L2=0.0, anti=0.0, det=0.0, conj=0.0, unit=0.0)
    zero = Complex2x2.zero()
    ident = Complex2x2.identity()
    for _ in range(cases):
        a, b = rng.uniform(-50, 50, 2)
        La, Lb = lmatrix(a), lmatrix(b)
        worst["L2"] = max(worst["L2"], (La @ La).max_abs_diff(zero))
        anti = La @ Lb + Lb @ La
        worst["anti"] = max(worst["anti"], anti.max_abs_diff(ident.scale(4 * math.sin(b - a) ** 2)))

        arr = random_array(rng, int(rng.integers(1, 7)), gmax=1.5)
        k = rng.uniform(0.5, 5.0)
        m = compose(arr, k)
        scale = max(1.0, max(abs(z) for z in m.entries()))
        worst["det"] = max(worst["det"], abs(m.det() - 1) / scale**2)
        worst["conj"] = max(
            worst["conj"],
            abs(m.m11 - m.m22.conjugate()) / scale,
            abs(m.m12 - m.m21.conjugate()) / scale,
        )
        worst["unit"] = max(worst["unit"], abs(transmission(m) + reflection(m) - 1))
    ok = all(v <= 1e-12 for v in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(1, f"algebraic identities over {cases} random cases each", ok, detail)


# 2 -------------------------------------------------------------------------


def test_expansion_matches_product():
    rng = np.random.default_rng(2)
    cases = 300
    worst = 0.0
    for _ in range(cases):
        arr = random_array(rng, int(rng.integers(1, 7)))
        k = rng.uniform(0.2, 5.0)
        a, b = compose(arr, k), compose_expansion(arr, k)
        scale = max(abs(z) for z in a.entries())
        worst = max(worst, a.max_abs_diff(b) / scale)
    report(2, f"ordered expansion equals matrix product ({cases} arrays, N <= 6)", worst <= 1e-10, f"max rel {worst:.1e}")


# 3 -------------------------------------------------------------------------


def test_reduction_to_single_barrier():
    rng = np.random.default_rng(3)
    worst_T, worst_g, worst_zero, bad = 0.0, 0.0, 0.0, 0
    for _ in range(200):
        k = rng.uniform(0.2, 3.0)
        n = int(rng.integers(2, 7))
        steps = rng.integers(1, 5, n - 1)
        xs = np.concatenate([[0.0], np.cumsum(steps)]) * math.pi / k + rng.uniform(-5, 5)
        gs = rng.uniform(-2, 2, n)
        arr = BarrierArray.from_lists(xs, gs)
        r = reduce(arr, k)
        if r.classification.name != "EffectiveSingle":
            bad += 1
            continue
        worst_g = max(worst_g, abs(r.effective[0].g - gs.sum()))
        worst_T = max(worst_T, abs(array_transmission(r.effective, k) - array_transmission(arr, k)))

        gs0 = gs - gs.mean()
        worst_zero = max(worst_zero, abs(1 - array_transmission(BarrierArray.from_lists(xs, gs0), k)))
    ok = bad == 0 and worst_T <= 1e-10 and worst_g <= 1e-12 and worst_zero <= 1e-10
    report(
        3,
        "resonant spacings reduce to one barrier; zero total strength transmits fully",
        ok,
        f"unreduced {bad}, dT {worst_T:.1e}, dg {worst_g:.1e}, 1-T(sum 0) {worst_zero:.1e}",
    )


# 4 -------------------------------------------------------------------------


def test_triple_roots():
    roots = symmetric_roots(3, 1.0).ks()
    expected = [math.pi / 2, math.acos(-0.8)]
    dk = max(abs(a - b) for a, b in zip(roots, expected)) if len(roots) == 2 else math.inf
    res = max(abs(qbs_residual_n3(1.0, t)) for t in expected)
    res_found = max((abs(qbs_residual_n3(1.0, t)) for t in roots), default=math.inf)
    ok = dk <= 1e-6 and res < 1e-9 and res_found < 1e-9
    report(4, "three-barrier roots at pi/2 and arccos(-4/5)", ok, f"found {roots}, |dk| {dk:.1e}, residual {max(res, res_found):.1e}")


# 5 -------------------------------------------------------------------------


def _triple_T(a, b):
    # k = 1, lam = 1; only phases mod pi matter, so fold them and lift x3 past x2
    x2 = a % math.pi or math.pi
    x3 = b % math.pi + math.pi
    return array_transmission(BarrierArray.from_lists([0.0, x2, x3], [1.0, 1.0, 1.0]), 1.0)


def _locus_distance(a, b):
    d = (b - 2 * a) % math.pi
    return min(d, math.pi - d)


def test_triple_locus():
    n = 200
    axis = np.linspace(0, math.pi, n + 2)[1:-1]
    step = axis[1] - axis[0]
    T = np.array([[_triple_T(a, b) for b in axis] for a in axis])

    # stated check: every grid point above 1 - 1e-8 sits next to the locus
    hits = np.argwhere(T > 1 - 1e-8)
    stated = all(_locus_distance(axis[i], axis[j]) <= 2 * step for i, j in hits)

    # the grid never gets that close, so also test its best points
    top = np.argwhere(T > 0.9999)
    top_ok = len(top) > 0 and all(_locus_distance(axis[i], axis[j]) <= 2 * step for i, j in top)

    # and refined exact points
    rng = np.random.default_rng(5)
    refined = []
    for _ in range(60):
        start = rng.uniform(0.05, math.pi - 0.05, 2)
        sol = minimize(lambda p: 1 - _triple_T(*p), start, method="Nelder-Mead", options=dict(xatol=1e-9, fatol=1e-14, maxiter=800))
        if sol.fun < 1e-10:
            refined.append(sol.x)
    refined_ok = len(refined) > 0 and max(_locus_distance(a, b) for a, b in refined) < 1e-4

    # periodicity on unfolded geometry: move x2 and x3 on by pi together
    def unfolded(a, b, shift):
        return array_transmission(BarrierArray.from_lists([0.0, a + shift, b + math.pi + shift], [1.0] * 3), 1.0)

    sub = axis[::10]
    periodic = max(abs(unfolded(a, b, math.pi) - unfolded(a, b, 0.0)) for a in sub for b in sub)
    roots = [(a % math.pi, b % math.pi) for a, b in refined]
    shifted_roots = max(abs(1 - unfolded(a, b, math.pi)) for a, b in roots) if roots else math.inf

    ok = stated and top_ok and refined_ok and periodic <= 1e-12 and shifted_roots <= 1e-10
    report(
        5,
        "three-barrier T = 1 set lies on kx3 = 2 kx2 (mod pi) and is pi-periodic",
        ok,
        f"grid hits {len(hits)}, max grid T {T.max():.7f}, near-peak points {len(top)}, "
        f"refined {len(refined)}, periodicity {periodic:.1e}",
    )


# 6 -------------------------------------------------------------------------


def test_pair_formula_audit():
    lines, derived_ok, either = [], True, True
    for lam in (0.5, 1.0, 2.0, 3.0):
        derived, printed = audit_pair(lam)
        lines.append(derived.summary())
        lines.append(printed.summary())
        derived_ok &= derived.passed and all(abs(1 - r.T) <= 1e-10 for r in derived.records)
        either &= derived.passed or printed.passed
    for line in lines:
        print("      " + line)
    report(6, "pair condition audit produced; derived form passes", derived_ok and either and len(lines) == 8)


# 7 -------------------------------------------------------------------------


def test_quad_formula_audit():
    all_perfect, reported = True, True
    for lam in (0.5, 1.0, 2.0):
        audit = audit_quad(lam)
        summary = audit.summary()
        print("      " + summary)
        for r in audit.records:
            print(f"        kx2 {r.root:.12f}  1-T {1 - r.T:.1e}  printed residual {r.residual:.4g}")
        all_perfect &= len(audit.records) > 0 and all(abs(1 - r.T) <= 1e-10 for r in audit.records)
        reported &= ("PASS" in summary) != ("FLAGGED" in summary)
        reported &= all(math.isfinite(r.residual) or math.isnan(r.residual) for r in audit.records)
    report(7, "four-barrier oracle roots transmit fully; printed residual outcome reported", all_perfect and reported)


# 8 -------------------------------------------------------------------------


def _composite(d_short, spacer):
    return flatten(Composition((pair_cell(100.0, G, "long"), pair_cell(d_short, G, "short")), (spacer,)))


def test_gaas_filter():
    long_cell = pair_cell(100.0, G).array
    qbs = find_perfect_tunnelling(long_cell, k_from_energy(E_LO, GaAs), k_from_energy(E_HI, GaAs), 4000, material=GaAs)
    e_long = min(qbs.energies(), key=lambda e: abs(e - 4.56))
    d = design_pair_cell(4.56, GaAs, 2.0, 0)

    spec = scan(_composite(d, 150.0), k_from_energy(E_LO, GaAs), k_from_energy(E_HI, GaAs), 20001, GaAs)
    i = int(np.argmax(spec.T))
    e_max, T_max = float(spec.energy[i]), float(spec.T[i])
    others = [p.T_max for p in peak_analysis(spec).peaks if abs(p.energy - e_max) > 1e-9]
    runner_up = max(others, default=0.0)

    ok = abs(e_long - 4.56) <= 0.05 and 25 <= d <= 32 and abs(e_max - 4.56) <= 0.1 and T_max >= 0.99 and T_max > runner_up
    report(
        8,
        "GaAs two-cell filter",
        ok,
        f"100 nm QBS {e_long:.5f} meV, designed d {d:.4f} nm, max T {T_max:.6f} at {e_max:.4f} meV, next peak {runner_up:.4f}",
    )


# 9 -------------------------------------------------------------------------


def test_spacer_robustness():
    long_cell = pair_cell(100.0, G).array
    qbs = find_perfect_tunnelling(long_cell, k_from_energy(E_LO, GaAs), k_from_energy(E_HI, GaAs), 4000, material=GaAs)
    e_match = min(qbs.energies(), key=lambda e: abs(e - 4.56))
    d = design_pair_cell(e_match, GaAs, 2.0, 0)
    k = k_from_energy(e_match, GaAs)

    rng = np.random.default_rng(9)
    spacers = rng.uniform(50, 300, 10)
    worst = max(1 - array_transmission(_composite(d, s), k) for s in spacers)

    # for reference only: the cell designed at exactly 4.56 meV is not quite matched
    d_lit = design_pair_cell(4.56, GaAs, 2.0, 0)
    e_mid = 0.5 * (e_match + 4.56)
    lit = max(1 - array_transmission(_composite(d_lit, s), k_from_energy(e_mid, GaAs)) for s in spacers)
    report(
        9,
        "matched composite transmits fully for 10 random spacers in [50, 300] nm",
        worst <= 1e-6,
        f"matched at {e_match:.6f} meV, worst 1-T {worst:.1e}; 4.56 meV design gives {lit:.1e}",
    )


# 10 ------------------------------------------------------------------------


def test_cli_contract(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = [main(["scan", "--config", str(FIXTURES / "gaas_pair.json"), "--out", str(p)]) for p in (a, b)]
    identical = codes == [0, 0] and a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0

    blocker = tmp_path / "not_a_dir"
    blocker.write_text("")
    exit_codes = (
        main(["scan", "--config", str(FIXTURES / "malformed_json.json")]),
        main(["scan", "--config", str(FIXTURES / "nonpositive_energy.json")]),
        main(["scan", "--config", str(FIXTURES / "gaas_pair.json"), "--out", str(blocker / "out.csv")]),
    )
    capsys.readouterr()
    ok = identical and exit_codes == (2, 3, 4)
    report(10, "CLI scan is byte-identical across runs; exit codes 2/3/4", ok, f"exit codes {exit_codes}")


@pytest.fixture(autouse=True)
def _show(capsys):
    # keep the PASS/FAIL lines visible even without -s
    yield
    out = capsys.readouterr().out
    with capsys.disabled():
        print(out, end="")
