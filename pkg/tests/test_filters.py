import math

import numpy as np
import pytest

from deltarray.core import Barrier, BarrierArray, array_transmission
from deltarray.errors import DeltarrayError, DomainError
from deltarray.filters import (
    Cell,
    Composition,
    design_pair_cell,
    flatten,
    pair_cell,
    peak_analysis,
    shared_resonances,
)
from deltarray.physunits import MATERIALS, k_from_energy, reduced_strength
from deltarray.reduction import reduce
from deltarray.resonance import Spectrum, find_perfect_tunnelling, scan

GaAs = MATERIALS["GaAs"]
G = reduced_strength(2.0, GaAs)
K_LO, K_HI = k_from_energy(0.1, GaAs), k_from_energy(15.0, GaAs)


class TestFlatten:
    def test_single_cell(self):
        arr = BarrierArray.from_lists([0, 1.5, 4], [1, 2, 3])
        assert flatten(Composition((Cell(arr),))) == arr

    def test_two_cell_layout(self):
        comp = Composition((pair_cell(100, G), pair_cell(29, G)), (150,))
        assert list(flatten(comp).positions) == [0, 100, 250, 279]

    def test_resonant_spacers_reduce_to_single(self):
        k = 0.6
        cells = tuple(Cell(BarrierArray([Barrier(0, g)])) for g in (0.2, 0.3, 0.4))
        comp = Composition(cells, (math.pi / k, 2 * math.pi / k))
        r = reduce(flatten(comp), k)
        assert r.classification.name == "EffectiveSingle"
        assert r.effective[0].g == pytest.approx(0.9)

    def test_rejects_nonpositive_spacer(self):
        with pytest.raises(DomainError):
            Composition((pair_cell(1, 1), pair_cell(1, 1)), (0.0,))

    def test_spacer_count(self):
        with pytest.raises(DeltarrayError):
            Composition((pair_cell(1, 1), pair_cell(1, 1)), ())

    def test_cell_must_start_at_zero(self):
        with pytest.raises(DomainError):
            Cell(BarrierArray([Barrier(1.0, 1.0)]))
        assert Cell.local(BarrierArray([Barrier(1.0, 1.0)])).array[0].x == 0


class TestShared:
    def test_identical_cells(self):
        c = pair_cell(100, G)
        own = find_perfect_tunnelling(c.array, K_LO, K_HI, 4000, material=GaAs).energies()
        matches = shared_resonances(c, c, K_LO, K_HI, GaAs)
        assert [m.energy for m in matches] == pytest.approx(own)

    def test_gaas_pair_cells(self):
        matches = shared_resonances(pair_cell(100, G), pair_cell(29, G), K_LO, K_HI, GaAs, match_tol=0.3)
        assert len(matches) == 1
        assert matches[0].energy == pytest.approx(4.56, abs=0.25)

    def test_disjoint(self):
        a, b = pair_cell(100, G), pair_cell(40, G)
        assert shared_resonances(a, b, K_LO, K_HI, GaAs) == []
        comp = flatten(Composition((a, b), (150,)))
        assert len(find_perfect_tunnelling(comp, K_LO, K_HI, 20000, material=GaAs)) == 0


class TestDesign:
    def test_branch_two_is_100nm(self):
        assert design_pair_cell(4.56, GaAs, 2.0, 2) == pytest.approx(100, abs=0.05)

    def test_branch_zero_is_short(self):
        d = design_pair_cell(4.56, GaAs, 2.0, 0)
        assert 25 <= d <= 32
        k = k_from_energy(4.56, GaAs)
        assert array_transmission(pair_cell(d, G).array, k) == pytest.approx(1, abs=1e-10)

    def test_weak_limit(self):
        k = k_from_energy(4.56, GaAs)
        assert design_pair_cell(4.56, GaAs, 1e-9, 1) == pytest.approx(3 * math.pi / (2 * k), rel=1e-6)

    def test_round_trip_with_pair_resonance(self):
        d = design_pair_cell(3.0, GaAs, 1.0, 1)
        rep = find_perfect_tunnelling(pair_cell(d, reduced_strength(1.0, GaAs)).array, K_LO, K_HI, 4000, material=GaAs)
        assert min(abs(e - 3.0) for e in rep.energies()) < 3.0 * 1e-9


class TestPeaks:
    def test_monotone(self):
        spec = scan(BarrierArray([Barrier(0, 1.0)]), 0.1, 5, 300)
        assert len(peak_analysis(spec)) == 0

    def test_too_few_points(self):
        spec = Spectrum(np.array([1.0, 2.0]), np.array([0.5, 0.6]), np.array([0.5, 0.4]))
        with pytest.raises(DeltarrayError):
            peak_analysis(spec)

    def test_triangle_fwhm(self):
        x = np.linspace(0, 2, 201)
        T = 1 - np.abs(x - 1)
        peaks = peak_analysis(Spectrum(x, T, 1 - T)).peaks
        assert len(peaks) == 1
        assert peaks[0].energy == pytest.approx(1.0)
        assert peaks[0].fwhm == pytest.approx(1.0, abs=1e-12)

    def test_pair_peaks_match_resonances(self):
        c = pair_cell(100, G)
        spec = scan(c.array, K_LO, K_HI, 40000, GaAs)
        peaks = [p for p in peak_analysis(spec).peaks if p.T_max > 0.999]
        qbs = find_perfect_tunnelling(c.array, K_LO, K_HI, 4000, material=GaAs).energies()
        assert len(peaks) == len(qbs)
        for p, e in zip(peaks, qbs):
            step = 2 * e * (spec.k[1] - spec.k[0]) / k_from_energy(e, GaAs)
            assert abs(p.energy - e) <= step
