import numpy as np
import pytest

from kerrdimer.hilbert import build_basis
from kerrdimer.liouvillian import DensityMatrix, build_liouvillian, steady_state
from kerrdimer.model import SystemParams
from kerrdimer.observables import (
    detect_peaks,
    excitation_spectrum,
    n0_normalization,
    photon_statistics,
    poisson_comparison,
)


def params(**kw):
    defaults = dict(chi=2.1711386723121917, J=2.0, gamma_1=0.5, gamma_ex=0.5,
                    gamma_2=0.1, gamma_tip=0.0, omega_drive_amp=0.01, delta=0.0)
    defaults.update(kw)
    return SystemParams(**defaults)


def fock_state(basis, m, n):
    rho = np.zeros((basis.size, basis.size), dtype=complex)
    rho[basis.index_of(m, n), basis.index_of(m, n)] = 1.0
    return DensityMatrix(basis=basis, data=rho)


class TestPhotonStatistics:
    def test_vacuum_correlators_undefined(self):
        basis = build_basis(per_mode=(2, 2))
        with pytest.raises(ValueError, match="undefined"):
            photon_statistics(fock_state(basis, 0, 0))

    def test_two_photon_fock_state(self):
        basis = build_basis(per_mode=(3, 0))
        stats = photon_statistics(fock_state(basis, 2, 0))
        assert stats.n1 == pytest.approx(2.0)
        assert stats.g2 == pytest.approx(0.5)
        assert stats.g3 == pytest.approx(0.0, abs=1e-14)

    def test_moment_consistency(self):
        basis = build_basis(per_mode=(3, 3))
        rng = np.random.default_rng(2)
        x = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = DensityMatrix(basis=basis, data=(x @ x.conj().T) / np.trace(x @ x.conj().T))
        stats = photon_statistics(rho)
        assert stats.n1 == pytest.approx(
            sum(m * p for (m, n), p in stats.p_mn.items()), rel=1e-12)
        assert stats.n2 == pytest.approx(
            sum(n * p for (m, n), p in stats.p_mn.items()), rel=1e-12)
        assert np.sum(list(stats.p_mn.values())) == pytest.approx(1.0, abs=1e-8)

    def test_g2_diagonal_sufficiency(self):
        basis = build_basis(per_mode=(4, 4))
        p = params(delta=-1.9, gamma_tip=1.0)
        rho = steady_state(build_liouvillian(p, basis))
        stats = photon_statistics(rho)
        n1 = sum(m * pr for (m, n), pr in stats.p_mn.items())
        m2 = sum(m * (m - 1) * pr for (m, n), pr in stats.p_mn.items())
        assert stats.g2 == pytest.approx(m2 / n1**2, rel=1e-10)


class TestPoissonComparison:
    def test_poisson_self_comparison(self):
        mu = 0.2
        from math import factorial

        p_m = np.array([np.exp(-mu) * mu**m / factorial(m) for m in range(25)])
        cmp = poisson_comparison(p_m)
        assert np.max(np.abs(cmp.deviation)) < 1e-10

    def test_mean_matches_distribution(self):
        p_m = np.array([0.5, 0.3, 0.2])
        cmp = poisson_comparison(p_m)
        assert cmp.mu == pytest.approx(0.7)


class TestPeakDetection:
    def test_two_lorentzians(self):
        x = np.linspace(-4, 4, 501)
        y = 1 / ((x - 2) ** 2 + 0.05) + 1 / ((x + 2) ** 2 + 0.05)
        peaks = detect_peaks(y)
        assert len(peaks) == 2

    def test_shallow_ripple_merged(self):
        x = np.linspace(-4, 4, 501)
        y = np.exp(-x**2) * (1 + 0.01 * np.sin(40 * x))
        assert len(detect_peaks(y)) == 1

    def test_plateau_like_single_peak(self):
        y = np.concatenate([np.linspace(0, 1, 100), np.linspace(1, 0, 100)[1:]])
        assert len(detect_peaks(y)) <= 1


class TestExcitationSpectrum:
    def test_linear_cavity_lorentzian(self):
        p = params(chi=0.0, J=0.0)
        spec = excitation_spectrum(p, np.linspace(-2, 2, 401))
        assert spec.peak_count == 1
        assert spec.peak_deltas[0] == pytest.approx(0.0, abs=0.02)
        peak_value = np.nanmax(spec.s1)
        expected = (4 * p.omega_drive_amp**2 / p.gamma1_prime**2) / n0_normalization(p)
        assert peak_value == pytest.approx(expected, rel=1e-3)

    def test_split_modes_at_zero_tip_loss(self):
        p = params(gamma_tip=0.0)
        spec = excitation_spectrum(p, np.linspace(-4, 4, 501))
        assert spec.peak_count == 2
        s = np.sqrt(p.J**2 - ((p.gamma2_prime - p.gamma1_prime) / 4) ** 2)
        assert sorted(np.abs(spec.peak_deltas)) == pytest.approx([s, s], abs=0.05)

    def test_coalesced_at_ep(self):
        for gt in (8.9, 10.5):
            spec = excitation_spectrum(params(gamma_tip=gt), np.linspace(-4, 4, 501))
            assert spec.peak_count == 1
            assert spec.peak_deltas[0] == pytest.approx(0.0, abs=0.02)

    def test_peak_count_grid_stability(self):
        for gt in (0.0, 8.9):
            counts = [excitation_spectrum(params(gamma_tip=gt),
                                          np.linspace(-4, 4, n)).peak_count
                      for n in (501, 1001)]
            assert counts[0] == counts[1]

    def test_backends_agree(self):
        p = params(gamma_tip=3.0)
        deltas = np.linspace(-3, 3, 7)
        ana = excitation_spectrum(p, deltas, backend="analytic")
        num = excitation_spectrum(p, deltas, backend="lindblad", cutoff=(4, 4))
        assert np.allclose(ana.s1, num.s1, rtol=0.01)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            excitation_spectrum(params(), np.array([]))

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            excitation_spectrum(params(), np.linspace(-1, 1, 5), backend="exact")
