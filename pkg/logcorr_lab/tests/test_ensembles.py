"""Tests for the Haar eigenphase samplers."""

import logging

import numpy as np
import pytest

from ..ensembles import (
    MATRIX_BATCH_ENTRIES, TWO_PI, EigenphaseSet, Group, _phases_from_eigenvalues, cmv_eigenphases,
    haar_orthogonal_batch, haar_symplectic_batch, haar_unitary_batch, phase_batch_size, sample_eigenphases,
    sample_phase_batch, trace_power, trace_power_batch, verblunsky_coefficients,
)
from ..charpoly import log_abs_from_phases, verblunsky_field
from ..estimates import Estimate


@pytest.fixture
def rng():
    """Fixed generator so failures are reproducible."""
    return np.random.default_rng(20240611)


class TestGroup:
    """Test group name parsing."""

    @pytest.mark.parametrize("name,expected", [
        ("unitary", Group.UNITARY),
        ("CUE", Group.UNITARY),
        ("so-even", Group.SPECIAL_ORTHOGONAL_EVEN),
        ("so_even", Group.SPECIAL_ORTHOGONAL_EVEN),
        ("o-minus", Group.ORTHOGONAL_MINUS),
        ("Sp", Group.SYMPLECTIC),
        ("cbe", Group.CIRCULAR_BETA),
    ])
    def test_from_string(self, name, expected):
        """Test config spellings map onto the enum."""
        assert Group.from_string(name) is expected

    def test_from_string_unknown(self):
        """Test unknown group names are rejected."""
        with pytest.raises(ValueError, match="Unknown group"):
            Group.from_string("gue")

    def test_doubled(self):
        """Test which groups act on 2N dimensions."""
        assert not Group.UNITARY.doubled
        assert Group.SYMPLECTIC.doubled
        assert Group.ORTHOGONAL_MINUS.doubled


class TestHaarMatrices:
    """Test the matrix samplers behind the eigenphase samplers."""

    def test_unitary_batch_is_unitary(self, rng):
        """Test Q^H Q = I for every draw."""
        q = haar_unitary_batch(6, 5, rng)
        eye = np.eye(6)
        for a in q:
            np.testing.assert_allclose(a.conj().T @ a, eye, atol=1e-12)

    @pytest.mark.parametrize("det_sign", [1, -1])
    def test_orthogonal_batch_determinant(self, rng, det_sign):
        """Test draws are orthogonal with the requested determinant."""
        q = haar_orthogonal_batch(6, 8, rng, det_sign=det_sign)
        for a in q:
            np.testing.assert_allclose(a.T @ a, np.eye(6), atol=1e-12)
            assert np.linalg.det(a) == pytest.approx(det_sign, abs=1e-10)

    def test_symplectic_batch_preserves_form(self, rng):
        """Test A is unitary and A^T Ω A = Ω."""
        N = 3
        omega = np.block([[np.zeros((N, N)), np.eye(N)], [-np.eye(N), np.zeros((N, N))]])
        for a in haar_symplectic_batch(N, 4, rng):
            np.testing.assert_allclose(a.conj().T @ a, np.eye(2 * N), atol=1e-10)
            np.testing.assert_allclose(a.T @ omega @ a, omega, atol=1e-10)


class TestPhaseSampling:
    """Test sampled eigenphase sets."""

    @pytest.mark.parametrize("group,width", [
        (Group.UNITARY, 5),
        (Group.SPECIAL_ORTHOGONAL_EVEN, 10),
        (Group.ORTHOGONAL_MINUS, 10),
        (Group.SYMPLECTIC, 10),
    ])
    def test_shapes_and_range(self, rng, group, width):
        """Test batch shape, range [0, 2π) and sorting."""
        phases = sample_phase_batch(group, 5, 7, rng)
        assert phases.shape == (7, width)
        assert phases.min() >= 0.0 and phases.max() < TWO_PI
        assert np.all(np.diff(phases, axis=-1) >= 0)

    @pytest.mark.parametrize("group", [Group.SPECIAL_ORTHOGONAL_EVEN, Group.SYMPLECTIC])
    def test_conjugate_pairs(self, rng, group):
        """Test spectra are symmetric under θ -> 2π - θ."""
        phases = sample_phase_batch(group, 4, 3, rng)
        mirrored = np.sort(np.mod(TWO_PI - phases, TWO_PI), axis=-1)
        np.testing.assert_allclose(mirrored, phases, atol=1e-9)

    def test_orthogonal_minus_fixed_points(self, rng):
        """Test det = -1 spectra contain 1 and -1."""
        for row in sample_phase_batch(Group.ORTHOGONAL_MINUS, 4, 5, rng):
            assert 0.0 in row
            assert np.any(np.isclose(row, np.pi))

    def test_cbe_requires_beta(self, rng):
        """Test the CβE sampler insists on beta > 0."""
        with pytest.raises(ValueError, match="beta > 0"):
            sample_phase_batch(Group.CIRCULAR_BETA, 4, 2, rng)

    def test_beta_rejected_for_unitary(self, rng):
        """Test beta is refused outside the CβE."""
        with pytest.raises(ValueError, match="only meaningful"):
            sample_phase_batch(Group.UNITARY, 4, 2, rng, beta=2.0)

    def test_zero_size_rejected(self, rng):
        """Test N = 0 is an error."""
        with pytest.raises(ValueError):
            sample_phase_batch(Group.UNITARY, 0, 2, rng)

    def test_sample_eigenphases_accepts_strings(self, rng):
        """Test the single-draw helper accepts a group name."""
        eigs = sample_eigenphases("cbe", 6, rng, beta=1.0)
        assert eigs.group is Group.CIRCULAR_BETA
        assert eigs.size == 6
        assert eigs.beta_ensemble == 1.0

    def test_trace_power_variance(self, rng):
        """Test E|Tr A^2|^2 = 2 for U(8)."""
        phases = sample_phase_batch(Group.UNITARY, 8, 4000, rng)
        estimate = Estimate.from_samples(np.abs(trace_power_batch(phases, 2)) ** 2)
        assert estimate.agrees_with(2.0, n_stderr=4.0)

    def test_trace_power_single(self):
        """Test Tr A^j on a known spectrum."""
        eigs = EigenphaseSet.from_phases([0.0, np.pi])
        assert trace_power(eigs, 1) == pytest.approx(0.0, abs=1e-12)
        assert trace_power(eigs, 2) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            trace_power(eigs, 0)

    @pytest.mark.parametrize("group,N,expected", [
        (Group.UNITARY, 64, 512),
        (Group.CIRCULAR_BETA, 64, 512),
        (Group.SYMPLECTIC, 64, 128),
        (Group.SPECIAL_ORTHOGONAL_EVEN, 64, 128),
        (Group.UNITARY, 4096, 1),
    ])
    def test_phase_batch_size(self, group, N, expected):
        """Test chunk sizes hold about MATRIX_BATCH_ENTRIES entries and never drop below one draw."""
        assert phase_batch_size(group, N) == expected
        assert MATRIX_BATCH_ENTRIES == 1 << 21


class TestUnitModulus:
    """Test the unit-circle check on computed eigenvalues."""

    def test_exact_values_are_silent(self, caplog):
        """Test eigenvalues on the circle pass without a warning."""
        with caplog.at_level(logging.WARNING, logger="logcorr_lab.ensembles"):
            phases = _phases_from_eigenvalues(np.array([[1.0, -1.0]]))
        np.testing.assert_allclose(phases, [[0.0, np.pi]])
        assert caplog.records == []

    def test_small_drift_is_renormalized_with_warning(self, caplog):
        """Test eigenvalues slightly off the circle are projected onto it and logged."""
        values = np.array([[1.0 + 1e-10, -1.0 - 1e-10j, 1j]])
        with caplog.at_level(logging.WARNING, logger="logcorr_lab.ensembles"):
            phases = _phases_from_eigenvalues(values)
        np.testing.assert_allclose(phases, [[0.0, np.pi / 2, np.pi]], atol=1e-9)
        assert len(caplog.records) == 1
        assert "Renormalized 1 eigenvalue(s)" in caplog.text

    def test_large_drift_is_an_error(self):
        """Test a deviation beyond UNIT_MODULUS_TOLERANCE raises."""
        with pytest.raises(ValueError, match="off the unit circle"):
            _phases_from_eigenvalues(np.array([[1.0 + 1e-6, -1.0]]))


class TestEigenphaseSet:
    """Test the eigenphase container."""

    def test_from_phases_reduces_and_sorts(self):
        """Test angles are reduced mod 2π and sorted."""
        eigs = EigenphaseSet.from_phases([7.0, -1.0, 0.5])
        np.testing.assert_allclose(eigs.phases, np.sort(np.mod([7.0, -1.0, 0.5], TWO_PI)))

    def test_unsorted_rejected(self):
        """Test unsorted phases are refused."""
        with pytest.raises(ValueError, match="sorted"):
            EigenphaseSet(group=Group.UNITARY, n_half=2, phases=np.array([1.0, 0.5]))

    def test_wrong_length_rejected(self):
        """Test doubled groups need 2N phases."""
        with pytest.raises(ValueError, match="Expected 4 phases"):
            EigenphaseSet(group=Group.SYMPLECTIC, n_half=2, phases=np.array([0.1, 0.2]))

    def test_phases_read_only(self):
        """Test the stored phases cannot be mutated."""
        eigs = EigenphaseSet.from_phases([0.1, 0.2])
        with pytest.raises(ValueError):
            eigs.phases[0] = 1.0


class TestVerblunsky:
    """Test Verblunsky coefficients and the CMV construction."""

    def test_coefficient_ranges(self, rng):
        """Test |α_k| < 1 and |α_{N-1}| = 1."""
        alphas = verblunsky_coefficients(6, 2.0, 50, rng)
        assert np.all(np.abs(alphas[:, :-1]) < 1.0)
        np.testing.assert_allclose(np.abs(alphas[:, -1]), 1.0)

    def test_cmv_zeros_match_szego_recursion(self, rng):
        """Test the CMV eigenphases are the zeros of Φ_N from the recursion."""
        alphas = verblunsky_coefficients(6, 2.0, 1, rng)[0]
        phases = cmv_eigenphases(alphas)
        thetas = np.linspace(0.05, TWO_PI - 0.05, 37)
        away = np.min(np.abs(np.angle(np.exp(1j * (thetas[:, None] - phases[None, :])))), axis=1) > 1e-3
        np.testing.assert_allclose(log_abs_from_phases(phases, thetas[away]),
                                   verblunsky_field(alphas, thetas[away]), atol=1e-8)
