"""Tests for partitions, tableaux and Gelfand-Tsetlin patterns."""

from fractions import Fraction

import pytest

from ..errors import BudgetExceededError
from ..symfunc import (
    GTPattern, HalfPattern, Partition, Signature, Tableau, count_ssyt, enumerate_gt_patterns,
    enumerate_half_patterns, enumerate_ssyt, gt_pattern_count, gt_to_ssyt, orthogonal_schur_eval,
    orthogonal_schur_polynomial, restricted_rect_count, restricted_rect_count_bruteforce, schur_eval,
    ssyt_to_gt, symplectic_schur_eval, symplectic_schur_polynomial,
)


class TestPartitionAndSignature:
    """Test the index types."""

    def test_trailing_zeros_dropped(self):
        """Test partitions drop zero parts."""
        assert Partition((3, 1, 0, 0)).parts == (3, 1)
        assert Partition((3, 1)).size == 4

    def test_increasing_rejected(self):
        """Test non-monotone parts are refused."""
        with pytest.raises(ValueError):
            Partition((1, 2))

    def test_rectangle(self):
        """Test ⟨N^m⟩."""
        assert Partition.rectangle(3, 2).parts == (3, 3)

    def test_padded(self):
        """Test padding to n entries and overflow."""
        assert Partition((2,)).padded(3) == (2, 0, 0)
        with pytest.raises(ValueError):
            Partition((1, 1, 1)).padded(2)

    def test_signature_keeps_zeros(self):
        """Test signatures keep trailing zeros and reject negatives in S+."""
        assert Signature((2, 0)).entries == (2, 0)
        with pytest.raises(ValueError, match="negative"):
            Signature((1, -1))

    def test_minus(self):
        """Test λ⁻ flips the last entry."""
        assert Signature((2, 1)).minus().entries == (2, -1)

    def test_interlacing(self):
        """Test interlacing for equal and one-longer rows."""
        assert Signature((1,)).interlaces(Signature((2, 0)))
        assert not Signature((3,)).interlaces(Signature((2, 0)))
        assert Signature((1, 0)).interlaces(Signature((2, 0)))


class TestTableaux:
    """Test tableau enumeration and the GT bijection."""

    def test_count_matches_enumeration(self):
        """Test |SSYT_3((2,1))| = 8 by hook-content, enumeration and GT transfer."""
        shape = Partition((2, 1))
        assert count_ssyt(shape, 3) == 8
        assert len(list(enumerate_ssyt(shape, 3))) == 8
        assert gt_pattern_count(shape, 3) == 8
        assert len(list(enumerate_gt_patterns(Signature((2, 1, 0))))) == 8

    def test_too_long_shape(self):
        """Test shapes longer than n have no tableaux."""
        assert count_ssyt(Partition((1, 1, 1)), 2) == 0
        assert list(enumerate_ssyt(Partition((1, 1, 1)), 2)) == []

    def test_bijection(self):
        """Test ssyt_to_gt and gt_to_ssyt are mutually inverse."""
        for tableau in enumerate_ssyt(Partition((2, 1)), 3):
            assert gt_to_ssyt(ssyt_to_gt(tableau)) == tableau

    def test_content(self):
        """Test the content vector."""
        tableau = Tableau(shape=Partition((2, 1)), rows=((1, 1), (2,)), n=3)
        assert tableau.content() == (2, 1, 0)

    def test_invalid_tableau(self):
        """Test column strictness is enforced."""
        with pytest.raises(ValueError, match="columns"):
            Tableau(shape=Partition((1, 1)), rows=((1,), (1,)), n=2)

    def test_invalid_gt_pattern(self):
        """Test non-interlacing rows are refused."""
        with pytest.raises(ValueError, match="interlace"):
            GTPattern(rows=(Signature((3,)), Signature((2, 0))))

    def test_enumeration_budget(self):
        """Test large shapes are refused."""
        with pytest.raises(BudgetExceededError):
            list(enumerate_ssyt(Partition.rectangle(5, 3), 6))


class TestSchur:
    """Test Schur polynomial evaluation."""

    def test_complete_homogeneous(self):
        """Test s_(2)(1, 2) = 1 + 2 + 4."""
        assert schur_eval(Partition((2,)), [1, 2]) == 7

    def test_exact_types(self):
        """Test integer inputs give Fractions."""
        value = schur_eval(Partition((1,)), [Fraction(1, 2), 1])
        assert value == Fraction(3, 2)

    def test_all_ones_counts_tableaux(self):
        """Test s_λ(1, ..., 1) = |SSYT_n(λ)|."""
        assert schur_eval(Partition((3, 1)), [1, 1, 1]) == count_ssyt(Partition((3, 1)), 3)

    def test_plain_tuple_shape(self):
        """Test tuples are accepted as shapes."""
        assert schur_eval((1, 1), [2, 3]) == 6


class TestHalfPatterns:
    """Test symplectic and orthogonal Schur polynomials."""

    def test_symplectic_fundamental(self):
        """Test sp_(1)(x) = x + 1/x."""
        assert symplectic_schur_eval((1,), [2]) == Fraction(5, 2)

    def test_orthogonal_fundamental(self):
        """Test o_(1)(x) = x + 1/x."""
        assert orthogonal_schur_eval((1,), [2]) == Fraction(5, 2)

    def test_vector_representation_two_variables(self):
        """Test sp_(1,0) and o_(1,0) equal x1 + 1/x1 + x2 + 1/x2."""
        expected = Fraction(5, 2) + Fraction(10, 3)
        assert symplectic_schur_eval((1, 0), [2, 3]) == expected
        assert orthogonal_schur_eval((1, 0), [2, 3]) == expected
        assert sum(symplectic_schur_polynomial(Signature((1, 0))).values()) == 4
        assert sum(orthogonal_schur_polynomial(Signature((1, 0))).values()) == 4

    def test_empty_signature(self):
        """Test the empty signature gives the constant 1."""
        assert symplectic_schur_polynomial(Signature(())) == {(): 1}

    def test_variable_count(self):
        """Test one variable per signature entry."""
        with pytest.raises(ValueError, match="Expected 2 variables"):
            symplectic_schur_eval((1, 0), [2])

    def test_patterns_validate(self):
        """Test enumerated patterns satisfy their own rules."""
        patterns = list(enumerate_half_patterns(Signature((1, 0), nonneg=False), "orthogonal"))
        assert len(patterns) == 4
        assert all(p.kind == "orthogonal" for p in patterns)

    def test_negative_symplectic_rejected(self):
        """Test symplectic patterns refuse negative entries."""
        with pytest.raises(ValueError, match="non-negative"):
            HalfPattern(rows=((-1,), (1,)), kind="symplectic")

    def test_unknown_kind(self):
        """Test unknown pattern kinds are refused."""
        with pytest.raises(ValueError, match="Unknown half pattern kind"):
            HalfPattern(rows=((0,),), kind="unitary")


class TestRestrictedCounts:
    """Test the restricted rectangle counts behind exact moments of moments."""

    def test_small_value(self):
        """Test MoM_U(2)(2, 1) = 10."""
        assert restricted_rect_count(2, 2, 1) == 10

    @pytest.mark.parametrize("N,k,beta", [(1, 2, 1), (2, 2, 1), (1, 1, 2), (2, 1, 1), (1, 3, 1)])
    def test_matches_bruteforce(self, N, k, beta):
        """Test the transfer count against explicit enumeration."""
        assert restricted_rect_count(N, k, beta) == restricted_rect_count_bruteforce(N, k, beta)

    def test_zero_size(self):
        """Test N = 0 gives the empty tableau."""
        assert restricted_rect_count(0, 2, 1) == 1

    def test_invalid_parameters(self):
        """Test k, β >= 1 and N >= 0 are enforced."""
        with pytest.raises(ValueError):
            restricted_rect_count(-1, 2, 1)
        with pytest.raises(ValueError):
            restricted_rect_count(2, 0, 1)
