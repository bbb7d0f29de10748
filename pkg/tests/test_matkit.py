import math

import numpy as np
import pytest

from flaglyap import (
    AsymmetricInput,
    SingularInput,
    ValidationError,
    eig_log_moduli,
    is_positive_definite,
    iwasawa,
    mat_exp,
    minor,
    polar_chamber,
)
from flaglyap.matkit import check_algebra, check_group

from conftest import power_iteration_log_root, random_unimodular


class TestIwasawa:
    def test_identity(self):
        fac = iwasawa(np.eye(3))
        assert np.allclose(fac.k, np.eye(3))
        assert np.allclose(fac.a, 0.0)
        assert np.array_equal(fac.n, np.eye(3))

    def test_diagonal_already_in_a(self):
        fac = iwasawa(np.diag([2.0, 0.5]))
        assert np.allclose(fac.k, np.eye(2))
        assert np.allclose(fac.a, [math.log(2.0), -math.log(2.0)])
        assert np.array_equal(fac.n, np.eye(2))

    def test_rotation_lands_in_k(self):
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        fac = iwasawa(rot)
        assert np.allclose(fac.k, rot)
        assert np.allclose(fac.a, 0.0)
        assert np.array_equal(fac.n, np.eye(2))

    def test_random_recomposition(self, rng):
        for _ in range(50):
            g = random_unimodular(rng, 3)
            fac = iwasawa(g)
            assert np.abs(fac.recompose() - g).max() <= 1e-12 * max(1.0, np.abs(g).max())

    def test_factor_structure(self, rng):
        g = random_unimodular(rng, 5)
        fac = iwasawa(g)
        assert np.abs(fac.k.T @ fac.k - np.eye(5)).max() <= 1e-10
        assert np.array_equal(np.diagonal(fac.n), np.ones(5))
        assert not np.tril(fac.n, k=-1).any()
        assert abs(fac.a.sum()) <= 1e-9  # traceless since det = 1

    def test_uniqueness(self, rng):
        # rebuild from valid factors and recover them
        d = 4
        k = iwasawa(random_unimodular(rng, d)).k
        a = rng.standard_normal(d)
        a -= a.mean()
        n = np.eye(d) + np.triu(rng.standard_normal((d, d)), k=1)
        g = k @ (np.exp(a)[:, None] * n)
        fac = iwasawa(g)
        assert np.abs(fac.k - k).max() <= 1e-9
        assert np.abs(fac.a - a).max() <= 1e-9
        assert np.abs(fac.n - n).max() <= 1e-9

    def test_singular_input(self):
        with pytest.raises(SingularInput):
            iwasawa(np.array([[1.0, 0.0], [1.0, 0.0]]))


class TestPolar:
    def test_sorting_into_chamber(self):
        fac = polar_chamber(np.diag([0.5, 2.0]))
        assert np.allclose(fac.h_plus, [math.log(2.0), -math.log(2.0)])

    def test_identity(self):
        fac = polar_chamber(np.eye(4))
        assert np.allclose(fac.h_plus, 0.0)

    def test_unit_shear_golden_ratio(self):
        # singular values of [[1,1],[0,1]] are phi and 1/phi
        phi = (1.0 + math.sqrt(5.0)) / 2.0
        fac = polar_chamber(np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert np.abs(fac.h_plus - [math.log(phi), -math.log(phi)]).max() <= 1e-12

    def test_reconstruction_and_orientation(self, rng):
        for _ in range(50):
            g = random_unimodular(rng, 4)
            fac = polar_chamber(g)
            assert np.abs(fac.recompose() - g).max() <= 1e-12 * max(1.0, np.abs(g).max())
            assert np.linalg.det(fac.k1) > 0
            assert np.linalg.det(fac.k2) > 0
            assert np.all(np.diff(fac.h_plus) <= 1e-15)


class TestEigLogModuli:
    def test_diagonal(self):
        got = eig_log_moduli(np.diag([3.0, 1.0, 1.0 / 3.0]))
        assert np.allclose(got, [math.log(3.0), 0.0, -math.log(3.0)])

    def test_rotation_unit_modulus_pair(self):
        got = eig_log_moduli(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert np.abs(got).max() <= 1e-12

    def test_perron_root_against_power_iteration(self, rng):
        for _ in range(10):
            g = rng.uniform(0.1, 2.0, (2, 2))
            if np.linalg.det(g) < 1e-3:
                continue
            g /= np.linalg.det(g) ** 0.5
            g /= np.linalg.det(g) ** 0.5
            assert abs(eig_log_moduli(g)[0] - power_iteration_log_root(g)) <= 1e-9

    def test_power_scaling_for_normal_matrices(self, rng):
        q = iwasawa(random_unimodular(rng, 3)).k
        g = q @ np.diag([2.0, 1.25, 0.4]) @ q.T
        g /= np.linalg.det(g) ** (1.0 / 3.0)
        base = eig_log_moduli(g)
        power = np.eye(3)
        for n in range(1, 6):
            power = power @ g
            assert np.abs(eig_log_moduli(power) - n * base).max() <= 1e-8

    def test_zero_sum(self, rng):
        for _ in range(20):
            assert abs(eig_log_moduli(random_unimodular(rng, 5)).sum()) <= 1e-9


class TestMatExp:
    def test_zero_is_exact_identity(self):
        assert np.array_equal(mat_exp(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        t = 0.7
        assert np.allclose(mat_exp(np.diag([t, -t])), np.diag([math.exp(t), math.exp(-t)]))

    def test_nilpotent_series_terminates(self):
        z = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(mat_exp(z), [[1.0, 1.0], [0.0, 1.0]])

    def test_inverse_property(self, rng):
        z = rng.standard_normal((4, 4))
        z -= np.trace(z) / 4.0 * np.eye(4)
        assert np.abs(mat_exp(z) @ mat_exp(-z) - np.eye(4)).max() <= 1e-9

    def test_unit_determinant(self, rng):
        z = rng.standard_normal((5, 5))
        z -= np.trace(z) / 5.0 * np.eye(5)
        assert abs(np.linalg.det(mat_exp(z)) - 1.0) <= 1e-9


class TestMinor:
    def test_singleton(self):
        assert minor(np.eye(2), [0], [0]) == 1.0

    def test_full_determinant(self):
        assert abs(minor(np.array([[2.0, 1.0], [1.0, 1.0]]), [0, 1], [0, 1]) - 1.0) <= 1e-14

    def test_explicit_entry(self):
        assert minor(np.array([[1.0, 1.0], [0.0, 1.0]]), [1], [0]) == 0.0

    @pytest.mark.parametrize("rows,cols", [([], []), ([0, 0], [0, 1]), ([1, 0], [0, 1]), ([0, 5], [0, 1])])
    def test_malformed_index_sets(self, rows, cols):
        with pytest.raises(IndexError):
            minor(np.eye(3), rows, cols)


class TestPositiveDefinite:
    def test_identity(self):
        assert is_positive_definite(np.eye(3))

    def test_negative_identity(self):
        assert not is_positive_definite(-np.eye(3))

    def test_hand_checked_minors(self):
        # leading minors 4 and 4
        assert is_positive_definite(np.array([[4.0, 2.0], [2.0, 2.0]]))

    def test_asymmetric_input(self):
        with pytest.raises(AsymmetricInput):
            is_positive_definite(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestValidators:
    def test_group_accepts_unit_determinant(self, rng):
        check_group(random_unimodular(rng, 3))

    def test_group_rejects_other_determinants(self):
        with pytest.raises(ValidationError):
            check_group(2.0 * np.eye(2))

    def test_algebra_rejects_traceful(self):
        with pytest.raises(ValidationError):
            check_algebra(np.eye(2))


class TestUpperDimensionLimit:
    def test_decompositions_at_d12(self, rng):
        for _ in range(5):
            g = random_unimodular(rng, 12)
            scale = max(1.0, np.abs(g).max())
            assert np.abs(iwasawa(g).recompose() - g).max() <= 1e-10 * scale
            assert np.abs(polar_chamber(g).recompose() - g).max() <= 1e-10 * scale
