import itertools

import numpy as np
import pytest

from flaglyap import (
    BaseSystem,
    ConePositive,
    MinorPositive,
    NotSymplectic,
    SamplerExhausted,
    SymplecticQ,
    ThetaSet,
    TotallyPositive,
    flag_type_estimate,
    interior_membership,
    minor,
    polar_exponent_exact,
    predicted_theta,
    sample_interior,
    sample_interior_cocycle,
    verify_gap_predictions,
)
from flaglyap import semigrp


class TestInteriorMembership:
    def test_cone_positive_example(self):
        assert interior_membership(ConePositive(2), np.array([[2.0, 1.0], [1.0, 1.0]]))

    def test_identity_not_totally_positive_interior(self):
        assert not interior_membership(TotallyPositive(3), np.eye(3))

    def test_symplectic_n1_example(self):
        g = np.array([[2.0, 1.0], [1.0, 1.0]])  # any SL(2) matrix is symplectic
        spec = SymplecticQ(1)
        # g^T M g - M = [[4, 2], [2, 2]]: leading minors 4 and 4
        q = spec.q_matrix
        assert np.array_equal(g.T @ q @ g - q, [[4.0, 2.0], [2.0, 2.0]])
        assert interior_membership(spec, g)

    def test_not_symplectic_raises(self):
        spec = SymplecticQ(1)
        bad = np.diag([2.0, 2.0]) / 2.0 + np.array([[0.0, 0.5], [0.0, 0.0]])
        bad = bad / np.linalg.det(bad) ** 0.5
        # generic SL(2) IS symplectic for n=1; force a violation at n=2
        spec2 = SymplecticQ(2)
        g = np.eye(4)
        g[0, 0], g[1, 1] = 2.0, 0.5  # breaks g^T J g = J off the Sp(2) algebra
        with pytest.raises(NotSymplectic):
            interior_membership(spec2, g)

    def test_minor_positive_checks_selected_orders(self):
        g = np.array([[1.0, 1.0], [0.0, 1.0]]) @ np.array([[1.0, 0.0], [1.0, 1.0]])
        # g = [[2,1],[1,1]]: positive entries and positive 2x2 determinant
        assert interior_membership(MinorPositive(2, (1,)), g)
        assert interior_membership(TotallyPositive(2), g)


class TestPredictedTheta:
    def test_cone_positive(self):
        assert predicted_theta(ConePositive(3)) == ThetaSet(3, frozenset({2}))

    def test_totally_positive(self):
        assert predicted_theta(TotallyPositive(4)) == ThetaSet.empty(4)

    def test_minor_positive(self):
        assert predicted_theta(MinorPositive(4, (1, 3))) == ThetaSet(4, frozenset({2}))

    def test_symplectic(self):
        assert predicted_theta(SymplecticQ(2)) == ThetaSet(4, frozenset({1, 3}))


class TestSampleInterior:
    @pytest.mark.parametrize("spec", [
        ConePositive(3),
        TotallyPositive(3),
        MinorPositive(4, (1, 3)),
        SymplecticQ(2),
    ])
    def test_samples_pass_membership(self, spec):
        for seed in range(5):
            g = sample_interior(spec, seed)
            assert interior_membership(spec, g)
            assert abs(np.linalg.det(g) - 1.0) <= 1e-9

    def test_totally_positive_all_19_minors(self):
        # d = 3 has 9 + 9 + 1 = 19 nontrivial minors, all strictly positive
        g = sample_interior(TotallyPositive(3), 7)
        count = 0
        for k in (1, 2, 3):
            for rows in itertools.combinations(range(3), k):
                for cols in itertools.combinations(range(3), k):
                    assert minor(g, rows, cols) > 1e-12
                    count += 1
        assert count == 19

    def test_symplectic_sample_structure(self):
        spec = SymplecticQ(2)
        g = sample_interior(spec, 3)
        j = spec.j_matrix
        assert np.abs(g.T @ j @ g - j).max() <= 1e-8
        q = spec.q_matrix
        from flaglyap import is_positive_definite

        assert is_positive_definite(g.T @ q @ g - q)

    def test_sampler_exhausted(self, monkeypatch):
        monkeypatch.setattr(semigrp, "_draw", lambda spec, rng: None)
        with pytest.raises(SamplerExhausted):
            sample_interior(ConePositive(2), 0)

    def test_closure_under_products(self):
        for spec in (ConePositive(3), TotallyPositive(3)):
            a = sample_interior(spec, 1)
            b = sample_interior(spec, 2)
            assert interior_membership(spec, a @ b)


class TestVerifyGapPredictions:
    def test_cone_positive_top_gap_everywhere(self, rng):
        base = BaseSystem.from_cycles([[0, 1, 2, 3]])
        c = sample_interior_cocycle(ConePositive(3), base, seed=2)
        report = verify_gap_predictions(c, ConePositive(3))
        assert report["gaps"]["1"]["min_gap"] > 1e-8
        for x in range(4):
            h = polar_exponent_exact(c, x)
            assert h[0] - h[1] > 1e-8

    def test_totally_positive_simple_spectrum(self):
        base = BaseSystem.from_cycles([[0, 1], [2]])
        c = sample_interior_cocycle(TotallyPositive(3), base, seed=3)
        report = verify_gap_predictions(c, TotallyPositive(3))
        assert ThetaSet(3, frozenset(report["estimated_theta"])) == ThetaSet.empty(3)
        assert all(v["min_gap"] > 1e-8 for v in report["gaps"].values())

    def test_symplectic_pairing(self):
        base = BaseSystem.from_cycles([[0, 1], [2]])
        c = sample_interior_cocycle(SymplecticQ(2), base, seed=4)
        report = verify_gap_predictions(c, SymplecticQ(2))
        assert report["symplectic_pairing_defect"] <= 1e-8
        assert report["two_chi_n_min"] > 1e-8

    def test_containment_over_seeds(self):
        base = BaseSystem.from_cycles([[0, 1], [2]])
        for spec in (ConePositive(3), TotallyPositive(3), MinorPositive(4, (2,)), SymplecticQ(2)):
            predicted = predicted_theta(spec)
            for seed in range(20):
                c = sample_interior_cocycle(spec, base, seed=seed)
                assert flag_type_estimate(c).issubset(predicted)


class TestSignRegular:
    def test_totally_positive_is_sign_regular(self):
        from flaglyap import is_sign_regular_interior

        g = sample_interior(TotallyPositive(3), 5)
        assert is_sign_regular_interior(g)

    def test_negated_positive_matrix_d2(self):
        # order-1 minors all negative, order-2 positive: sign regular
        # without being totally positive
        from flaglyap import is_sign_regular_interior

        g = -sample_interior(TotallyPositive(2), 5)
        assert abs(np.linalg.det(g) - 1.0) <= 1e-9
        assert is_sign_regular_interior(g)
        assert not interior_membership(TotallyPositive(2), g)

    def test_identity_not_strictly_sign_regular(self):
        from flaglyap import is_sign_regular_interior

        assert not is_sign_regular_interior(np.eye(3))
