import numpy as np
import pytest

from qpert import model
from qpert.model import (
    Iterate,
    Perturbation,
    StandardQP,
    c2_constant,
    in_symmetric_neighbourhood,
    kkt_residuals,
    mu_lambda,
    optimal_partition,
    relative_residual,
    shifted_problem,
    validate_problem,
)


class TestStandardQP:
    def test_rejects_asymmetric_h(self):
        with pytest.raises(ValueError):
            StandardQP(H=[[1.0, 1.0], [0.0, 1.0]], A=[[1.0, 0.0]], b=[1.0], c=[0.0, 0.0])

    def test_rejects_wide_ratio(self):
        with pytest.raises(ValueError):
            StandardQP(H=np.eye(1), A=[[1.0], [2.0]], b=[1.0, 2.0], c=[0.0])

    def test_validate_rank(self):
        qp = StandardQP(H=np.eye(2), A=[[1.0, 1.0]], b=[1.0], c=[0.0, 0.0])
        validate_problem(qp)
        bad = StandardQP(H=np.eye(3), A=[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
                         b=[1.0, 2.0], c=np.zeros(3))
        with pytest.raises(ValueError):
            validate_problem(bad)

    def test_validate_psd(self):
        qp = StandardQP(H=[[1.0, 2.0], [2.0, 1.0]], A=[[1.0, 0.0]], b=[1.0], c=[0.0, 0.0])
        with pytest.raises(ValueError):
            validate_problem(qp)


class TestKktResiduals:
    def test_dq1_solution(self, dq1):
        it = Iterate(x=[0.5, 0.5], y=[0.5], s=[0.0, 0.0])
        Rp, Rd, comp = kkt_residuals(dq1, it, Perturbation.zeros(2))
        assert np.allclose(Rp, 0.0) and np.allclose(Rd, 0.0) and np.allclose(comp, 0.0)

    def test_zero_point(self, dq2):
        it = Iterate(x=np.zeros(2), y=np.zeros(1), s=np.zeros(2))
        Rp, Rd, comp = kkt_residuals(dq2, it, Perturbation.zeros(2))
        assert np.allclose(Rp, -dq2.b)
        assert np.allclose(Rd, -dq2.c)
        assert np.allclose(comp, 0.0)

    def test_perturbed_products(self, dq1):
        it = Iterate(x=[0.5, 0.5], y=[0.5], s=[0.0, 0.0])
        pert = Perturbation.uniform(0.1, 2)
        _, _, comp = kkt_residuals(dq1, it, pert)
        assert np.allclose(comp, [0.06, 0.06])

    def test_dimension_mismatch(self, dq1):
        it = Iterate(x=np.zeros(3), y=np.zeros(1), s=np.zeros(3))
        with pytest.raises(ValueError):
            kkt_residuals(dq1, it, Perturbation.zeros(3))


class TestShiftedProblem:
    def test_zero_shift_is_bitwise_identical(self, dq2):
        shifted = shifted_problem(dq2, np.zeros(2))
        assert np.array_equal(shifted.b, dq2.b)
        assert np.array_equal(shifted.c, dq2.c)
        assert shifted.H is dq2.H and shifted.A is dq2.A

    def test_dq1_identity_h(self, dq1):
        shifted = shifted_problem(dq1, [1.0, 1.0])
        assert np.allclose(shifted.b, [3.0])
        assert np.allclose(shifted.c, [0.0, 0.0])    # I - H vanishes for H = I

    def test_general_shift(self):
        qp = StandardQP(H=np.diag([0.0, 1.0]), A=[[1.0, 0.0]], b=[1.0], c=[1.0, 0.0])
        shifted = shifted_problem(qp, [1.0, 1.0])
        assert np.allclose(shifted.b, [2.0])
        assert np.allclose(shifted.c, [2.0, 0.0])

    def test_rejects_negative(self, dq1):
        with pytest.raises(ValueError):
            shifted_problem(dq1, [-0.1, 0.0])

    def test_shifted_kkt_equivalence(self, dq3):
        # residuals of (x, y, s) for the original problem equal those of
        # (x + lam, y, s + lam) for the shifted problem, exactly
        rng = np.random.default_rng(3)
        for _ in range(20):
            lam = rng.uniform(0.0, 0.5, size=2)
            it = Iterate(x=rng.normal(size=2), y=rng.normal(size=1), s=rng.normal(size=2))
            pert = Perturbation(lam, lam)
            Rp0, Rd0, comp0 = kkt_residuals(dq3, it, pert)
            sh = shifted_problem(dq3, lam)
            shifted_it = Iterate(x=it.x + lam, y=it.y, s=it.s + lam)
            Rp1, Rd1, comp1 = kkt_residuals(sh, shifted_it, Perturbation.zeros(2))
            assert np.allclose(Rp0, Rp1, atol=1e-14)
            assert np.allclose(Rd0, Rd1, atol=1e-14)
            assert np.allclose(comp0, comp1, atol=1e-14)


class TestMuLambda:
    def test_plain(self):
        it = Iterate(x=[1.0, 2.0], y=[0.0], s=[3.0, 4.0])
        assert mu_lambda(it, Perturbation.zeros(2)) == pytest.approx(5.5)

    def test_perturbed(self):
        it = Iterate(x=[1.0, 2.0], y=[0.0], s=[3.0, 4.0])
        assert mu_lambda(it, Perturbation.uniform(0.1, 2)) == pytest.approx(6.01)

    def test_forced_by_construction(self):
        mu_hat = 0.37
        n = 5
        it = Iterate(x=np.zeros(n), y=np.zeros(1), s=np.zeros(n))
        pert = Perturbation.uniform(np.sqrt(mu_hat), n)
        assert mu_lambda(it, pert) == pytest.approx(mu_hat)


class TestSymmetricNeighbourhood:
    def test_centered_point_any_gamma(self):
        qp = StandardQP(H=np.zeros((2, 2)), A=[[1.0, 1.0]], b=[2.0], c=[1.0, 1.0])
        it = Iterate(x=[1.0, 1.0], y=[0.0], s=[1.0, 1.0])
        for gamma in (0.1, 0.5, 0.9):
            assert in_symmetric_neighbourhood(qp, it, Perturbation.zeros(2), gamma)

    def test_band_arithmetic(self):
        # products (1, 4): mu = 2.5; the iterate satisfies both equality
        # rows exactly (Ax = 1 = b, A'y + s - c = 0 at y = 0)
        qp = StandardQP(H=np.zeros((2, 2)), A=[[1.0, 0.0]], b=[1.0], c=[1.0, 1.0])
        it = Iterate(x=[1.0, 4.0], y=[0.0], s=[1.0, 1.0])
        assert not in_symmetric_neighbourhood(qp, it, Perturbation.zeros(2), 0.5)
        assert in_symmetric_neighbourhood(qp, it, Perturbation.zeros(2), 0.25)

    def test_gamma_domain(self, dq1):
        it = Iterate(x=[0.5, 0.5], y=[0.5], s=[1.0, 1.0])
        with pytest.raises(ValueError):
            in_symmetric_neighbourhood(dq1, it, Perturbation.zeros(2), 1.5)


class TestRelativeResidual:
    def test_exact_solution(self, dq1):
        it = Iterate(x=[0.5, 0.5], y=[0.5], s=[0.0, 0.0])
        assert relative_residual(dq1, it, Perturbation.zeros(2)) == pytest.approx(0.0)

    def test_zero_point_dq1(self, dq1):
        it = Iterate(x=np.zeros(2), y=np.zeros(1), s=np.zeros(2))
        assert relative_residual(dq1, it, Perturbation.zeros(2)) == pytest.approx(0.5)

    def test_denominator_scaling(self, dq1):
        it = Iterate(x=np.zeros(2), y=np.zeros(1), s=np.zeros(2))
        scaled = StandardQP(H=dq1.H, A=dq1.A, b=10.0 * dq1.b, c=10.0 * dq1.c)
        assert relative_residual(scaled, it, Perturbation.zeros(2)) == pytest.approx(10.0 / 11.0)

    def test_invariant_under_zero_padding(self, dq2):
        # appending a variable with zero data, zero iterate and zero
        # perturbation leaves the relative residual unchanged
        rng = np.random.default_rng(5)
        it = Iterate(x=rng.uniform(0, 1, 2), y=rng.normal(size=1), s=rng.uniform(0, 1, 2))
        pert = Perturbation(rng.uniform(0, 0.1, 2), rng.uniform(0, 0.1, 2))
        base = relative_residual(dq2, it, pert)

        H = np.zeros((3, 3)); H[:2, :2] = dq2.H
        A = np.zeros((1, 3)); A[:, :2] = dq2.A
        padded = StandardQP(H=H, A=A, b=dq2.b, c=np.append(dq2.c, 0.0))
        it_p = Iterate(x=np.append(it.x, 0.0), y=it.y, s=np.append(it.s, 0.0))
        pert_p = Perturbation(np.append(pert.lam, 0.0), np.append(pert.phi, 0.0))
        assert relative_residual(padded, it_p, pert_p) == base


class TestOptimalPartition:
    def test_dq2(self):
        tri = optimal_partition([1.0, 0.0], [0.0, 1.0], tol=1e-8)
        assert tri.I == {0} and tri.S == {1} and tri.T == frozenset()

    def test_dq3(self):
        tri = optimal_partition([1.0, 0.0], [0.0, 0.0], tol=1e-8)
        assert tri.I == {0} and tri.S == frozenset() and tri.T == {1}

    def test_all_zero(self):
        tri = optimal_partition(np.zeros(2), np.zeros(2))
        assert tri.I == frozenset() and tri.S == frozenset() and tri.T == {0, 1}

    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            optimal_partition([1.0, 1.0], [1.0, 0.0], tol=1e-8)

    def test_disjoint_cover_on_random_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 20))
            mask = rng.random(n) < 0.5
            x = np.where(mask, rng.uniform(0.1, 2.0, n), 0.0)
            s = np.where(~mask, rng.uniform(0.1, 2.0, n), 0.0)
            s[rng.random(n) < 0.3] = 0.0          # allow common zeros
            tri = optimal_partition(x, s)
            assert tri.S | tri.I | tri.T == set(range(n))
            assert not (tri.S & tri.I) and not (tri.S & tri.T) and not (tri.I & tri.T)


class TestC2Constant:
    @pytest.mark.parametrize("n,gamma,expected", [
        (1, 0.25, 3.0),
        (4, 0.25, 8.0),
        (9, 0.09, 19.0),
    ])
    def test_values(self, n, gamma, expected):
        assert c2_constant(n, gamma) == pytest.approx(expected)

    def test_domain(self):
        with pytest.raises(ValueError):
            c2_constant(4, 1.0)
        with pytest.raises(ValueError):
            c2_constant(0, 0.5)
