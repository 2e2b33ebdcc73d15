import numpy as np
import pytest

from qpert import errbound, linalg
from qpert.gen import GenParams, generate_qts1, generate_qts2
from qpert.ipm import SolveOptions, solve
from qpert.model import StandardQP


class TestLcpEmbedding:
    def test_dq1_blocks(self, dq1):
        inst = errbound.lcp_embedding(dq1)
        expected_M = np.array([
            [1.0, 0.0, -1.0, 1.0],
            [0.0, 1.0, -1.0, 1.0],
            [1.0, 1.0, 0.0, 0.0],
            [-1.0, -1.0, 0.0, 0.0],
        ])
        assert np.array_equal(inst.M, expected_M)
        assert np.array_equal(inst.q, [0.0, 0.0, -1.0, 1.0])

    def test_lp_case_is_psd(self):
        qp = StandardQP(H=np.zeros((3, 3)), A=[[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]],
                        b=[1.0, 1.0], c=[1.0, 2.0, 3.0])
        inst = errbound.lcp_embedding(qp)
        assert linalg.is_positive_semidefinite(0.5 * (inst.M + inst.M.T), tol=1e-10)

    def test_qts1_psd_eigenvalue_oracle(self):
        for seed in range(5):
            qp, _ = generate_qts1(GenParams(seed=seed, m_range=(4, 8), n_range=(8, 16)))
            inst = errbound.lcp_embedding(qp)
            sym = 0.5 * (inst.M + inst.M.T)
            assert np.linalg.eigvalsh(sym)[0] >= -1e-8

    def test_quadratic_form_identity(self):
        # v'Mv equals the H-part alone for any v, the structural reason M is PSD
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(4, 10))
            m = int(rng.integers(1, 4))
            B = rng.normal(size=(n, n))
            H = B.T @ B
            qp = StandardQP(H=0.5 * (H + H.T), A=rng.normal(size=(m, n)),
                            b=rng.normal(size=m), c=rng.normal(size=n))
            inst = errbound.lcp_embedding(qp)
            for _ in range(100):
                v = rng.normal(size=n + 2 * m)
                lhs = v @ (inst.M @ v)
                rhs = v[:n] @ (qp.H @ v[:n])
                assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(rhs)))


class TestResidualTermsFeasible:
    def test_nearly_complementary(self):
        r, w = errbound.residual_terms_feasible([1.0, 0.5], [0.0, 0.2])
        assert r == pytest.approx(0.2)
        assert w == pytest.approx(0.1)

    def test_zero_point(self):
        r, w = errbound.residual_terms_feasible(np.zeros(3), np.zeros(3))
        assert r == 0.0 and w == 0.0

    def test_negative_components(self):
        r, w = errbound.residual_terms_feasible([-1.0, 2.0], [3.0, 4.0])
        assert r == pytest.approx(np.sqrt(5.0))
        assert w == pytest.approx(np.sqrt(26.0))

    def test_zero_iff_complementary_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(1, 10))
            mask = rng.random(n) < 0.5
            x = np.where(mask, rng.uniform(0.1, 2.0, n), 0.0)
            s = np.where(~mask, rng.uniform(0.1, 2.0, n), 0.0)
            r, w = errbound.residual_terms_feasible(x, s)
            assert r == 0.0 and w == 0.0
            # breaking either property makes r + w positive
            x_neg = x.copy(); x_neg[0] = -0.5
            r1, w1 = errbound.residual_terms_feasible(x_neg, s)
            assert r1 + w1 > 0
            r2, w2 = errbound.residual_terms_feasible(x + 0.5, s + 0.5)
            assert r2 + w2 > 0


class TestResidualTermsGeneral:
    def test_exact_solution_dq1(self, dq1):
        r, w = errbound.residual_terms_general(dq1, [0.5, 0.5], [0.5])
        assert r == pytest.approx(0.0, abs=1e-14)
        assert w == pytest.approx(0.0, abs=1e-14)

    def test_hand_arithmetic_dq1(self, dq1):
        r, w = errbound.residual_terms_general(dq1, [1.0, 0.0], [0.0])
        assert r == pytest.approx(1.0)
        assert w == pytest.approx(1.0)

    def test_reduces_to_feasible_form(self):
        # for equality-feasible iterates the general terms collapse to the
        # feasible-point form with s = c - A'y + Hx
        rng = np.random.default_rng(8)
        for seed in range(5):
            qp, triple = generate_qts1(GenParams(seed=seed, m_range=(4, 8),
                                                 n_range=(8, 16)))
            r_gen, w_gen = errbound.residual_terms_general(qp, triple.x, triple.y)
            r_fea, w_fea = errbound.residual_terms_feasible(triple.x, triple.s)
            assert r_gen == pytest.approx(r_fea, abs=1e-10)
            assert w_gen == pytest.approx(w_fea, abs=1e-10)


class TestErrorBoundDirection:
    def test_residual_terms_shrink_along_trace(self):
        qp, sol = generate_qts2(GenParams(seed=6, m_range=(5, 12), n_range=(12, 24)))
        iterates = []
        solve(qp, SolveOptions(initial_perturbation=0.0, mu_tolerance=1e-9,
                               max_iterations=60),
              callback=lambda k, it, pert: iterates.append(it))
        assert len(iterates) >= 3
        first = sum(errbound.residual_terms_feasible(iterates[0].x, iterates[0].s))
        last = sum(errbound.residual_terms_feasible(iterates[-1].x, iterates[-1].s))
        assert last < 1e-2 * first
        assert np.linalg.norm(iterates[-1].x - sol.x) < 1e-2
