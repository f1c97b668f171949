import math

import numpy as np
import pytest

from subspace_action import (
    DomainError,
    NotSymmetricError,
    RankDeficientError,
    SeededRng,
    Subspace,
    ToleranceNotReachedError,
    digamma,
    frame_operator,
    gaussian_matrix,
    ln_gamma,
    log_beta,
    orthonormalize,
    quadrature_01,
    sym_eig,
)
from subspace_action.fusion import FusionFrame

from oracles import classical_gram_schmidt, cofactor_det, riemann_midpoint_01


class TestSeededRng:
    def test_replay(self):
        a = SeededRng(123, 4).generator.standard_normal(100)
        b = SeededRng(123, 4).generator.standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_uncorrelated(self):
        n = 1_000_000
        a = SeededRng(9, 0).generator.standard_normal(n)
        b = SeededRng(9, 1).generator.standard_normal(n)
        rho = np.corrcoef(a, b)[0, 1]
        assert abs(rho) < 0.01

    def test_derive_is_deterministic_and_fresh(self):
        base = SeededRng(5)
        x = base.derive(3).generator.standard_normal(10)
        y = base.derive(3).generator.standard_normal(10)
        z = base.derive(4).generator.standard_normal(10)
        assert np.array_equal(x, y)
        assert not np.array_equal(x, z)


class TestGaussianMatrix:
    def test_determinism(self):
        a = gaussian_matrix(SeededRng(7), 5, 3)
        b = gaussian_matrix(SeededRng(7), 5, 3)
        assert np.array_equal(a, b)

    def test_moments(self):
        # CLT at 4 sigma: mean within 4/1000, variance within 0.01
        g = gaussian_matrix(SeededRng(11), 1_000_000, 1)
        assert abs(g.mean()) < 4e-3
        assert abs(g.var() - 1.0) < 0.01


class TestOrthonormalize:
    def test_identity_block_fixed(self):
        m = np.eye(5)[:, :3]
        assert np.array_equal(orthonormalize(m), m)

    def test_single_column_normalization(self):
        q = orthonormalize(np.array([[3.0], [4.0]]))
        assert np.allclose(q, [[0.6], [0.8]], atol=1e-15)

    def test_matches_gram_schmidt_oracle(self):
        m = SeededRng(2).generator.standard_normal((5, 2))
        q = orthonormalize(m)
        assert np.max(np.abs(q.T @ q - np.eye(2))) < 1e-12
        # span check: residual of the original columns
        resid = m - q @ (q.T @ m)
        assert np.linalg.norm(resid) < 1e-10
        assert np.allclose(q, classical_gram_schmidt(m), atol=1e-9)

    def test_idempotent(self):
        m = SeededRng(3).generator.standard_normal((6, 4))
        q = orthonormalize(m)
        assert np.max(np.abs(orthonormalize(q) - q)) < 1e-12

    def test_rank_deficient(self):
        m = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(RankDeficientError):
            orthonormalize(m)
        with pytest.raises(RankDeficientError):
            orthonormalize(np.zeros((3, 1)))

    def test_wide_matrix_rejected(self):
        with pytest.raises(RankDeficientError):
            orthonormalize(np.ones((2, 3)))


class TestSymEig:
    def test_identity(self):
        w, _ = sym_eig(np.eye(3))
        assert np.allclose(w, [1, 1, 1])

    def test_diagonal(self):
        w, v = sym_eig(np.diag([2.0, 5.0]))
        assert np.allclose(w, [2, 5])
        assert np.allclose(np.abs(v), np.eye(2), atol=1e-12)

    def test_roots_of_unity_frame_operator(self):
        # 5th roots-of-unity rank-one sum has both eigenvalues N/d = 5/2
        vecs = [np.array([math.cos(2 * math.pi * k / 5), math.sin(2 * math.pi * k / 5)])
                for k in range(1, 6)]
        ff = FusionFrame([Subspace(v[:, None]) for v in vecs])
        w, _ = sym_eig(frame_operator(ff))
        assert np.allclose(w, [2.5, 2.5], atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_residual_and_invariants(self, seed):
        gen = SeededRng(seed).generator
        d = int(gen.integers(2, 5))
        a = gen.standard_normal((d, d))
        a = a + a.T
        w, v = sym_eig(a)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(a @ v - v * w)) < d * 1e-9
        assert np.max(np.abs(v.T @ v - np.eye(d))) < 1e-9
        assert abs(w.sum() - np.trace(a)) < d * 1e-9
        assert abs(np.prod(w) - cofactor_det(a)) < 1e-8 * max(1, abs(cofactor_det(a)))

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetricError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestQuadrature:
    def test_constant(self):
        assert abs(quadrature_01(lambda r: np.ones_like(r)) - 1.0) < 1e-12

    def test_log(self):
        assert abs(quadrature_01(np.log, singular_at_zero=True) + 1.0) < 1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_polynomials_degree_12(self, seed):
        coeffs = SeededRng(seed).generator.standard_normal(13)
        exact = sum(c / (k + 1) for k, c in enumerate(coeffs))
        value = quadrature_01(lambda r: sum(c * r ** k for k, c in enumerate(coeffs)))
        assert abs(value - exact) < 1e-12

    def test_log_over_sqrt_singularity(self):
        # the k=1, d=2 radial integrand; antiderivative gives -(pi/2) log 2
        f = lambda r: np.log(r) / np.sqrt(1.0 - r * r)
        value = quadrature_01(f, singular_at_zero=True, singular_at_one=True)
        assert abs(value + (math.pi / 2) * math.log(2)) < 1e-10
        assert abs(value - riemann_midpoint_01(f)) < 1e-6

    def test_interior_singularity_exhausts_budget(self):
        f = lambda r: 1.0 / np.sqrt(np.abs(r - 1.0 / 3.0))
        with pytest.raises(ToleranceNotReachedError):
            quadrature_01(f)


class TestSpecialFunctions:
    def test_ln_gamma(self):
        assert ln_gamma(1.0) == 0.0
        assert abs(ln_gamma(0.5) - math.log(math.sqrt(math.pi))) < 1e-14

    def test_digamma(self):
        assert abs(digamma(1.0) + 0.5772156649015329) < 1e-12

    def test_log_beta_identity(self):
        assert abs(log_beta(0.5, 1.5) - math.log(math.pi / 2)) < 1e-13
        # oracle: B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)
        for a, b in [(0.5, 0.5), (2.0, 3.5), (10.0, 0.25)]:
            assert abs(log_beta(a, b) - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))) < 1e-12

    @pytest.mark.parametrize("fn", [ln_gamma, digamma])
    def test_domain(self, fn):
        with pytest.raises(DomainError):
            fn(0.0)
        with pytest.raises(DomainError):
            fn(-1.5)

    def test_log_beta_domain(self):
        with pytest.raises(DomainError):
            log_beta(0.0, 1.0)
