import math

import numpy as np
import pytest

from subspace_action import (
    DimensionMismatchError,
    FusionFrame,
    NotAFrameError,
    SeededRng,
    Subspace,
    classic_recover,
    frame_bounds,
    frame_operator,
    from_spanning,
    measure,
    sample_invariant,
)

TETRAHEDRON = [np.array(v, dtype=float) for v in
               [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]]


def onb_frame(d):
    eye = np.eye(d)
    return FusionFrame([Subspace(eye[:, [j]]) for j in range(d)])


def roots_frame(K):
    vecs = [np.array([math.cos(2 * math.pi * k / K), math.sin(2 * math.pi * k / K)])
            for k in range(1, K + 1)]
    return FusionFrame([Subspace(v[:, None]) for v in vecs])


def random_frame(rng, d):
    gen = rng.generator
    n = int(gen.integers(d, d + 4))
    subspaces = [sample_invariant(rng.derive(i), int(gen.integers(1, d)), d)
                 for i in range(n)]
    weights = gen.uniform(0.5, 2.0, size=n)
    return FusionFrame(subspaces, weights)


class TestFrameOperator:
    def test_onb_identity(self):
        assert np.allclose(frame_operator(onb_frame(4)), np.eye(4), atol=1e-14)

    def test_roots_of_unity_multiple_of_identity(self):
        assert np.allclose(frame_operator(roots_frame(5)), 2.5 * np.eye(2), atol=1e-12)

    def test_single_subspace(self):
        # a one-subspace frame needs W = R^d for a positive lower bound
        w = sample_invariant(SeededRng(77), 3, 3)
        ff = FusionFrame([w], [3.0])
        assert np.allclose(frame_operator(ff), 9.0 * w.basis @ w.basis.T, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_naive_accumulation_oracle(self, seed):
        ff = random_frame(SeededRng(seed), 5)
        s = np.zeros((5, 5))
        for w, v in zip(ff.subspaces, ff.weights):
            p = np.zeros((5, 5))
            for i in range(5):
                for j in range(5):
                    p[i, j] = w.basis[i, :] @ w.basis[j, :]
            s += v * v * p
        assert np.max(np.abs(frame_operator(ff) - s)) < 1e-12


class TestFrameBounds:
    def test_block_partition_is_tight(self):
        eye = np.eye(6)
        ff = FusionFrame([Subspace(eye[:, 0:2]), Subspace(eye[:, 2:4]), Subspace(eye[:, 4:6])])
        b = frame_bounds(ff)
        assert abs(b.A - 1.0) < 1e-12 and abs(b.B - 1.0) < 1e-12

    def test_roots3(self):
        b = frame_bounds(roots_frame(3))
        assert abs(b.A - 1.5) < 1e-12 and abs(b.B - 1.5) < 1e-12

    def test_tight_value_formula(self):
        # tight frame: A = B = (1/d) sum v_n^2 dim(W_n)
        eye = np.eye(4)
        v = 1.7
        ff = FusionFrame([Subspace(eye[:, 0:2]), Subspace(eye[:, 2:4])], [v, v])
        b = frame_bounds(ff)
        expect = (v * v * 2 + v * v * 2) / 4
        assert abs(b.A - expect) < 1e-12 and abs(b.B - expect) < 1e-12

    def test_not_a_frame(self):
        w = from_spanning([np.array([1.0, 0.0])])
        with pytest.raises(NotAFrameError):
            FusionFrame([w, w])

    @pytest.mark.parametrize("seed", range(4))
    def test_frame_inequality(self, seed):
        rng = SeededRng(100 + seed)
        ff = random_frame(rng, 6)
        b = frame_bounds(ff)
        gen = rng.derive(99).generator
        for _ in range(250):
            x = gen.standard_normal(6)
            x /= np.linalg.norm(x)
            energy = sum(v * v * w.proj_norm_sq(x)
                         for w, v in zip(ff.subspaces, ff.weights))
            assert b.A - 1e-9 <= energy <= b.B + 1e-9


class TestMeasure:
    def test_zero_vector(self):
        ys = measure(onb_frame(3), np.zeros(3))
        assert all(np.allclose(y, 0.0) for y in ys)

    def test_onb_coordinates(self):
        x = np.array([1.0, -2.0, 0.5])
        ys = measure(onb_frame(3), x)
        for j, y in enumerate(ys):
            expect = np.zeros(3)
            expect[j] = x[j]
            assert np.allclose(y, expect)

    @pytest.mark.parametrize("seed", range(4))
    def test_energy_identity(self, seed):
        # sum v_n^2 <y_n, x> = x^T S x
        rng = SeededRng(200 + seed)
        ff = random_frame(rng, 5)
        x = rng.derive(1).generator.standard_normal(5)
        ys = measure(ff, x)
        lhs = sum(v * v * (y @ x) for v, y in zip(ff.weights, ys))
        assert abs(lhs - x @ frame_operator(ff) @ x) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            measure(onb_frame(3), np.ones(4))


class TestClassicRecover:
    def test_tight_frame_one_step(self):
        ff = FusionFrame([from_spanning([v]) for v in TETRAHEDRON])
        x = np.array([0.4, -1.1, 0.6])
        estimate, errors = classic_recover(ff, measure(ff, x), np.zeros(3), 1, x_true=x)
        assert errors[-1] <= 1e-10
        assert np.allclose(estimate, x, atol=1e-10)

    def test_geometric_bound_two_subspace_example(self):
        ff = FusionFrame([from_spanning([np.array([1.0, 0.0])]),
                          from_spanning([np.array([1.0, 1.0])])])
        b = frame_bounds(ff)
        ratio = (b.B - b.A) / (b.B + b.A)
        gen = SeededRng(7).generator
        x = gen.standard_normal(2)
        _, errors = classic_recover(ff, measure(ff, x), np.zeros(2), 20, x_true=x)
        for n, err in enumerate(errors):
            assert err <= ratio ** n * np.linalg.norm(x) + 1e-9

    def test_zero_iterations(self):
        ff = onb_frame(3)
        x0 = np.array([9.0, 9.0, 9.0])
        estimate, errors = classic_recover(ff, measure(ff, np.ones(3)), x0, 0,
                                           x_true=np.ones(3))
        assert np.array_equal(estimate, x0)
        assert len(errors) == 1

    @pytest.mark.parametrize("seed", range(20))
    def test_geometric_bound_random_frames(self, seed):
        rng = SeededRng(300 + seed)
        d = int(rng.generator.integers(2, 9))
        ff = random_frame(rng.derive(0), d)
        b = frame_bounds(ff)
        ratio = (b.B - b.A) / (b.B + b.A)
        x = rng.derive(1).generator.standard_normal(d)
        _, errors = classic_recover(ff, measure(ff, x), np.zeros(d), 30, x_true=x)
        for n, err in enumerate(errors):
            assert err <= ratio ** n * np.linalg.norm(x) + 1e-9


class TestSerialization:
    def test_round_trip(self):
        ff = random_frame(SeededRng(55), 4)
        again = FusionFrame.from_text(ff.to_text())
        assert len(again) == len(ff)
        assert np.array_equal(again.weights, ff.weights)
        for a, b in zip(again.subspaces, ff.subspaces):
            assert np.array_equal(a.basis, b.basis)

    def test_header_layout(self):
        ff = FusionFrame([from_spanning([np.array([1.0, 1.0])]),
                          from_spanning([np.array([1.0, -1.0])])], [2.0, 1.0])
        lines = ff.to_text().splitlines()
        assert lines[0] == "2 2"
        assert lines[1] == "2 1"
        assert len(lines) == 5
