"""Parity between the numba kernels and the pure-numpy fallbacks."""

import numpy as np
import pytest

from bnrisk import _kernels as K


rng = np.random.default_rng(123)


def _random_codes(n=500, cards=(2, 3, 4)):
    return np.column_stack(
        [rng.integers(0, c, size=n).astype(np.int16) for c in cards]
    )


class TestFamilyCounts:
    def test_matches_ravel_multi_index_oracle(self):
        cards = np.array([2, 3, 4])
        codes = _random_codes(cards=cards)
        counts = K.family_counts(codes, [0, 1, 2], cards)
        flat = np.ravel_multi_index([codes[:, 0], codes[:, 1], codes[:, 2]], cards)
        expected = np.bincount(flat, minlength=24).reshape(6, 4)
        np.testing.assert_array_equal(counts, expected)

    def test_total_preserved(self):
        cards = np.array([3, 2])
        codes = _random_codes(cards=cards)
        counts = K.family_counts(codes, [0, 1], cards)
        assert counts.sum() == codes.shape[0]

    def test_missing_rejected(self):
        codes = np.array([[0, -1]], dtype=np.int16)
        with pytest.raises(ValueError):
            K.family_counts(codes, [0, 1], np.array([2, 2]))

    @pytest.mark.skipif(not K.USE_NUMBA, reason="numba disabled")
    def test_numba_equals_numpy(self):
        cards = np.array([4, 2, 3, 2])
        codes = _random_codes(n=2000, cards=cards)
        sub = np.ascontiguousarray(codes.astype(np.int64))
        np.testing.assert_array_equal(
            K._family_counts_nb(sub, cards.astype(np.int64)),
            K._family_counts_np(sub, cards.astype(np.int64)),
        )


class TestCategoricalRows:
    def test_deterministic_rows(self):
        cum = np.array([[0.0, 1.0], [1.0, 1.0]])  # row0 forces state 1, row1 state 0
        cfg = np.array([0, 1, 0, 1])
        u = np.array([0.3, 0.3, 0.99, 0.0])
        np.testing.assert_array_equal(K.categorical_rows(cum, cfg, u), [1, 0, 1, 0])

    def test_empirical_distribution(self):
        cum = np.cumsum(np.array([[0.2, 0.5, 0.3]]), axis=1)
        cfg = np.zeros(200_000, dtype=np.int64)
        u = rng.random(200_000)
        states = K.categorical_rows(cum, cfg, u)
        freq = np.bincount(states, minlength=3) / len(states)
        np.testing.assert_allclose(freq, [0.2, 0.5, 0.3], atol=0.01)

    @pytest.mark.skipif(not K.USE_NUMBA, reason="numba disabled")
    def test_numba_equals_numpy(self):
        table = rng.dirichlet(np.ones(5), size=7)
        cum = np.cumsum(table, axis=1)
        cfg = rng.integers(0, 7, size=5000)
        u = rng.random(5000)
        np.testing.assert_array_equal(
            K._categorical_rows_nb(cum, cfg, u), K._categorical_rows_np(cum, cfg, u)
        )


class TestPrefixTargetMass:
    def _setup(self, cards=(2, 3, 2, 4)):
        cards = np.array(cards, dtype=np.int64)
        flat = rng.random(int(np.prod(cards)))
        row = np.array([rng.integers(0, c) for c in cards], dtype=np.int64)
        return flat, cards, row

    def test_row_zero_is_target_margin(self):
        flat, cards, row = self._setup()
        t = 2
        order = np.array([0, 1, 3], dtype=np.int64)
        mass = K.prefix_target_mass(flat, cards, row, order, t)
        arr = flat.reshape(tuple(cards))
        np.testing.assert_allclose(mass[0], arr.sum(axis=(0, 1, 3)), rtol=1e-12)

    def test_each_prefix_matches_direct_slicing(self):
        flat, cards, row = self._setup()
        t = 1
        order = np.array([3, 0, 2], dtype=np.int64)
        mass = K.prefix_target_mass(flat, cards, row, order, t)
        arr = flat.reshape(tuple(cards))
        for j in range(len(order) + 1):
            idx = [slice(None)] * len(cards)
            for v in order[:j]:
                idx[v] = row[v]
            sub = arr[tuple(idx)]
            axes = tuple(i for i in range(sub.ndim) if i != 0)  # t=1 is first remaining? no:
            # reduce every axis except the target's position among the remaining
            remaining = [i for i in range(len(cards)) if i not in order[:j]]
            t_ax = remaining.index(t)
            other = tuple(i for i in range(sub.ndim) if i != t_ax)
            expected = sub.sum(axis=other)
            np.testing.assert_allclose(mass[j], expected, rtol=1e-10)

    @pytest.mark.skipif(not K.USE_NUMBA, reason="numba disabled")
    def test_numba_equals_numpy(self):
        flat, cards, row = self._setup(cards=(3, 2, 2, 3, 2))
        order = np.array([4, 0, 1, 3], dtype=np.int64)
        a = K._prefix_mass_nb(flat, cards, row, order, 2)
        bb = K._prefix_mass_np(flat, cards, row, order, 2)
        np.testing.assert_allclose(a, bb, rtol=1e-12, atol=1e-15)


def test_mixed_radix_strides():
    np.testing.assert_array_equal(K.mixed_radix_strides(np.array([2, 3, 4])), [12, 4, 1])
