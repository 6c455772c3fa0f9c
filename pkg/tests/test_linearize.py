"""Linearization, parent alignment and mask-construction tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specinpaint.errors import InvalidInputError
from specinpaint.lm import (
    HierarchyConfig,
    anti_causal_mask,
    build_masks,
    delinearize_bottom,
    delinearize_top,
    linearize_bottom,
    linearize_bottom_grids,
    linearize_mask_bottom,
    linearize_mask_top,
    linearize_top,
    linearize_top_grids,
    parent_index,
    top_order,
)

K = 64


class TestLinearizeTop:
    def test_two_by_two_order(self):
        grid = np.array([[10, 11], [12, 13]])  # rows = freq ascending, cols = time
        seq = linearize_top(grid, K)
        np.testing.assert_array_equal(seq.tokens, [K, 10, 12, 11, 13])
        assert seq.origins == [None, (0, 0), (1, 0), (0, 1), (1, 1)]

    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 10**6))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_identity(self, f_dim, t_dim, seed):
        grid = np.random.default_rng(seed).integers(0, K, (f_dim, t_dim))
        seq = linearize_top(grid, K)
        np.testing.assert_array_equal(delinearize_top(seq, grid.shape), grid)

    def test_origins_match_index_arithmetic(self):
        f_dim, t_dim = 5, 7
        grid = np.arange(f_dim * t_dim).reshape(f_dim, t_dim)
        seq = linearize_top(grid, K)
        for p in range(1, len(seq)):
            g = p - 1
            assert seq.origins[p] == (g % f_dim, g // f_dim)

    def test_batched_linearization_matches_reference(self):
        rng = np.random.default_rng(3)
        grids = rng.integers(0, K, (4, 6, 5))
        rows = linearize_top_grids(grids, K)
        for b in range(4):
            np.testing.assert_array_equal(rows[b], linearize_top(grids[b], K).tokens)


class TestLinearizeBottom:
    def test_unit_patch_reduces_to_top(self):
        hier = HierarchyConfig(top_shape=(3, 4), patch=(1, 1))
        grid = np.random.default_rng(0).integers(0, K, (3, 4))
        bot = linearize_bottom(grid, hier, K)
        top = linearize_top(grid, K)
        np.testing.assert_array_equal(bot.tokens, top.tokens)

    def test_hand_enumerated_zigzag(self):
        # 4x2 bottom, 2x1 patches -> 2x2 patch grid in top order, two cells per patch
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 1))
        grid = np.arange(8).reshape(4, 2)
        # top order over patches: (0,0), (1,0), (0,1), (1,1)
        # within each patch: freq ascending at the single time
        expected = [K, K, 0, 2, 4, 6, 1, 3, 5, 7]
        np.testing.assert_array_equal(linearize_bottom(grid, hier, K).tokens, expected)

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 2), st.integers(1, 2), st.integers(0, 10**6))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_identity(self, f_top, t_top, d_f, d_t, seed):
        hier = HierarchyConfig(top_shape=(f_top, t_top), patch=(d_f, d_t))
        grid = np.random.default_rng(seed).integers(0, K, hier.bottom_shape)
        seq = linearize_bottom(grid, hier, K)
        assert len(seq) == hier.bottom_seq_len
        np.testing.assert_array_equal(delinearize_bottom(seq, hier), grid)

    def test_batched_linearization_matches_reference(self):
        hier = HierarchyConfig(top_shape=(4, 2), patch=(2, 2))
        rng = np.random.default_rng(5)
        grids = rng.integers(0, K, (3, *hier.bottom_shape))
        rows = linearize_bottom_grids(grids, hier, K)
        for b in range(3):
            np.testing.assert_array_equal(rows[b], linearize_bottom(grids[b], hier, K).tokens)


class TestParentIndex:
    def test_start_patch(self):
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 2))
        for i in range(4):
            assert parent_index(i, hier) == 0

    def test_integer_division(self):
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 2))
        assert parent_index(11, hier) == 2

    def test_out_of_range(self):
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 2))
        with pytest.raises(InvalidInputError):
            parent_index(hier.bottom_seq_len, hier)
        with pytest.raises(InvalidInputError):
            parent_index(-1, hier)

    def test_parent_contains_child_origin_exhaustively(self):
        for f_top, t_top, d_f, d_t in ((2, 3, 2, 2), (4, 2, 2, 1), (3, 3, 1, 2)):
            hier = HierarchyConfig(top_shape=(f_top, t_top), patch=(d_f, d_t))
            grid = np.arange(hier.bottom_shape[0] * hier.bottom_shape[1]).reshape(hier.bottom_shape)
            bot = linearize_bottom(grid, hier, K)
            top = linearize_top(np.zeros(hier.top_shape, dtype=int), K)
            for i in range(len(bot)):
                k = parent_index(i, hier)
                child, parent = bot.origins[i], top.origins[k]
                if child is None:
                    assert parent is None  # START tokens belong to the START patch
                else:
                    assert parent == (child[0] // d_f, child[1] // d_t)

    def test_each_parent_has_patch_area_children(self):
        hier = HierarchyConfig(top_shape=(3, 2), patch=(2, 2))
        parents = [parent_index(i, hier) for i in range(hier.bottom_seq_len)]
        counts = np.bincount(parents)
        assert counts.size == hier.top_seq_len
        assert np.all(counts == hier.patch_area)


class TestBuildMasks:
    def test_no_inpainting_gives_anti_causal_encoder(self):
        enc, dec, cross = build_masks(6, np.zeros(6, dtype=bool))
        np.testing.assert_array_equal(enc, anti_causal_mask(6))
        np.testing.assert_array_equal(dec, np.tril(np.ones((6, 6), bool)))
        assert cross.all()

    def test_full_inpainting_hides_everything(self):
        # every row empty: downstream attention emits zeros instead of NaN
        enc, _, _ = build_masks(5, np.ones(5, dtype=bool))
        assert not enc.any()

    def test_partial_mask_hides_masked_futures(self):
        m = np.array([False, True, False, True])
        enc, _, _ = build_masks(4, m)
        for i in range(4):
            for j in range(4):
                assert enc[i, j] == (j >= i and not m[j])

    def test_bottom_cross_mask_is_parent_diagonal(self):
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 1))
        n = hier.bottom_seq_len
        enc, dec, cross = build_masks(n, patch_area=hier.patch_area)
        assert enc.shape == (hier.top_seq_len, hier.top_seq_len) and enc.all()
        for i in range(n):
            expected = np.zeros(hier.top_seq_len, dtype=bool)
            expected[parent_index(i, hier)] = True
            np.testing.assert_array_equal(cross[i], expected)

    def test_mask_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            build_masks(4, np.zeros(5, dtype=bool))


class TestMaskLinearization:
    def test_top_mask_alignment(self):
        mask = np.zeros((3, 2), dtype=bool)
        mask[1, 0] = True
        lin = linearize_mask_top(mask)
        assert lin.shape == (7,)
        assert not lin[0]
        grid_cells = top_order((3, 2))
        for p, cell in enumerate(grid_cells, start=1):
            assert lin[p] == mask[cell]

    def test_bottom_mask_alignment(self):
        hier = HierarchyConfig(top_shape=(2, 2), patch=(2, 2))
        mask = np.random.default_rng(1).random(hier.bottom_shape) > 0.5
        lin = linearize_mask_bottom(mask, hier)
        assert not lin[: hier.patch_area].any()
        bot = linearize_bottom(np.zeros(hier.bottom_shape, int), hier, K)
        for i in range(hier.patch_area, len(lin)):
            assert lin[i] == mask[bot.origins[i]]
