"""Top-p filtering, region masking and inpainting-engine tests."""

import numpy as np
import pytest

from specinpaint.errors import InvalidConfigError, InvalidInputError
from specinpaint.lm import (
    CodemapTransformer,
    ConditioningLabels,
    HierarchyConfig,
    LinearSeq,
    TransformerConfig,
    parent_index,
    linearize_bottom,
    linearize_top,
)
from specinpaint.sampling import (
    RegionSelection,
    SamplerConfig,
    TopSampler,
    generate_from_scratch,
    inpaint,
    region_to_mask,
    sample_level,
    top_p_filter,
)
from specinpaint.vqvae import CodemapPair

K = 16
HIER = HierarchyConfig(top_shape=(4, 2), patch=(2, 2))
TCFG = TransformerConfig(n_layers_enc=1, n_layers_dec=1, n_heads=2, model_dim=32,
                         token_embed_dim=16, pos_embed_dim=8, label_embed_dim=4, ffn_dim=32)
LABELS = ConditioningLabels(pitch=60, instrument=1)


@pytest.fixture(scope="module")
def models():
    rng = np.random.default_rng(0)
    top = CodemapTransformer(TCFG, HIER, "top", K, n_instruments=4, rng=rng)
    bottom = CodemapTransformer(TCFG, HIER, "bottom", K, n_instruments=4, rng=rng)
    return top, bottom


def random_codes(seed=0):
    rng = np.random.default_rng(seed)
    return CodemapPair(rng.integers(0, K, HIER.top_shape), rng.integers(0, K, HIER.bottom_shape))


class TestSamplerConfig:
    def test_validation(self):
        with pytest.raises(InvalidConfigError):
            SamplerConfig(top_p=0.0)
        with pytest.raises(InvalidConfigError):
            SamplerConfig(top_p=1.2)
        with pytest.raises(InvalidConfigError):
            SamplerConfig(temperature=0.0)


class TestTopPFilter:
    def test_p_one_keeps_distribution(self):
        probs = np.array([0.5, 0.3, 0.15, 0.05])
        np.testing.assert_allclose(top_p_filter(probs, 1.0), probs, atol=1e-12)

    def test_hand_case(self):
        probs = np.array([0.5, 0.3, 0.15, 0.05])
        np.testing.assert_allclose(top_p_filter(probs, 0.8), [0.625, 0.375, 0.0, 0.0], atol=1e-12)

    def test_ties_go_to_lower_index(self):
        probs = np.array([0.25, 0.25, 0.25, 0.25])
        out = top_p_filter(probs, 0.5)
        np.testing.assert_allclose(out, [0.5, 0.5, 0.0, 0.0], atol=1e-12)

    def test_minimal_prefix_against_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            k = int(rng.integers(2, 20))
            probs = rng.dirichlet(np.ones(k))
            p = float(rng.uniform(0.05, 1.0))
            out = top_p_filter(probs, p)
            kept = np.flatnonzero(out)

            order = sorted(range(k), key=lambda i: (-probs[i], i))
            csum, prefix = 0.0, []
            for i in order:
                prefix.append(i)
                csum += probs[i]
                if csum >= p:
                    break
            assert sorted(kept) == sorted(prefix)
            if len(prefix) > 1:
                assert probs[prefix].sum() - probs[prefix[-1]] < p  # minimality

    def test_rejects_non_distribution(self):
        with pytest.raises(InvalidInputError):
            top_p_filter(np.array([0.5, 0.6]), 0.8)
        with pytest.raises(InvalidConfigError):
            top_p_filter(np.array([0.5, 0.5]), 0.0)


class TestRegionToMask:
    def test_full_top_region_masks_everything(self):
        region = RegionSelection("top", 0, HIER.top_shape[0], 0, HIER.top_shape[1])
        tm, bm = region_to_mask(region, HIER)
        assert tm.all() and bm.all()

    def test_patch_expansion(self):
        region = RegionSelection("top", 0, 2, 0, HIER.top_shape[1])
        tm, bm = region_to_mask(region, HIER)
        assert tm[:2].all() and not tm[2:].any()
        assert bm[:4].all() and not bm[4:].any()

    def test_bottom_region_leaves_top(self):
        region = RegionSelection("bottom", 1, 3, 0, 2)
        tm, bm = region_to_mask(region, HIER)
        assert not tm.any()
        assert bm[1:3, 0:2].all()
        assert bm.sum() == 4

    def test_children_union_matches_parent_index(self):
        rng = np.random.default_rng(2)
        n_codes = K
        for _ in range(20):
            f0 = int(rng.integers(0, HIER.top_shape[0]))
            f1 = int(rng.integers(f0 + 1, HIER.top_shape[0] + 1))
            t0 = int(rng.integers(0, HIER.top_shape[1]))
            t1 = int(rng.integers(t0 + 1, HIER.top_shape[1] + 1))
            tm, bm = region_to_mask(RegionSelection("top", f0, f1, t0, t1), HIER)
            top_lin = linearize_top(np.zeros(HIER.top_shape, int), n_codes)
            bot_lin = linearize_bottom(np.zeros(HIER.bottom_shape, int), HIER, n_codes)
            masked_top_positions = {
                p for p in range(1, len(top_lin)) if tm[top_lin.origins[p]]
            }
            for i in range(HIER.patch_area, len(bot_lin)):
                expected = parent_index(i, HIER) in masked_top_positions
                assert bm[bot_lin.origins[i]] == expected

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            region_to_mask(RegionSelection("top", 0, 5, 0, 1), HIER)
        with pytest.raises(InvalidInputError):
            RegionSelection("top", 2, 2, 0, 1)


class _FixedDistribution:
    """Toy model with a known, context-free distribution over two codes."""

    def __init__(self, probs):
        self.logits = np.log(np.asarray(probs))

    def logits_at(self, tokens, hidden, labels, position):
        return self.logits


class TestSampleLevel:
    def test_all_false_mask_is_identity(self, models):
        top, _ = models
        seq = linearize_top(random_codes(3).top, K)
        out = sample_level(TopSampler(top), seq, np.zeros(len(seq), bool), LABELS, SamplerConfig(seed=1))
        np.testing.assert_array_equal(out.tokens, seq.tokens)

    def test_unmasked_positions_preserved(self, models):
        top, _ = models
        rng = np.random.default_rng(4)
        for trial in range(20):
            seq = linearize_top(random_codes(trial).top, K)
            mask = np.concatenate([[False], rng.random(len(seq) - 1) < 0.5])
            out = sample_level(TopSampler(top), seq, mask, LABELS, SamplerConfig(seed=trial))
            keep = ~mask
            np.testing.assert_array_equal(out.tokens[keep], seq.tokens[keep])

    def test_fixed_seed_bit_identical(self, models):
        top, _ = models
        seq = linearize_top(random_codes(5).top, K)
        mask = np.ones(len(seq), bool)
        mask[0] = False
        a = sample_level(TopSampler(top), seq, mask, LABELS, SamplerConfig(seed=11))
        b = sample_level(TopSampler(top), seq, mask, LABELS, SamplerConfig(seed=11))
        np.testing.assert_array_equal(a.tokens, b.tokens)

    def test_different_seeds_differ(self, models):
        top, _ = models
        seq = linearize_top(random_codes(6).top, K)
        mask = np.ones(len(seq), bool)
        mask[0] = False
        a = sample_level(TopSampler(top), seq, mask, LABELS, SamplerConfig(seed=1))
        b = sample_level(TopSampler(top), seq, mask, LABELS, SamplerConfig(seed=2))
        assert not np.array_equal(a.tokens, b.tokens)

    def test_empirical_frequencies_match_filtered_distribution(self):
        # 2-code toy model: p = (0.7, 0.3), top_p = 0.9 keeps both
        n = 10_000
        seq = LinearSeq(tokens=np.full(n + 1, 2, dtype=np.int64), origins=[None] * (n + 1), n_codes=2)
        mask = np.ones(n + 1, bool)
        mask[0] = False
        out = sample_level(_FixedDistribution([0.7, 0.3]), seq, mask, LABELS, SamplerConfig(top_p=0.9, seed=7))
        count1 = int((out.tokens[1:] == 0).sum())
        sigma = np.sqrt(n * 0.7 * 0.3)
        assert abs(count1 - 0.7 * n) <= 3 * sigma

    def test_filtered_support_respected(self):
        # top_p = 0.6 keeps only code 0: every sample must be 0
        n = 500
        seq = LinearSeq(tokens=np.full(n + 1, 2, dtype=np.int64), origins=[None] * (n + 1), n_codes=2)
        mask = np.ones(n + 1, bool)
        mask[0] = False
        out = sample_level(_FixedDistribution([0.7, 0.3]), seq, mask, LABELS, SamplerConfig(top_p=0.6, seed=8))
        assert np.all(out.tokens[1:] == 0)


class TestInpaint:
    def test_mode_b_keeps_top_bit_identical(self, models):
        top, bottom = models
        codes = random_codes(7)
        region = RegionSelection("bottom", 0, 4, 0, 2)
        out = inpaint(top, bottom, codes, region, LABELS, SamplerConfig(seed=3))
        np.testing.assert_array_equal(out.top, codes.top)

    def test_out_of_mask_preservation(self, models):
        top, bottom = models
        codes = random_codes(8)
        region = RegionSelection("top", 1, 3, 0, 1)
        tm, bm = region_to_mask(region, HIER)
        out = inpaint(top, bottom, codes, region, LABELS, SamplerConfig(seed=4))
        np.testing.assert_array_equal(out.top[~tm], codes.top[~tm])
        np.testing.assert_array_equal(out.bottom[~bm], codes.bottom[~bm])

    def test_chained_inpaints_stay_inside_mask_union(self, models):
        top, bottom = models
        codes = random_codes(9)
        ops = [
            (RegionSelection("top", 0, 2, 0, 2), ConditioningLabels(36, 0)),
            (RegionSelection("top", 0, 4, 0, 1), ConditioningLabels(52, 2)),
            (RegionSelection("bottom", 0, 8, 0, 4), ConditioningLabels(84, 3)),
        ]
        top_union = np.zeros(HIER.top_shape, bool)
        bottom_union = np.zeros(HIER.bottom_shape, bool)
        current = codes
        for i, (region, labels) in enumerate(ops):
            tm, bm = region_to_mask(region, HIER)
            top_union |= tm
            bottom_union |= bm
            current = inpaint(top, bottom, current, region, labels, SamplerConfig(seed=100 + i))
        np.testing.assert_array_equal(current.top[~top_union], codes.top[~top_union])
        np.testing.assert_array_equal(current.bottom[~bottom_union], codes.bottom[~bottom_union])

    def test_deterministic_given_seed(self, models):
        top, bottom = models
        codes = random_codes(10)
        region = RegionSelection("top", 0, 4, 0, 2)
        a = inpaint(top, bottom, codes, region, LABELS, SamplerConfig(seed=5))
        b = inpaint(top, bottom, codes, region, LABELS, SamplerConfig(seed=5))
        np.testing.assert_array_equal(a.top, b.top)
        np.testing.assert_array_equal(a.bottom, b.bottom)


class TestGenerateFromScratch:
    def test_shapes_and_ranges(self, models):
        top, bottom = models
        out = generate_from_scratch(top, bottom, LABELS, SamplerConfig(seed=6))
        assert out.top.shape == HIER.top_shape
        assert out.bottom.shape == HIER.bottom_shape
        assert out.top.min() >= 0 and out.top.max() < K
        assert out.bottom.min() >= 0 and out.bottom.max() < K

    def test_equals_full_grid_top_inpaint(self, models):
        top, bottom = models
        blank = CodemapPair(np.zeros(HIER.top_shape, int), np.zeros(HIER.bottom_shape, int))
        region = RegionSelection("top", 0, HIER.top_shape[0], 0, HIER.top_shape[1])
        a = generate_from_scratch(top, bottom, LABELS, SamplerConfig(seed=12))
        b = inpaint(top, bottom, blank, region, LABELS, SamplerConfig(seed=12))
        np.testing.assert_array_equal(a.top, b.top)
        np.testing.assert_array_equal(a.bottom, b.bottom)
