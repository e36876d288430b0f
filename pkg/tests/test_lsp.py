import numpy as np
import pytest

from attnseg import lsp
from oracles import lsp_chain_ref


def random_self_attention(rng, n):
    rows = rng.uniform(0.01, 1.0, size=(n, n)).astype(np.float32)
    return rows / rows.sum(axis=1, keepdims=True)


class TestAverageMaps:
    def test_single_map_identity(self):
        m = np.array([[0.1, 0.9]])
        assert np.array_equal(lsp.average_maps([m]), m)

    def test_two_maps(self):
        out = lsp.average_maps([np.array([[0.0, 1.0]]), np.array([[1.0, 0.0]])])
        assert np.array_equal(out, [[0.5, 0.5]])

    def test_errors(self):
        with pytest.raises(ValueError, match="empty"):
            lsp.average_maps([])
        with pytest.raises(ValueError, match="mixed"):
            lsp.average_maps([np.zeros((2, 2)), np.zeros((3, 3))])

    def test_preserves_resolution(self):
        maps = [np.random.default_rng(i).random((16, 16)) for i in range(4)]
        assert lsp.average_maps(maps).shape == (16, 16)


class TestSelectAnchors:
    def test_threshold_example(self):
        cross = np.array([[0.5, 0.3], [0.45, 0.1]])
        assert lsp.select_anchors(cross, 0.4, (2, 2)) == [(0, 0), (1, 0)]

    def test_fallback_argmax(self):
        cross = np.full((2, 2), 0.1)
        cross[1, 1] = 0.2
        assert lsp.select_anchors(cross, 0.4, (2, 2)) == [(1, 1)]

    def test_fallback_row_major_tie(self):
        assert lsp.select_anchors(np.full((3, 3), 0.1), 0.4, (3, 3)) == [(0, 0)]

    def test_nearest_upsample(self):
        cross = np.array([[0.9, 0.0], [0.0, 0.0]])
        anchors = lsp.select_anchors(cross, 0.4, (4, 4))
        assert anchors == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_non_multiple_target(self):
        with pytest.raises(ValueError, match="integer multiple"):
            lsp.select_anchors(np.zeros((3, 3)), 0.4, (4, 4))

    def test_beta_out_of_range(self):
        with pytest.raises(ValueError, match="beta"):
            lsp.select_anchors(np.zeros((2, 2)), 1.5, (2, 2))

    def test_antitone_in_beta(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            cross = rng.random((8, 8))
            b1, b2 = sorted(rng.uniform(0.05, 0.95, size=2))
            pre1 = set(map(tuple, np.argwhere(cross > b1)))
            pre2 = set(map(tuple, np.argwhere(cross > b2)))
            assert pre2 <= pre1


class TestAggregate:
    def test_identity_attention_indicator(self):
        enhanced = lsp.aggregate_self_attention([(1, 0)], np.eye(4), (2, 2))
        assert np.array_equal(enhanced, [[0.0, 0.0], [1.0, 0.0]])

    def test_uniform_attention_degenerate(self):
        uniform = np.full((4, 4), 0.25)
        enhanced = lsp.aggregate_self_attention([(0, 0), (1, 1)], uniform, (2, 2))
        assert np.array_equal(enhanced, np.zeros((2, 2)))

    def test_two_anchor_sums(self):
        rows = np.array([[0.9, 0.1], [0.4, 0.6]])
        enhanced = lsp.aggregate_self_attention([(0, 0), (0, 1)], rows, (1, 2))
        assert np.array_equal(enhanced, [[1.0, 0.0]])  # raw sums 1.3, 0.7

    def test_out_of_range_anchor(self):
        with pytest.raises(ValueError, match="outside"):
            lsp.aggregate_self_attention([(5, 0)], np.eye(4), (2, 2))

    def test_permutation_equivariance(self):
        # Relabeling pixels (matrix rows/columns and anchors together)
        # permutes the output the same way.
        rng = np.random.default_rng(3)
        attn = random_self_attention(rng, 4)
        perm = rng.permutation(4)
        inv = np.argsort(perm)
        anchors = [(0, 0), (0, 1)]
        permuted_anchors = sorted(
            (int(perm[i * 2 + j]) // 2, int(perm[i * 2 + j]) % 2) for i, j in anchors
        )
        permuted = attn[np.ix_(inv, inv)]
        base = lsp.aggregate_self_attention(anchors, attn, (2, 2)).reshape(-1)
        out = lsp.aggregate_self_attention(permuted_anchors, permuted, (2, 2)).reshape(-1)
        for k in range(4):
            assert out[int(perm[k])] == pytest.approx(base[k])


class TestMinMaxNormalize:
    def test_closed_form(self):
        assert np.allclose(lsp.min_max_normalize([[0.2, 0.4, 0.6]]), [[0.0, 0.5, 1.0]])

    def test_identity_when_already_01(self):
        m = np.array([[0.0, 0.25, 1.0]])
        assert np.array_equal(lsp.min_max_normalize(m), m)

    def test_constant_to_zeros(self):
        assert np.array_equal(lsp.min_max_normalize(np.full((3, 3), 0.7)), np.zeros((3, 3)))

    def test_idempotent_on_non_constant(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            m = rng.normal(size=(5, 5))
            once = lsp.min_max_normalize(m)
            assert np.array_equal(lsp.min_max_normalize(once), once)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            lsp.min_max_normalize([[np.inf, 0.0]])


class TestUpsampleBilinear:
    def test_constant(self):
        out = lsp.upsample_bilinear(np.full((2, 2), 0.3), (8, 8))
        assert np.allclose(out, 0.3)

    def test_monotone_1d(self):
        out = lsp.upsample_bilinear(np.array([[0.0, 1.0]]), (1, 4))
        assert out.shape == (1, 4)
        assert (np.diff(out[0]) >= 0).all()
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_pipeline_default_shape(self):
        out = lsp.upsample_bilinear(np.random.default_rng(0).random((32, 32)), (512, 512))
        assert out.shape == (512, 512)

    def test_target_smaller_rejected(self):
        with pytest.raises(ValueError, match="smaller"):
            lsp.upsample_bilinear(np.zeros((4, 4)), (2, 8))

    def test_bounds_property(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            src = rng.normal(size=(4, 6))
            out = lsp.upsample_bilinear(src, (13, 17))
            assert out.min() >= src.min() - 1e-12
            assert out.max() <= src.max() + 1e-12


class TestBinarize:
    def test_strict_inequality(self):
        assert np.array_equal(lsp.binarize(np.array([[0.2, 0.35]]), 0.3), [[False, True]])

    def test_all_below_gives_empty(self):
        assert not lsp.binarize(np.full((4, 4), 0.3), 0.3).any()

    def test_alpha_range(self):
        with pytest.raises(ValueError, match="alpha"):
            lsp.binarize(np.zeros((2, 2)), 0.0)

    def test_antitone_in_alpha(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            m = rng.random((8, 8))
            a1, a2 = sorted(rng.uniform(0.05, 0.95, size=2))
            m2 = lsp.binarize(m, a2)
            m1 = lsp.binarize(m, a1)
            assert not (m2 & ~m1).any()


def test_chain_matches_scalar_reference():
    rng = np.random.default_rng(21)
    for _ in range(20):
        cross = rng.random((8, 8))
        attn = random_self_attention(rng, 256)
        beta = float(rng.uniform(0.1, 0.9))
        alpha = float(rng.uniform(0.1, 0.9))
        anchors = lsp.select_anchors(cross, beta, (16, 16))
        enhanced = lsp.aggregate_self_attention(anchors, attn, (16, 16))
        mask = lsp.binarize(lsp.upsample_bilinear(enhanced, (32, 32)), alpha)
        ref = lsp_chain_ref(cross.tolist(), attn, beta, alpha, (16, 16), (32, 32))
        assert np.array_equal(mask, np.array(ref, dtype=bool))


def test_validate_self_attention():
    rng = np.random.default_rng(1)
    lsp.validate_self_attention(random_self_attention(rng, 16))
    with pytest.raises(ValueError, match="sums to"):
        lsp.validate_self_attention(np.full((4, 4), 0.3))
    with pytest.raises(ValueError, match="negative"):
        bad = np.full((2, 2), 0.5)
        bad[0, 0] = -0.1
        bad[0, 1] = 1.1
        lsp.validate_self_attention(bad)
