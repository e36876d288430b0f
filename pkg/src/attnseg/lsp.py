"""Locate-to-segment core: anchor selection, self-attention aggregation,
normalization, upsampling, and binarization.

Score maps are 2-D float arrays; a self-attention matrix for an (h, w) grid
is an (h*w, h*w) array whose row i*w + j is the attention map of pixel
(i, j), flattened row-major.  All functions are pure; float accumulation is
done in float64 so results are independent of input dtype quirks.
"""

import numpy as np


def average_maps(maps) -> np.ndarray:
    """Elementwise arithmetic mean of equally-sized score maps."""
    if len(maps) == 0:
        raise ValueError("average_maps: empty map list")
    shapes = {np.asarray(m).shape for m in maps}
    if len(shapes) > 1:
        raise ValueError(f"average_maps: mixed resolutions {shapes}")
    acc = np.zeros(maps[0].shape, dtype=np.float64)
    for m in maps:
        acc += np.asarray(m, dtype=np.float64)
    return acc / len(maps)


def upsample_nearest(score_map, target) -> np.ndarray:
    """Nearest-neighbor upsample by an integer factor in each dimension."""
    score_map = np.asarray(score_map)
    h, w = score_map.shape
    th, tw = target
    if th % h or tw % w:
        raise ValueError(
            f"upsample_nearest: target {target} is not an integer multiple of {(h, w)}"
        )
    return np.repeat(np.repeat(score_map, th // h, axis=0), tw // w, axis=1)


def select_anchors(cross, beta, target) -> list:
    """Select anchor pixels from a cross-attention map.

    The map is nearest-neighbor upsampled to `target`, then every pixel with
    score strictly above `beta` becomes an anchor.  If no pixel qualifies,
    the single argmax pixel (row-major first on ties) is returned so the
    anchor set is never empty.

    Returns anchor coordinates as a row-major sorted list of (i, j).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"select_anchors: beta must be in (0, 1), got {beta}")
    up = upsample_nearest(np.asarray(cross, dtype=np.float64), target)
    ii, jj = np.nonzero(up > beta)
    if ii.size == 0:
        flat = int(np.argmax(up))
        return [(flat // target[1], flat % target[1])]
    return list(zip(ii.tolist(), jj.tolist()))


def aggregate_self_attention(anchors, self_attn, resolution) -> np.ndarray:
    """Sum the self-attention rows of all anchor pixels and min-max normalize.

    `self_attn` is (h*w, h*w) for `resolution` (h, w).  A constant raw sum
    (e.g. uniform attention) maps to the all-zero map.
    """
    h, w = resolution
    self_attn = np.asarray(self_attn)
    if self_attn.shape != (h * w, h * w):
        raise ValueError(
            f"aggregate_self_attention: matrix shape {self_attn.shape} != {(h * w, h * w)}"
        )
    if len(anchors) == 0:
        raise ValueError("aggregate_self_attention: empty anchor set")
    acc = np.zeros(h * w, dtype=np.float64)
    for i, j in anchors:
        if not (0 <= i < h and 0 <= j < w):
            raise ValueError(f"aggregate_self_attention: anchor {(i, j)} outside {(h, w)}")
        acc += self_attn[i * w + j].astype(np.float64)
    return min_max_normalize(acc.reshape(h, w))


def min_max_normalize(score_map) -> np.ndarray:
    """Rescale to [0, 1] via (x - min) / (max - min); constant maps go to zeros."""
    score_map = np.asarray(score_map, dtype=np.float64)
    if not np.isfinite(score_map).all():
        raise ValueError("min_max_normalize: non-finite values")
    lo = score_map.min()
    hi = score_map.max()
    if hi == lo:
        return np.zeros_like(score_map)
    return (score_map - lo) / (hi - lo)


def upsample_bilinear(score_map, target) -> np.ndarray:
    """Bilinear upsample with pixel-center sampling (align_corners off).

    Output values stay within the input's [min, max].
    """
    src = np.asarray(score_map, dtype=np.float64)
    h, w = src.shape
    th, tw = target
    if th < h or tw < w:
        raise ValueError(f"upsample_bilinear: target {target} smaller than source {(h, w)}")
    # Source coordinate of each output pixel center.
    ys = (np.arange(th, dtype=np.float64) + 0.5) * (h / th) - 0.5
    xs = (np.arange(tw, dtype=np.float64) + 0.5) * (w / tw) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.minimum(np.floor(ys).astype(int), h - 1)
    x0 = np.minimum(np.floor(xs).astype(int), w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    dy = (ys - y0)[:, None]
    dx = (xs - x0)[None, :]
    a = src[np.ix_(y0, x0)]
    b = src[np.ix_(y0, x1)]
    c = src[np.ix_(y1, x0)]
    d = src[np.ix_(y1, x1)]
    return (1.0 - dy) * ((1.0 - dx) * a + dx * b) + dy * ((1.0 - dx) * c + dx * d)


def binarize(score_map, alpha) -> np.ndarray:
    """Threshold a score map: pixel is foreground iff value > alpha (strict)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"binarize: alpha must be in (0, 1), got {alpha}")
    return np.asarray(score_map) > alpha


def validate_self_attention(self_attn, atol=1e-4) -> None:
    """Check softmax-row invariants: nonnegative, rows summing to 1."""
    self_attn = np.asarray(self_attn)
    if (self_attn < 0).any():
        raise ValueError("self-attention matrix has negative entries")
    sums = self_attn.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=atol):
        worst = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(
            f"self-attention row {worst} sums to {sums[worst]:.6f}, expected 1 ± {atol}"
        )
