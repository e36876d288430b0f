"""Subject-focused word weighting and per-word attention map fusion.

The last word of an English noun phrase is its head noun; each word gets a
weight from the softmax of its embedding's dot product with the head's
embedding, and per-word attention maps are fused as the weighted sum.
"""

import numpy as np

AGGREGATORS = ("subject_focused", "average", "multiplication")
FUSION_STAGES = ("cross", "enhanced")


def head_similarity_weights(word_embeddings, head_override=False) -> np.ndarray:
    """Per-word weights from dot-product similarity with the head (last) word.

    With `head_override`, the head's weight is pinned to 1 after the softmax
    while the other words keep their softmax values (ablation mode; the
    result no longer sums to 1).
    """
    emb = np.asarray(word_embeddings, dtype=np.float64)
    if emb.ndim != 2 or emb.shape[0] == 0:
        raise ValueError(f"expected (n_words, dim) embeddings, got shape {emb.shape}")
    if not np.isfinite(emb).all():
        raise ValueError("non-finite word embedding")
    scores = emb @ emb[-1]
    shifted = scores - scores.max()  # shift-invariant, numerically safe
    e = np.exp(shifted)
    weights = e / e.sum()
    if head_override:
        weights = weights.copy()
        weights[-1] = 1.0
    return weights


def fuse_word_maps(maps, weights) -> np.ndarray:
    """Elementwise weighted sum of per-word score maps."""
    weights = np.asarray(weights, dtype=np.float64)
    if len(maps) != weights.shape[0]:
        raise ValueError(f"{len(maps)} maps but {weights.shape[0]} weights")
    shapes = {np.asarray(m).shape for m in maps}
    if len(shapes) > 1:
        raise ValueError(f"fuse_word_maps: mixed resolutions {shapes}")
    acc = np.zeros(maps[0].shape, dtype=np.float64)
    for w, m in zip(weights, maps):
        acc += w * np.asarray(m, dtype=np.float64)
    return acc


def aggregate_word_maps(maps, word_embeddings, mode="subject_focused",
                        head_override=False) -> np.ndarray:
    """Fuse per-word maps under one of the aggregator modes."""
    if mode == "subject_focused":
        return fuse_word_maps(maps, head_similarity_weights(word_embeddings, head_override))
    if mode == "average":
        return fuse_word_maps(maps, np.full(len(maps), 1.0 / len(maps)))
    if mode == "multiplication":
        acc = np.ones(np.asarray(maps[0]).shape, dtype=np.float64)
        for m in maps:
            acc *= np.asarray(m, dtype=np.float64)
        return acc
    raise ValueError(f"unknown aggregator mode {mode!r}; expected one of {AGGREGATORS}")
