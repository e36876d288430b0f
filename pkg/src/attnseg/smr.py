"""Candidate-mask refinement: match class-agnostic candidate masks against a
predicted mask with two complementary overlap ratios and union the matches.

The first ratio (intersection over prediction area) detects predictions that
under-segment, the second (intersection over candidate area) predictions
that over-segment.  When nothing matches, the prediction passes through
unchanged.
"""

import numpy as np


def matching_scores(pred, candidate, epsilon=1e-6):
    """Return (s1, s2) overlap ratios between prediction and candidate.

    s1 = |pred ∩ cand| / (|pred| + epsilon)
    s2 = |pred ∩ cand| / |cand|   (0 for an empty candidate)
    """
    pred = np.asarray(pred, dtype=bool)
    candidate = np.asarray(candidate, dtype=bool)
    if pred.shape != candidate.shape:
        raise ValueError(f"resolution mismatch: {pred.shape} vs {candidate.shape}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    inter = int(np.count_nonzero(pred & candidate))
    pred_area = int(np.count_nonzero(pred))
    cand_area = int(np.count_nonzero(candidate))
    s1 = inter / (pred_area + epsilon)
    s2 = inter / cand_area if cand_area > 0 else 0.0
    return s1, s2


def refine_mask(pred, pool, tau=0.6, epsilon=1e-6) -> np.ndarray:
    """Union all candidates whose s1 or s2 exceeds tau; fall back to pred.

    `pool` is an iterable of boolean masks at the prediction's resolution.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    pred = np.asarray(pred, dtype=bool)
    refined = None
    for cand in pool:
        s1, s2 = matching_scores(pred, cand, epsilon)
        if s1 > tau or s2 > tau:
            cand = np.asarray(cand, dtype=bool)
            refined = cand.copy() if refined is None else (refined | cand)
    return pred.copy() if refined is None else refined
