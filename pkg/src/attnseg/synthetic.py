"""Deterministic synthetic sample for end-to-end tests and demos.

The sample plants one error of each kind the pipeline stages are supposed to
fix: the raw cross-attention covers only a small core of each ground-truth
region and also lights up a noise blob outside it (hurts the
cross-attention-only baseline), the self-attention spreads anchors over most
but not all of the region (the locate-to-segment stage recovers a large
subset and drops the noise), and the candidate pool contains the exact
region (refinement completes it).  Average Recall therefore increases
strictly from baseline to +LSP to +LSP+refinement.
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

from attnseg import tensor_store

IMAGE_SIZE = 64
CROSS_RES = 16
SELF_RES = 32


def _rect(size, r0, r1, c0, c1):
    m = np.zeros((size, size), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


def write_golden_sample(out_dir) -> Path:
    """Write the golden fixture into `out_dir`; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Ground-truth regions at image resolution, and the subsets each stage sees.
    gt = {
        "p1": _rect(IMAGE_SIZE, 16, 40, 8, 32),
        "p2": _rect(IMAGE_SIZE, 16, 40, 36, 60),
    }
    lsp_support = {  # what self-attention aggregation recovers (subset of GT)
        "p1": _rect(IMAGE_SIZE, 16, 40, 8, 28),
        "p2": _rect(IMAGE_SIZE, 16, 40, 36, 56),
    }
    core16 = {"p1": (4, 6, 2, 4), "p2": (4, 6, 9, 11)}  # anchor cores, 16x16 cells
    noise16 = {"p1": (12, 14, 2, 4), "p2": (12, 14, 9, 11)}  # planted distractors

    # Per-word cross-attention maps: token 0 -> p1's word, tokens 1, 2 -> p2.
    def cross_map(pid, core_value, noise_value):
        m = np.zeros((CROSS_RES, CROSS_RES), dtype=np.float32)
        r0, r1, c0, c1 = core16[pid]
        m[r0:r1, c0:c1] = core_value
        r0, r1, c0, c1 = noise16[pid]
        m[r0:r1, c0:c1] = noise_value
        return m

    cross = {
        0: cross_map("p1", 1.0, 0.35),
        1: np.full((CROSS_RES, CROSS_RES), 0.2, dtype=np.float32),  # weak modifier
        2: cross_map("p2", 1.0, 0.35),
    }
    for tid, m in cross.items():
        tensor_store.write_tensor(out_dir / f"cross_{tid}.atsb", m)

    # Self-attention: anchor-core rows attend uniformly over the LSP support,
    # every other row is uniform (degenerate, normalizes to zero).
    n = SELF_RES * SELF_RES
    self_attn = np.full((n, n), 1.0 / n, dtype=np.float32)
    for pid in ("p1", "p2"):
        support32 = lsp_support[pid][::2, ::2].reshape(-1)
        row_value = 1.0 / support32.sum()
        r0, r1, c0, c1 = core16[pid]
        for i in range(2 * r0, 2 * r1):
            for j in range(2 * c0, 2 * c1):
                row = np.where(support32, row_value, 0.0)
                self_attn[i * SELF_RES + j] = row
    tensor_store.write_tensor(out_dir / "self_attn.atsb", self_attn)

    # Candidate pool: the exact GT regions plus one unrelated strip.
    pool_names = []
    for k, mask in enumerate([gt["p1"], gt["p2"], _rect(IMAGE_SIZE, 0, 6, 0, IMAGE_SIZE)]):
        name = f"cand_{k}.png"
        tensor_store.write_mask(out_dir / name, mask)
        pool_names.append(name)
    (out_dir / "pool.json").write_text(json.dumps({"masks": pool_names}))

    for pid, mask in gt.items():
        tensor_store.write_mask(out_dir / f"gt_{pid}.png", mask)

    rgb = np.full((IMAGE_SIZE, IMAGE_SIZE, 3), 96, dtype=np.uint8)
    rgb[gt["p1"]] = (70, 130, 180)
    rgb[gt["p2"]] = (180, 120, 70)
    Image.fromarray(rgb).save(out_dir / "image.png")

    manifest = {
        "sample_id": "golden",
        "image_path": "image.png",
        "image_size": [IMAGE_SIZE, IMAGE_SIZE],
        "phrases": [
            {
                "phrase_id": "p1",
                "word_token_ids": [0],
                "head_index": 0,
                "word_embeddings": [[1.0, 0.0]],
                "is_plural": True,
                "is_thing": False,
            },
            {
                "phrase_id": "p2",
                "word_token_ids": [1, 2],
                "head_index": 1,
                "word_embeddings": [[1.0, 0.0], [1.0, 1.0]],
                "is_plural": False,
                "is_thing": True,
            },
        ],
        "cross_attention_paths": {str(t): f"cross_{t}.atsb" for t in cross},
        "self_attention_path": "self_attn.atsb",
        "candidate_pool_path": "pool.json",
        "gt_mask_paths": {pid: f"gt_{pid}.png" for pid in gt},
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path
