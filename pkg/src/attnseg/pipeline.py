"""End-to-end pipeline: per-phrase map fusion, locate-to-segment, candidate
refinement, evaluation, and artifact output.

A run consumes one sample manifest or a batch index ({"samples": [paths]})
and writes, under the output directory: the echoed config, per-phrase mask
PNGs, an Average Recall report (JSON + text table), and optional overlay
images.  Results are folded in sample_id order, so output is byte-identical
regardless of worker count.
"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from attnseg import evaluation, lsp, sffa, smr, tensor_store

log = logging.getLogger("attnseg")


@dataclass(frozen=True)
class PipelineConfig:
    beta: float = 0.4  # anchor threshold on the fused cross-attention map
    alpha: float = 0.3  # binarization threshold on the upsampled score map
    tau: float = 0.6  # candidate matching threshold
    epsilon: float = 1e-6
    cross_resolution: int = 16
    self_resolution: int = 32
    aggregator: str = "subject_focused"
    fusion_stage: str = "cross"
    head_override: bool = False
    lsp_enabled: bool = True
    smr_enabled: bool = True
    grid_step: float = 0.01
    workers: int = 1

    def validate(self):
        for name in ("beta", "alpha", "tau"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        for name in ("cross_resolution", "self_resolution"):
            r = getattr(self, name)
            if r <= 0 or (r & (r - 1)):
                raise ValueError(f"{name} must be a positive power of two, got {r}")
        if self.self_resolution < self.cross_resolution:
            raise ValueError("self_resolution must be >= cross_resolution")
        if self.aggregator not in sffa.AGGREGATORS:
            raise ValueError(f"unknown aggregator {self.aggregator!r}")
        if self.fusion_stage not in sffa.FUSION_STAGES:
            raise ValueError(f"unknown fusion_stage {self.fusion_stage!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def segment_phrase(phrase, cross_maps, self_attn, config, image_size) -> np.ndarray:
    """Produce the pre-refinement binary mask for one phrase.

    `cross_maps` are the phrase's per-word score maps; `self_attn` is the
    shared (h*w, h*w) self-attention matrix, ignored when the
    locate-to-segment stage is disabled.
    """
    self_res = (config.self_resolution, config.self_resolution)
    if not config.lsp_enabled:
        # Cross-attention-only baseline: fuse, upsample, binarize.
        fused = sffa.aggregate_word_maps(
            cross_maps, phrase.word_embeddings, config.aggregator, config.head_override
        )
        score = lsp.upsample_bilinear(fused, image_size)
        return lsp.binarize(score, config.alpha)

    if config.fusion_stage == "cross":
        fused = sffa.aggregate_word_maps(
            cross_maps, phrase.word_embeddings, config.aggregator, config.head_override
        )
        anchors = lsp.select_anchors(fused, config.beta, self_res)
        enhanced = lsp.aggregate_self_attention(anchors, self_attn, self_res)
    else:
        # Ablation order: enhance each word's map first, fuse afterwards.
        enhanced_maps = []
        for m in cross_maps:
            anchors = lsp.select_anchors(m, config.beta, self_res)
            enhanced_maps.append(lsp.aggregate_self_attention(anchors, self_attn, self_res))
        enhanced = sffa.aggregate_word_maps(
            enhanced_maps, phrase.word_embeddings, config.aggregator, config.head_override
        )
    score = lsp.upsample_bilinear(enhanced, image_size)
    return lsp.binarize(score, config.alpha)


def run_sample(manifest, config):
    """Run every phrase of one sample; returns (records, masks by phrase_id)."""
    self_attn = tensor_store.read_tensor(manifest.self_attention_path)
    lsp.validate_self_attention(self_attn)
    pool = None
    if config.smr_enabled:
        pool = tensor_store.load_candidate_pool(manifest.candidate_pool_path)

    cross_cache = {
        tid: tensor_store.read_tensor(p)
        for tid, p in manifest.cross_attention_paths.items()
    }
    records, masks = [], {}
    for phrase in manifest.phrases:
        cross_maps = [cross_cache[t] for t in phrase.word_token_ids]
        mask = segment_phrase(
            phrase, cross_maps, self_attn, config, manifest.image_size
        )
        if config.smr_enabled:
            mask = smr.refine_mask(mask, pool.masks, config.tau, config.epsilon)
        gt = tensor_store.read_mask(manifest.gt_mask_paths[phrase.phrase_id])
        records.append(
            evaluation.EvalRecord(
                phrase_id=phrase.phrase_id,
                iou=evaluation.iou(mask, gt),
                is_plural=phrase.is_plural,
                is_thing=phrase.is_thing,
            )
        )
        masks[phrase.phrase_id] = mask
    return records, masks


def _phrase_color(phrase_id: str):
    digest = hashlib.sha256(phrase_id.encode("utf-8")).digest()
    # Keep channels away from 0 so the tint is visible on dark images.
    return tuple(64 + (b % 192) for b in digest[:3])


def render_overlay(image_path, mask, phrase_id, out_path) -> None:
    """Composite a semi-transparent colored mask and phrase label on an image."""
    with Image.open(image_path) as img:
        base = img.convert("RGBA")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (base.height, base.width):
        raise ValueError(
            f"mask shape {mask.shape} != image size {(base.height, base.width)}"
        )
    color = _phrase_color(phrase_id)
    layer = np.zeros((base.height, base.width, 4), dtype=np.uint8)
    layer[mask] = (*color, 128)
    out = Image.alpha_composite(base, Image.fromarray(layer, mode="RGBA"))
    draw = ImageDraw.Draw(out)
    draw.text((4, 4), phrase_id, fill=(*color, 255))
    out.convert("RGB").save(out_path, format="PNG")


def _manifest_paths(manifest_path: Path):
    with open(manifest_path) as f:
        data = json.load(f)
    if isinstance(data, dict) and "samples" in data:
        return [(manifest_path.parent / rel).resolve() for rel in data["samples"]]
    return [manifest_path]


def run_pipeline(manifest_path, config: PipelineConfig, out_dir, overlays=False):
    """Run the full pipeline and write all artifacts under `out_dir`.

    Returns (EvalReport or None, failures) where failures maps sample_id (or
    path) to the error that made it skip.  Per-sample failures never abort
    the batch.
    """
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(asdict(config), indent=2, sort_keys=True))

    paths = _manifest_paths(Path(manifest_path))
    results, failures = {}, {}

    def process(p):
        manifest = tensor_store.load_manifest(p)
        return manifest, run_sample(manifest, config)

    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        for p, future in [(p, executor.submit(process, p)) for p in paths]:
            try:
                manifest, (records, masks) = future.result()
            except Exception as e:  # noqa: BLE001 - skip-and-report by design
                log.warning("sample %s failed: %s", p, e)
                failures[str(p)] = str(e)
                continue
            results[manifest.sample_id] = (manifest, records, masks)

    all_records = []
    for sample_id in sorted(results):
        manifest, records, masks = results[sample_id]
        all_records.extend(records)
        mask_dir = out_dir / "masks" / sample_id
        mask_dir.mkdir(parents=True, exist_ok=True)
        for phrase_id, mask in masks.items():
            tensor_store.write_mask(mask_dir / f"{phrase_id}.png", mask)
        if overlays:
            overlay_dir = out_dir / "overlays" / sample_id
            overlay_dir.mkdir(parents=True, exist_ok=True)
            for phrase_id, mask in masks.items():
                render_overlay(
                    manifest.image_path, mask, phrase_id,
                    overlay_dir / f"{phrase_id}.png",
                )

    report = None
    if all_records:
        report = evaluation.build_report(all_records, config.grid_step)
        (out_dir / "report.json").write_text(report.to_json() + "\n")
        (out_dir / "report.txt").write_text(report.to_table() + "\n")
    if failures:
        (out_dir / "failures.json").write_text(
            json.dumps(failures, indent=2, sort_keys=True) + "\n"
        )
    return report, failures
