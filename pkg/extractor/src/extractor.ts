/**
 * Offline manifest producer: split the narrative, invert the image, capture
 * and average attention, run the mask generator, and serialize everything
 * in the segmentation engine's on-disk formats (ATSB tensors, {0,255} mask
 * PNGs, manifest JSON with relative paths).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { averageMaps, renormalizeRows } from "./attention.js";
import { ModelBackend } from "./backend.js";
import { CROSS_RES, IMAGE_SIZE, rectMask, Scene, SELF_RES } from "./dataset.js";
import { writeMask, writeRgbImage } from "./maskPng.js";
import { DiffusionRunConfig, DEFAULT_CONFIG } from "./schedule.js";
import { splitNarrative, SubParagraph } from "./splitter.js";
import { writeTensor } from "./tensorFile.js";

export const MAX_TEXT_TOKENS = 77;
/** reconstruction errors above this flag the sample in the manifest */
export const RECONSTRUCTION_ERROR_BOUND = 0.15;

export interface ExtractionResult {
  manifestPath: string;
  subParagraphs: SubParagraph[];
  reconstructionError: number;
  poolSize: number;
}

function atomicWriteJson(filePath: string, data: unknown): void {
  const tmp = `${filePath}.tmp`;
  fs.writeFileSync(tmp, JSON.stringify(data, null, 2));
  fs.renameSync(tmp, filePath);
}

export function extractSample(
  scene: Scene,
  backend: ModelBackend,
  outDir: string,
  config: DiffusionRunConfig = DEFAULT_CONFIG,
): ExtractionResult {
  fs.mkdirSync(outDir, { recursive: true });

  const subParagraphs = splitNarrative(
    scene.narrative,
    scene.phrases.map((p) => ({
      phraseId: p.phraseId,
      startWord: p.startWord,
      endWord: p.endWord,
    })),
    MAX_TEXT_TOKENS,
  );

  const inversion = backend.invertImage(scene, config);
  const capture = backend.captureAttention(scene, config);

  // Cross-attention: average over all layers and denoising steps, per word.
  const crossPaths: Record<string, string> = {};
  let tokenId = 0;
  const wordTokenIds: number[][] = [];
  for (const phrase of scene.phrases) {
    const ids: number[] = [];
    for (let w = 0; w < phrase.words.length; w++) {
      const avg = averageMaps(capture.crossPerWord[tokenId]);
      const name = `cross_${tokenId}.atsb`;
      writeTensor(path.join(outDir, name), [CROSS_RES, CROSS_RES], avg);
      crossPaths[String(tokenId)] = name;
      ids.push(tokenId);
      tokenId++;
    }
    wordTokenIds.push(ids);
  }

  // Self-attention: average over layers and steps, renormalize rows to 1.
  const n = SELF_RES * SELF_RES;
  const selfAvg = renormalizeRows(averageMaps(capture.selfMatrices), n);
  writeTensor(path.join(outDir, "self_attn.atsb"), [n, n], selfAvg);

  const candidates = backend.generateCandidates(scene);
  const poolNames: string[] = [];
  for (const [k, mask] of candidates.entries()) {
    const name = `cand_${k}.png`;
    writeMask(path.join(outDir, name), mask, IMAGE_SIZE, IMAGE_SIZE);
    poolNames.push(name);
  }
  atomicWriteJson(path.join(outDir, "pool.json"), { masks: poolNames });

  const gtPaths: Record<string, string> = {};
  for (const phrase of scene.phrases) {
    const name = `gt_${phrase.phraseId}.png`;
    writeMask(path.join(outDir, name), rectMask(IMAGE_SIZE, phrase.gt), IMAGE_SIZE, IMAGE_SIZE);
    gtPaths[phrase.phraseId] = name;
  }

  writeRgbImage(path.join(outDir, "image.png"), scene.rgb, IMAGE_SIZE, IMAGE_SIZE);

  const manifest = {
    sample_id: scene.sampleId,
    image_path: "image.png",
    image_size: [IMAGE_SIZE, IMAGE_SIZE],
    phrases: scene.phrases.map((p, i) => ({
      phrase_id: p.phraseId,
      word_token_ids: wordTokenIds[i],
      head_index: wordTokenIds[i].length - 1,
      word_embeddings: p.embeddings,
      is_plural: p.isPlural,
      is_thing: p.isThing,
    })),
    cross_attention_paths: crossPaths,
    self_attention_path: "self_attn.atsb",
    candidate_pool_path: "pool.json",
    gt_mask_paths: gtPaths,
    extraction_metadata: {
      model_version: config.modelVersion,
      guidance_scale: config.guidanceScale,
      ddim_steps: config.ddimSteps,
      null_text_iterations: config.nullTextIterations,
      seed: scene.seed,
      attention_blocks: capture.blockIds,
      candidate_pool_size: candidates.length,
      reconstruction_error: inversion.reconstructionError,
      reconstruction_flagged: inversion.reconstructionError > RECONSTRUCTION_ERROR_BOUND,
      sub_paragraphs: subParagraphs.map((s) => s.text),
    },
  };
  const manifestPath = path.join(outDir, "manifest.json");
  atomicWriteJson(manifestPath, manifest);

  return {
    manifestPath,
    subParagraphs,
    reconstructionError: inversion.reconstructionError,
    poolSize: candidates.length,
  };
}

/** Extract a batch of scenes and emit a batch index the engine consumes. */
export function extractDataset(
  scenes: Scene[],
  backend: ModelBackend,
  outRoot: string,
  config: DiffusionRunConfig = DEFAULT_CONFIG,
): string {
  fs.mkdirSync(outRoot, { recursive: true });
  const sampleManifests: string[] = [];
  for (const scene of scenes) {
    const result = extractSample(scene, backend, path.join(outRoot, scene.sampleId), config);
    sampleManifests.push(path.relative(outRoot, result.manifestPath));
  }
  const batchPath = path.join(outRoot, "batch.json");
  atomicWriteJson(batchPath, { samples: sampleManifests });
  return batchPath;
}
