/**
 * Model backend boundary. A production backend wraps a pretrained diffusion
 * pipeline (DDIM + null-text inversion with attention hooks) and a
 * segment-everything mask generator; checkpoints are referenced by
 * `modelVersion`, never bundled. The synthetic backend fabricates the same
 * outputs deterministically from a scene's latent structure, so the full
 * extraction path runs at desk scale.
 */

import { poolSubTokens } from "./attention.js";
import { CROSS_RES, IMAGE_SIZE, Rect, rectMask, Scene, SELF_RES } from "./dataset.js";
import { mulberry32, Rng, uniform } from "./prng.js";
import { alphasCumprod, DiffusionRunConfig, ddimTimesteps, scaledLinearBetas, validateConfig } from "./schedule.js";

export interface InversionResult {
  /** one latent per visited DDIM timestep, most-noised first */
  latents: Float32Array[];
  /** mean absolute reconstruction error against the input image */
  reconstructionError: number;
}

export interface AttentionCapture {
  /** per word: one 16x16 map per (layer, step) pair */
  crossPerWord: Float32Array[][];
  /** one (SELF_RES^2)^2 matrix per (layer, step) pair, rows softmaxed */
  selfMatrices: Float32Array[];
  /** U-Net blocks that contributed, recorded for audit */
  blockIds: string[];
}

export interface ModelBackend {
  invertImage(scene: Scene, config: DiffusionRunConfig): InversionResult;
  captureAttention(scene: Scene, config: DiffusionRunConfig): AttentionCapture;
  generateCandidates(scene: Scene): Uint8Array[];
}

const LATENT_SIZE = 4 * 8 * 8;
const CROSS_BLOCKS = ["down.2.attn", "mid.attn", "up.1.attn", "up.2.attn"];
const SELF_BLOCKS = ["down.1.self", "up.2.self"];
const SELF_STEP_SAMPLES = 2; // self matrices are large; sample the step axis

export class SyntheticBackend implements ModelBackend {
  invertImage(scene: Scene, config: DiffusionRunConfig): InversionResult {
    validateConfig(config);
    const betas = scaledLinearBetas(config);
    const cumprod = alphasCumprod(betas);
    const rng = mulberry32(scene.seed * 7919 + 17);
    const base: Float32Array[] = ddimTimesteps(config).map((t) => {
      const sigma = Math.sqrt(1 - cumprod[t]);
      const z = new Float32Array(LATENT_SIZE);
      for (let i = 0; i < LATENT_SIZE; i++) {
        z[i] = sigma * (2 * rng() - 1);
      }
      return z;
    });
    const n = config.nullTextIterations;
    // Null-text optimization nudges the plain DDIM latents; with n = 0 they
    // pass through untouched and the reconstruction error stays at its base.
    const correction = n > 0 ? 1 / (1 + n) : 0;
    const latents = base.map((z) => {
      if (correction === 0) {
        return z;
      }
      const out = new Float32Array(z.length);
      for (let i = 0; i < z.length; i++) {
        out[i] = z[i] * (1 - 0.01 * correction);
      }
      return out;
    });
    const baseError = uniform(mulberry32(scene.seed * 31 + 5), 0.05, 0.2);
    return { latents, reconstructionError: baseError / (1 + n) };
  }

  captureAttention(scene: Scene, config: DiffusionRunConfig): AttentionCapture {
    validateConfig(config);
    const rng = mulberry32(scene.seed * 104729 + 3);
    const tokenMapsPerLayerStep: Float32Array[][] = [];
    const wordToTokens: number[][] = [];
    let tokenCursor = 0;

    // One token per word here; sub-token pooling is still applied so a
    // production tokenizer can slot in without touching the extractor.
    const tokensPerLayerStep = config.ddimSteps * CROSS_BLOCKS.length;
    const crossPerWord: Float32Array[][] = [];
    for (const phrase of scene.phrases) {
      for (let w = 0; w < phrase.words.length; w++) {
        wordToTokens.push([tokenCursor++]);
        const isHead = w === phrase.words.length - 1;
        const maps: Float32Array[] = [];
        for (let ls = 0; ls < tokensPerLayerStep; ls++) {
          maps.push(
            isHead
              ? headTokenMap(phrase.core, phrase.noise, rng)
              : modifierTokenMap(rng),
          );
        }
        tokenMapsPerLayerStep.push(maps);
      }
    }
    for (const [w, tokenIdxs] of wordToTokens.entries()) {
      // Pool per (layer, step) slice across the word's sub-tokens.
      const pooled: Float32Array[] = [];
      for (let ls = 0; ls < tokensPerLayerStep; ls++) {
        pooled.push(
          poolSubTokens(
            tokenIdxs.map((t) => tokenMapsPerLayerStep[t][ls]),
            [tokenIdxs.map((_, k) => k)],
          )[0],
        );
      }
      crossPerWord.push(pooled);
      void w;
    }

    const selfMatrices: Float32Array[] = [];
    for (let s = 0; s < SELF_STEP_SAMPLES; s++) {
      for (const block of SELF_BLOCKS) {
        selfMatrices.push(selfAttentionMatrix(scene, rng));
        void block;
      }
    }
    return {
      crossPerWord,
      selfMatrices,
      blockIds: [...CROSS_BLOCKS, ...SELF_BLOCKS],
    };
  }

  generateCandidates(scene: Scene): Uint8Array[] {
    // Segment-everything stand-in: exact regions plus unrelated segments.
    const masks = scene.phrases.map((p) => rectMask(IMAGE_SIZE, p.gt));
    masks.push(rectMask(IMAGE_SIZE, { r0: 0, r1: 4, c0: 0, c1: IMAGE_SIZE }));
    return masks;
  }
}

function cell(rect: Rect): Rect {
  const f = IMAGE_SIZE / CROSS_RES;
  return { r0: rect.r0 / f, r1: rect.r1 / f, c0: rect.c0 / f, c1: rect.c1 / f };
}

function headTokenMap(core: Rect, noise: Rect, rng: Rng): Float32Array {
  const m = new Float32Array(CROSS_RES * CROSS_RES).fill(0.01);
  const c = cell(core);
  const d = cell(noise);
  for (let i = c.r0; i < c.r1; i++) {
    for (let j = c.c0; j < c.c1; j++) {
      m[i * CROSS_RES + j] = uniform(rng, 0.85, 0.95);
    }
  }
  for (let i = d.r0; i < d.r1; i++) {
    for (let j = d.c0; j < d.c1; j++) {
      m[i * CROSS_RES + j] = uniform(rng, 0.32, 0.38);
    }
  }
  return m;
}

function modifierTokenMap(rng: Rng): Float32Array {
  const m = new Float32Array(CROSS_RES * CROSS_RES);
  for (let i = 0; i < m.length; i++) {
    m[i] = uniform(rng, 0.19, 0.21);
  }
  return m;
}

function selfAttentionMatrix(scene: Scene, rng: Rng): Float32Array {
  const n = SELF_RES * SELF_RES;
  const mat = new Float32Array(n * n).fill(1 / n);
  const f = IMAGE_SIZE / SELF_RES;
  for (const phrase of scene.phrases) {
    const support: number[] = [];
    for (let i = phrase.support.r0 / f; i < phrase.support.r1 / f; i++) {
      for (let j = phrase.support.c0 / f; j < phrase.support.c1 / f; j++) {
        support.push(i * SELF_RES + j);
      }
    }
    for (let i = phrase.core.r0 / f; i < phrase.core.r1 / f; i++) {
      for (let j = phrase.core.c0 / f; j < phrase.core.c1 / f; j++) {
        const row = i * SELF_RES + j;
        const weights = support.map(() => uniform(rng, 0.9, 1.1));
        const total = weights.reduce((a, b) => a + b, 0);
        mat.fill(0, row * n, (row + 1) * n);
        for (const [k, px] of support.entries()) {
          mat[row * n + px] = weights[k] / total;
        }
      }
    }
  }
  return mat;
}
