/**
 * Synthetic desk-scale dataset: seeded scenes with rectangular regions, a
 * narrative sentence per region, and ground-truth masks. Each scene also
 * carries the latent structure (anchor core, attainable support, distractor
 * blob) the synthetic model backend uses to fabricate attention maps, the
 * same way real attention correlates with real image content.
 */

import { mulberry32, randInt, Rng } from "./prng.js";

export const IMAGE_SIZE = 64;
export const CROSS_RES = 16;
export const SELF_RES = 32;

export interface Rect {
  r0: number;
  r1: number;
  c0: number;
  c1: number;
}

export interface ScenePhrase {
  phraseId: string;
  words: string[];
  /** word index range within the narrative */
  startWord: number;
  endWord: number;
  isPlural: boolean;
  isThing: boolean;
  embeddings: number[][];
  /** latent structure driving the fabricated attention */
  gt: Rect;
  core: Rect;
  support: Rect;
  noise: Rect;
}

export interface Scene {
  sampleId: string;
  imageSize: number;
  rgb: Uint8Array;
  narrative: string;
  phrases: ScenePhrase[];
  seed: number;
}

export function rectMask(size: number, rect: Rect): Uint8Array {
  const m = new Uint8Array(size * size);
  for (let i = rect.r0; i < rect.r1; i++) {
    for (let j = rect.c0; j < rect.c1; j++) {
      m[i * size + j] = 1;
    }
  }
  return m;
}

const NOUNS = ["lantern", "meadow", "carriage", "harbor", "pavilion", "orchard"];
const MODIFIERS = ["weathered", "crimson", "narrow", "gleaming"];

export function makeScene(seed: number, index: number): Scene {
  const rng: Rng = mulberry32(seed * 1000003 + index);
  const phrases: ScenePhrase[] = [];
  const sentences: string[] = [];
  let wordCursor = 0;

  for (let i = 0; i < 2; i++) {
    // All rects aligned to multiples of 4 so 16x16 cross cells tile them.
    const c0 = 4 + 32 * i;
    const width = randInt(rng, 0, 2) === 0 ? 20 : 24;
    const r0 = randInt(rng, 0, 2) === 0 ? 12 : 16;
    const height = 24;
    const gt: Rect = { r0, r1: r0 + height, c0, c1: c0 + width };
    const core: Rect = { r0, r1: r0 + 8, c0, c1: c0 + 8 };
    const support: Rect = { ...gt, c1: gt.c1 - 4 }; // what self-attention recovers
    const noise: Rect = { r0: 48, r1: 56, c0, c1: c0 + 8 }; // below every gt (r1 <= 40)

    const twoWords = i === 1;
    const noun = NOUNS[randInt(rng, 0, NOUNS.length)];
    const words = twoWords
      ? [MODIFIERS[randInt(rng, 0, MODIFIERS.length)], noun]
      : [noun];
    const sentence = `There is ${words.join(" ")} here.`;
    const sentenceWords = sentence.split(" ");
    const startWord = wordCursor + 2; // skip "There is"
    phrases.push({
      phraseId: `p${i}`,
      words,
      startWord,
      endWord: startWord + words.length,
      isPlural: i === 0,
      isThing: i === 1,
      embeddings: twoWords ? [[1.0, 0.0], [1.0, 1.0]] : [[1.0, 0.0]],
      gt,
      core,
      support,
      noise,
    });
    sentences.push(sentence);
    wordCursor += sentenceWords.length;
  }

  const rgb = new Uint8Array(3 * IMAGE_SIZE * IMAGE_SIZE).fill(90);
  for (const [k, p] of phrases.entries()) {
    const mask = rectMask(IMAGE_SIZE, p.gt);
    for (let px = 0; px < mask.length; px++) {
      if (mask[px]) {
        rgb[3 * px] = k === 0 ? 60 : 190;
        rgb[3 * px + 1] = 120;
        rgb[3 * px + 2] = k === 0 ? 190 : 60;
      }
    }
  }

  return {
    sampleId: `synthetic_${index}`,
    imageSize: IMAGE_SIZE,
    rgb,
    narrative: sentences.join(" "),
    phrases,
    seed,
  };
}
