/** Attention post-processing: layer/step averaging, sub-token pooling, and
 * row renormalization for self-attention matrices. */

export function averageMaps(maps: Float32Array[]): Float32Array {
  if (maps.length === 0) {
    throw new Error("averageMaps: empty list");
  }
  const n = maps[0].length;
  const acc = new Float64Array(n);
  for (const m of maps) {
    if (m.length !== n) {
      throw new Error(`averageMaps: length mismatch ${m.length} vs ${n}`);
    }
    for (let i = 0; i < n; i++) {
      acc[i] += m[i];
    }
  }
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = acc[i] / maps.length;
  }
  return out;
}

/** A word's map is the mean over its sub-word tokens' maps. */
export function poolSubTokens(
  tokenMaps: Float32Array[],
  wordToTokens: number[][],
): Float32Array[] {
  return wordToTokens.map((tokenIdxs) => {
    if (tokenIdxs.length === 0) {
      throw new Error("poolSubTokens: word with no tokens");
    }
    return averageMaps(tokenIdxs.map((t) => {
      if (t < 0 || t >= tokenMaps.length) {
        throw new Error(`poolSubTokens: token index ${t} out of range`);
      }
      return tokenMaps[t];
    }));
  });
}

/** Rescale each row of an (n, n) matrix to sum to exactly 1. */
export function renormalizeRows(matrix: Float32Array, n: number): Float32Array {
  if (matrix.length !== n * n) {
    throw new Error(`renormalizeRows: expected ${n * n} values, got ${matrix.length}`);
  }
  const out = new Float32Array(n * n);
  for (let i = 0; i < n; i++) {
    let sum = 0;
    for (let j = 0; j < n; j++) {
      sum += matrix[i * n + j];
    }
    if (sum <= 0) {
      throw new Error(`renormalizeRows: row ${i} has non-positive sum ${sum}`);
    }
    for (let j = 0; j < n; j++) {
      out[i * n + j] = matrix[i * n + j] / sum;
    }
  }
  return out;
}
