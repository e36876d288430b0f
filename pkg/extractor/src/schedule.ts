/** Diffusion run configuration and the scaled-linear noise schedule. */

export interface DiffusionRunConfig {
  guidanceScale: number;
  totalSteps: number;
  ddimSteps: number;
  betaStart: number;
  betaEnd: number;
  modelVersion: string;
  /** null-embedding optimization iterations per timestep */
  nullTextIterations: number;
}

export const DEFAULT_CONFIG: DiffusionRunConfig = {
  guidanceScale: 7.5,
  totalSteps: 1000,
  ddimSteps: 20,
  betaStart: 0.00085,
  betaEnd: 0.012,
  modelVersion: "stable-diffusion-v1-4",
  nullTextIterations: 10,
};

export function validateConfig(config: DiffusionRunConfig): void {
  if (config.ddimSteps <= 0 || config.ddimSteps > config.totalSteps) {
    throw new Error(
      `ddimSteps must be in [1, totalSteps]: ${config.ddimSteps} vs ${config.totalSteps}`,
    );
  }
  if (!(config.betaStart > 0) || !(config.betaEnd > config.betaStart)) {
    throw new Error(
      `schedule endpoints must be positive ascending: ${config.betaStart}, ${config.betaEnd}`,
    );
  }
  if (config.nullTextIterations < 0) {
    throw new Error("nullTextIterations must be >= 0");
  }
}

/** betas[t] = (sqrt(b1) + t/(T-1) * (sqrt(bT) - sqrt(b1)))^2 */
export function scaledLinearBetas(config: DiffusionRunConfig): Float64Array {
  validateConfig(config);
  const { betaStart, betaEnd, totalSteps } = config;
  const s0 = Math.sqrt(betaStart);
  const s1 = Math.sqrt(betaEnd);
  const betas = new Float64Array(totalSteps);
  for (let t = 0; t < totalSteps; t++) {
    const s = s0 + (t / (totalSteps - 1)) * (s1 - s0);
    betas[t] = s * s;
  }
  return betas;
}

export function alphasCumprod(betas: Float64Array): Float64Array {
  const out = new Float64Array(betas.length);
  let acc = 1.0;
  for (let t = 0; t < betas.length; t++) {
    acc *= 1.0 - betas[t];
    out[t] = acc;
  }
  return out;
}

/** Evenly spaced timesteps visited by a DDIM run, descending from T-1. */
export function ddimTimesteps(config: DiffusionRunConfig): number[] {
  const stride = Math.floor(config.totalSteps / config.ddimSteps);
  const steps: number[] = [];
  for (let i = config.ddimSteps - 1; i >= 0; i--) {
    steps.push(i * stride);
  }
  return steps;
}
