import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { z } from "zod";

import { encodeCorpus, loadVocab } from "./data";
import { ConfigError, DataError } from "./errors";
import { AdamW, Gpt } from "./model";
import { Rng } from "./prng";

/**
 * Named presets. `toy` is the default and finishes in minutes on a CPU.
 * `full` records GPT-2-small-scale settings (batch 512, lr 5e-4, weight
 * decay 0.01, 3000 steps, eval every 100) for reference; running it with
 * this trainer is not a goal.
 */
export const PRESETS = {
  toy: {
    layers: 2,
    heads: 2,
    embed: 128,
    context: 64,
    batchSize: 16,
    learningRate: 1e-3,
    weightDecay: 0.01,
    maxSteps: 600,
    evalInterval: 100,
  },
  full: {
    layers: 12,
    heads: 12,
    embed: 768,
    context: 1024,
    batchSize: 512,
    learningRate: 5e-4,
    weightDecay: 0.01,
    maxSteps: 3000,
    evalInterval: 100,
  },
} as const;

const schema = z
  .object({
    train: z.string(),
    valid: z.string(),
    vocab: z.string(),
    seed: z.number().int().min(0).default(0),
    preset: z.enum(["toy", "full"]).default("toy"),
    layers: z.number().int().positive().optional(),
    heads: z.number().int().positive().optional(),
    embed: z.number().int().positive().optional(),
    context: z.number().int().min(2).optional(),
    batchSize: z.number().int().positive().optional(),
    learningRate: z.number().positive().optional(),
    weightDecay: z.number().min(0).optional(),
    maxSteps: z.number().int().positive().optional(),
    evalInterval: z.number().int().positive().optional(),
    markers: z.array(z.string()).default([]),
    maxEvalWindows: z.number().int().positive().default(64),
  })
  .strict();

export interface TrainJob {
  trainPath: string;
  validPath: string;
  vocabPath: string;
  seed: number;
  layers: number;
  heads: number;
  embed: number;
  context: number;
  batchSize: number;
  learningRate: number;
  weightDecay: number;
  maxSteps: number;
  evalInterval: number;
  markers: string[];
  maxEvalWindows: number;
}

/** Parse and validate a JSON job config; relative paths resolve against the config's directory. */
export function loadJob(configPath: string): TrainJob {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(configPath, "utf-8"));
  } catch (err) {
    throw new ConfigError(`cannot read config ${configPath}: ${(err as Error).message}`);
  }
  const parsed = schema.safeParse(raw);
  if (!parsed.success) {
    const detail = parsed.error.issues
      .map((i) => (i.path.length ? `${i.path.join(".")}: ${i.message}` : i.message))
      .join("; ");
    throw new ConfigError(`${configPath}: ${detail}`);
  }
  const cfg = parsed.data;
  const preset = PRESETS[cfg.preset];
  const base = dirname(resolve(configPath));
  const job: TrainJob = {
    trainPath: resolve(base, cfg.train),
    validPath: resolve(base, cfg.valid),
    vocabPath: resolve(base, cfg.vocab),
    seed: cfg.seed,
    layers: cfg.layers ?? preset.layers,
    heads: cfg.heads ?? preset.heads,
    embed: cfg.embed ?? preset.embed,
    context: cfg.context ?? preset.context,
    batchSize: cfg.batchSize ?? preset.batchSize,
    learningRate: cfg.learningRate ?? preset.learningRate,
    weightDecay: cfg.weightDecay ?? preset.weightDecay,
    maxSteps: cfg.maxSteps ?? preset.maxSteps,
    evalInterval: cfg.evalInterval ?? preset.evalInterval,
    markers: cfg.markers,
    maxEvalWindows: cfg.maxEvalWindows,
  };
  if (job.maxSteps % job.evalInterval !== 0) {
    throw new ConfigError(
      `evalInterval ${job.evalInterval} must divide maxSteps ${job.maxSteps}`,
    );
  }
  if (job.embed % job.heads !== 0) {
    throw new ConfigError(`embed ${job.embed} must be divisible by heads ${job.heads}`);
  }
  return job;
}

export interface TrainResult {
  rows: [number, number][];
  /** Set when a non-finite loss aborted the run at this step. */
  abortedAt?: number;
}

/** Validation perplexity over non-overlapping context-sized windows. */
export function evaluate(model: Gpt, ids: Int32Array, context: number, maxWindows: number): number {
  let nll = 0;
  let count = 0;
  let windows = 0;
  for (let start = 0; start + 1 < ids.length && windows < maxWindows; start += context, windows++) {
    const n = Math.min(context, ids.length - 1 - start);
    nll += model.evalNll(ids, start, n);
    count += n;
  }
  return Math.exp(nll / count);
}

/**
 * Train an autoregressive model on the job's corpus and record validation
 * perplexity every `evalInterval` steps. Deterministic for a fixed job.
 */
export function runJob(job: TrainJob, log: (msg: string) => void = () => {}): TrainResult {
  const vocab = loadVocab(job.vocabPath, job.markers);
  const trainIds = encodeCorpus(job.trainPath, vocab);
  const validIds = encodeCorpus(job.validPath, vocab);
  if (trainIds.length < job.context + 2) {
    throw new DataError(
      `training stream has ${trainIds.length} tokens; need at least context+2 = ${job.context + 2}`,
    );
  }
  if (validIds.length < 2) {
    throw new DataError(`validation stream has ${validIds.length} tokens; need at least 2`);
  }

  const rng = new Rng(job.seed);
  const model = new Gpt(
    {
      vocabSize: vocab.tokens.length,
      layers: job.layers,
      heads: job.heads,
      embed: job.embed,
      context: job.context,
    },
    rng,
  );
  const opt = new AdamW(model.tensors);
  log(`vocab ${vocab.tokens.length}, train ${trainIds.length} tokens, valid ${validIds.length} tokens`);

  const T = job.context;
  const maxStart = trainIds.length - T - 1;
  const scale = 1 / (job.batchSize * T);
  const rows: [number, number][] = [];

  for (let step = 1; step <= job.maxSteps; step++) {
    let nllSum = 0;
    for (let b = 0; b < job.batchSize; b++) {
      const off = rng.int(maxStart + 1);
      nllSum += model.lossAndGrad(trainIds, off, T, scale);
    }
    const loss = nllSum * scale;
    if (!Number.isFinite(loss)) {
      return { rows, abortedAt: step };
    }
    const lr = job.learningRate * (1 - (step - 1) / job.maxSteps);
    opt.step(lr, job.weightDecay);

    if (step % job.evalInterval === 0) {
      const ppl = evaluate(model, validIds, T, job.maxEvalWindows);
      if (!Number.isFinite(ppl) || ppl <= 0) {
        return { rows, abortedAt: step };
      }
      rows.push([step, ppl]);
      log(`step ${step}/${job.maxSteps} | train loss ${loss.toFixed(4)} | valid ppl ${ppl.toFixed(2)}`);
    }
  }
  return { rows };
}

/**
 * Write the curve as `step,perplexity` CSV. An aborted run gets a trailing
 * comment row so downstream parsers reject the partial curve loudly.
 */
export function writeCurveCsv(result: TrainResult, outPath: string): void {
  const lines = ["step,perplexity"];
  for (const [step, ppl] of result.rows) lines.push(`${step},${ppl}`);
  if (result.abortedAt !== undefined) {
    lines.push(`# aborted: non-finite loss at step ${result.abortedAt}`);
  }
  writeFileSync(outPath, lines.join("\n") + "\n");
}
