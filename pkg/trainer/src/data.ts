import { readFileSync } from "node:fs";

import { DataError } from "./errors";

export const UNK = "<unk>";
export const EOS = "<eos>";

export interface Vocab {
  tokens: string[];
  ids: Map<string, number>;
  unkId: number;
  eosId: number;
}

/**
 * Load a `token<TAB>count` vocabulary file (most frequent first).
 *
 * Ids follow file order. Extra `markers` (perturbation tokens absent from the
 * vocabulary file, e.g. "<rev>") are appended, then <unk> and <eos>.
 */
export function loadVocab(path: string, markers: string[] = []): Vocab {
  const tokens: string[] = [];
  const ids = new Map<string, number>();
  const push = (token: string) => {
    ids.set(token, tokens.length);
    tokens.push(token);
  };

  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    const parts = line.split("\t");
    if (parts.length !== 2 || !/^\d+$/.test(parts[1])) {
      throw new DataError(`${path}:${i + 1}: bad vocabulary row ${JSON.stringify(line)}`);
    }
    if (ids.has(parts[0])) {
      throw new DataError(`${path}:${i + 1}: duplicate token ${JSON.stringify(parts[0])}`);
    }
    push(parts[0]);
  });

  for (const marker of markers) {
    if (!ids.has(marker)) push(marker);
  }
  if (!ids.has(UNK)) push(UNK);
  if (!ids.has(EOS)) push(EOS);

  return { tokens, ids, unkId: ids.get(UNK)!, eosId: ids.get(EOS)! };
}

/**
 * Encode a tokenized corpus (one whitespace-separated sentence per line) into
 * a single id stream with <eos> after every sentence. Blank lines are skipped;
 * out-of-vocabulary tokens map to <unk>.
 */
export function encodeCorpus(path: string, vocab: Vocab): Int32Array {
  const out: number[] = [];
  for (const line of readFileSync(path, "utf-8").split("\n")) {
    const tokens = line.split(/\s+/).filter(Boolean);
    if (tokens.length === 0) continue;
    for (const token of tokens) {
      out.push(vocab.ids.get(token) ?? vocab.unkId);
    }
    out.push(vocab.eosId);
  }
  return Int32Array.from(out);
}
