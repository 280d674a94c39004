import { readFileSync, writeFileSync } from "node:fs";

import posTagger from "wink-pos-tagger";

import { ConfigError, DataError } from "./errors";

export const SUPPORTED_LANGS = ["en"];

/** Penn Treebank tags to Universal Dependencies coarse tags. */
const PENN_TO_UNIVERSAL: Record<string, string> = {
  CC: "CCONJ",
  CD: "NUM",
  DT: "DET",
  EX: "PRON",
  FW: "X",
  IN: "ADP",
  JJ: "ADJ",
  JJR: "ADJ",
  JJS: "ADJ",
  LS: "X",
  MD: "AUX",
  NN: "NOUN",
  NNS: "NOUN",
  NNP: "PROPN",
  NNPS: "PROPN",
  PDT: "DET",
  POS: "PART",
  PRP: "PRON",
  PRP$: "PRON",
  RB: "ADV",
  RBR: "ADV",
  RBS: "ADV",
  RP: "PART",
  SYM: "SYM",
  TO: "PART",
  UH: "INTJ",
  VB: "VERB",
  VBD: "VERB",
  VBG: "VERB",
  VBN: "VERB",
  VBP: "VERB",
  VBZ: "VERB",
  WDT: "DET",
  WP: "PRON",
  WP$: "PRON",
  WRB: "ADV",
  ".": "PUNCT",
  ",": "PUNCT",
  ":": "PUNCT",
  "``": "PUNCT",
  "''": "PUNCT",
  "-LRB-": "PUNCT",
  "-RRB-": "PUNCT",
  "#": "SYM",
  $: "SYM",
};

export function toUniversal(penn: string): string {
  return PENN_TO_UNIVERSAL[penn] ?? "X";
}

interface TaggedToken {
  value: string;
  pos: string;
}

/**
 * Map tagger output back onto the input tokens, refusing any drift. The tag
 * file is only usable if tag i annotates token i, so a tagger that re-splits
 * or rewrites a token must fail here, never realign.
 */
export function alignTags(tokens: string[], tagged: TaggedToken[], lineno: number): string[] {
  if (tagged.length !== tokens.length) {
    throw new DataError(
      `line ${lineno}: tagger produced ${tagged.length} tokens for ${tokens.length} inputs`,
    );
  }
  return tagged.map((item, i) => {
    if (item.value !== tokens[i]) {
      throw new DataError(
        `line ${lineno}: tokenization drift at token ${i + 1}: ` +
          `${JSON.stringify(tokens[i])} came back as ${JSON.stringify(item.value)}`,
      );
    }
    return toUniversal(item.pos);
  });
}

/**
 * Tag a pre-tokenized corpus file and write the line-parallel tag file.
 * Blank lines are skipped on both sides. Returns the number of tagged lines.
 */
export function tagCorpus(lang: string, inPath: string, outPath: string): number {
  if (!SUPPORTED_LANGS.includes(lang)) {
    throw new ConfigError(
      `no tagger available for language '${lang}' (supported: ${SUPPORTED_LANGS.join(", ")})`,
    );
  }
  const tagger = posTagger();
  const rows: string[] = [];
  const lines = readFileSync(inPath, "utf-8").split("\n");
  lines.forEach((line, i) => {
    const tokens = line.split(/\s+/).filter(Boolean);
    if (tokens.length === 0) return;
    rows.push(alignTags(tokens, tagger.tagRawTokens(tokens), i + 1).join(" "));
  });
  writeFileSync(outPath, rows.length ? rows.join("\n") + "\n" : "");
  return rows.length;
}
