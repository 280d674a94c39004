#!/usr/bin/env node
/**
 * Adapter CLI around a tokenized-corpus toolkit: `pos` exports line-parallel
 * POS tag files, `train` fits a small language model on a prepared dataset
 * and logs a validation-perplexity curve CSV.
 *
 * Exit codes: 0 success, 1 bad data (drift, divergence), 2 bad invocation.
 */
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DataError } from "./errors";
import { tagCorpus } from "./pos";
import { loadJob, runJob, writeCurveCsv } from "./train";

function fail(err: unknown): never {
  const msg = err instanceof Error ? err.message : String(err);
  console.error(`error: ${msg}`);
  process.exit(err instanceof DataError ? 1 : 2);
}

yargs(hideBin(process.argv))
  .scriptName("adapter")
  .command(
    "pos",
    "tag a tokenized corpus file, one tag per token",
    (y) =>
      y
        .option("lang", { type: "string", demandOption: true, describe: "language code" })
        .option("in", { type: "string", demandOption: true, describe: "tokenized corpus file" })
        .option("out", { type: "string", demandOption: true, describe: "tag file to write" }),
    (argv) => {
      try {
        const n = tagCorpus(argv.lang, argv.in, argv.out);
        console.error(`tagged ${n} lines -> ${argv.out}`);
      } catch (err) {
        fail(err);
      }
    },
  )
  .command(
    "train",
    "train a small LM and write a step,perplexity curve CSV",
    (y) =>
      y
        .option("config", { type: "string", demandOption: true, describe: "job config JSON" })
        .option("out", { type: "string", demandOption: true, describe: "curve CSV to write" }),
    (argv) => {
      try {
        const job = loadJob(argv.config);
        const result = runJob(job, (msg) => console.error(msg));
        writeCurveCsv(result, argv.out);
        if (result.abortedAt !== undefined) {
          throw new DataError(
            `non-finite loss at step ${result.abortedAt}; partial curve at ${argv.out} is flagged invalid`,
          );
        }
        console.error(`wrote ${result.rows.length} checkpoints -> ${argv.out}`);
      } catch (err) {
        fail(err);
      }
    },
  )
  .demandCommand(1, "expected a subcommand: pos or train")
  .strict()
  .fail((msg, err) => {
    if (err) fail(err);
    console.error(`error: ${msg}`);
    process.exit(2);
  })
  .parse();
