#!/usr/bin/env node
/**
 * amrd-convert convert <archive.pkl> <out.amrd>   pickled archive -> native
 * amrd-convert verify <corpus.amrd>               integrity report
 *
 * Exit codes: 0 success, 1 conversion/format failure or non-uniform corpus,
 * 2 usage.
 */

import { convertFile } from "./convert.js";
import { formatReport, verifyFile } from "./verify.js";

function usage(): number {
  process.stderr.write(
    "usage: amrd-convert convert <archive.pkl> <out.amrd>\n" +
    "       amrd-convert verify <corpus.amrd>\n"
  );
  return 2;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "convert") {
      if (rest.length !== 2) return usage();
      const corpus = convertFile(rest[0], rest[1]);
      process.stdout.write(
        `wrote ${corpus.frames.length} frames to ${rest[1]}\n`
      );
      return 0;
    }
    if (command === "verify") {
      if (rest.length !== 1) return usage();
      const report = verifyFile(rest[0]);
      process.stdout.write(formatReport(report) + "\n");
      if (!report.uniform) {
        process.stderr.write("error: strata are not uniform\n");
        return 1;
      }
      return 0;
    }
    return usage();
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
