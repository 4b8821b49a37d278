/** Integrity report over a native corpus: class x SNR counts, mean power,
 * and a uniformity verdict. */

import { CLASS_NAMES, Corpus, readCorpus } from "./amrd.js";

export interface VerifyReport {
  nFrames: number;
  snrLevels: number[];
  classesPresent: number;
  counts: Map<string, Map<number, number>>;
  meanPower: number;
  uniform: boolean;
}

export function verifyCorpus(corpus: Corpus): VerifyReport {
  const counts = new Map<string, Map<number, number>>();
  const snrSet = new Set<number>();
  let power = 0;
  for (const frame of corpus.frames) {
    const name = CLASS_NAMES[frame.label] ?? `class${frame.label}`;
    if (!counts.has(name)) counts.set(name, new Map());
    const row = counts.get(name)!;
    row.set(frame.snrDb, (row.get(frame.snrDb) ?? 0) + 1);
    snrSet.add(frame.snrDb);
    let e = 0;
    for (let i = 0; i < 128; i++) {
      const re = frame.iq[i];
      const im = frame.iq[128 + i];
      e += re * re + im * im;
    }
    power += e / 128;
  }
  const snrLevels = [...snrSet].sort((a, b) => a - b);
  const cells: number[] = [];
  for (const row of counts.values()) {
    for (const snr of snrLevels) cells.push(row.get(snr) ?? 0);
  }
  const uniform = cells.length > 0 && cells.every((c) => c === cells[0]);
  return {
    nFrames: corpus.frames.length,
    snrLevels,
    classesPresent: counts.size,
    counts,
    meanPower: corpus.frames.length ? power / corpus.frames.length : 0,
    uniform,
  };
}

export function verifyFile(path: string): VerifyReport {
  return verifyCorpus(readCorpus(path));
}

export function formatReport(report: VerifyReport): string {
  const lines = [
    `${report.nFrames} frames, ${report.classesPresent} classes, ` +
      `${report.snrLevels.length} SNR levels, uniform=${report.uniform}, ` +
      `mean power ${report.meanPower.toFixed(4)}`,
    "class".padEnd(8) + report.snrLevels.map((s) => String(s).padStart(7)).join(""),
  ];
  for (const name of CLASS_NAMES) {
    const row = report.counts.get(name);
    if (!row) continue;
    lines.push(
      name.padEnd(8) +
        report.snrLevels.map((s) => String(row.get(s) ?? 0).padStart(7)).join("")
    );
  }
  return lines.join("\n");
}
