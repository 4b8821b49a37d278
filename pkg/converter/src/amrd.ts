/**
 * The native AMRD frame corpus format (little-endian):
 * magic "AMRD", u16 version = 1, u32-length-prefixed UTF-8 JSON metadata,
 * u32 frame count, then per frame: u8 class index, i8 snr_db, 256 f32
 * samples (I row then Q row).
 */

import * as fs from "node:fs";

export const MAGIC = "AMRD";
export const VERSION = 1;
export const FRAME_LEN = 128;
export const SAMPLES_PER_FRAME = 2 * FRAME_LEN;
export const RECORD_BYTES = 2 + 4 * SAMPLES_PER_FRAME;

export const CLASS_NAMES = [
  "WBFM", "AM-DSB", "BPSK", "QPSK", "8PSK", "QAM64",
  "CPFSK", "AM-SSB", "PAM4", "GFSK", "QAM16",
] as const;

export class FormatError extends Error {}

export interface Frame {
  label: number;
  snrDb: number;
  iq: Float32Array; // length 256, I row then Q row
}

export interface Corpus {
  metadata: Record<string, unknown>;
  frames: Frame[];
}

export function writeCorpus(path: string, corpus: Corpus): void {
  const meta = Buffer.from(JSON.stringify(sortKeys(corpus.metadata)), "utf-8");
  const total = 4 + 2 + 4 + meta.length + 4 + corpus.frames.length * RECORD_BYTES;
  const out = Buffer.alloc(total);
  let off = 0;
  out.write(MAGIC, off, "ascii"); off += 4;
  off = out.writeUInt16LE(VERSION, off);
  off = out.writeUInt32LE(meta.length, off);
  off += meta.copy(out, off);
  off = out.writeUInt32LE(corpus.frames.length, off);
  for (const frame of corpus.frames) {
    off = out.writeUInt8(frame.label, off);
    off = out.writeInt8(frame.snrDb, off);
    for (let i = 0; i < SAMPLES_PER_FRAME; i++) {
      off = out.writeFloatLE(frame.iq[i], off);
    }
  }
  fs.writeFileSync(path, out);
}

export function readCorpus(path: string): Corpus {
  const buf = fs.readFileSync(path);
  if (buf.length < 10) throw new FormatError(`${path}: header truncated`);
  if (buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new FormatError(`${path}: not a native frame corpus`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== VERSION) {
    throw new FormatError(`${path}: version ${version}, expected ${VERSION}`);
  }
  const metaLen = buf.readUInt32LE(6);
  if (10 + metaLen + 4 > buf.length) {
    throw new FormatError(`${path}: metadata truncated`);
  }
  const metadata = JSON.parse(buf.toString("utf-8", 10, 10 + metaLen));
  const count = buf.readUInt32LE(10 + metaLen);
  let off = 10 + metaLen + 4;
  if (off + count * RECORD_BYTES !== buf.length) {
    throw new FormatError(
      `${path}: payload ${buf.length - off} bytes, expected ${count * RECORD_BYTES}`
    );
  }
  const frames: Frame[] = new Array(count);
  for (let i = 0; i < count; i++) {
    const label = buf.readUInt8(off);
    const snrDb = buf.readInt8(off + 1);
    const iq = new Float32Array(SAMPLES_PER_FRAME);
    for (let k = 0; k < SAMPLES_PER_FRAME; k++) {
      iq[k] = buf.readFloatLE(off + 2 + 4 * k);
    }
    frames[i] = { label, snrDb, iq };
    off += RECORD_BYTES;
  }
  return { metadata, frames };
}

function sortKeys(obj: Record<string, unknown>): Record<string, unknown> {
  return Object.fromEntries(
    Object.entries(obj).sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
  );
}
