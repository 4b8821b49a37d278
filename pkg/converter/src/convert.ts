/**
 * Archive-to-corpus conversion: loads a pickled mapping from
 * (modulation name, snr_db) to float frame stacks of shape (n, 2, 128)
 * and emits the native AMRD format. Values are narrowed to float32;
 * conversion is otherwise lossless.
 */

import * as fs from "node:fs";

import { CLASS_NAMES, Corpus, FRAME_LEN, Frame, SAMPLES_PER_FRAME, writeCorpus } from "./amrd.js";
import { NDArray, PDict, Tuple, loads } from "./pickle.js";

export class ConversionError extends Error {}

/** Accepted spellings per canonical class; archives vary in punctuation. */
const ALIASES: Record<string, string> = {};
for (const name of CLASS_NAMES) ALIASES[normKey(name)] = name;
for (const [variant, canonical] of [
  ["QAM-16", "QAM16"],
  ["QAM-64", "QAM64"],
  ["8-PSK", "8PSK"],
  ["PSK8", "8PSK"],
  ["WB-FM", "WBFM"],
  ["FM", "WBFM"],
  ["AM-DSB-WC", "AM-DSB"],
  ["AM-SSB-WC", "AM-SSB"],
  ["PAM-4", "PAM4"],
]) {
  ALIASES[normKey(variant)] = canonical;
}

function normKey(name: string): string {
  return name.toUpperCase().replace(/[^A-Z0-9]/g, "");
}

export function normalizeModulation(raw: unknown): string {
  const text =
    raw instanceof Uint8Array ? Buffer.from(raw).toString("latin1") : String(raw);
  const canonical = ALIASES[normKey(text)];
  if (!canonical) {
    throw new ConversionError(
      `unknown modulation name ${JSON.stringify(text)}; known: ${CLASS_NAMES.join(", ")}`
    );
  }
  return canonical;
}

export interface ArchiveEntry {
  modulation: string;
  snrDb: number;
  frames: Float32Array[]; // each of length 256 (I row then Q row)
}

export function parseArchive(buf: Uint8Array): ArchiveEntry[] {
  let root: unknown;
  try {
    root = loads(buf);
  } catch (err) {
    throw new ConversionError(`archive does not unpickle: ${(err as Error).message}`);
  }
  if (!(root instanceof PDict)) {
    throw new ConversionError("archive top level is not a dict");
  }
  const entries: ArchiveEntry[] = [];
  for (const [key, value] of root.entries) {
    if (!(key instanceof Tuple) || key.items.length !== 2) {
      throw new ConversionError("archive keys must be (modulation, snr) pairs");
    }
    const modulation = normalizeModulation(key.items[0]);
    const snrDb = Number(key.items[1]);
    if (!Number.isInteger(snrDb) || snrDb < -128 || snrDb > 127) {
      throw new ConversionError(`snr ${String(key.items[1])} is not a small integer`);
    }
    if (!(value instanceof NDArray)) {
      throw new ConversionError(`entry (${modulation}, ${snrDb}) is not an array`);
    }
    entries.push({ modulation, snrDb, frames: sliceFrames(value, modulation, snrDb) });
  }
  return entries;
}

function sliceFrames(arr: NDArray, modulation: string, snrDb: number): Float32Array[] {
  const where = `(${modulation}, ${snrDb})`;
  if (arr.shape.length !== 3 || arr.shape[1] !== 2 || arr.shape[2] !== FRAME_LEN) {
    throw new ConversionError(
      `${where}: frame stack shape (${arr.shape.join(", ")}), expected (n, 2, ${FRAME_LEN})`
    );
  }
  if (arr.fortran) {
    throw new ConversionError(`${where}: Fortran-ordered arrays are not supported`);
  }
  const values = decodeFloats(arr, where);
  const n = arr.shape[0];
  const frames: Float32Array[] = new Array(n);
  for (let i = 0; i < n; i++) {
    const frame = new Float32Array(SAMPLES_PER_FRAME);
    for (let k = 0; k < SAMPLES_PER_FRAME; k++) {
      frame[k] = Math.fround(values[i * SAMPLES_PER_FRAME + k]);
    }
    frames[i] = frame;
  }
  return frames;
}

function decodeFloats(arr: NDArray, where: string): Float64Array | Float32Array {
  const count = arr.shape.reduce((a, b) => a * b, 1);
  const littleEndian = arr.dtype[0] !== ">";
  const kind = arr.dtype.replace(/^[<>=|]/, "");
  const view = new DataView(arr.data.buffer, arr.data.byteOffset, arr.data.byteLength);
  if (kind === "f4") {
    if (arr.data.byteLength !== 4 * count) {
      throw new ConversionError(`${where}: payload size mismatch`);
    }
    const out = new Float32Array(count);
    for (let i = 0; i < count; i++) out[i] = view.getFloat32(4 * i, littleEndian);
    return out;
  }
  if (kind === "f8") {
    if (arr.data.byteLength !== 8 * count) {
      throw new ConversionError(`${where}: payload size mismatch`);
    }
    const out = new Float64Array(count);
    for (let i = 0; i < count; i++) out[i] = view.getFloat64(8 * i, littleEndian);
    return out;
  }
  throw new ConversionError(`${where}: unsupported dtype ${arr.dtype}`);
}

export function convertArchive(buf: Uint8Array, sourceLabel: string): Corpus {
  const entries = parseArchive(buf);
  if (!entries.length) throw new ConversionError("archive holds no entries");
  const frames: Frame[] = [];
  for (const entry of entries) {
    const label = CLASS_NAMES.indexOf(entry.modulation as (typeof CLASS_NAMES)[number]);
    for (const iq of entry.frames) {
      frames.push({ label, snrDb: entry.snrDb, iq });
    }
  }
  const modulations = [...new Set(entries.map((e) => e.modulation))].sort();
  const snrs = [...new Set(entries.map((e) => e.snrDb))].sort((a, b) => a - b);
  return {
    metadata: {
      provenance: "converted",
      source: sourceLabel,
      converter: "amrd-converter 0.1.0",
      class_names: [...CLASS_NAMES],
      frame_shape: [2, FRAME_LEN],
      modulations_present: modulations,
      snr_levels: snrs,
      value_width: "float32 (narrowed from the archive dtype)",
    },
    frames,
  };
}

export function convertFile(inPath: string, outPath: string): Corpus {
  const corpus = convertArchive(fs.readFileSync(inPath), inPath);
  writeCorpus(outPath, corpus);
  return corpus;
}
