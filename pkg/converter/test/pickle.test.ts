import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { NDArray, PDict, PickleError, Tuple, loads } from "../src/pickle.js";

const FIXTURES = path.join(__dirname, "fixtures");

function fixture(name: string): Uint8Array {
  return new Uint8Array(fs.readFileSync(path.join(FIXTURES, name)));
}

describe("pickle VM on CPython fixtures", () => {
  it("loads the protocol-2 mini archive", () => {
    const root = loads(fixture("mini_archive.pkl"));
    expect(root).toBeInstanceOf(PDict);
    const dict = root as PDict;
    expect(dict.entries.length).toBe(11 * 20);
    const [key, value] = dict.entries[0];
    expect(key).toBeInstanceOf(Tuple);
    const [name, snr] = (key as Tuple).items;
    expect(typeof name).toBe("string");
    expect(typeof snr).toBe("number");
    expect(value).toBeInstanceOf(NDArray);
    const arr = value as NDArray;
    expect(arr.shape).toEqual([2, 2, 128]);
    expect(arr.dtype).toBe("<f4");
    expect(arr.data.length).toBe(2 * 2 * 128 * 4);
  });

  it("loads the protocol-4 float64 single entry", () => {
    const dict = loads(fixture("single_entry.pkl")) as PDict;
    expect(dict.entries.length).toBe(1);
    const arr = dict.entries[0][1] as NDArray;
    expect(arr.dtype).toBe("<f8");
    expect(arr.shape).toEqual([1, 2, 128]);
    const view = new DataView(arr.data.buffer, arr.data.byteOffset);
    expect(view.getFloat64(0, true)).toBeCloseTo(-1.0, 12);
  });

  it("rejects truncated input", () => {
    const bytes = fixture("mini_archive.pkl").slice(0, 50);
    expect(() => loads(bytes)).toThrow(PickleError);
  });

  it("rejects unknown opcodes", () => {
    expect(() => loads(new Uint8Array([0x80, 0x02, 0x01]))).toThrow(PickleError);
  });
});

/** Builds the byte layout a Python 2 pickler produced for the published
 * archive: SHORT_BINSTRING keys, the numpy.core.multiarray._reconstruct
 * path, and BINSTRING frame payloads. */
export function py2Archive(entries: Array<[string, number, Float32Array]>): Uint8Array {
  const parts: number[] = [];
  const push = (...bs: number[]) => parts.push(...bs);
  const ascii = (t: string) => { for (const c of t) parts.push(c.charCodeAt(0)); };
  const u32 = (v: number) =>
    push(v & 0xff, (v >> 8) & 0xff, (v >> 16) & 0xff, (v >> 24) & 0xff);
  const sstr = (t: string) => { push(0x55, t.length); ascii(t); };
  const glob = (m: string, n: string) => { push(0x63); ascii(`${m}\n${n}\n`); };

  push(0x80, 0x02, 0x7d, 0x28);              // PROTO 2, EMPTY_DICT, MARK
  for (const [name, snr, frame] of entries) {
    sstr(name);
    push(0x4a); u32(snr >>> 0);              // BININT key snr
    push(0x86);                              // TUPLE2 key
    glob("numpy.core.multiarray", "_reconstruct");
    push(0x28);                              // MARK reduce args
    glob("numpy", "ndarray");
    push(0x29);                              // EMPTY_TUPLE
    sstr("b");
    push(0x74, 0x52);                        // TUPLE, REDUCE
    push(0x28);                              // MARK setstate tuple
    push(0x4b, 0x01);                        // version 1
    const n = frame.length / 256;
    push(0x28, 0x4b, n, 0x4b, 0x02, 0x4b, 0x80, 0x74); // shape (n, 2, 128)
    glob("numpy", "dtype");
    push(0x28); sstr("f4"); push(0x4b, 0x00, 0x4b, 0x01, 0x74, 0x52);
    push(0x28, 0x4b, 0x03); sstr("<");       // dtype state (3, '<', ...)
    push(0x4e, 0x4e, 0x4e);
    push(0x4a); u32(-1 >>> 0);
    push(0x4a); u32(-1 >>> 0);
    push(0x4b, 0x00, 0x74, 0x62);            // ..., 0) BUILD
    push(0x89);                              // fortran = False
    const raw = new Uint8Array(frame.buffer, frame.byteOffset, frame.byteLength);
    push(0x54); u32(raw.length);             // BINSTRING payload
    for (const b of raw) parts.push(b);
    push(0x74, 0x62);                        // state TUPLE, BUILD
  }
  push(0x75, 0x2e);                          // SETITEMS, STOP
  return new Uint8Array(parts);
}

describe("python 2 style pickles", () => {
  it("loads SHORT_BINSTRING keys and BINSTRING payloads", () => {
    const frame = new Float32Array(2 * 128).map((_, i) => i / 256);
    const dict = loads(py2Archive([["QPSK", -10, frame]])) as PDict;
    expect(dict.entries.length).toBe(1);
    const [key, value] = dict.entries[0];
    const keyName = (key as Tuple).items[0];
    expect(keyName).toBeInstanceOf(Uint8Array);
    expect(Buffer.from(keyName as Uint8Array).toString("latin1")).toBe("QPSK");
    expect((key as Tuple).items[1]).toBe(-10);
    const arr = value as NDArray;
    expect(arr.dtype).toBe("<f4");
    expect(arr.shape).toEqual([1, 2, 128]);
    const view = new DataView(arr.data.buffer, arr.data.byteOffset);
    expect(view.getFloat32(4, true)).toBeCloseTo(1 / 256, 6);
  });

  it("round-trips multiple entries", () => {
    const mk = (seed: number) =>
      new Float32Array(3 * 2 * 128).map((_, i) => Math.sin(seed + i));
    const dict = loads(py2Archive([
      ["BPSK", 0, mk(1)],
      ["GFSK", -20, mk(2)],
    ])) as PDict;
    expect(dict.entries.length).toBe(2);
    const arr = dict.entries[1][1] as NDArray;
    expect(arr.shape).toEqual([3, 2, 128]);
  });
});
