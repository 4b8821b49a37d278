import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { CLASS_NAMES, readCorpus, writeCorpus } from "../src/amrd.js";
import {
  ConversionError,
  convertArchive,
  normalizeModulation,
  parseArchive,
} from "../src/convert.js";
import { formatReport, verifyCorpus } from "../src/verify.js";
import { py2Archive } from "./pickle.test.js";

const FIXTURES = path.join(__dirname, "fixtures");
const tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "amrd-"));

afterAll(() => fs.rmSync(tmpDir, { recursive: true, force: true }));

function fixture(name: string): Uint8Array {
  return new Uint8Array(fs.readFileSync(path.join(FIXTURES, name)));
}

describe("name normalization", () => {
  it("is total over canonical names and common variants", () => {
    for (const name of CLASS_NAMES) {
      expect(normalizeModulation(name)).toBe(name);
    }
    expect(normalizeModulation("qam-16")).toBe("QAM16");
    expect(normalizeModulation("8psk")).toBe("8PSK");
    expect(normalizeModulation(Buffer.from("AM-DSB", "latin1"))).toBe("AM-DSB");
  });

  it("names the offender on unknown modulations", () => {
    expect(() => normalizeModulation("OOK")).toThrow(/OOK/);
  });
});

describe("archive conversion", () => {
  it("converts the mini archive losslessly", () => {
    const corpus = convertArchive(fixture("mini_archive.pkl"), "mini");
    expect(corpus.frames.length).toBe(11 * 20 * 2);
    const expected = JSON.parse(
      fs.readFileSync(path.join(FIXTURES, "mini_archive_expected.json"), "utf-8")
    ) as Record<string, [number, number]>;
    const seen = new Map<string, number[]>();
    for (const frame of corpus.frames) {
      const key = `${CLASS_NAMES[frame.label]}|${frame.snrDb}`;
      if (!seen.has(key)) seen.set(key, []);
      seen.get(key)!.push(frame.iq[0], frame.iq[255]);
    }
    for (const [key, [first, last]] of Object.entries(expected)) {
      const got = seen.get(key)!;
      expect(got[0]).toBe(Math.fround(first));   // frame 0, sample [0][0]
      expect(got[3]).toBe(Math.fround(last));    // frame 1, sample [1][127]
    }
  });

  it("narrows float64 archives to float32", () => {
    const corpus = convertArchive(fixture("single_entry.pkl"), "single");
    expect(corpus.frames.length).toBe(1);
    const expected = JSON.parse(
      fs.readFileSync(path.join(FIXTURES, "single_entry_expected.json"), "utf-8")
    ) as number[];
    for (let i = 0; i < expected.length; i++) {
      expect(corpus.frames[0].iq[i]).toBe(Math.fround(expected[i]));
    }
    expect(corpus.frames[0].label).toBe(CLASS_NAMES.indexOf("QAM16"));
  });

  it("accepts python 2 era key layouts", () => {
    const frame = new Float32Array(2 * 128).fill(0.25);
    const corpus = convertArchive(py2Archive([["CPFSK", -18, frame]]), "py2");
    expect(corpus.frames.length).toBe(1);
    expect(corpus.frames[0].label).toBe(CLASS_NAMES.indexOf("CPFSK"));
    expect(corpus.frames[0].snrDb).toBe(-18);
  });

  it("rejects unknown modulation names", () => {
    expect(() => parseArchive(fixture("unknown_mod.pkl"))).toThrow(/OOK/);
  });

  it("rejects wrong frame shapes", () => {
    expect(() => parseArchive(fixture("bad_shape.pkl"))).toThrow(/expected \(n, 2, 128\)/);
  });

  it("rejects non-dict archives", () => {
    // protocol-2 pickle of the empty list
    expect(() => convertArchive(new Uint8Array([0x80, 0x02, 0x5d, 0x2e]), "x"))
      .toThrow(ConversionError);
  });
});

describe("native format round trip", () => {
  it("survives write/read per sample", () => {
    const corpus = convertArchive(fixture("mini_archive.pkl"), "mini");
    const out = path.join(tmpDir, "mini.amrd");
    writeCorpus(out, corpus);
    const back = readCorpus(out);
    expect(back.frames.length).toBe(corpus.frames.length);
    for (let i = 0; i < corpus.frames.length; i += 37) {
      expect(back.frames[i].label).toBe(corpus.frames[i].label);
      expect(back.frames[i].snrDb).toBe(corpus.frames[i].snrDb);
      expect([...back.frames[i].iq]).toEqual([...corpus.frames[i].iq]);
    }
    expect(back.metadata["provenance"]).toBe("converted");
  });
});

describe("verify", () => {
  it("reports uniform strata on the mini archive", () => {
    const corpus = convertArchive(fixture("mini_archive.pkl"), "mini");
    const report = verifyCorpus(corpus);
    expect(report.classesPresent).toBe(11);
    expect(report.snrLevels.length).toBe(20);
    expect(report.uniform).toBe(true);
    expect(formatReport(report)).toContain("uniform=true");
  });

  it("flags non-uniform strata", () => {
    const corpus = convertArchive(fixture("mini_archive.pkl"), "mini");
    corpus.frames.pop();
    expect(verifyCorpus(corpus).uniform).toBe(false);
  });
});

describe("cli", () => {
  const cli = path.join(__dirname, "..", "dist", "cli.js");

  it("convert + verify end-to-end", () => {
    const out = path.join(tmpDir, "cli.amrd");
    const stdout = execFileSync(
      "node", [cli, "convert", path.join(FIXTURES, "mini_archive.pkl"), out],
      { encoding: "utf-8" }
    );
    expect(stdout).toContain("440 frames");
    const verifyOut = execFileSync("node", [cli, "verify", out],
                                   { encoding: "utf-8" });
    expect(verifyOut).toContain("11 classes");
    expect(verifyOut).toContain("20 SNR levels");
  });

  it("exits 2 on usage errors", () => {
    try {
      execFileSync("node", [cli, "bogus"], { stdio: "pipe" });
      expect.unreachable("usage error must exit nonzero");
    } catch (err) {
      expect((err as { status?: number }).status).toBe(2);
    }
  });

  it("exits 1 on conversion failures", () => {
    const bad = path.join(tmpDir, "bad.pkl");
    fs.writeFileSync(bad, "not a pickle");
    expect(() =>
      execFileSync("node", [cli, "convert", bad, path.join(tmpDir, "o.amrd")],
                   { stdio: "pipe" })
    ).toThrow();
  });
});
