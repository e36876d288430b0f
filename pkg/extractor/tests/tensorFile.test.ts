import assert from "node:assert/strict";
import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { after, describe, it } from "node:test";

import { readTensor, writeTensor } from "../src/tensorFile.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "atsb-"));
after(() => fs.rmSync(tmp, { recursive: true, force: true }));

describe("ATSB tensor container", () => {
  it("round-trips bit-exactly", () => {
    const values = new Float32Array([0, 0.5, 0.5, 1]);
    const p = path.join(tmp, "t.atsb");
    writeTensor(p, [2, 2], values);
    const back = readTensor(p);
    assert.deepEqual(back.shape, [2, 2]);
    assert.ok(Buffer.from(back.values.buffer).equals(Buffer.from(values.buffer)));
  });

  it("writes the exact byte layout", () => {
    const p = path.join(tmp, "layout.atsb");
    writeTensor(p, [2, 2], new Float32Array([0, 0.5, 0.5, 1]));
    const buf = fs.readFileSync(p);
    assert.equal(buf.toString("ascii", 0, 4), "ATSB");
    assert.equal(buf.readUInt16LE(4), 1);
    const headerLen = buf.readUInt32LE(6);
    const header = JSON.parse(buf.toString("utf-8", 10, 10 + headerLen));
    assert.deepEqual(header, { dtype: "f32", shape: [2, 2], layout: "row-major" });
    assert.equal(buf.length, 10 + headerLen + 16);
  });

  it("rejects non-finite values with the offending index", () => {
    assert.throws(
      () => writeTensor(path.join(tmp, "nan.atsb"), [2], new Float32Array([1, NaN])),
      /index 1/,
    );
  });

  it("rejects bad magic and payload length mismatches", () => {
    const p = path.join(tmp, "bad.atsb");
    writeTensor(p, [2, 2], new Float32Array(4));
    const buf = fs.readFileSync(p);
    buf.write("XXXX", 0, "ascii");
    fs.writeFileSync(p, buf);
    assert.throws(() => readTensor(p), /magic/);

    const header = Buffer.from(
      JSON.stringify({ dtype: "f32", shape: [3, 3], layout: "row-major" }),
    );
    const short = Buffer.alloc(10 + header.length + 32);
    short.write("ATSB", 0, "ascii");
    short.writeUInt16LE(1, 4);
    short.writeUInt32LE(header.length, 6);
    header.copy(short, 10);
    const p2 = path.join(tmp, "short.atsb");
    fs.writeFileSync(p2, short);
    assert.throws(() => readTensor(p2), /payload length 32/);
  });

  it("is readable by the segmentation engine's Python reader", () => {
    const values = new Float32Array([0.125, -3.5, 1e-7, 42]);
    const p = path.join(tmp, "cross_lang.atsb");
    writeTensor(p, [2, 2], values);
    const out = execFileSync(
      "python3",
      [
        "-c",
        "import sys; from attnseg.tensor_store import read_tensor; " +
          "a = read_tensor(sys.argv[1]); print(a.shape, a.ravel().tolist())",
        p,
      ],
      { encoding: "utf-8" },
    );
    assert.equal(out.trim(), "(2, 2) [0.125, -3.5, 1.0000000116860974e-07, 42.0]");
  });

  it("reads tensors written by the Python writer", () => {
    const p = path.join(tmp, "from_py.atsb");
    execFileSync("python3", [
      "-c",
      "import sys; import numpy as np; from attnseg.tensor_store import write_tensor; " +
        "write_tensor(sys.argv[1], np.arange(6, dtype=np.float32).reshape(2, 3) / 4)",
      p,
    ]);
    const t = readTensor(p);
    assert.deepEqual(t.shape, [2, 3]);
    assert.deepEqual(Array.from(t.values), [0, 0.25, 0.5, 0.75, 1, 1.25]);
  });
});
