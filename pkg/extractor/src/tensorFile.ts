/**
 * Binary tensor container ("ATSB") shared with the segmentation engine:
 *
 *   magic      4 bytes ASCII "ATSB"
 *   version    uint16 little-endian (1)
 *   header_len uint32 little-endian
 *   header     UTF-8 JSON {dtype: "f32", shape: number[], layout: "row-major"}
 *   payload    raw little-endian IEEE-754 float32, row-major
 */

import * as fs from "node:fs";

const MAGIC = "ATSB";
const VERSION = 1;

export function writeTensor(path: string, shape: number[], values: Float32Array): void {
  const count = shape.reduce((a, b) => a * b, 1);
  if (shape.length === 0 || shape.some((s) => !Number.isInteger(s) || s <= 0)) {
    throw new Error(`shape entries must be strictly positive integers, got [${shape}]`);
  }
  if (values.length !== count) {
    throw new Error(`expected ${count} values for shape [${shape}], got ${values.length}`);
  }
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new Error(`non-finite value at flat index ${i}`);
    }
  }
  const header = Buffer.from(
    JSON.stringify({ dtype: "f32", shape, layout: "row-major" }),
    "utf-8",
  );
  const buf = Buffer.alloc(10 + header.length + 4 * count);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt16LE(VERSION, 4);
  buf.writeUInt32LE(header.length, 6);
  header.copy(buf, 10);
  for (let i = 0; i < count; i++) {
    buf.writeFloatLE(values[i], 10 + header.length + 4 * i);
  }
  fs.writeFileSync(path, buf);
}

export interface Tensor {
  shape: number[];
  values: Float32Array;
}

export function readTensor(path: string): Tensor {
  const buf = fs.readFileSync(path);
  if (buf.length < 10 || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== VERSION) {
    throw new Error(`${path}: unsupported version ${version}`);
  }
  const headerLen = buf.readUInt32LE(6);
  const header = JSON.parse(buf.toString("utf-8", 10, 10 + headerLen));
  if (header.dtype !== "f32" || header.layout !== "row-major") {
    throw new Error(`${path}: unsupported dtype/layout`);
  }
  const shape: number[] = header.shape;
  const count = shape.reduce((a: number, b: number) => a * b, 1);
  const payload = buf.subarray(10 + headerLen);
  if (payload.length !== 4 * count) {
    throw new Error(
      `${path}: payload length ${payload.length} != expected ${4 * count} for shape [${shape}]`,
    );
  }
  const values = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    values[i] = payload.readFloatLE(4 * i);
  }
  return { shape, values };
}
