/**
 * Binary mask and image PNG I/O. Masks are 8-bit grayscale with values
 * {0, 255}, the convention the segmentation engine decodes to {0, 1}.
 */

import * as fs from "node:fs";
import { PNG } from "pngjs";

/** mask is row-major 0/1, length height*width. */
export function writeMask(path: string, mask: Uint8Array, height: number, width: number): void {
  if (mask.length !== height * width) {
    throw new Error(`mask length ${mask.length} != ${height}x${width}`);
  }
  // pngjs packs from RGBA internally; colorType 0 writes it out as grayscale.
  const rgba = new PNG({ width, height });
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 255 : 0;
    rgba.data[4 * i] = v;
    rgba.data[4 * i + 1] = v;
    rgba.data[4 * i + 2] = v;
    rgba.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(rgba, { colorType: 0 }));
}

export function readMask(path: string): { mask: Uint8Array; height: number; width: number } {
  const png = PNG.sync.read(fs.readFileSync(path));
  const mask = new Uint8Array(png.width * png.height);
  for (let i = 0; i < mask.length; i++) {
    const v = png.data[4 * i]; // decoded to RGBA regardless of source color type
    if (v !== 0 && v !== 255) {
      throw new Error(`${path}: mask contains value ${v} outside {0, 255}`);
    }
    mask[i] = v === 255 ? 1 : 0;
  }
  return { mask, height: png.height, width: png.width };
}

/** rgb is row-major, 3 bytes per pixel. */
export function writeRgbImage(
  path: string,
  rgb: Uint8Array,
  height: number,
  width: number,
): void {
  if (rgb.length !== 3 * height * width) {
    throw new Error(`rgb length ${rgb.length} != 3*${height}*${width}`);
  }
  const png = new PNG({ width, height });
  for (let i = 0; i < height * width; i++) {
    png.data[4 * i] = rgb[3 * i];
    png.data[4 * i + 1] = rgb[3 * i + 1];
    png.data[4 * i + 2] = rgb[3 * i + 2];
    png.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}
