/**
 * Pixel-level helpers behind the adapter's trivial stages: the centered
 * ellipse segmenter and the masked Gaussian blur inpainter.
 */

import type { GrayRaster, Raster } from './png.js';

/**
 * Centered axis-aligned ellipse mask (255 inside, 0 outside) covering
 * roughly `coverage` of the frame: semi-axes scale with each dimension
 * so the analytic area is exactly coverage * width * height.
 */
export function ellipseMask(width: number, height: number, coverage: number): GrayRaster {
  if (!(coverage > 0 && coverage < 1)) {
    throw new RangeError('coverage must be in (0, 1)');
  }
  const s = Math.sqrt(coverage / Math.PI);
  const rx = width * s;
  const ry = height * s;
  const cx = (width - 1) / 2;
  const cy = (height - 1) / 2;
  const data = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const dy = (y - cy) / ry;
    for (let x = 0; x < width; x++) {
      const dx = (x - cx) / rx;
      data[y * width + x] = dy * dy + dx * dx <= 1 ? 255 : 0;
    }
  }
  return { width, height, data };
}

export function fullFrameMask(width: number, height: number): GrayRaster {
  return { width, height, data: new Uint8Array(width * height).fill(255) };
}

/** Fraction of mask pixels that read as foreground (>= 128). */
export function maskCoverage(mask: GrayRaster): number {
  let on = 0;
  for (const v of mask.data) if (v >= 128) on++;
  return on / mask.data.length;
}

function gaussianKernel(sigma: number): Float64Array {
  const radius = Math.max(1, Math.ceil(3 * sigma));
  const kernel = new Float64Array(2 * radius + 1);
  let sum = 0;
  for (let i = -radius; i <= radius; i++) {
    const w = Math.exp(-(i * i) / (2 * sigma * sigma));
    kernel[i + radius] = w;
    sum += w;
  }
  for (let i = 0; i < kernel.length; i++) kernel[i] /= sum;
  return kernel;
}

function reflect(i: number, n: number): number {
  // Mirror across the edges without repeating the border pixel twice
  // in a row beyond what symmetric padding gives.
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

/** Separable Gaussian blur with symmetric edge handling. */
export function gaussianBlur(img: Raster, sigma: number): Raster {
  if (!(sigma > 0)) {
    return { width: img.width, height: img.height, data: img.data.slice() };
  }
  const { width, height } = img;
  const kernel = gaussianKernel(sigma);
  const radius = (kernel.length - 1) / 2;
  const horizontal = new Float64Array(width * height * 3);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let k = -radius; k <= radius; k++) {
          const xx = reflect(x + k, width);
          acc += kernel[k + radius] * img.data[(y * width + xx) * 3 + c];
        }
        horizontal[(y * width + x) * 3 + c] = acc;
      }
    }
  }
  const data = new Uint8Array(width * height * 3);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let k = -radius; k <= radius; k++) {
          const yy = reflect(y + k, height);
          acc += kernel[k + radius] * horizontal[(yy * width + x) * 3 + c];
        }
        data[(y * width + x) * 3 + c] = Math.max(0, Math.min(255, Math.round(acc)));
      }
    }
  }
  return { width, height, data };
}

/** Blur only where the mask reads foreground; other pixels pass through. */
export function blurRegion(img: Raster, mask: GrayRaster, sigma: number): Raster {
  if (mask.width !== img.width || mask.height !== img.height) {
    throw new RangeError('mask dimensions do not match image');
  }
  const blurred = gaussianBlur(img, sigma);
  const data = img.data.slice();
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i] >= 128) {
      data[i * 3] = blurred.data[i * 3];
      data[i * 3 + 1] = blurred.data[i * 3 + 1];
      data[i * 3 + 2] = blurred.data[i * 3 + 2];
    }
  }
  return { width: img.width, height: img.height, data };
}
