import assert from 'node:assert/strict';
import { describe, it } from 'node:test';

import type { Raster } from './png.js';
import {
  blurRegion,
  ellipseMask,
  fullFrameMask,
  gaussianBlur,
  maskCoverage,
} from './raster.js';

function prngBytes(n: number, seed: number): Uint8Array {
  const out = new Uint8Array(n);
  let s = seed >>> 0;
  for (let i = 0; i < n; i++) {
    s = (Math.imul(s, 1664525) + 1013904223) >>> 0;
    out[i] = s >>> 24;
  }
  return out;
}

function noise(width: number, height: number, seed: number): Raster {
  return { width, height, data: prngBytes(width * height * 3, seed) };
}

describe('ellipse mask', () => {
  it('covers roughly the requested fraction', () => {
    for (const coverage of [0.1, 0.25, 0.4]) {
      for (const [w, h] of [
        [64, 64],
        [128, 96],
      ]) {
        const got = maskCoverage(ellipseMask(w, h, coverage));
        assert.ok(
          Math.abs(got - coverage) < 0.03,
          `coverage ${coverage} at ${w}x${h}: got ${got}`,
        );
      }
    }
  });

  it('is centred and symmetric', () => {
    const m = ellipseMask(63, 41, 0.25);
    assert.equal(m.data[20 * 63 + 31], 255, 'centre pixel is foreground');
    assert.equal(m.data[0], 0, 'corner is background');
    for (let y = 0; y < 41; y++) {
      for (let x = 0; x < 63; x++) {
        const v = m.data[y * 63 + x];
        assert.equal(v, m.data[y * 63 + (62 - x)], 'horizontal mirror');
        assert.equal(v, m.data[(40 - y) * 63 + x], 'vertical mirror');
      }
    }
  });

  it('uses only the two mask levels', () => {
    const m = ellipseMask(32, 32, 0.3);
    for (const v of m.data) assert.ok(v === 0 || v === 255);
  });

  it('rejects out-of-range coverage', () => {
    for (const bad of [0, 1, -0.5, 1.5, Number.NaN]) {
      assert.throws(() => ellipseMask(16, 16, bad), RangeError);
    }
  });
});

describe('full-frame mask', () => {
  it('marks every pixel as foreground', () => {
    const m = fullFrameMask(17, 9);
    assert.equal(m.data.length, 17 * 9);
    for (const v of m.data) assert.equal(v, 255);
    assert.equal(maskCoverage(m), 1);
  });
});

describe('mask coverage', () => {
  it('counts values at or above the midpoint', () => {
    const m = { width: 4, height: 1, data: Uint8Array.from([0, 127, 128, 255]) };
    assert.equal(maskCoverage(m), 0.5);
  });
});

describe('gaussian blur', () => {
  it('leaves a constant image unchanged', () => {
    const img: Raster = { width: 12, height: 9, data: new Uint8Array(12 * 9 * 3).fill(137) };
    assert.deepEqual(gaussianBlur(img, 2.0).data, img.data);
  });

  it('spreads an impulse into its neighbourhood', () => {
    const width = 15;
    const height = 15;
    const data = new Uint8Array(width * height * 3);
    const centre = (7 * width + 7) * 3;
    data[centre] = data[centre + 1] = data[centre + 2] = 255;
    const out = gaussianBlur({ width, height, data }, 1.5);
    assert.ok(out.data[centre] < 255, 'peak attenuated');
    assert.ok(out.data[centre] > 0, 'peak not erased');
    const neighbour = (7 * width + 8) * 3;
    assert.ok(out.data[neighbour] > 0, 'energy spread to neighbour');
  });

  it('smooths noise more as sigma grows', () => {
    const img = noise(32, 32, 5);
    const variance = (r: Raster) => {
      let mean = 0;
      for (const v of r.data) mean += v;
      mean /= r.data.length;
      let acc = 0;
      for (const v of r.data) acc += (v - mean) ** 2;
      return acc / r.data.length;
    };
    const v0 = variance(img);
    const v1 = variance(gaussianBlur(img, 1.0));
    const v2 = variance(gaussianBlur(img, 2.5));
    assert.ok(v1 < v0, `sigma 1 reduces variance (${v1} vs ${v0})`);
    assert.ok(v2 < v1, `sigma 2.5 reduces it further (${v2} vs ${v1})`);
  });

  it('preserves dimensions', () => {
    const out = gaussianBlur(noise(10, 6, 8), 2.0);
    assert.equal(out.width, 10);
    assert.equal(out.height, 6);
    assert.equal(out.data.length, 10 * 6 * 3);
  });
});

describe('blur region', () => {
  it('changes only pixels inside the mask', () => {
    const img = noise(24, 24, 13);
    const mask = ellipseMask(24, 24, 0.25);
    const out = blurRegion(img, mask, 2.0);
    let changedInside = 0;
    for (let p = 0; p < 24 * 24; p++) {
      const same =
        out.data[3 * p] === img.data[3 * p] &&
        out.data[3 * p + 1] === img.data[3 * p + 1] &&
        out.data[3 * p + 2] === img.data[3 * p + 2];
      if (mask.data[p] >= 128) {
        if (!same) changedInside++;
      } else {
        assert.ok(same, `background pixel ${p} modified`);
      }
    }
    assert.ok(changedInside > 0, 'blur altered the masked region');
  });

  it('rejects a mask of the wrong size', () => {
    assert.throws(() => blurRegion(noise(8, 8, 1), fullFrameMask(8, 9), 1.0), RangeError);
  });
});
