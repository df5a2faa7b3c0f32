import assert from 'node:assert/strict';
import { describe, it } from 'node:test';

import { DEFAULT_ANSWERS, parseConfig } from './config.js';

describe('config parsing', () => {
  it('uses documented defaults with no flags', () => {
    const cfg = parseConfig([]);
    assert.deepEqual(cfg.captionAnswers, DEFAULT_ANSWERS);
    assert.equal(cfg.segmentMode, 'ellipse');
    assert.equal(cfg.inpaintMode, 'identity');
    assert.equal(cfg.blurSigma, 2.0);
    assert.equal(cfg.fault, 'none');
  });

  it('takes three caption answers in order', () => {
    const cfg = parseConfig(['--answer', 'one', '--answer', 'two', '--answer', 'three']);
    assert.deepEqual(cfg.captionAnswers, ['one', 'two', 'three']);
  });

  it('rejects a partial answer set', () => {
    assert.throws(() => parseConfig(['--answer', 'only']), RangeError);
    assert.throws(() => parseConfig(['--answer', 'a', '--answer', 'b']), RangeError);
  });

  it('selects segment and inpaint modes', () => {
    const cfg = parseConfig(['--segment', 'fullframe', '--inpaint', 'blur']);
    assert.equal(cfg.segmentMode, 'fullframe');
    assert.equal(cfg.inpaintMode, 'blur');
  });

  it('accepts = style flags', () => {
    assert.equal(parseConfig(['--inpaint=blur']).inpaintMode, 'blur');
  });

  it('rejects unknown mode names', () => {
    assert.throws(() => parseConfig(['--segment', 'banana']), RangeError);
    assert.throws(() => parseConfig(['--inpaint', 'banana']), RangeError);
    assert.throws(() => parseConfig(['--fault', 'banana']), RangeError);
  });

  it('parses the blur sigma', () => {
    assert.equal(parseConfig(['--blur-sigma', '3.5']).blurSigma, 3.5);
  });

  it('rejects non-positive or non-numeric sigma', () => {
    for (const bad of ['0', '-1', 'abc', 'Infinity']) {
      assert.throws(() => parseConfig([`--blur-sigma=${bad}`]), RangeError, bad);
    }
  });

  it('accepts the fault modes', () => {
    assert.equal(parseConfig(['--fault', 'malformed']).fault, 'malformed');
    assert.equal(parseConfig(['--fault', 'stall']).fault, 'stall');
  });

  it('rejects unknown flags', () => {
    assert.throws(() => parseConfig(['--what']));
  });
});
