/**
 * Minimal PNG codec for the stage adapter.
 *
 * Decodes 8-bit greyscale/RGB images with or without alpha (colour
 * types 0, 2, 4, 6), all five scanline filters, non-interlaced only —
 * enough to read anything a stock encoder produces at 8-bit depth.
 * Encodes filter-0 scanlines in a single IDAT chunk.
 */

import { crc32, deflateSync, inflateSync } from 'node:zlib';

export class PngError extends Error {}

export interface Raster {
  width: number;
  height: number;
  /** Interleaved RGB, 3 bytes per pixel, row-major. */
  data: Uint8Array;
}

export interface GrayRaster {
  width: number;
  height: number;
  /** One byte per pixel, row-major. */
  data: Uint8Array;
}

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CHANNELS: Record<number, number> = { 0: 1, 2: 3, 4: 2, 6: 4 };

interface Header {
  width: number;
  height: number;
  colorType: number;
  channels: number;
}

function parseChunks(buf: Buffer): { header: Header; idat: Buffer } {
  if (buf.length < 8 || !buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new PngError('not a PNG: bad signature');
  }
  let header: Header | null = null;
  const idatParts: Buffer[] = [];
  let off = 8;
  while (off + 12 <= buf.length) {
    const length = buf.readUInt32BE(off);
    const type = buf.toString('latin1', off + 4, off + 8);
    const end = off + 8 + length;
    if (end + 4 > buf.length) {
      throw new PngError(`truncated ${type} chunk`);
    }
    const data = buf.subarray(off + 8, end);
    if (type === 'IHDR') {
      if (data.length !== 13) throw new PngError('bad IHDR length');
      const bitDepth = data[8];
      const colorType = data[9];
      if (bitDepth !== 8) throw new PngError(`unsupported bit depth ${bitDepth}`);
      if (!(colorType in CHANNELS)) {
        throw new PngError(`unsupported colour type ${colorType}`);
      }
      if (data[10] !== 0 || data[11] !== 0) {
        throw new PngError('unsupported compression or filter method');
      }
      if (data[12] !== 0) throw new PngError('interlaced PNG not supported');
      header = {
        width: data.readUInt32BE(0),
        height: data.readUInt32BE(4),
        colorType,
        channels: CHANNELS[colorType],
      };
      if (header.width < 1 || header.height < 1) {
        throw new PngError('empty image');
      }
    } else if (type === 'IDAT') {
      idatParts.push(data);
    } else if (type === 'IEND') {
      break;
    }
    off = end + 4; // chunk CRC is not verified on read
  }
  if (!header) throw new PngError('missing IHDR');
  if (idatParts.length === 0) throw new PngError('missing IDAT');
  return { header, idat: Buffer.concat(idatParts) };
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Buffer, header: Header): Uint8Array {
  const { width, height, channels } = header;
  const stride = width * channels;
  if (raw.length !== height * (stride + 1)) {
    throw new PngError('decompressed data does not match dimensions');
  }
  const out = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const rowIn = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const rowOut = y * stride;
    const prevOut = rowOut - stride;
    for (let x = 0; x < stride; x++) {
      const left = x >= channels ? out[rowOut + x - channels] : 0;
      const up = y > 0 ? out[prevOut + x] : 0;
      const upLeft = y > 0 && x >= channels ? out[prevOut + x - channels] : 0;
      let value = rowIn[x];
      switch (filter) {
        case 0:
          break;
        case 1:
          value += left;
          break;
        case 2:
          value += up;
          break;
        case 3:
          value += (left + up) >> 1;
          break;
        case 4:
          value += paeth(left, up, upLeft);
          break;
        default:
          throw new PngError(`unknown scanline filter ${filter}`);
      }
      out[rowOut + x] = value & 0xff;
    }
  }
  return out;
}

function decodePixels(buf: Buffer): { header: Header; pixels: Uint8Array } {
  const { header, idat } = parseChunks(buf);
  let raw: Buffer;
  try {
    raw = inflateSync(idat);
  } catch (err) {
    throw new PngError(`bad IDAT stream: ${(err as Error).message}`);
  }
  return { header, pixels: unfilter(raw, header) };
}

/** Decode to interleaved RGB, dropping alpha and replicating grey. */
export function decodePng(buf: Buffer): Raster {
  const { header, pixels } = decodePixels(buf);
  const { width, height, channels } = header;
  const data = new Uint8Array(width * height * 3);
  for (let i = 0, o = 0; i < pixels.length; i += channels, o += 3) {
    if (channels <= 2) {
      data[o] = data[o + 1] = data[o + 2] = pixels[i];
    } else {
      data[o] = pixels[i];
      data[o + 1] = pixels[i + 1];
      data[o + 2] = pixels[i + 2];
    }
  }
  return { width, height, data };
}

/** Decode to one grey byte per pixel (Rec. 601 luma for colour input). */
export function decodeGrayPng(buf: Buffer): GrayRaster {
  const { header, pixels } = decodePixels(buf);
  const { width, height, channels } = header;
  const data = new Uint8Array(width * height);
  for (let i = 0, o = 0; i < pixels.length; i += channels, o++) {
    if (channels <= 2) {
      data[o] = pixels[i];
    } else {
      data[o] = Math.round(
        0.299 * pixels[i] + 0.587 * pixels[i + 1] + 0.114 * pixels[i + 2],
      );
    }
  }
  return { width, height, data };
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, 'latin1');
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(data, crc32(head.subarray(4))) >>> 0, 0);
  return Buffer.concat([head, data, crc]);
}

function encode(
  width: number,
  height: number,
  channels: number,
  colorType: number,
  pixels: Uint8Array,
): Buffer {
  if (pixels.length !== width * height * channels) {
    throw new PngError('pixel buffer does not match dimensions');
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = colorType;
  const stride = width * channels;
  const raw = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    raw[y * (stride + 1)] = 0; // filter: none
    raw.set(pixels.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
  }
  return Buffer.concat([
    SIGNATURE,
    chunk('IHDR', ihdr),
    chunk('IDAT', deflateSync(raw)),
    chunk('IEND', Buffer.alloc(0)),
  ]);
}

export function encodePng(img: Raster): Buffer {
  return encode(img.width, img.height, 3, 2, img.data);
}

export function encodeGrayPng(img: GrayRaster): Buffer {
  return encode(img.width, img.height, 1, 0, img.data);
}
