/**
 * Stdio request loop for the stage-backend line protocol.
 *
 * One JSON object per input line; exactly one output line per input
 * line, in order.  Requests carry {id, stage, prompt, params, image?}
 * with images and masks as base64 PNG; responses echo the id and set
 * {ok, text|mask|image} or {ok: false, error}.  The first exchange is a
 * "hello" handshake answered with protocol version "1".
 *
 * Bad input of any kind — unparseable lines, unknown stages, missing or
 * undecodable payloads — produces an {ok: false} response, never a
 * crash.
 */

import { createInterface } from 'node:readline';

import type { AdapterConfig } from './config.js';
import {
  decodeGrayPng,
  decodePng,
  encodeGrayPng,
  encodePng,
  type GrayRaster,
  type Raster,
} from './png.js';
import { blurRegion, ellipseMask, fullFrameMask } from './raster.js';

export const PROTOCOL_VERSION = '1';

/**
 * The pluggable stage implementations.  The bundled ones are trivial;
 * replace any of these to wire a real captioner/segmenter/inpainter
 * while keeping the protocol handling.
 */
export interface Stages {
  caption(image: Raster, questionIndex: number): string;
  segment(image: Raster): GrayRaster;
  summarize(prompt: string): string;
  /** Returns the base64 PNG payload for the response. */
  inpaint(image: Raster, imagePayload: string, mask: GrayRaster, prompt: string): string;
}

export function trivialStages(config: AdapterConfig): Stages {
  return {
    caption: (_image, questionIndex) => config.captionAnswers[questionIndex - 1],
    segment: (image) =>
      config.segmentMode === 'fullframe'
        ? fullFrameMask(image.width, image.height)
        : ellipseMask(image.width, image.height, 0.25),
    summarize: (prompt) => prompt,
    inpaint: (image, imagePayload, mask, _prompt) =>
      config.inpaintMode === 'identity'
        ? imagePayload
        : encodePng(blurRegion(image, mask, config.blurSigma)).toString('base64'),
  };
}

interface Request {
  id: unknown;
  stage: string;
  prompt: string;
  params: Record<string, unknown>;
  image?: string;
}

class RequestError extends Error {}

function parseRequest(raw: unknown): Request {
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new RequestError('request is not an object');
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.stage !== 'string') {
    throw new RequestError('request lacks a stage field');
  }
  const params =
    typeof obj.params === 'object' && obj.params !== null && !Array.isArray(obj.params)
      ? (obj.params as Record<string, unknown>)
      : {};
  return {
    id: 'id' in obj ? obj.id : null,
    stage: obj.stage,
    prompt: typeof obj.prompt === 'string' ? obj.prompt : '',
    params,
    image: typeof obj.image === 'string' ? obj.image : undefined,
  };
}

function requireImage(req: Request): { raster: Raster; payload: string } {
  if (req.image === undefined) {
    throw new RequestError(`${req.stage} request lacks an image`);
  }
  try {
    // Invalid base64 decays to garbage bytes, which the PNG signature
    // check then rejects.
    return { raster: decodePng(Buffer.from(req.image, 'base64')), payload: req.image };
  } catch (err) {
    throw new RequestError(`undecodable image: ${(err as Error).message}`);
  }
}

function requireMask(req: Request, image: Raster): GrayRaster {
  const payload = req.params.mask;
  if (typeof payload !== 'string') {
    throw new RequestError('inpaint request lacks a params.mask field');
  }
  let mask: GrayRaster;
  try {
    mask = decodeGrayPng(Buffer.from(payload, 'base64'));
  } catch (err) {
    throw new RequestError(`undecodable mask: ${(err as Error).message}`);
  }
  if (mask.width !== image.width || mask.height !== image.height) {
    throw new RequestError('mask dimensions do not match image');
  }
  return mask;
}

function questionIndex(req: Request): number {
  const raw = req.params.question_index;
  if (raw !== '1' && raw !== '2' && raw !== '3') {
    throw new RequestError(
      `caption request needs params.question_index in 1..3, got ${JSON.stringify(raw)}`,
    );
  }
  return Number(raw);
}

function respond(id: unknown, body: Record<string, unknown>): string {
  return JSON.stringify({ id: id ?? null, ok: true, ...body });
}

function fail(id: unknown, error: string): string {
  return JSON.stringify({ id: id ?? null, ok: false, error });
}

/**
 * Handle one request line.  Returns the response line without trailing
 * newline, a raw non-JSON line in fault=malformed mode, or null in
 * fault=stall mode (no response at all).
 */
export function handleLine(line: string, config: AdapterConfig, stages: Stages): string | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return fail(null, 'request line is not valid JSON');
  }
  let req: Request;
  try {
    req = parseRequest(raw);
  } catch (err) {
    const id = typeof raw === 'object' && raw !== null ? (raw as { id?: unknown }).id : null;
    return fail(id, (err as Error).message);
  }
  if (req.stage === 'hello') {
    return respond(req.id, { text: PROTOCOL_VERSION });
  }
  if (config.fault === 'malformed') {
    return 'this line is deliberately not JSON';
  }
  if (config.fault === 'stall') {
    return null;
  }
  try {
    switch (req.stage) {
      case 'caption': {
        const { raster } = requireImage(req);
        return respond(req.id, { text: stages.caption(raster, questionIndex(req)) });
      }
      case 'segment': {
        const { raster } = requireImage(req);
        const mask = stages.segment(raster);
        return respond(req.id, {
          mask: Buffer.from(encodeGrayPng(mask)).toString('base64'),
        });
      }
      case 'summarize':
        return respond(req.id, { text: stages.summarize(req.prompt) });
      case 'inpaint': {
        const { raster, payload } = requireImage(req);
        const mask = requireMask(req, raster);
        return respond(req.id, {
          image: stages.inpaint(raster, payload, mask, req.prompt),
        });
      }
      default:
        return fail(req.id, `unknown stage '${req.stage}'`);
    }
  } catch (err) {
    return fail(req.id, (err as Error).message);
  }
}

/** Run the request loop over stdin/stdout until stdin closes. */
export async function serve(config: AdapterConfig, stages?: Stages): Promise<void> {
  const impl = stages ?? trivialStages(config);
  const rl = createInterface({ input: process.stdin });
  for await (const line of rl) {
    if (!line.trim()) continue;
    const response = handleLine(line, config, impl);
    if (response !== null) {
      process.stdout.write(response + '\n');
    }
  }
}
