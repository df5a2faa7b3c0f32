/**
 * Adapter configuration and command-line parsing.
 */

import { parseArgs } from 'node:util';

export type SegmentMode = 'ellipse' | 'fullframe';
export type InpaintMode = 'identity' | 'blur';
export type FaultMode = 'none' | 'malformed' | 'stall';

export interface AdapterConfig {
  /** Fixed answers for the three caption questions, in question order. */
  captionAnswers: [string, string, string];
  segmentMode: SegmentMode;
  inpaintMode: InpaintMode;
  blurSigma: number;
  /** Fault injection for protocol-failure testing of clients. */
  fault: FaultMode;
}

export const DEFAULT_ANSWERS: [string, string, string] = [
  'a rounded test object',
  'a plain flat backdrop',
  'simple synthetic style',
];

function oneOf<T extends string>(name: string, value: string, allowed: readonly T[]): T {
  if ((allowed as readonly string[]).includes(value)) return value as T;
  throw new RangeError(`--${name} must be one of ${allowed.join(', ')}, got '${value}'`);
}

export function parseConfig(argv: string[]): AdapterConfig {
  const { values } = parseArgs({
    args: argv,
    options: {
      answer: { type: 'string', multiple: true },
      segment: { type: 'string', default: 'ellipse' },
      inpaint: { type: 'string', default: 'identity' },
      'blur-sigma': { type: 'string', default: '2.0' },
      fault: { type: 'string', default: 'none' },
    },
  });
  const answers = values.answer ?? [];
  if (answers.length !== 0 && answers.length !== 3) {
    throw new RangeError(`--answer must be given exactly three times, got ${answers.length}`);
  }
  const blurSigma = Number(values['blur-sigma']);
  if (!Number.isFinite(blurSigma) || blurSigma <= 0) {
    throw new RangeError(`--blur-sigma must be a positive number, got '${values['blur-sigma']}'`);
  }
  return {
    captionAnswers:
      answers.length === 3 ? [answers[0], answers[1], answers[2]] : DEFAULT_ANSWERS,
    segmentMode: oneOf('segment', values.segment as string, ['ellipse', 'fullframe'] as const),
    inpaintMode: oneOf('inpaint', values.inpaint as string, ['identity', 'blur'] as const),
    blurSigma,
    fault: oneOf('fault', values.fault as string, ['none', 'malformed', 'stall'] as const),
  };
}
