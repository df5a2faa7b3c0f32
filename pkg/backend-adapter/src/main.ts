#!/usr/bin/env node
/**
 * Entry point: parse flags, then serve the line protocol on stdio.
 *
 * Usage:
 *   main.js [--answer TEXT x3] [--segment ellipse|fullframe]
 *           [--inpaint identity|blur] [--blur-sigma S]
 *           [--fault none|malformed|stall]
 */

import { parseConfig } from './config.js';
import { serve } from './server.js';

async function main(): Promise<void> {
  let config;
  try {
    config = parseConfig(process.argv.slice(2));
  } catch (err) {
    process.stderr.write(`backend-adapter: ${(err as Error).message}\n`);
    process.exit(2);
  }
  await serve(config);
}

main().catch((err) => {
  process.stderr.write(`backend-adapter: ${(err as Error).message}\n`);
  process.exit(1);
});
