#!/usr/bin/env node
/** wxdiag-ingest: convert NetCDF archives to WXG1, build climatologies. */

import { buildClimatology } from './climatology.js';
import { convertArchive } from './convert.js';
import { IngestError, parseSpecFile } from './spec.js';
import { ConversionError } from './units.js';

function usage(): never {
  console.error('usage: wxdiag-ingest <convert|clim> --spec spec.json');
  process.exit(2);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command || !['convert', 'clim'].includes(command)) usage();
  const specIdx = rest.indexOf('--spec');
  if (specIdx < 0 || !rest[specIdx + 1]) usage();
  try {
    const spec = parseSpecFile(rest[specIdx + 1]);
    if (command === 'convert') {
      const entries = convertArchive(spec);
      console.log(`wrote ${entries.length} fields + manifest to ${spec.outDir}`);
    } else {
      const sidecars = buildClimatology(spec);
      for (const s of sidecars) console.log(`wrote ${s}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof IngestError || err instanceof ConversionError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split('/').pop() as string);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
