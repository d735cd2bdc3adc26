/**
 * Ingest job specification: which archives to read, how source variable
 * names map to canonical tags, optional pressure-level selection and
 * time range, and where the WXG1 output goes.
 */

import { readFileSync } from 'node:fs';
import { dirname, isAbsolute, resolve } from 'node:path';

export class IngestError extends Error {}

const TAG_PATTERN = /^(z|t|u|v|q)(2m|\d{3})$/;

export interface IngestSpec {
  sources: string[];
  /** source variable name -> canonical tag (z500, t2m, u500, ...) */
  variables: Record<string, string>;
  /** canonical tag -> pressure level to select, for 4D source variables */
  levels: Record<string, number>;
  /** inclusive ISO-8601 time range filter */
  timeRange?: [Date, Date];
  outDir: string;
  model: string;
  windowDays: number;
}

export function validateTag(tag: string): string {
  if (!TAG_PATTERN.test(tag)) {
    throw new IngestError(`'${tag}' is not a canonical variable tag (like z500, t2m, q700)`);
  }
  return tag;
}

export function parseSpecFile(path: string): IngestSpec {
  let raw: any;
  try {
    raw = JSON.parse(readFileSync(path, 'utf8'));
  } catch (err) {
    throw new IngestError(`cannot read spec ${path}: ${(err as Error).message}`);
  }
  return parseSpec(raw, dirname(path));
}

export function parseSpec(raw: any, baseDir = '.'): IngestSpec {
  if (!raw || typeof raw !== 'object') throw new IngestError('spec must be a JSON object');
  if (!Array.isArray(raw.sources) || raw.sources.length === 0) {
    throw new IngestError('spec.sources must be a non-empty list of paths');
  }
  if (!raw.variables || typeof raw.variables !== 'object') {
    throw new IngestError('spec.variables must map source names to canonical tags');
  }
  const respath = (p: string) => (isAbsolute(p) ? p : resolve(baseDir, p));
  const variables: Record<string, string> = {};
  for (const [src, tag] of Object.entries(raw.variables)) {
    variables[src] = validateTag(String(tag));
  }
  let timeRange: [Date, Date] | undefined;
  if (raw.time_range) {
    const [a, b] = raw.time_range;
    timeRange = [new Date(a), new Date(b)];
    if (Number.isNaN(+timeRange[0]) || Number.isNaN(+timeRange[1])) {
      throw new IngestError(`bad time_range ${JSON.stringify(raw.time_range)}`);
    }
  }
  return {
    sources: raw.sources.map((p: string) => respath(p)),
    variables,
    levels: Object.fromEntries(
      Object.entries(raw.levels ?? {}).map(([k, v]) => [k, Number(v)]),
    ),
    timeRange,
    outDir: respath(raw.out_dir ?? 'wxg_out'),
    model: String(raw.model ?? 'era5'),
    windowDays: Number(raw.window_days ?? 15),
  };
}
