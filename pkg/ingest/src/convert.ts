/**
 * Archive conversion: one WXG1 file per (variable, time) plus a JSON
 * manifest the diagnostics engine can load directly. Manifest entries
 * are sorted by (variable, time) so regeneration is deterministic.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join, relative } from 'node:path';

import { Archive } from './netcdf.js';
import { IngestSpec } from './spec.js';
import { encodeWxg } from './wxg.js';

export interface ManifestEntry {
  model: string;
  variable: string;
  init_time: string;
  lead_hours: number;
  path: string;
}

export function isoTime(t: Date): string {
  return t.toISOString().replace(/\.\d{3}Z$/, 'Z');
}

function timeTag(t: Date): string {
  return isoTime(t).replace(/[-:]/g, '').slice(0, 11).replace('T', '');
}

export function convertArchive(spec: IngestSpec): ManifestEntry[] {
  const fieldsDir = join(spec.outDir, 'fields');
  mkdirSync(fieldsDir, { recursive: true });
  const entries: ManifestEntry[] = [];
  for (const source of spec.sources) {
    const archive = new Archive(source);
    archive.times.forEach((time, ti) => {
      if (spec.timeRange && (time < spec.timeRange[0] || time > spec.timeRange[1])) {
        return;
      }
      for (const [sourceName, tag] of Object.entries(spec.variables)) {
        if (!archive.hasVariable(sourceName)) continue;
        const slice = archive.slice(sourceName, tag, ti, spec.levels[tag]);
        const name = `${tag}_${timeTag(time)}.wxg`;
        writeFileSync(join(fieldsDir, name), encodeWxg(slice));
        entries.push({
          model: spec.model,
          variable: tag,
          init_time: isoTime(time),
          lead_hours: 0,
          path: relative(spec.outDir, join(fieldsDir, name)),
        });
      }
    });
  }
  entries.sort((a, b) =>
    a.variable === b.variable
      ? a.init_time.localeCompare(b.init_time)
      : a.variable.localeCompare(b.variable));
  writeFileSync(join(spec.outDir, 'manifest.json'), JSON.stringify(entries, null, 1) + '\n');
  return entries;
}
