/**
 * Day-of-year climatology builder.
 *
 * For each (DOY, hour-of-day) slot, mu and sigma pool every archive
 * sample whose DOY falls within the wrapping window [d-7, d+7] at that
 * hour; sigma uses the n-1 denominator and is floored at 0.5 K for
 * temperature variables. Dates map onto a leap calendar (Feb 29 = slot
 * 60) so years align; the Feb-29 slot fills via window pooling.
 *
 * Output: per-(DOY, hour) mu/sigma WXG1 files plus a JSON sidecar index
 * in the layout the diagnostics engine reads.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import { Archive, ArchiveSlice } from './netcdf.js';
import { IngestError, IngestSpec } from './spec.js';
import { isTemperature } from './units.js';
import { encodeWxg } from './wxg.js';

export const DOY_SLOTS = 366;
export const TEMPERATURE_SIGMA_FLOOR_K = 0.5;

const CUM_DAYS = [0, 31, 60, 91, 121, 152, 182, 213, 244, 274, 305, 335];

/** (month, day) -> 1..366 on the leap calendar, Feb 29 = 60. */
export function dayOfYear366(t: Date): number {
  return CUM_DAYS[t.getUTCMonth()] + t.getUTCDate();
}

interface SlotAccumulator {
  count: number[];
  sum: Float64Array[];
  sumSq: Float64Array[];
}

export function buildClimatology(spec: IngestSpec): string[] {
  const sidecars: string[] = [];
  for (const tag of new Set(Object.values(spec.variables))) {
    sidecars.push(buildVariable(spec, tag));
  }
  return sidecars;
}

function buildVariable(spec: IngestSpec, tag: string): string {
  const sourceNames = Object.entries(spec.variables)
    .filter(([, t]) => t === tag)
    .map(([name]) => name);
  const half = Math.floor(spec.windowDays / 2);
  const byHour = new Map<number, SlotAccumulator>();
  const years = new Set<number>();
  let grid: ArchiveSlice | null = null;

  for (const source of spec.sources) {
    const archive = new Archive(source);
    archive.times.forEach((time, ti) => {
      if (spec.timeRange && (time < spec.timeRange[0] || time > spec.timeRange[1])) {
        return;
      }
      for (const name of sourceNames) {
        if (!archive.hasVariable(name)) continue;
        const slice = archive.slice(name, tag, ti, spec.levels[tag]);
        years.add(time.getUTCFullYear());
        grid = grid ?? slice;
        const hour = time.getUTCHours();
        let acc = byHour.get(hour);
        if (!acc) {
          const n = slice.values.length;
          acc = {
            count: new Array(DOY_SLOTS).fill(0),
            sum: Array.from({ length: DOY_SLOTS }, () => new Float64Array(n)),
            sumSq: Array.from({ length: DOY_SLOTS }, () => new Float64Array(n)),
          };
          byHour.set(hour, acc);
        }
        const slot = dayOfYear366(time) - 1;
        acc.count[slot] += 1;
        for (let i = 0; i < slice.values.length; i++) {
          const x = slice.values[i];
          acc.sum[slot][i] += x;
          acc.sumSq[slot][i] += x * x;
        }
      }
    });
  }
  if (!grid) throw new IngestError(`no samples found for ${tag}`);
  if (years.size < 2) {
    throw new IngestError(`climatology for ${tag} needs >= 2 years, got ${years.size}`);
  }

  const floor = isTemperature(tag) ? TEMPERATURE_SIGMA_FLOOR_K : 0.0;
  const outDir = join(spec.outDir, 'climatology');
  mkdirSync(outDir, { recursive: true });
  const nPoints = (grid as ArchiveSlice).values.length;
  const entries: { doy: number; hour: number; mu: string; sigma: string }[] = [];

  for (const [hour, acc] of [...byHour.entries()].sort((a, b) => a[0] - b[0])) {
    for (let slot = 0; slot < DOY_SLOTS; slot++) {
      let n = 0;
      const sum = new Float64Array(nPoints);
      const sumSq = new Float64Array(nPoints);
      for (let off = -half; off <= half; off++) {
        const s = ((slot + off) % DOY_SLOTS + DOY_SLOTS) % DOY_SLOTS;
        n += acc.count[s];
        for (let i = 0; i < nPoints; i++) {
          sum[i] += acc.sum[s][i];
          sumSq[i] += acc.sumSq[s][i];
        }
      }
      if (n < 2) {
        throw new IngestError(
          `DOY ${slot + 1} window has ${n} sample(s) at hour ${hour} for ${tag}`);
      }
      const mu = new Float64Array(nPoints);
      const sigma = new Float64Array(nPoints);
      for (let i = 0; i < nPoints; i++) {
        mu[i] = sum[i] / n;
        const variance = Math.max(sumSq[i] - n * mu[i] * mu[i], 0) / (n - 1);
        sigma[i] = Math.max(Math.sqrt(variance), floor);
      }
      const doy = slot + 1;
      const hh = String(hour).padStart(2, '0');
      const muName = `${tag}_d${String(doy).padStart(3, '0')}_h${hh}_mu.wxg`;
      const sgName = `${tag}_d${String(doy).padStart(3, '0')}_h${hh}_sigma.wxg`;
      const base = { lats: (grid as ArchiveSlice).lats, lons: (grid as ArchiveSlice).lons };
      writeFileSync(join(outDir, muName), encodeWxg({ ...base, values: mu }));
      writeFileSync(join(outDir, sgName), encodeWxg({ ...base, values: sigma }));
      entries.push({ doy, hour, mu: muName, sigma: sgName });
    }
  }

  const sidecar = join(outDir, `${tag}_climatology.json`);
  writeFileSync(sidecar, JSON.stringify({
    variable: tag,
    sigma_floor: floor,
    kind: 'per_doy',
    entries,
  }, null, 1) + '\n');
  return sidecar;
}
