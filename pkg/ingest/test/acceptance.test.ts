/**
 * Acceptance (ingest round-trip): WXG1 write/read byte-identical; a
 * synthetic NetCDF-style archive converts with value error <= 1e-12 and
 * correct latitude re-ordering; the climatology sigma floor applies
 * (constant temperature archive -> sigma = 0.5 K).
 */

import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { buildClimatology } from '../src/climatology.js';
import { convertArchive } from '../src/convert.js';
import { parseSpec } from '../src/spec.js';
import { decodeWxg, encodeWxg, readWxg, writeWxg } from '../src/wxg.js';
import { encodeNetcdf3, NcSpec } from './netcdf3-writer.js';

const NLAT = 4;
const NLON = 5;

function syntheticArchive(): { spec: NcSpec; expected: (t: number, k: number) => number } {
  const expected = (t: number, k: number) => 280 + 3 * t + 0.125 * k;
  const times = [0, 24, 8760, 8784]; // spans two calendar years
  const data: number[] = [];
  for (let t = 0; t < times.length; t++) {
    for (let k = 0; k < NLAT * NLON; k++) data.push(expected(t, k));
  }
  return {
    expected,
    spec: {
      dims: [
        { name: 'time', size: times.length },
        { name: 'lat', size: NLAT },
        { name: 'lon', size: NLON },
      ],
      vars: [
        { name: 'time', dims: [0], type: 'double', data: times,
          attrs: { units: 'hours since 2001-01-01 00:00:00' } },
        // descending on purpose: the converter must re-order
        { name: 'lat', dims: [1], type: 'double', data: [45, 15, -15, -45],
          attrs: { units: 'degrees_north' } },
        { name: 'lon', dims: [2], type: 'double', data: [0, 72, 144, 216, 288],
          attrs: { units: 'degrees_east' } },
        { name: 't2m', dims: [0, 1, 2], type: 'double', data,
          attrs: { units: 'K' } },
      ],
    },
  };
}

describe('acceptance: ingest round-trip', () => {
  it('WXG1 write/read is byte-identical', () => {
    const dir = mkdtempSync(join(tmpdir(), 'acc-'));
    const field = {
      lats: Float64Array.from([-45, -15, 15, 45]),
      lons: Float64Array.from([0, 72, 144, 216, 288]),
      values: Float64Array.from({ length: 20 }, (_, k) => Math.exp(Math.sin(k))),
    };
    const p1 = join(dir, 'a.wxg');
    const p2 = join(dir, 'b.wxg');
    writeWxg(p1, field);
    writeWxg(p2, readWxg(p1));
    expect(readFileSync(p1).equals(readFileSync(p2))).toBe(true);
    console.log('ACCEPTANCE 12a: PASS - WXG1 write/read byte-identical');
  });

  it('synthetic archive converts exactly with latitude re-ordering', () => {
    const dir = mkdtempSync(join(tmpdir(), 'acc-'));
    const { spec: arch, expected } = syntheticArchive();
    writeFileSync(join(dir, 'arch.nc'), encodeNetcdf3(arch));
    const spec = parseSpec({
      sources: [join(dir, 'arch.nc')],
      variables: { t2m: 't2m' },
      out_dir: join(dir, 'out'),
    });
    const entries = convertArchive(spec);
    expect(entries).toHaveLength(4);
    let worst = 0;
    entries.forEach((entry, t) => {
      const field = readWxg(join(dir, 'out', entry.path));
      expect(field.lats[0]).toBe(-45); // ascending after conversion
      for (let i = 0; i < NLAT; i++) {
        for (let j = 0; j < NLON; j++) {
          // row i here came from source row (NLAT-1-i)
          const k = (NLAT - 1 - i) * NLON + j;
          const err = Math.abs(field.values[i * NLON + j] - expected(t, k));
          worst = Math.max(worst, err);
        }
      }
    });
    expect(worst).toBeLessThanOrEqual(1e-12);
    console.log(`ACCEPTANCE 12b: PASS - conversion exact (worst error ${worst}) with re-ordered latitudes`);
  });

  it('constant archive builds a climatology at the 0.5 K sigma floor', () => {
    const dir = mkdtempSync(join(tmpdir(), 'acc-'));
    const times: number[] = [];
    const data: number[] = [];
    for (let d = 0; d < 730; d++) {
      times.push(d * 24);
      for (let k = 0; k < NLAT * NLON; k++) data.push(284.0);
    }
    const arch: NcSpec = {
      dims: [
        { name: 'time', size: times.length },
        { name: 'lat', size: NLAT },
        { name: 'lon', size: NLON },
      ],
      vars: [
        { name: 'time', dims: [0], type: 'double', data: times,
          attrs: { units: 'hours since 2001-01-01 00:00:00' } },
        { name: 'lat', dims: [1], type: 'double', data: [-45, -15, 15, 45] },
        { name: 'lon', dims: [2], type: 'double', data: [0, 72, 144, 216, 288] },
        { name: 't2m', dims: [0, 1, 2], type: 'double', data,
          attrs: { units: 'K' } },
      ],
    };
    writeFileSync(join(dir, 'hist.nc'), encodeNetcdf3(arch));
    const spec = parseSpec({
      sources: [join(dir, 'hist.nc')],
      variables: { t2m: 't2m' },
      out_dir: join(dir, 'out'),
    });
    const [sidecarPath] = buildClimatology(spec);
    const sidecar = JSON.parse(readFileSync(sidecarPath, 'utf8'));
    expect(sidecar.sigma_floor).toBe(0.5);
    expect(sidecar.entries).toHaveLength(366);
    const entry = sidecar.entries.find((e: any) => e.doy === 200);
    const sigma = decodeWxg(readFileSync(join(sidecarPath, '..', entry.sigma)));
    for (const x of sigma.values) expect(x).toBe(0.5);
    const mu = decodeWxg(readFileSync(join(sidecarPath, '..', entry.mu)));
    for (const x of mu.values) expect(x).toBe(284.0);
    console.log('ACCEPTANCE 12c: PASS - constant archive climatology floored at sigma = 0.5 K');
  });
});
