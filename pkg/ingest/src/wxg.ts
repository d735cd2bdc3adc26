/**
 * WXG1 binary grid files.
 *
 * Layout: magic "WXG1", little-endian u32 nlat, u32 nlon,
 * f64 lats[nlat] (degrees), f64 lons[nlon] (degrees),
 * f64 values[nlat*nlon] row-major (lat-major).
 */

import { readFileSync, writeFileSync } from 'node:fs';

const MAGIC = 'WXG1';
const HEADER_BYTES = 12;

export interface GridField {
  lats: Float64Array; // ascending
  lons: Float64Array;
  values: Float64Array; // row-major, lats[0] first
}

export function encodeWxg(field: GridField): Buffer {
  const { lats, lons, values } = field;
  if (values.length !== lats.length * lons.length) {
    throw new Error(
      `values length ${values.length} != nlat*nlon ${lats.length * lons.length}`,
    );
  }
  const buf = Buffer.alloc(HEADER_BYTES + 8 * (lats.length + lons.length + values.length));
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt32LE(lats.length, 4);
  buf.writeUInt32LE(lons.length, 8);
  let off = HEADER_BYTES;
  for (const arr of [lats, lons, values]) {
    for (const x of arr) {
      buf.writeDoubleLE(x, off);
      off += 8;
    }
  }
  return buf;
}

export function decodeWxg(buf: Buffer): GridField {
  if (buf.length < HEADER_BYTES || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('not a WXG1 file');
  }
  const nlat = buf.readUInt32LE(4);
  const nlon = buf.readUInt32LE(8);
  const expected = HEADER_BYTES + 8 * (nlat + nlon + nlat * nlon);
  if (buf.length !== expected) {
    throw new Error(`truncated WXG1 file (${buf.length} != ${expected} bytes)`);
  }
  const readDoubles = (offset: number, count: number): Float64Array => {
    const out = new Float64Array(count);
    for (let i = 0; i < count; i++) out[i] = buf.readDoubleLE(offset + 8 * i);
    return out;
  };
  let lats = readDoubles(HEADER_BYTES, nlat);
  const lons = readDoubles(HEADER_BYTES + 8 * nlat, nlon);
  let values = readDoubles(HEADER_BYTES + 8 * (nlat + nlon), nlat * nlon);
  if (nlat >= 2 && lats[0] > lats[nlat - 1]) {
    ({ lats, values } = flipLatitudes(lats, lons.length, values));
  }
  return { lats, lons, values };
}

/** Reverse latitude order, re-rowing values to match. */
export function flipLatitudes(
  lats: Float64Array,
  nlon: number,
  values: Float64Array,
): { lats: Float64Array; values: Float64Array } {
  const nlat = lats.length;
  const outLats = new Float64Array(nlat);
  const outValues = new Float64Array(values.length);
  for (let i = 0; i < nlat; i++) {
    outLats[i] = lats[nlat - 1 - i];
    outValues.set(values.subarray((nlat - 1 - i) * nlon, (nlat - i) * nlon), i * nlon);
  }
  return { lats: outLats, values: outValues };
}

export function writeWxg(path: string, field: GridField): void {
  writeFileSync(path, encodeWxg(field));
}

export function readWxg(path: string): GridField {
  return decodeWxg(readFileSync(path));
}
