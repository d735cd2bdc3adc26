/**
 * NetCDF-3 archive access on top of netcdfjs: coordinate discovery,
 * time decoding, and per-timestep slices of mapped variables with unit
 * conversion and ascending-latitude normalization.
 */

import { readFileSync } from 'node:fs';
import { NetCDFReader } from 'netcdfjs';

import { IngestError } from './spec.js';
import { ConversionError, conversion } from './units.js';
import { flipLatitudes } from './wxg.js';

const LAT_NAMES = ['lat', 'latitude'];
const LON_NAMES = ['lon', 'longitude'];
const TIME_NAMES = ['time', 'valid_time'];
const LEVEL_NAMES = ['level', 'plev', 'pressure_level', 'isobaricInhPa'];

export interface ArchiveSlice {
  tag: string;
  time: Date;
  lats: Float64Array;
  lons: Float64Array;
  values: Float64Array;
}

interface Coord {
  name: string;
  index: number;
  values: number[];
}

export class Archive {
  private reader: any;
  readonly path: string;
  private coords: { time: Coord; lat: Coord; lon: Coord; level?: Coord };
  readonly times: Date[];

  constructor(path: string) {
    this.path = path;
    this.reader = new NetCDFReader(readFileSync(path));
    const time = this.findCoord(TIME_NAMES, true)!;
    const lat = this.findCoord(LAT_NAMES, true)!;
    const lon = this.findCoord(LON_NAMES, true)!;
    const level = this.findCoord(LEVEL_NAMES, false);
    this.coords = { time, lat, lon, level: level ?? undefined };
    this.times = decodeTimes(time.values, this.attribute(time.name, 'units'));
  }

  private findCoord(names: string[], required: boolean): Coord | null {
    for (const name of names) {
      const dim = this.reader.dimensions.findIndex((d: any) => d.name === name);
      const variable = this.reader.variables.find((v: any) => v.name === name);
      if (dim >= 0 && variable) {
        return { name, index: dim, values: this.reader.getDataVariable(name) as number[] };
      }
    }
    if (required) {
      throw new IngestError(`${this.path}: no coordinate among [${names.join(', ')}]`);
    }
    return null;
  }

  private attribute(varName: string, attName: string): string {
    const v = this.reader.variables.find((x: any) => x.name === varName);
    const att = v?.attributes?.find((a: any) => a.name === attName);
    return att ? String(att.value) : '';
  }

  hasVariable(name: string): boolean {
    return this.reader.variables.some((v: any) => v.name === name);
  }

  /**
   * One (lat, lon) slice of a mapped variable at a time index, in
   * canonical units with ascending latitudes. 4D variables need a level
   * pick; levels are matched exactly against the level coordinate.
   */
  slice(sourceName: string, tag: string, timeIndex: number, level?: number): ArchiveSlice {
    const v = this.reader.variables.find((x: any) => x.name === sourceName);
    if (!v) throw new IngestError(`${this.path}: variable '${sourceName}' not found`);
    const dims: number[] = v.dimensions;
    const { time, lat, lon, level: lev } = this.coords;
    const nlat = lat.values.length;
    const nlon = lon.values.length;
    const data = this.reader.getDataVariable(sourceName) as number[];
    const { scale, offset } = conversion(tag, this.attribute(sourceName, 'units'));

    let base: number;
    if (dims.length === 3 && dims[0] === time.index && dims[1] === lat.index
        && dims[2] === lon.index) {
      base = timeIndex * nlat * nlon;
    } else if (dims.length === 4 && lev && dims[0] === time.index
        && dims[1] === lev.index && dims[2] === lat.index && dims[3] === lon.index) {
      if (level === undefined) {
        throw new IngestError(`${sourceName} has a level dimension; spec.levels['${tag}'] required`);
      }
      const li = lev.values.findIndex((x) => x === level);
      if (li < 0) {
        throw new IngestError(
          `${this.path}: level ${level} not in [${lev.values.join(', ')}] for ${sourceName}`);
      }
      base = (timeIndex * lev.values.length + li) * nlat * nlon;
    } else {
      throw new IngestError(
        `${this.path}: ${sourceName} dimensions must be (time, [level,] lat, lon)`);
    }

    let values: Float64Array = new Float64Array(nlat * nlon);
    for (let i = 0; i < values.length; i++) {
      values[i] = data[base + i] * scale + offset;
    }
    let lats: Float64Array = Float64Array.from(lat.values);
    if (nlat >= 2 && lats[0] > lats[nlat - 1]) {
      ({ lats, values } = flipLatitudes(lats, nlon, values));
    }
    return {
      tag,
      time: this.times[timeIndex],
      lats,
      lons: Float64Array.from(lon.values),
      values,
    };
  }
}

/** Decode a CF-style time axis: "<unit> since <reference>". */
export function decodeTimes(values: number[], units: string): Date[] {
  const m = /^\s*(seconds|minutes|hours|days)\s+since\s+(.+)$/i.exec(units);
  if (!m) throw new IngestError(`unsupported time units '${units}'`);
  const perUnit = { seconds: 1e3, minutes: 60e3, hours: 3600e3, days: 86400e3 }[
    m[1].toLowerCase() as 'seconds' | 'minutes' | 'hours' | 'days'
  ];
  let ref = m[2].trim().replace(' ', 'T');
  if (!/[zZ]|[+-]\d{2}:?\d{2}$/.test(ref)) ref += 'Z';
  const base = new Date(ref);
  if (Number.isNaN(+base)) throw new IngestError(`bad time reference '${m[2]}'`);
  return values.map((x) => new Date(+base + x * perUnit));
}

export { ConversionError };
