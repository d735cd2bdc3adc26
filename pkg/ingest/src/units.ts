/**
 * Canonical units per variable class: heights in m, temperatures in K,
 * winds in m/s, specific humidity in kg/kg. Conversion is chosen from the
 * source units attribute; anything unrecognized is a hard error.
 */

export class ConversionError extends Error {}

const GRAVITY = 9.80665;

type VariableClass = 'height' | 'temperature' | 'wind' | 'humidity';

export function variableClass(tag: string): VariableClass {
  if (tag.startsWith('z')) return 'height';
  if (tag.startsWith('t')) return 'temperature';
  if (tag.startsWith('u') || tag.startsWith('v')) return 'wind';
  if (tag.startsWith('q')) return 'humidity';
  throw new ConversionError(`unknown variable class for tag '${tag}'`);
}

/** Multiplier/offset mapping source units to canonical units. */
export function conversion(tag: string, sourceUnits: string): { scale: number; offset: number } {
  const cls = variableClass(tag);
  const u = sourceUnits.trim().toLowerCase();
  const identity = { scale: 1, offset: 0 };
  switch (cls) {
    case 'height':
      if (u === 'm' || u === 'meters' || u === 'metre' || u === 'metres') return identity;
      // geopotential in m^2 s^-2 converts to geopotential height
      if (u === 'm**2 s**-2' || u === 'm2 s-2' || u === 'm^2/s^2' || u === 'm2/s2') {
        return { scale: 1 / GRAVITY, offset: 0 };
      }
      break;
    case 'temperature':
      if (u === 'k' || u === 'kelvin') return identity;
      if (u === 'degc' || u === 'celsius' || u === 'c' || u === 'deg_c') {
        return { scale: 1, offset: 273.15 };
      }
      break;
    case 'wind':
      if (u === 'm s**-1' || u === 'm/s' || u === 'm s-1' || u === 'meters/second') {
        return identity;
      }
      break;
    case 'humidity':
      if (u === 'kg kg**-1' || u === 'kg/kg' || u === 'kg kg-1' || u === '1') return identity;
      if (u === 'g/kg' || u === 'g kg**-1' || u === 'g kg-1') {
        return { scale: 1e-3, offset: 0 };
      }
      break;
  }
  throw new ConversionError(`no known conversion to canonical units for ${tag} from '${sourceUnits}'`);
}

export function isTemperature(tag: string): boolean {
  return tag.startsWith('t');
}
