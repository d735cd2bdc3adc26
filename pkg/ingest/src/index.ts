export { buildClimatology, dayOfYear366, DOY_SLOTS, TEMPERATURE_SIGMA_FLOOR_K } from './climatology.js';
export { convertArchive, isoTime, type ManifestEntry } from './convert.js';
export { Archive, decodeTimes } from './netcdf.js';
export { IngestError, parseSpec, parseSpecFile, validateTag, type IngestSpec } from './spec.js';
export { ConversionError, conversion, variableClass } from './units.js';
export { decodeWxg, encodeWxg, flipLatitudes, readWxg, writeWxg, type GridField } from './wxg.js';
