/**
 * Minimal NetCDF-3 (classic, CDF-1) encoder used to build synthetic
 * archives for the conversion tests. Fixed-size variables only (no
 * unlimited dimension); everything big-endian per the format.
 */

const NC_DIMENSION = 0x0a;
const NC_VARIABLE = 0x0b;
const NC_ATTRIBUTE = 0x0c;

const TYPE_CODES = { short: 3, int: 4, float: 5, double: 6 } as const;
const TYPE_SIZES = { short: 2, int: 4, float: 4, double: 8 } as const;

export type NcType = keyof typeof TYPE_CODES;

export interface NcVar {
  name: string;
  dims: number[]; // indices into dims list
  type: NcType;
  attrs?: Record<string, string | number>;
  data: ArrayLike<number>;
}

export interface NcSpec {
  dims: { name: string; size: number }[];
  vars: NcVar[];
}

class Writer {
  chunks: Buffer[] = [];
  length = 0;

  u32(x: number) {
    const b = Buffer.alloc(4);
    b.writeUInt32BE(x >>> 0, 0);
    this.push(b);
  }

  push(b: Buffer) {
    this.chunks.push(b);
    this.length += b.length;
  }

  name(s: string) {
    const bytes = Buffer.from(s, 'ascii');
    this.u32(bytes.length);
    this.push(bytes);
    this.pad();
  }

  pad() {
    const rem = this.length % 4;
    if (rem) this.push(Buffer.alloc(4 - rem));
  }

  values(type: NcType, data: ArrayLike<number>) {
    const size = TYPE_SIZES[type];
    const b = Buffer.alloc(data.length * size);
    for (let i = 0; i < data.length; i++) {
      const x = data[i];
      if (type === 'double') b.writeDoubleBE(x, i * size);
      else if (type === 'float') b.writeFloatBE(x, i * size);
      else if (type === 'int') b.writeInt32BE(x | 0, i * size);
      else b.writeInt16BE(x | 0, i * size);
    }
    this.push(b);
    this.pad();
  }

  attributes(attrs: Record<string, string | number> | undefined) {
    const entries = Object.entries(attrs ?? {});
    if (entries.length === 0) {
      this.u32(0); // ABSENT tag
      this.u32(0);
      return;
    }
    this.u32(NC_ATTRIBUTE);
    this.u32(entries.length);
    for (const [name, value] of entries) {
      this.name(name);
      if (typeof value === 'string') {
        const bytes = Buffer.from(value, 'ascii');
        this.u32(2); // NC_CHAR
        this.u32(bytes.length);
        this.push(bytes);
        this.pad();
      } else {
        this.u32(TYPE_CODES.double);
        this.u32(1);
        this.values('double', [value]);
      }
    }
  }
}

export function encodeNetcdf3(spec: NcSpec): Buffer {
  const w = new Writer();
  w.push(Buffer.from('CDF\x01', 'latin1'));
  w.u32(0); // numrecs: no record variables

  w.u32(NC_DIMENSION);
  w.u32(spec.dims.length);
  for (const d of spec.dims) {
    w.name(d.name);
    w.u32(d.size);
  }

  w.attributes(undefined); // no global attributes

  // variable sizes and data offsets follow the header, in declaration order
  const sizes = spec.vars.map((v) => {
    const n = v.dims.reduce((acc, di) => acc * spec.dims[di].size, 1);
    if (n !== v.data.length) {
      throw new Error(`variable ${v.name}: data length ${v.data.length} != ${n}`);
    }
    const raw = n * TYPE_SIZES[v.type];
    return raw + ((4 - (raw % 4)) % 4);
  });

  // measure the header by writing the variable list against a dry offset,
  // then rewrite with real offsets (two-pass, offsets are u32 in CDF-1)
  const writeVarList = (writer: Writer, begins: number[]) => {
    writer.u32(NC_VARIABLE);
    writer.u32(spec.vars.length);
    spec.vars.forEach((v, i) => {
      writer.name(v.name);
      writer.u32(v.dims.length);
      for (const di of v.dims) writer.u32(di);
      writer.attributes(v.attrs);
      writer.u32(TYPE_CODES[v.type]);
      writer.u32(sizes[i]);
      writer.u32(begins[i]);
    });
  };

  const probe = new Writer();
  writeVarList(probe, spec.vars.map(() => 0));
  const headerSize = w.length + probe.length;
  const begins: number[] = [];
  let offset = headerSize;
  for (const s of sizes) {
    begins.push(offset);
    offset += s;
  }
  writeVarList(w, begins);
  for (const v of spec.vars) w.values(v.type, v.data);
  return Buffer.concat(w.chunks);
}
