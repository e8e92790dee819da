/**
 * MATLAB v5/v7 (.mat) reader covering the subset dataset ground-truth
 * files use: little-endian files, zlib-compressed elements, cell
 * arrays, struct arrays, and 2-D numeric/logical matrices. Sparse,
 * complex, objects and big-endian files are out of scope and raise.
 */

import { inflateSync } from "node:zlib";

const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT16 = 3;
const MI_UINT16 = 4;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_INT64 = 12;
const MI_UINT64 = 13;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;
const MI_UTF8 = 16;

const MX_CELL = 1;
const MX_STRUCT = 2;
const MX_CHAR = 4;

export interface MatNumeric {
  kind: "numeric";
  name: string;
  dims: number[];
  logical: boolean;
  /** column-major, widened to doubles */
  data: Float64Array;
}

export interface MatCell {
  kind: "cell";
  name: string;
  dims: number[];
  cells: MatValue[];
}

export interface MatStruct {
  kind: "struct";
  name: string;
  dims: number[];
  /** field -> one value per struct-array element (column-major) */
  fields: Record<string, MatValue[]>;
}

export interface MatChar {
  kind: "char";
  name: string;
  dims: number[];
  text: string;
}

export type MatValue = MatNumeric | MatCell | MatStruct | MatChar;

interface Tag {
  type: number;
  size: number;
  dataStart: number;
  next: number;
}

function readTag(buf: Buffer, pos: number): Tag {
  const first = buf.readUInt32LE(pos);
  if (first >>> 16) {
    // small element: size in the high 16 bits, data inside the tag
    return { type: first & 0xffff, size: first >>> 16, dataStart: pos + 4, next: pos + 8 };
  }
  const size = buf.readUInt32LE(pos + 4);
  const dataStart = pos + 8;
  let next = dataStart + size;
  if (next % 8) next += 8 - (next % 8);
  return { type: first, size, dataStart, next };
}

function readNumericPayload(buf: Buffer, tag: Tag): Float64Array {
  const view = buf.subarray(tag.dataStart, tag.dataStart + tag.size);
  const out = (n: number) => new Float64Array(n);
  switch (tag.type) {
    case MI_INT8: {
      const arr = out(tag.size);
      for (let i = 0; i < tag.size; i++) arr[i] = view.readInt8(i);
      return arr;
    }
    case MI_UINT8:
    case MI_UTF8: {
      const arr = out(tag.size);
      for (let i = 0; i < tag.size; i++) arr[i] = view[i];
      return arr;
    }
    case MI_INT16: {
      const arr = out(tag.size / 2);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readInt16LE(2 * i);
      return arr;
    }
    case MI_UINT16: {
      const arr = out(tag.size / 2);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readUInt16LE(2 * i);
      return arr;
    }
    case MI_INT32: {
      const arr = out(tag.size / 4);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readInt32LE(4 * i);
      return arr;
    }
    case MI_UINT32: {
      const arr = out(tag.size / 4);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readUInt32LE(4 * i);
      return arr;
    }
    case MI_SINGLE: {
      const arr = out(tag.size / 4);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readFloatLE(4 * i);
      return arr;
    }
    case MI_DOUBLE: {
      const arr = out(tag.size / 8);
      for (let i = 0; i < arr.length; i++) arr[i] = view.readDoubleLE(8 * i);
      return arr;
    }
    case MI_INT64: {
      const arr = out(tag.size / 8);
      for (let i = 0; i < arr.length; i++) arr[i] = Number(view.readBigInt64LE(8 * i));
      return arr;
    }
    case MI_UINT64: {
      const arr = out(tag.size / 8);
      for (let i = 0; i < arr.length; i++) arr[i] = Number(view.readBigUInt64LE(8 * i));
      return arr;
    }
    default:
      throw new Error(`unsupported mi data type ${tag.type}`);
  }
}

function parseMatrix(buf: Buffer, pos: number, end: number): MatValue {
  // array flags
  const flagsTag = readTag(buf, pos);
  if (flagsTag.type !== MI_UINT32) throw new Error("expected array-flags subelement");
  const flagsWord = buf.readUInt32LE(flagsTag.dataStart);
  const klass = flagsWord & 0xff;
  const logical = ((flagsWord >>> 8) & 0x02) !== 0;
  if (((flagsWord >>> 8) & 0x08) !== 0) throw new Error("complex matrices unsupported");
  pos = flagsTag.next;

  const dimsTag = readTag(buf, pos);
  const dims = Array.from(readNumericPayload(buf, dimsTag), Number);
  pos = dimsTag.next;

  const nameTag = readTag(buf, pos);
  const name = buf
    .subarray(nameTag.dataStart, nameTag.dataStart + nameTag.size)
    .toString("latin1");
  pos = nameTag.next;

  const count = dims.reduce((a, b) => a * b, 1);

  if (klass === MX_CELL) {
    const cells: MatValue[] = [];
    for (let i = 0; i < count; i++) {
      const cellTag = readTag(buf, pos);
      if (cellTag.type !== MI_MATRIX) throw new Error("cell entry is not a matrix");
      cells.push(parseMatrix(buf, cellTag.dataStart, cellTag.next));
      pos = cellTag.next;
    }
    return { kind: "cell", name, dims, cells };
  }

  if (klass === MX_STRUCT) {
    const lenTag = readTag(buf, pos);
    const fieldNameLength = buf.readInt32LE(lenTag.dataStart);
    pos = lenTag.next;
    const namesTag = readTag(buf, pos);
    const nFields = namesTag.size / fieldNameLength;
    const fieldNames: string[] = [];
    for (let i = 0; i < nFields; i++) {
      const raw = buf.subarray(
        namesTag.dataStart + i * fieldNameLength,
        namesTag.dataStart + (i + 1) * fieldNameLength,
      );
      const zero = raw.indexOf(0);
      fieldNames.push(raw.subarray(0, zero < 0 ? raw.length : zero).toString("latin1"));
    }
    pos = namesTag.next;
    const fields: Record<string, MatValue[]> = {};
    for (const fieldName of fieldNames) fields[fieldName] = [];
    for (let element = 0; element < count; element++) {
      for (const fieldName of fieldNames) {
        const fieldTag = readTag(buf, pos);
        if (fieldTag.type !== MI_MATRIX) throw new Error("struct field is not a matrix");
        fields[fieldName].push(parseMatrix(buf, fieldTag.dataStart, fieldTag.next));
        pos = fieldTag.next;
      }
    }
    return { kind: "struct", name, dims, fields };
  }

  if (klass === MX_CHAR) {
    const dataTag = readTag(buf, pos);
    const data = readNumericPayload(buf, dataTag);
    const text = Array.from(data, (c) => String.fromCharCode(Number(c))).join("");
    return { kind: "char", name, dims, text };
  }

  if (klass >= 6 && klass <= 13) {
    const dataTag = readTag(buf, pos);
    const data = readNumericPayload(buf, dataTag);
    if (data.length !== count) {
      throw new Error(`matrix ${name || "?"}: ${data.length} values for dims ${dims}`);
    }
    return { kind: "numeric", name, dims, logical, data };
  }

  throw new Error(`unsupported matrix class ${klass}`);
}

/** Parse all top-level variables of a .mat buffer. */
export function parseMat(buf: Buffer): MatValue[] {
  if (buf.length < 128) throw new Error("file too short for a v5 .mat header");
  const endian = buf.subarray(126, 128).toString("latin1");
  if (endian !== "IM") {
    throw new Error(`unsupported .mat endianness/version marker ${JSON.stringify(endian)}`);
  }
  const values: MatValue[] = [];
  let pos = 128;
  while (pos + 8 <= buf.length) {
    const tag = readTag(buf, pos);
    if (tag.type === MI_COMPRESSED) {
      const inner = inflateSync(buf.subarray(tag.dataStart, tag.dataStart + tag.size));
      const innerTag = readTag(inner, 0);
      if (innerTag.type === MI_MATRIX) {
        values.push(parseMatrix(inner, innerTag.dataStart, innerTag.next));
      }
    } else if (tag.type === MI_MATRIX) {
      values.push(parseMatrix(buf, tag.dataStart, tag.next));
    }
    // other top-level element types are skipped
    pos = tag.next;
  }
  return values;
}

/** Column-major matrix data to a row-major 0/1 mask. */
export function toRowMajorBinary(value: MatNumeric): {
  height: number;
  width: number;
  pixels: Uint8Array;
} {
  if (value.dims.length !== 2) throw new Error(`expected a 2-D matrix, got dims ${value.dims}`);
  const [height, width] = value.dims;
  const pixels = new Uint8Array(height * width);
  for (let c = 0; c < width; c++) {
    for (let r = 0; r < height; r++) {
      pixels[r * width + c] = value.data[c * height + r] !== 0 ? 1 : 0;
    }
  }
  return { height, width, pixels };
}
