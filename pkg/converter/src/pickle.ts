/**
 * Minimal pickle virtual machine: just enough of protocols 0-5 to load the
 * published RadioML archives, i.e. a dict mapping (modulation, snr) tuples
 * to numpy float arrays. Handles both Python 2 pickles (str keys arrive as
 * bytes) and Python 3 / numpy >= 1.x pickles (including the
 * numpy._core module rename and the _codecs.encode byte-string detour).
 */

export class PickleError extends Error {}

export class Tuple {
  constructor(public items: unknown[]) {}
}

/** Insertion-ordered dict; tuple keys make JS Map identity useless. */
export class PDict {
  entries: Array<[unknown, unknown]> = [];

  set(key: unknown, value: unknown): void {
    this.entries.push([key, value]);
  }
}

export class GlobalRef {
  constructor(public module: string, public name: string) {}

  get qualified(): string {
    return `${this.module}.${this.name}`;
  }
}

export class NDArray {
  shape: number[] = [];
  dtype = "";
  fortran = false;
  data: Uint8Array = new Uint8Array(0);
}

class DTypeStub {
  constructor(public descr: string, public byteorder = "=") {}

  get full(): string {
    return this.byteorder + this.descr;
  }
}

const utf8 = new TextDecoder("utf-8", { fatal: true });
const latin1 = new TextDecoder("latin1");

const RECONSTRUCT = new Set([
  "numpy.core.multiarray._reconstruct",
  "numpy._core.multiarray._reconstruct",
]);
const NDARRAY_CLS = new Set(["numpy.ndarray", "numpy._core.multiarray.ndarray"]);
const DTYPE_CLS = new Set(["numpy.dtype", "numpy._core.multiarray.dtype"]);

export function loads(buf: Uint8Array): unknown {
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  let pos = 0;
  const stack: unknown[] = [];
  const marks: number[] = [];
  const memo: unknown[] = [];

  const need = (n: number) => {
    if (pos + n > buf.length) {
      throw new PickleError(`truncated pickle at offset ${pos} (need ${n} bytes)`);
    }
  };
  const u8 = () => { need(1); return buf[pos++]; };
  const u16 = () => { need(2); const v = view.getUint16(pos, true); pos += 2; return v; };
  const i32 = () => { need(4); const v = view.getInt32(pos, true); pos += 4; return v; };
  const u32 = () => { need(4); const v = view.getUint32(pos, true); pos += 4; return v; };
  const f64be = () => { need(8); const v = view.getFloat64(pos, false); pos += 8; return v; };
  const bytes = (n: number) => { need(n); const v = buf.subarray(pos, pos + n); pos += n; return v; };
  const line = () => {
    const end = buf.indexOf(0x0a, pos);
    if (end < 0) throw new PickleError("unterminated text line");
    const text = latin1.decode(buf.subarray(pos, end));
    pos = end + 1;
    return text;
  };
  const popMark = () => {
    if (!marks.length) throw new PickleError("stack mark underflow");
    return stack.splice(marks.pop() as number);
  };
  const pop = () => {
    if (!stack.length) throw new PickleError("stack underflow");
    return stack.pop();
  };
  const memoPut = (index: number) => { memo[index] = stack[stack.length - 1]; };

  for (;;) {
    const op = u8();
    switch (op) {
      case 0x80: u8(); break;                      // PROTO
      case 0x95: bytes(8); break;                  // FRAME
      case 0x2e: {                                 // STOP
        return pop();
      }
      case 0x28: marks.push(stack.length); break;  // MARK
      case 0x30: pop(); break;                     // POP
      case 0x32: stack.push(stack[stack.length - 1]); break; // DUP

      case 0x4e: stack.push(null); break;          // NONE
      case 0x88: stack.push(true); break;          // NEWTRUE
      case 0x89: stack.push(false); break;         // NEWFALSE

      case 0x4a: stack.push(i32()); break;         // BININT
      case 0x4b: stack.push(u8()); break;          // BININT1
      case 0x4d: stack.push(u16()); break;         // BININT2
      case 0x49: {                                 // INT (text)
        const text = line();
        stack.push(text === "01" ? true : text === "00" ? false : parseInt(text, 10));
        break;
      }
      case 0x8a: {                                 // LONG1
        const n = u8();
        stack.push(readLong(bytes(n)));
        break;
      }
      case 0x8b: {                                 // LONG4
        const n = u32();
        stack.push(readLong(bytes(n)));
        break;
      }
      case 0x47: stack.push(f64be()); break;       // BINFLOAT

      case 0x54: stack.push(new Uint8Array(bytes(u32()))); break; // BINSTRING (py2 str)
      case 0x55: stack.push(new Uint8Array(bytes(u8()))); break;  // SHORT_BINSTRING
      case 0x42: stack.push(new Uint8Array(bytes(u32()))); break; // BINBYTES
      case 0x43: stack.push(new Uint8Array(bytes(u8()))); break;  // SHORT_BINBYTES
      case 0x8e: {                                 // BINBYTES8
        const n = Number(view.getBigUint64(pos, true)); pos += 8;
        stack.push(new Uint8Array(bytes(n)));
        break;
      }
      case 0x58: stack.push(utf8.decode(bytes(u32()))); break;    // BINUNICODE
      case 0x8c: stack.push(utf8.decode(bytes(u8()))); break;     // SHORT_BINUNICODE
      case 0x8d: {                                 // BINUNICODE8
        const n = Number(view.getBigUint64(pos, true)); pos += 8;
        stack.push(utf8.decode(bytes(n)));
        break;
      }

      case 0x29: stack.push(new Tuple([])); break; // EMPTY_TUPLE
      case 0x74: stack.push(new Tuple(popMark())); break; // TUPLE
      case 0x85: stack.push(new Tuple([pop()])); break;   // TUPLE1
      case 0x86: {                                 // TUPLE2
        const b = pop(); const a = pop();
        stack.push(new Tuple([a, b]));
        break;
      }
      case 0x87: {                                 // TUPLE3
        const c = pop(); const b = pop(); const a = pop();
        stack.push(new Tuple([a, b, c]));
        break;
      }

      case 0x5d: stack.push([]); break;            // EMPTY_LIST
      case 0x6c: stack.push(popMark()); break;     // LIST
      case 0x61: {                                 // APPEND
        const v = pop();
        (stack[stack.length - 1] as unknown[]).push(v);
        break;
      }
      case 0x65: {                                 // APPENDS
        const items = popMark();
        (stack[stack.length - 1] as unknown[]).push(...items);
        break;
      }

      case 0x7d: stack.push(new PDict()); break;   // EMPTY_DICT
      case 0x64: {                                 // DICT
        const items = popMark();
        const d = new PDict();
        for (let i = 0; i + 1 < items.length; i += 2) d.set(items[i], items[i + 1]);
        stack.push(d);
        break;
      }
      case 0x73: {                                 // SETITEM
        const v = pop(); const k = pop();
        (stack[stack.length - 1] as PDict).set(k, v);
        break;
      }
      case 0x75: {                                 // SETITEMS
        const items = popMark();
        const d = stack[stack.length - 1] as PDict;
        for (let i = 0; i + 1 < items.length; i += 2) d.set(items[i], items[i + 1]);
        break;
      }

      case 0x71: memoPut(u8()); break;             // BINPUT
      case 0x72: memoPut(u32()); break;            // LONG_BINPUT
      case 0x94: memoPut(memo.length); break;      // MEMOIZE
      case 0x68: stack.push(memo[u8()]); break;    // BINGET
      case 0x6a: stack.push(memo[u32()]); break;   // LONG_BINGET

      case 0x63: {                                 // GLOBAL
        const module = line();
        const name = line();
        stack.push(new GlobalRef(module, name));
        break;
      }
      case 0x93: {                                 // STACK_GLOBAL
        const name = pop(); const module = pop();
        stack.push(new GlobalRef(String(module), String(name)));
        break;
      }

      case 0x52: {                                 // REDUCE
        const args = pop() as Tuple;
        const callee = pop();
        stack.push(applyCallable(callee, args));
        break;
      }
      case 0x81: {                                 // NEWOBJ
        const args = pop() as Tuple;
        const cls = pop();
        stack.push(applyCallable(cls, args));
        break;
      }
      case 0x62: {                                 // BUILD
        const state = pop();
        const obj = stack[stack.length - 1];
        applyState(obj, state);
        break;
      }

      default:
        throw new PickleError(
          `unsupported pickle opcode 0x${op.toString(16)} at offset ${pos - 1}`
        );
    }
  }
}

function readLong(raw: Uint8Array): number {
  let value = 0n;
  for (let i = raw.length - 1; i >= 0; i--) value = (value << 8n) | BigInt(raw[i]);
  if (raw.length && raw[raw.length - 1] & 0x80) value -= 1n << BigInt(8 * raw.length);
  const n = Number(value);
  if (!Number.isSafeInteger(n)) throw new PickleError(`integer too large: ${value}`);
  return n;
}

/** py2 str arrives as bytes; dtype descriptors and codec names need text. */
function asText(v: unknown): string {
  return v instanceof Uint8Array ? latin1.decode(v) : String(v);
}

function applyCallable(callee: unknown, args: Tuple): unknown {
  if (!(callee instanceof GlobalRef)) {
    throw new PickleError("REDUCE on a non-global callable");
  }
  const q = callee.qualified;
  if (RECONSTRUCT.has(q)) {
    const cls = args.items[0];
    if (!(cls instanceof GlobalRef) || !NDARRAY_CLS.has(cls.qualified)) {
      throw new PickleError(`_reconstruct of unsupported class ${String(cls)}`);
    }
    return new NDArray();
  }
  if (DTYPE_CLS.has(q)) {
    return new DTypeStub(asText(args.items[0]));
  }
  if (q === "_codecs.encode") {
    const [text, codec] = args.items as [string, string];
    if (codec !== "latin1" && codec !== "latin-1") {
      throw new PickleError(`unsupported byte codec ${codec}`);
    }
    const out = new Uint8Array(text.length);
    for (let i = 0; i < text.length; i++) out[i] = text.charCodeAt(i) & 0xff;
    return out;
  }
  throw new PickleError(`unsupported callable ${q}`);
}

function applyState(obj: unknown, state: unknown): void {
  if (obj instanceof NDArray) {
    const s = (state as Tuple).items;
    // ndarray.__setstate__: (version, shape, dtype, is_fortran, raw_data)
    const [, shape, dtype, fortran, data] = s.length === 5 ? s : [0, ...s];
    obj.shape = (shape as Tuple).items.map(Number);
    if (!(dtype instanceof DTypeStub)) {
      throw new PickleError("ndarray state without a dtype");
    }
    obj.dtype = dtype.full;
    obj.fortran = Boolean(fortran);
    if (!(data instanceof Uint8Array)) {
      throw new PickleError("ndarray state with non-bytes payload");
    }
    obj.data = data;
    return;
  }
  if (obj instanceof DTypeStub) {
    const s = (state as Tuple).items;
    obj.byteorder = asText(s[1] ?? "=");
    return;
  }
  throw new PickleError(`BUILD on unsupported object ${String(obj)}`);
}
