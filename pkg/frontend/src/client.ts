/**
 * TypeScript consumer for the tinyrts batching context.
 *
 * Talks to `python3 -m tinyrts.serve` over stdio using the framed
 * little-endian protocol documented in docs/abi.md: every frame is a
 * u32le length followed by one opcode byte, a u32le JSON-header length,
 * the UTF-8 JSON header, and raw buffer bytes.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import type { Readable, Writable } from "node:stream";

const OP_INIT = 0x01;
const OP_START = 0x02;
const OP_WAIT = 0x03;
const OP_STEPS = 0x04;
const OP_STOP = 0x05;

const OP_OK = 0x80;
const OP_ERR = 0x81;
const OP_BATCH = 0x82;

export type Dtype = "f4" | "f8" | "i4" | "i8" | "u1" | "u8";

export type TypedBuffer =
  | Float32Array
  | Float64Array
  | Int32Array
  | BigInt64Array
  | Uint8Array
  | BigUint64Array;

export interface KeySpec {
  name: string;
  dtype?: Dtype;
  shape?: number[];
}

export interface ContextOptions {
  adapter: "counting" | "bandit" | "rts";
  numGames: number;
  batchsize: number;
  gamesPerWorker?: number;
  baseSeed?: number;
  history?: number;
  inputSpec?: KeySpec[];
  replySpec?: KeySpec[];
  /** counting adapter: episode length */
  length?: number;
  /** rts adapter */
  game?: string;
  opponent?: string;
}

export interface BufferView {
  dtype: Dtype;
  shape: number[];
  data: TypedBuffer;
}

export interface BoundBatch {
  token: number;
  gameIds: number[];
  episodes: number[];
  buffers: Map<string, BufferView>;
  /** shapes the server expects back from steps() */
  replySpec: { name: string; dtype: Dtype; shape: number[] }[];
}

export class ContextError extends Error {
  constructor(public category: string, message: string) {
    super(message);
    this.name = "ContextError";
  }
}

function viewOf(dtype: Dtype, buf: Buffer, count: number): TypedBuffer {
  const ab = buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
  switch (dtype) {
    case "f4": return new Float32Array(ab, 0, count);
    case "f8": return new Float64Array(ab, 0, count);
    case "i4": return new Int32Array(ab, 0, count);
    case "i8": return new BigInt64Array(ab, 0, count);
    case "u1": return new Uint8Array(ab, 0, count);
    case "u8": return new BigUint64Array(ab, 0, count);
  }
}

function itemSize(dtype: Dtype): number {
  return { f4: 4, f8: 8, i4: 4, i8: 8, u1: 1, u8: 8 }[dtype];
}

function dtypeOf(data: TypedBuffer): Dtype {
  if (data instanceof Float32Array) return "f4";
  if (data instanceof Float64Array) return "f8";
  if (data instanceof Int32Array) return "i4";
  if (data instanceof BigInt64Array) return "i8";
  if (data instanceof BigUint64Array) return "u8";
  return "u1";
}

/** One handle per consumer; calls must be serialized (awaited in turn). */
export class TinyRtsContext {
  private proc: ChildProcessByStdio<Writable, Readable, null>;
  private pending: Buffer[] = [];
  private pendingLen = 0;
  private waiters: {
    resolve: (f: { op: number; header: any; raw: Buffer }) => void;
    reject: (e: Error) => void;
  }[] = [];
  private closed = false;

  constructor(python: string = "python3") {
    this.proc = spawn(python, ["-m", "tinyrts.serve"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    this.proc.stdout.on("data", (chunk: Buffer) => this.onData(chunk));
    this.proc.on("close", () => {
      this.closed = true;
      for (const w of this.waiters.splice(0)) {
        w.reject(new ContextError("stopped", "server process exited"));
      }
    });
  }

  private onData(chunk: Buffer) {
    this.pending.push(chunk);
    this.pendingLen += chunk.length;
    for (;;) {
      if (this.pendingLen < 4) return;
      const all = Buffer.concat(this.pending);
      const len = all.readUInt32LE(0);
      if (all.length < 4 + len) {
        this.pending = [all];
        return;
      }
      const payload = all.subarray(4, 4 + len);
      this.pending = [all.subarray(4 + len)];
      this.pendingLen = this.pending[0].length;
      const op = payload[0];
      const hlen = payload.readUInt32LE(1);
      const header = JSON.parse(payload.subarray(5, 5 + hlen).toString("utf-8"));
      const raw = payload.subarray(5 + hlen);
      const waiter = this.waiters.shift();
      if (waiter) waiter.resolve({ op, header, raw });
    }
  }

  private send(op: number, header: unknown, raw: Buffer = Buffer.alloc(0)) {
    const hj = Buffer.from(JSON.stringify(header), "utf-8");
    const payload = Buffer.alloc(5 + hj.length + raw.length);
    payload[0] = op;
    payload.writeUInt32LE(hj.length, 1);
    hj.copy(payload, 5);
    raw.copy(payload, 5 + hj.length);
    const frame = Buffer.alloc(4 + payload.length);
    frame.writeUInt32LE(payload.length, 0);
    payload.copy(frame, 4);
    this.proc.stdin.write(frame);
  }

  private recv(): Promise<{ op: number; header: any; raw: Buffer }> {
    if (this.closed) {
      return Promise.reject(new ContextError("stopped", "server process exited"));
    }
    return new Promise((resolve, reject) => this.waiters.push({ resolve, reject }));
  }

  private async roundTrip(op: number, header: unknown, raw?: Buffer) {
    this.send(op, header, raw);
    const frame = await this.recv();
    if (frame.op === OP_ERR) {
      throw new ContextError(frame.header.category, frame.header.message);
    }
    return frame;
  }

  async init(opts: ContextOptions): Promise<void> {
    await this.roundTrip(OP_INIT, {
      adapter: opts.adapter,
      num_games: opts.numGames,
      batchsize: opts.batchsize,
      games_per_worker: opts.gamesPerWorker ?? 1,
      base_seed: opts.baseSeed ?? 0,
      history: opts.history ?? 1,
      input_spec: opts.inputSpec,
      reply_spec: opts.replySpec,
      length: opts.length,
      game: opts.game,
      opponent: opts.opponent,
    });
  }

  async start(): Promise<void> {
    await this.roundTrip(OP_START, {});
  }

  async wait(): Promise<BoundBatch> {
    const { op, header, raw } = await this.roundTrip(OP_WAIT, {});
    if (op !== OP_BATCH) {
      throw new ContextError("internal", `expected batch, got opcode ${op}`);
    }
    const buffers = new Map<string, BufferView>();
    let off = 0;
    for (const k of header.keys) {
      const count = (k.shape as number[]).reduce((a, b) => a * b, 1);
      const bytes = count * itemSize(k.dtype);
      buffers.set(k.name, {
        dtype: k.dtype,
        shape: k.shape,
        data: viewOf(k.dtype, raw.subarray(off, off + bytes), count),
      });
      off += bytes;
    }
    return {
      token: header.token,
      gameIds: header.game_ids,
      episodes: header.episodes,
      buffers,
      replySpec: header.reply,
    };
  }

  /** Deliver reply buffers for a batch; exactly once per wait(). */
  async steps(batch: BoundBatch, replies: Map<string, TypedBuffer>): Promise<void> {
    const entries: { name: string; dtype: Dtype; shape: number[] }[] = [];
    const chunks: Buffer[] = [];
    for (const spec of batch.replySpec) {
      const data = replies.get(spec.name);
      if (data === undefined) {
        throw new ContextError("usage", `missing reply key '${spec.name}'`);
      }
      // report the actual element count so mismatches are server-checked
      const want = spec.shape.reduce((a, b) => a * b, 1);
      entries.push({
        name: spec.name,
        dtype: dtypeOf(data),   // server casts to the context dtype
        shape: data.length === want ? spec.shape : [data.length],
      });
      chunks.push(Buffer.from(data.buffer, data.byteOffset, data.byteLength));
    }
    await this.roundTrip(OP_STEPS, { token: batch.token, reply: entries },
      Buffer.concat(chunks));
  }

  async stop(): Promise<void> {
    try {
      await this.roundTrip(OP_STOP, {});
    } finally {
      this.proc.stdin.end();
    }
  }

  /** Force-kill the server (cleanup for failed tests). */
  dispose(): void {
    this.proc.kill();
  }
}
