"""Foreign-consumer boundary: drive a Context over stdio.

Frames on both directions are `u32le length` followed by the payload.
A payload is one opcode byte, a u32le JSON-header length, the UTF-8 JSON
header, then any raw buffer bytes (always little-endian).  docs/abi.md
documents the protocol field by field.

Run with: python3 -m tinyrts.serve
"""

from __future__ import annotations

import json
import struct
import sys

import numpy as np

from .config import ConfigError, load_spec
from .context import (BanditAdapter, Context, ContextConfig, ContextStopped,
                      CountingAdapter, KeySpec, RtsAdapter)
from .games.ai import RULE_AIS

# client -> server opcodes
OP_INIT = 0x01
OP_START = 0x02
OP_WAIT = 0x03
OP_STEPS = 0x04
OP_STOP = 0x05

# server -> client opcodes
OP_OK = 0x80
OP_ERR = 0x81
OP_BATCH = 0x82

_U32 = struct.Struct("<I")


def _read_exact(stream, n):
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise EOFError("peer closed the stream")
        buf += chunk
    return buf


def read_frame(stream):
    """Returns (opcode, header_dict, raw_bytes)."""
    (length,) = _U32.unpack(_read_exact(stream, 4))
    payload = _read_exact(stream, length)
    op = payload[0]
    (hlen,) = _U32.unpack_from(payload, 1)
    header = json.loads(payload[5:5 + hlen].decode("utf-8"))
    return op, header, payload[5 + hlen:]


def write_frame(stream, op, header, raw=b""):
    hj = json.dumps(header, separators=(",", ":")).encode("utf-8")
    payload = bytes([op]) + _U32.pack(len(hj)) + hj + raw
    stream.write(_U32.pack(len(payload)) + payload)
    stream.flush()


def _make_factory(header):
    kind = header.get("adapter", "counting")
    if kind == "counting":
        length = int(header.get("length", 10))
        return lambda g: CountingAdapter(length=length)
    if kind == "bandit":
        return lambda g: BanditAdapter()
    if kind == "rts":
        spec = load_spec(header.get("game", "minirts"))
        opp = header.get("opponent", "simple")
        if opp not in RULE_AIS:
            raise ConfigError(f"unknown opponent {opp!r}")
        opponent = RULE_AIS[opp]
        max_ticks = header.get("max_ticks")
        return lambda g: RtsAdapter(spec, opponent, max_ticks=max_ticks)
    raise ConfigError(f"unknown adapter kind {kind!r}")


def _parse_keys(entries, default):
    if entries is None:
        return default
    return tuple(KeySpec(e["name"], e.get("dtype", "f4"),
                         tuple(e.get("shape", ()))) for e in entries)


class Server:
    def __init__(self, rin, rout):
        self.rin = rin
        self.rout = rout
        self.ctx = None
        self.cid = None
        self.pending = None       # token -> Batch
        self.token = 0

    def run(self):
        try:
            while True:
                try:
                    op, header, raw = read_frame(self.rin)
                except EOFError:
                    break
                if not self._dispatch(op, header, raw):
                    break
        finally:
            if self.ctx is not None:
                self.ctx.stop()

    def _err(self, category, message):
        write_frame(self.rout, OP_ERR,
                    {"category": category, "message": message})

    def _dispatch(self, op, header, raw):
        try:
            if op == OP_INIT:
                self._init(header)
            elif op == OP_START:
                self.ctx.start()
                write_frame(self.rout, OP_OK, {})
            elif op == OP_WAIT:
                self._wait()
            elif op == OP_STEPS:
                self._steps(header, raw)
            elif op == OP_STOP:
                self.ctx.stop()
                write_frame(self.rout, OP_OK, {})
                return False
            else:
                self._err("usage", f"unknown opcode {op:#x}")
        except ContextStopped:
            self._err("stopped", "context stopped")
            return False
        except (ConfigError, ValueError, KeyError) as e:
            self._err("usage", str(e))
        except Exception as e:            # pragma: no cover - defensive
            self._err("internal", f"{type(e).__name__}: {e}")
            return False
        return True

    def _init(self, header):
        input_spec = _parse_keys(header.get("input_spec"),
                                 ("s", "r", "terminal"))
        reply_spec = _parse_keys(header.get("reply_spec"), ("a",))
        cfg = ContextConfig(
            num_games=int(header["num_games"]),
            batchsize=int(header["batchsize"]),
            input_spec=input_spec,
            reply_spec=reply_spec,
            games_per_worker=int(header.get("games_per_worker", 1)),
        )
        self.ctx = Context(cfg, _make_factory(header),
                           base_seed=int(header.get("base_seed", 0)))
        self.cid = self.ctx.register_consumer(
            history=int(header.get("history", 1)))
        self.pending = {}
        write_frame(self.rout, OP_OK, {"consumer_id": self.cid})

    def _wait(self):
        batch = self.ctx.wait(self.cid)
        self.token += 1
        self.pending[self.token] = batch
        keys, raw = [], []
        for name, arr in batch.buffers.items():
            le = np.ascontiguousarray(arr).astype(
                arr.dtype.newbyteorder("<"), copy=False)
            keys.append({"name": name, "dtype": arr.dtype.str.lstrip("<=|"),
                         "shape": list(arr.shape)})
            raw.append(le.tobytes())
        reply = [{"name": name, "dtype": arr.dtype.str.lstrip("<=|"),
                  "shape": list(arr.shape)}
                 for name, arr in batch.reply.items()]
        header = {"token": self.token,
                  "game_ids": [int(g) for g in batch.game_ids],
                  "episodes": [int(e) for e in batch.episodes],
                  "keys": keys, "reply": reply}
        write_frame(self.rout, OP_BATCH, header, b"".join(raw))

    def _steps(self, header, raw):
        token = int(header["token"])
        batch = self.pending.pop(token, None)
        if batch is None:
            raise ValueError(f"unknown or already-stepped token {token}")
        off = 0
        for entry in header["reply"]:
            name = entry["name"]
            if name not in batch.reply:
                raise KeyError(f"unexpected reply key {name!r}")
            dst = batch.reply[name]
            src_dtype = np.dtype(entry.get("dtype", dst.dtype.str)
                                 ).newbyteorder("<")
            got = np.frombuffer(raw, dtype=src_dtype, count=dst.size,
                                offset=off)
            if list(entry.get("shape", dst.shape)) != list(dst.shape):
                raise ValueError(
                    f"reply key {name!r} expects shape {tuple(dst.shape)}")
            dst[:] = got.reshape(dst.shape)   # casts to the context dtype
            off += dst.size * src_dtype.itemsize
        self.ctx.steps(batch)
        write_frame(self.rout, OP_OK, {"token": token})


def main():
    Server(sys.stdin.buffer, sys.stdout.buffer).run()
    return 0


if __name__ == "__main__":
    sys.exit(main())
