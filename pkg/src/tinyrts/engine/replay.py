"""Replay logs: record per-tick command streams + hashes, replay and
verify them, with optional embedded snapshots at arbitrary ticks."""

from __future__ import annotations

import struct

from ..config import GameSpec, GAME_NAMES
from .state import GameState, state_hash
from .step import step
from . import serialize
from .serialize import (file_header, check_header, _frame, _records,
                        pack_command, unpack_command, COMMAND_SIZE,
                        DecodeError)

REC_META = 10      # game kind + seed
REC_TICK = 11      # tick index, per-player commands, post-step hash
REC_SNAPSHOT = 12  # embedded state snapshot
REC_END = 13       # final hash


class ReplayMismatchError(Exception):
    def __init__(self, tick, expected, actual):
        super().__init__(f"replay diverged at tick {tick}: "
                         f"recorded {expected:#x}, got {actual:#x}")
        self.tick = tick
        self.expected = expected
        self.actual = actual


class ReplayLog:
    """Recorded game: initial seed/config, per-tick issued commands, and
    the state hash after every recorded tick."""

    def __init__(self, spec: GameSpec, seed: int):
        self.spec = spec
        self.seed = seed
        self.ticks = []       # (tick, (cmds_p0, cmds_p1), post_hash)
        self.snapshots = []   # (tick, bytes)

    def record(self, tick, commands, post_hash):
        self.ticks.append((tick, (tuple(commands[0]), tuple(commands[1])), post_hash))

    def embed_snapshot(self, state: GameState):
        self.snapshots.append((state.tick, serialize.snapshot(state)))

    # -- wire format ------------------------------------------------------

    def to_bytes(self) -> bytes:
        out = [file_header(self.spec)]
        out.append(_frame(REC_META, struct.pack("<iq", self.spec.kind, self.seed)))
        for tick, (p0, p1), h in self.ticks:
            body = [struct.pack("<iIIQ", tick, len(p0), len(p1), h)]
            for c in p0:
                body.append(pack_command(c))
            for c in p1:
                body.append(pack_command(c))
            out.append(_frame(REC_TICK, b"".join(body)))
        for tick, snap in self.snapshots:
            out.append(_frame(REC_SNAPSHOT, struct.pack("<i", tick) + snap))
        if self.ticks:
            out.append(_frame(REC_END, struct.pack("<Q", self.ticks[-1][2])))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, spec: GameSpec) -> "ReplayLog":
        payload = check_header(data, spec)
        log = None
        for rtype, body in _records(payload):
            if rtype == REC_META:
                kind, seed = struct.unpack("<iq", body)
                if kind != spec.kind:
                    raise DecodeError(
                        f"log is for game {GAME_NAMES.get(kind, kind)!r}")
                log = cls(spec, seed)
            elif rtype == REC_TICK:
                if log is None:
                    raise DecodeError("tick record before meta")
                tick, n0, n1, h = struct.unpack_from("<iIIQ", body, 0)
                off = 20
                need = off + (n0 + n1) * COMMAND_SIZE
                if len(body) != need:
                    raise DecodeError(f"bad tick record length at tick {tick}")
                p0 = []
                p1 = []
                for _ in range(n0):
                    p0.append(unpack_command(body, off))
                    off += COMMAND_SIZE
                for _ in range(n1):
                    p1.append(unpack_command(body, off))
                    off += COMMAND_SIZE
                log.ticks.append((tick, (tuple(p0), tuple(p1)), h))
            elif rtype == REC_SNAPSHOT:
                (tick,) = struct.unpack_from("<i", body, 0)
                log.snapshots.append((tick, body[4:]))
            elif rtype == REC_END:
                pass
            else:
                raise DecodeError(f"unknown record type {rtype}")
        if log is None:
            raise DecodeError("missing meta record")
        return log


def replay(log: ReplayLog, verify: bool = True) -> GameState:
    """Re-run a log from its seed.  With verify=True, every recorded tick
    hash is checked and the first divergence aborts the replay."""
    from ..games.factory import new_game  # deferred: avoids an import cycle
    state = new_game(log.spec, log.seed)
    for tick, commands, recorded in log.ticks:
        step(state, commands)
        if verify:
            actual = state_hash(state)
            if actual != recorded:
                raise ReplayMismatchError(tick, recorded, actual)
    return state
