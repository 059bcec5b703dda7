"""Versioned binary snapshot of a GameState.

Format (all little-endian; see docs/replay-format.md):
    magic "ELFR" | u16 format version | 8-byte config digest |
    length-prefixed records (u32 length + payload).

Snapshot records: one header record, one extra-scalars record, then one
record per unit.  restore(snapshot(s)) hashes equal to s.
"""

from __future__ import annotations

import struct

from ..config import GameSpec
from .state import GameState, Unit, Command

MAGIC = b"ELFR"
VERSION = 1

SNAP_HEADER = 1
SNAP_EXTRA = 2
SNAP_UNIT = 3


class DecodeError(Exception):
    """Corrupted or truncated bytes."""


class VersionError(DecodeError):
    """Format version not understood."""


class ConfigMismatchError(DecodeError):
    """File was produced under a different game configuration."""


_HEADER = struct.Struct("<iiqiiiiiiiiiii")
_UNIT = struct.Struct("<iiiddiiiiiiddiiii")
_CMDREC = struct.Struct("<iiddiiq")


def _records(payload: bytes):
    off = 0
    n = len(payload)
    while off < n:
        if off + 5 > n:
            raise DecodeError(f"truncated record header at offset {off}")
        (length,) = struct.unpack_from("<I", payload, off)
        rtype = payload[off + 4]
        off += 5
        if off + length > n:
            raise DecodeError(f"truncated record body at offset {off}")
        yield rtype, payload[off:off + length]
        off += length


def _frame(rtype: int, body: bytes) -> bytes:
    return struct.pack("<IB", len(body), rtype) + body


def check_header(data: bytes, spec: GameSpec) -> bytes:
    """Validate magic/version/config digest; returns the record payload."""
    if len(data) < 14:
        raise DecodeError("file shorter than header")
    if data[:4] != MAGIC:
        raise DecodeError("bad magic bytes")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise VersionError(f"unsupported format version {version}")
    if data[6:14] != spec.digest():
        raise ConfigMismatchError("config digest mismatch")
    return data[14:]


def file_header(spec: GameSpec) -> bytes:
    return MAGIC + struct.pack("<H", VERSION) + spec.digest()


def _pack_extra(extra: dict) -> bytes:
    parts = [struct.pack("<I", len(extra))]
    for key in sorted(extra):
        v = extra[key]
        kb = key.encode()
        parts.append(struct.pack("<B", len(kb)))
        parts.append(kb)
        if isinstance(v, list):
            parts.append(b"L" + struct.pack("<I", len(v)))
            parts.append(struct.pack(f"<{len(v)}i", *v) if v else b"")
        elif isinstance(v, float):
            parts.append(b"F" + struct.pack("<d", v))
        else:
            parts.append(b"I" + struct.pack("<q", v))
    return b"".join(parts)


def _unpack_extra(body: bytes) -> dict:
    (count,) = struct.unpack_from("<I", body, 0)
    off = 4
    extra = {}
    for _ in range(count):
        klen = body[off]
        off += 1
        key = body[off:off + klen].decode()
        off += klen
        tag = body[off:off + 1]
        off += 1
        if tag == b"L":
            (n,) = struct.unpack_from("<I", body, off)
            off += 4
            extra[key] = list(struct.unpack_from(f"<{n}i", body, off))
            off += 4 * n
        elif tag == b"F":
            (extra[key],) = struct.unpack_from("<d", body, off)
            off += 8
        else:
            (extra[key],) = struct.unpack_from("<q", body, off)
            off += 8
    return extra


def snapshot(state: GameState) -> bytes:
    out = [file_header(state.spec)]
    out.append(_frame(SNAP_HEADER, _HEADER.pack(
        state.kind, state.tick, state.seed, state.next_id,
        state.resources[0], state.resources[1],
        state.score[0], state.score[1],
        state.winner, state.dropped, state.flag_carrier,
        state.base_ids[0], state.base_ids[1], len(state.units),
    )))
    out.append(_frame(SNAP_EXTRA, _pack_extra(state.extra)))
    for uid in sorted(state.units):
        u = state.units[uid]
        out.append(_frame(SNAP_UNIT, _UNIT.pack(
            u.id, u.player, u.utype, u.x, u.y, u.hp, u.max_hp, u.cooldown,
            u.cmd, u.phase, u.progress, u.tx, u.ty, u.tid, u.btype, u.carry,
            u.detour,
        )))
    return b"".join(out)


def restore(data: bytes, spec: GameSpec) -> GameState:
    payload = check_header(data, spec)
    state = None
    expected_units = 0
    for rtype, body in _records(payload):
        if rtype == SNAP_HEADER:
            try:
                (kind, tick, seed, next_id, r0, r1, s0, s1, winner, dropped,
                 carrier, b0, b1, nunits) = _HEADER.unpack(body)
            except struct.error as e:
                raise DecodeError(f"bad header record: {e}") from e
            state = GameState(spec, seed)
            state.kind = kind
            state.tick = tick
            state.next_id = next_id
            state.resources = [r0, r1]
            state.score = [s0, s1]
            state.winner = winner
            state.dropped = dropped
            state.flag_carrier = carrier
            state.base_ids = [b0, b1]
            expected_units = nunits
        elif rtype == SNAP_EXTRA:
            if state is None:
                raise DecodeError("extra record before header")
            try:
                state.extra = _unpack_extra(body)
            except (struct.error, IndexError, UnicodeDecodeError) as e:
                raise DecodeError(f"bad extra record: {e}") from e
        elif rtype == SNAP_UNIT:
            if state is None:
                raise DecodeError("unit record before header")
            try:
                (uid, player, utype, x, y, hp, max_hp, cooldown, cmd, phase,
                 progress, tx, ty, tid, btype, carry, detour) = _UNIT.unpack(body)
            except struct.error as e:
                raise DecodeError(f"bad unit record: {e}") from e
            u = Unit(uid, player, utype, x, y, hp, max_hp)
            u.cooldown = cooldown
            u.cmd = cmd
            u.phase = phase
            u.progress = progress
            u.tx = tx
            u.ty = ty
            u.tid = tid
            u.btype = btype
            u.carry = carry
            u.detour = detour
            state.units[uid] = u
        else:
            raise DecodeError(f"unknown record type {rtype}")
    if state is None:
        raise DecodeError("missing header record")
    if len(state.units) != expected_units:
        raise DecodeError("unit count mismatch")
    # maze-derived fields are rebuilt from the spec, not stored
    from ..games.factory import attach_static  # deferred: avoids an import cycle
    attach_static(state)
    return state


def pack_command(c: Command) -> bytes:
    return _CMDREC.pack(c.unit_id, c.kind, c.tx, c.ty, c.tid, c.btype, c.amount)


def unpack_command(body: bytes, off: int = 0) -> Command:
    uid, kind, tx, ty, tid, btype, amount = _CMDREC.unpack_from(body, off)
    return Command(uid, kind, tx, ty, tid, btype, amount)


COMMAND_SIZE = _CMDREC.size
