"""Ground-truth world state: units, commands, hashing, cloning.

GameState is a single-threaded mutable object.  Determinism contract:
for a fixed seed and fixed per-tick command streams, two independent
runs produce identical state hashes at every tick.  Randomness is
consumed only at game initialization, never while stepping.
"""

from __future__ import annotations

import hashlib
import struct

from ..config import MAP_W, MAP_H

# Durative command kinds (persist across ticks on a unit).
IDLE = 0
MOVE = 1
ATTACK = 2
GATHER = 3
BUILD_STRUCT = 4   # worker walks to a site and erects a building
PRODUCE = 5        # building trains a unit
HIT_AND_RUN = 6
FOLLOW_PATH = 7    # TD creeps walking the maze

# Immediate command kinds (apply within the current tick).
APPLY_DAMAGE = 10
SPAWN_UNIT = 11
REMOVE_UNIT = 12
CHANGE_RESOURCE = 13
SET_POSITION = 14

DURATIVE_KINDS = frozenset((MOVE, ATTACK, GATHER, BUILD_STRUCT, PRODUCE, HIT_AND_RUN, FOLLOW_PATH))
IMMEDIATE_KINDS = frozenset((APPLY_DAMAGE, SPAWN_UNIT, REMOVE_UNIT, CHANGE_RESOURCE, SET_POSITION))

NEUTRAL = -1  # player index of resources / the flag


class Command:
    """A unit-level order.  Durative kinds persist on the unit until the
    goal completes; immediate kinds mutate state within the current tick."""

    __slots__ = ("unit_id", "kind", "tx", "ty", "tid", "btype", "amount")

    def __init__(self, unit_id=0, kind=IDLE, tx=0.0, ty=0.0, tid=0, btype=0, amount=0):
        self.unit_id = unit_id
        self.kind = kind
        self.tx = tx
        self.ty = ty
        self.tid = tid
        self.btype = btype
        self.amount = amount

    def __repr__(self):
        return (f"Command(unit_id={self.unit_id}, kind={self.kind}, tx={self.tx}, "
                f"ty={self.ty}, tid={self.tid}, btype={self.btype}, amount={self.amount})")

    def __eq__(self, other):
        return isinstance(other, Command) and all(
            getattr(self, s) == getattr(other, s) for s in Command.__slots__
        )


class Unit:
    __slots__ = (
        "id", "player", "utype", "x", "y", "hp", "max_hp", "cooldown",
        "cmd", "phase", "progress", "tx", "ty", "tid", "btype", "carry",
        "detour",
    )

    def __init__(self, uid, player, utype, x, y, hp, max_hp):
        self.id = uid
        self.player = player
        self.utype = utype
        self.x = x
        self.y = y
        self.hp = hp
        self.max_hp = max_hp
        self.cooldown = 0
        self.cmd = IDLE
        self.phase = 0
        self.progress = 0
        self.tx = 0.0
        self.ty = 0.0
        self.tid = 0
        self.btype = 0
        self.carry = 0
        self.detour = 0   # signed countdown of a committed sidestep direction

    def clone(self):
        u = Unit.__new__(Unit)
        u.id = self.id
        u.player = self.player
        u.utype = self.utype
        u.x = self.x
        u.y = self.y
        u.hp = self.hp
        u.max_hp = self.max_hp
        u.cooldown = self.cooldown
        u.cmd = self.cmd
        u.phase = self.phase
        u.progress = self.progress
        u.tx = self.tx
        u.ty = self.ty
        u.tid = self.tid
        u.btype = self.btype
        u.carry = self.carry
        u.detour = self.detour
        return u

    def set_idle(self):
        self.cmd = IDLE
        self.phase = 0
        self.progress = 0
        self.tid = 0
        self.btype = 0

    def __repr__(self):
        return (f"Unit(id={self.id}, p={self.player}, type={self.utype}, "
                f"pos=({self.x:.2f},{self.y:.2f}), hp={self.hp}/{self.max_hp}, cmd={self.cmd})")


ONGOING = -1
TIE = 2


class GameState:
    """Full ground-truth world.  Also the MCTS forward model (clone + step)."""

    __slots__ = (
        "kind", "spec", "tick", "units", "next_id", "resources", "score",
        "seed", "winner", "dropped", "blocked", "base_ids", "extra",
        "flag_carrier", "path",
    )

    def __init__(self, spec, seed):
        self.kind = spec.kind
        self.spec = spec
        self.tick = 0
        self.units = {}       # id -> Unit, insertion order == id order
        self.next_id = 1
        self.resources = [0, 0]
        self.score = [0, 0]
        self.seed = seed
        self.winner = ONGOING  # ONGOING / 0 / 1 / TIE
        self.dropped = 0       # malformed commands silently dropped
        self.blocked = frozenset()  # impassable cells (TD maze walls)
        self.base_ids = [0, 0]
        self.extra = {}        # game-specific scalars / int lists
        self.flag_carrier = 0  # CTF: unit id carrying the flag, 0 if none
        self.path = []         # TD: maze waypoints from spawner to base

    def add_unit(self, player, utype, x, y):
        st = self.spec.stats[utype]
        u = Unit(self.next_id, player, utype, x, y, st.hp, st.hp)
        self.units[u.id] = u
        self.next_id += 1
        return u

    def is_terminal(self):
        return self.winner != ONGOING

    def clone(self):
        s = GameState.__new__(GameState)
        s.kind = self.kind
        s.spec = self.spec          # immutable, shared
        s.tick = self.tick
        s.units = {uid: u.clone() for uid, u in self.units.items()}
        s.next_id = self.next_id
        s.resources = list(self.resources)
        s.score = list(self.score)
        s.seed = self.seed
        s.winner = self.winner
        s.dropped = self.dropped
        s.blocked = self.blocked    # frozen, shared
        s.base_ids = list(self.base_ids)
        s.extra = {k: (list(v) if isinstance(v, list) else v) for k, v in self.extra.items()}
        s.flag_carrier = self.flag_carrier
        s.path = self.path          # frozen, shared
        return s


_UNIT_PACK = struct.Struct("<iiiddiiiiiiddiiii").pack
_HEAD_PACK = struct.Struct("<iiqiiiiiiiiii").pack


def state_hash(state: GameState) -> int:
    """64-bit digest over all semantic fields, insensitive to in-memory
    ordering (units are folded in ascending id order)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(_HEAD_PACK(
        state.kind, state.tick, state.seed, state.next_id,
        state.resources[0], state.resources[1],
        state.score[0], state.score[1],
        state.winner, state.dropped, state.flag_carrier,
        state.base_ids[0], state.base_ids[1],
    ))
    for uid in sorted(state.units):
        u = state.units[uid]
        h.update(_UNIT_PACK(
            u.id, u.player, u.utype, u.x, u.y, u.hp, u.max_hp, u.cooldown,
            u.cmd, u.phase, u.progress, u.tx, u.ty, u.tid, u.btype, u.carry,
            u.detour,
        ))
    for key in sorted(state.extra):
        v = state.extra[key]
        h.update(key.encode())
        if isinstance(v, list):
            h.update(struct.pack(f"<{len(v)}i", *v) if v else b"\x00")
        elif isinstance(v, float):
            h.update(struct.pack("<d", v))
        else:
            h.update(struct.pack("<q", v))
    return int.from_bytes(h.digest(), "little")


def in_bounds(x, y):
    return 0.0 <= x <= MAP_W - 1 and 0.0 <= y <= MAP_H - 1


def cell_of(x, y):
    """Quantization rule used everywhere: cell = floor(coord + 0.5)."""
    return int(x + 0.5), int(y + 0.5)
