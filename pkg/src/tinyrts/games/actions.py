"""Discrete strategic action spaces for the three games."""

from __future__ import annotations

import enum

from ..config import MAP_W, MAP_H, MINI_RTS, CTF, TD


class MiniRtsAction(enum.IntEnum):
    IDLE = 0
    BUILD_WORKER = 1
    BUILD_BARRACK = 2
    BUILD_MELEE_ATTACKER = 3
    BUILD_RANGE_ATTACKER = 4
    HIT_AND_RUN = 5
    ATTACK = 6
    ATTACK_IN_RANGE = 7
    ALL_DEFEND = 8


class CtfAction(enum.IntEnum):
    IDLE = 0
    GET_FLAG = 1
    ESCORT_FLAG = 2
    ATTACK = 3
    DEFEND = 4


# Tower Defense: actions 0..399 place a tower at that cell index
# (cell = y * 20 + x); action 400 is IDLE.
TD_IDLE = MAP_W * MAP_H

ARITY = {
    MINI_RTS: len(MiniRtsAction),
    CTF: len(CtfAction),
    TD: TD_IDLE + 1,
}


def action_arity(kind: int) -> int:
    return ARITY[kind]
