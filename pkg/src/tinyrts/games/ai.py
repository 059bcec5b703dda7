"""Built-in rule AIs.

All of them are pure functions of the full GameState (rule AIs see
everything, no fog), acting only on ticks divisible by their frame skip.
"""

from __future__ import annotations

from ..config import (WORKER, BARRACKS, MELEE_ATTACKER, RANGE_ATTACKER,
                      RESOURCE)
from ..engine.state import Command, IDLE, GATHER, BUILD_STRUCT
from .actions import MiniRtsAction as A, CtfAction as C
from .strategic import execute_strategic

N_GATHERERS = 3
SIMPLE_ARMY = 4     # melee attackers before the all-in attack
HIT_N_RUN_ARMY = 2  # range attackers before harassing


def _gather_idle_workers(state, player):
    """Send idle workers (up to the gatherer quota) to the nearest patch."""
    cmds = []
    gathering = 0
    idle = []
    for u in state.units.values():
        if u.player == player and u.utype == WORKER:
            if u.cmd == GATHER:
                gathering += 1
            elif u.cmd == IDLE:
                idle.append(u)
    for u in idle:
        if gathering >= N_GATHERERS:
            break
        best = None
        best_d2 = 1e18
        for v in state.units.values():
            if v.utype == RESOURCE:
                d2 = (v.x - u.x) ** 2 + (v.y - u.y) ** 2
                if d2 < best_d2:
                    best = v
                    best_d2 = d2
        if best is None:
            break
        cmds.append(Command(u.id, GATHER, tid=best.id))
        gathering += 1
    return cmds


def _economy(state, player, troop_action):
    """Shared macro script: 3 gatherers, one barracks, then troops."""
    cmds = _gather_idle_workers(state, player)
    workers = barracks = building = 0
    for u in state.units.values():
        if u.player != player:
            continue
        if u.utype == WORKER:
            workers += 1
            if u.cmd == BUILD_STRUCT:
                building += 1
        elif u.utype == BARRACKS:
            barracks += 1
    if workers < N_GATHERERS:
        cmds += execute_strategic(state, player, A.BUILD_WORKER)
    elif barracks == 0:
        if building == 0:
            cmds += execute_strategic(state, player, A.BUILD_BARRACK)
    else:
        cmds += execute_strategic(state, player, troop_action)
    return cmds


def _base_threatened(state, player):
    """An enemy combat unit inside the defend radius of our base."""
    base = state.units.get(state.base_ids[player])
    if base is None:
        return False
    return any(u.player == (player ^ 1)
               and u.utype in (MELEE_ATTACKER, RANGE_ATTACKER)
               and (u.x - base.x) ** 2 + (u.y - base.y) ** 2 <= 64.0
               for u in state.units.values())


def simple_ai(state, player) -> list:
    """Builds 3 gathering workers, a barracks, then melee attackers; with
    SIMPLE_ARMY melee attackers alive, everyone attacks the opponent's
    base.  Intruders near the base pre-empt the push: the army defends."""
    if state.tick % state.spec.frame_skip != 0:
        return []
    cmds = _economy(state, player, A.BUILD_MELEE_ATTACKER)
    melee = sum(1 for u in state.units.values()
                if u.player == player and u.utype == MELEE_ATTACKER)
    if _base_threatened(state, player):
        cmds += execute_strategic(state, player, A.ALL_DEFEND)
    elif melee >= SIMPLE_ARMY:
        cmds += execute_strategic(state, player, A.ATTACK)
    return cmds


def hit_n_run_ai(state, player) -> list:
    """Same economy, but range attackers that kite: with 2 alive they
    advance on the enemy base, retreating whenever their cooldown is hot."""
    if state.tick % state.spec.frame_skip != 0:
        return []
    cmds = _economy(state, player, A.BUILD_RANGE_ATTACKER)
    rng = sum(1 for u in state.units.values()
              if u.player == player and u.utype == RANGE_ATTACKER)
    if _base_threatened(state, player):
        cmds += execute_strategic(state, player, A.ALL_DEFEND)
    elif rng >= HIT_N_RUN_ARMY:
        cmds += execute_strategic(state, player, A.HIT_AND_RUN)
    return cmds


def ctf_ai(state, player) -> list:
    """Flag free: everyone chases it.  Own carrier: escort home, the rest
    screen nearby attackers.  Enemy carrier: everyone attacks the carrier."""
    if state.tick % state.spec.frame_skip != 0:
        return []
    carrier = state.units.get(state.flag_carrier)
    if carrier is None:
        return execute_strategic(state, player, C.GET_FLAG)
    if carrier.player == player:
        return (execute_strategic(state, player, C.ESCORT_FLAG)
                + execute_strategic(state, player, C.DEFEND))
    return execute_strategic(state, player, C.ATTACK)


RULE_AIS = {"simple": simple_ai, "hitnrun": hit_n_run_ai, "ctf": ctf_ai}
