"""Translation of global strategic actions into unit-level commands.

Infeasible actions (not enough resources, no suitable unit) degrade to
an empty command list rather than raising.
"""

from __future__ import annotations

from ..config import (MAP_W, BASE, RESOURCE, WORKER, BARRACKS,
                      MELEE_ATTACKER, RANGE_ATTACKER, ATHLETE, TOWER,
                      TD_ENEMY, MINI_RTS, CTF, TD)
from ..engine.state import (Command, IDLE, MOVE, ATTACK, GATHER,
                            BUILD_STRUCT, PRODUCE, HIT_AND_RUN, SPAWN_UNIT)
from ..engine.step import find_free_cell
from .actions import MiniRtsAction, CtfAction, TD_IDLE, action_arity


def execute_strategic(state, player, action) -> list:
    """Expand one strategic action index into unit commands for `player`."""
    arity = action_arity(state.kind)
    if not 0 <= action < arity:
        raise ValueError(f"action {action} out of range for arity {arity}")
    if state.kind == MINI_RTS:
        return _minirts(state, player, MiniRtsAction(action))
    if state.kind == CTF:
        return _ctf(state, player, CtfAction(action))
    return _td(state, player, action)


def _units_of(state, player, utype):
    return [u for u in state.units.values() if u.player == player and u.utype == utype]


def _attackers(state, player):
    return [u for u in state.units.values()
            if u.player == player and u.utype in (MELEE_ATTACKER, RANGE_ATTACKER)]


def _nearest_enemy(state, u, radius):
    best = None
    best_d2 = radius * radius
    for v in state.units.values():
        if v.player == (u.player ^ 1):
            dx = v.x - u.x
            dy = v.y - u.y
            d2 = dx * dx + dy * dy
            if d2 <= best_d2 and (best is None or d2 < best_d2):
                best = v
                best_d2 = d2
    return best


GATHER_QUOTA = 3    # keep parity with the rule AIs' gatherer count


def _auto_gather(state, player, exclude):
    """Worker micro sits below the strategic abstraction: idle workers
    not claimed by the current action are sent to the nearest patch,
    up to the same gatherer quota the rule AIs use."""
    cmds = []
    gathering = sum(1 for u in state.units.values()
                    if u.player == player and u.utype == WORKER
                    and u.cmd == GATHER)
    for u in state.units.values():
        if (u.player != player or u.utype != WORKER or u.cmd != IDLE
                or u.id in exclude):
            continue
        if gathering >= GATHER_QUOTA:
            break
        best = None
        best_d2 = float("inf")
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


def _minirts(state, player, action):
    cmds = _minirts_action(state, player, action)
    return cmds + _auto_gather(state, player, {c.unit_id for c in cmds})


def _minirts_action(state, player, action):
    A = MiniRtsAction
    stats = state.spec.stats
    res = state.resources[player]
    if action == A.IDLE:
        return []
    if action == A.BUILD_WORKER:
        if res < stats[WORKER].cost:
            return []
        base = state.units.get(state.base_ids[player])
        if base is None or base.cmd != IDLE:
            return []
        return [Command(base.id, PRODUCE, btype=WORKER)]
    if action == A.BUILD_BARRACK:
        if res < stats[BARRACKS].cost:
            return []
        workers = [u for u in _units_of(state, player, WORKER)
                   if u.cmd in (IDLE, GATHER)]
        builder = None
        for u in workers:  # prefer an idle worker over pulling a gatherer
            if u.cmd == IDLE:
                builder = u
                break
        if builder is None and workers:
            builder = workers[0]
        if builder is None:
            return []
        # site near the builder: the walk there stays short and straight,
        # so greedy steering cannot wedge the worker behind its own base
        site = find_free_cell(
            state, int(builder.x + 0.5), int(builder.y + 0.5), clearance=2.1
        )
        if site is None:
            return []
        return [Command(builder.id, BUILD_STRUCT, tx=site[0], ty=site[1],
                        btype=BARRACKS)]
    if action in (A.BUILD_MELEE_ATTACKER, A.BUILD_RANGE_ATTACKER):
        troop = MELEE_ATTACKER if action == A.BUILD_MELEE_ATTACKER else RANGE_ATTACKER
        if res < stats[troop].cost:
            return []
        for b in _units_of(state, player, BARRACKS):
            if b.cmd == IDLE:
                return [Command(b.id, PRODUCE, btype=troop)]
        return []
    if action == A.HIT_AND_RUN:
        enemy_base = state.units.get(state.base_ids[player ^ 1])
        bx, by = (enemy_base.x, enemy_base.y) if enemy_base is not None else (0.0, 0.0)
        return [Command(u.id, HIT_AND_RUN, tx=bx, ty=by)
                for u in _units_of(state, player, RANGE_ATTACKER)]
    if action == A.ATTACK:
        enemy_base = state.units.get(state.base_ids[player ^ 1])
        if enemy_base is None:
            return []
        return [Command(u.id, ATTACK, tid=enemy_base.id)
                for u in _attackers(state, player)]
    if action == A.ATTACK_IN_RANGE:
        cmds = []
        for u in _attackers(state, player):
            t = _nearest_enemy(state, u, state.spec.stats[u.utype].sight)
            if t is not None:
                cmds.append(Command(u.id, ATTACK, tid=t.id))
        return cmds
    if action == A.ALL_DEFEND:
        base = state.units.get(state.base_ids[player])
        if base is None:
            return []
        cmds = []
        for u in _attackers(state, player):
            t = _nearest_enemy(state, base, 8.0)
            if t is not None:
                cmds.append(Command(u.id, ATTACK, tid=t.id))
            else:
                cmds.append(Command(u.id, MOVE, tx=base.x + 1.0, ty=base.y + 1.0))
        return cmds
    return []


def _ctf(state, player, action):
    A = CtfAction
    athletes = _units_of(state, player, ATHLETE)
    flag = state.units.get(state.extra.get("flag_id", 0))
    if action == A.IDLE or flag is None:
        return []
    if action == A.GET_FLAG:
        return [Command(u.id, MOVE, tx=flag.x, ty=flag.y) for u in athletes]
    if action == A.ESCORT_FLAG:
        carrier = state.units.get(state.flag_carrier)
        if carrier is None or carrier.player != player:
            return []
        base = state.units.get(state.base_ids[player])
        if base is None:
            return []
        return [Command(carrier.id, MOVE, tx=base.x, ty=base.y)]
    if action == A.ATTACK:
        carrier = state.units.get(state.flag_carrier)
        if carrier is None or carrier.player != (player ^ 1):
            return []
        return [Command(u.id, ATTACK, tid=carrier.id) for u in athletes]
    if action == A.DEFEND:
        cmds = []
        for u in athletes:
            if u.id == state.flag_carrier:
                continue
            t = _nearest_enemy(state, u, state.spec.stats[ATHLETE].sight)
            if t is not None and t.utype == ATHLETE:
                cmds.append(Command(u.id, ATTACK, tid=t.id))
        return cmds
    return []


def _td(state, player, action):
    if player != 0 or action == TD_IDLE:
        return []
    x = action % MAP_W
    y = action // MAP_W
    # economy rule: one starting tower plus one per 5 kills
    towers = sum(1 for u in state.units.values() if u.utype == TOWER)
    allowed = 1 + state.extra.get("kills", 0) // state.spec.td_kills_per_tower
    if towers >= allowed:
        return []
    if (x, y) not in state.blocked:
        return []  # towers sit on buildable ground, never on the corridor
    for u in state.units.values():
        if u.utype == TOWER and abs(u.x - x) < 1.0 and abs(u.y - y) < 1.0:
            return []
    return [Command(kind=SPAWN_UNIT, tx=float(x), ty=float(y),
                    btype=TOWER, amount=0)]
