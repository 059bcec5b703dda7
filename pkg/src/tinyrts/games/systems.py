"""Per-tick game rules beyond generic unit dynamics: CTF flag handling
and Tower Defense waves/towers.  Registered with the engine so step()
stays game-agnostic."""

from __future__ import annotations

from ..config import (ATHLETE, FLAG, TOWER, TD_ENEMY, CTF, TD)
from ..engine.state import ONGOING, FOLLOW_PATH
from ..engine.step import GAME_SYSTEMS, RANGE_SLACK, find_free_cell


def _ctf_system(state):
    spec = state.spec
    units = state.units
    flag = units.get(state.extra["flag_id"])
    if flag is None:
        return
    # pickup: first athlete (lowest id) touching a free flag grabs it
    if state.flag_carrier == 0:
        for u in units.values():
            if u.utype == ATHLETE and u.hp > 0:
                dx = u.x - flag.x
                dy = u.y - flag.y
                if dx * dx + dy * dy <= 1.0:
                    state.flag_carrier = u.id
                    break
    carrier = units.get(state.flag_carrier) if state.flag_carrier else None
    if carrier is not None:
        flag.x = carrier.x
        flag.y = carrier.y
        base = units.get(state.base_ids[carrier.player])
        if base is not None:
            dx = carrier.x - base.x
            dy = carrier.y - base.y
            if dx * dx + dy * dy <= 1.4 * 1.4:
                # touchdown: score and return the flag to its home spot
                p = carrier.player
                state.score[p] += 1
                state.flag_carrier = 0
                home = state.extra["flag_home"]
                flag.x = float(home[0])
                flag.y = float(home[1])
                if state.score[p] >= spec.ctf_win_score and state.winner == ONGOING:
                    state.winner = p
    # respawns (queue of [due_tick, player, ...])
    q = state.extra.get("respawn", ())
    if q:
        remaining = []
        for i in range(0, len(q), 2):
            due, p = q[i], q[i + 1]
            if due <= state.tick:
                base = units.get(state.base_ids[p])
                if base is not None:
                    cell = find_free_cell(state, int(base.x + 0.5), int(base.y + 0.5))
                    if cell is not None:
                        state.add_unit(p, ATHLETE, cell[0], cell[1])
                        continue
                remaining.extend((due + 1, p))  # retry next tick
            else:
                remaining.extend((due, p))
        state.extra["respawn"] = remaining


def _td_system(state):
    spec = state.spec
    units = state.units
    extra = state.extra
    tick = state.tick
    # new wave every interval, sizes 2 + wave index (non-decreasing)
    if tick > 0 and tick % spec.td_wave_interval == 0 and extra["wave"] < spec.td_waves:
        extra["pending"] += spec.td_wave_base_size + extra["wave"]
        extra["wave"] += 1
    # drain pending spawns onto free corridor cells near the spawner
    if extra["pending"] > 0:
        sx, sy = extra["spawner"]
        while extra["pending"] > 0:
            cell = find_free_cell(state, sx, sy)
            if cell is None:
                break
            u = state.add_unit(1, TD_ENEMY, cell[0], cell[1])
            u.cmd = FOLLOW_PATH
            spawn_cell = (int(cell[0]), int(cell[1]))
            try:
                u.progress = state.path.index(spawn_cell) + 1
            except ValueError:
                u.progress = 0
            extra["pending"] -= 1
    # towers fire at the nearest creep in range
    path_len = len(state.path)
    stats = state.spec.stats
    for t in units.values():
        if t.utype != TOWER or t.cooldown != 0:
            continue
        st = stats[TOWER]
        rng = st.attack_range + RANGE_SLACK
        best = None
        best_d2 = rng * rng
        for e in units.values():
            if e.utype == TD_ENEMY and e.hp > 0:
                dx = e.x - t.x
                dy = e.y - t.y
                d2 = dx * dx + dy * dy
                if d2 <= best_d2:
                    if best is None or d2 < best_d2 or e.id < best.id:
                        best = e
                        best_d2 = d2
        if best is not None:
            best.hp -= st.damage
            t.cooldown = st.cooldown
    # leaks: creeps that walked the whole corridor.  The base's own
    # collision disc stops them one cell short of its center, so
    # "arrived" means touching the base, not standing on it.
    bx, by = state.path[-1]
    leaked = []
    for u in units.values():
        if u.utype != TD_ENEMY or u.cmd != FOLLOW_PATH:
            continue
        dx = u.x - bx
        dy = u.y - by
        if u.progress >= path_len or (
            u.progress >= path_len - 1 and dx * dx + dy * dy <= 2.25
        ):
            leaked.append(u)
    for u in leaked:
        del units[u.id]
        extra["leaks"] += 1
        state.score[1] += 1
    if state.winner == ONGOING:
        if extra["leaks"] >= spec.td_max_leaks:
            state.winner = 1  # the attacking side got through
        elif (extra["wave"] >= spec.td_waves and extra["pending"] == 0
              and not any(u.utype == TD_ENEMY for u in units.values())):
            state.winner = 0  # survived all waves


GAME_SYSTEMS[CTF] = _ctf_system
GAME_SYSTEMS[TD] = _td_system
